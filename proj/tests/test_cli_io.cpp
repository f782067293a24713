#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "vpdecay/config.hpp"
#include "vpdecay/csv_io.hpp"
#include "vpdecay/pipeline.hpp"

namespace fs = std::filesystem;
using namespace vpdecay;

namespace {
std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return "";
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("vpdecay_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}
}  // namespace

TEST(Config, MinimalDefaults) {
  const PipelineConfig c = parse_config("m=1\n");
  EXPECT_EQ(c.initial.m, 1);
  EXPECT_EQ(c.initial.p_geg, 4.0);
  EXPECT_EQ(c.run.field.probe_resolution, 48);
  EXPECT_EQ(c.run.steps.dt0, 0.05);
  EXPECT_EQ(c.run.steps.eta, 0.05);
  EXPECT_EQ(c.diagnostics.ell, 1);
  EXPECT_GT(c.run.field.softening, 0.0);
  EXPECT_EQ(c.echo.at("initial.p_geg"), "4");
  EXPECT_EQ(c.echo.at("field.probe_resolution"), "48");
  EXPECT_EQ(c.run.output_times.size(), 12u);
}

TEST(Config, Errors) {
  EXPECT_NE(error_of("m=-1").find("m >= 0"), std::string::npos);
  const std::string unknown = error_of("m=1\n\nfoo=1\n");
  EXPECT_NE(unknown.find("unknown key foo"), std::string::npos);
  EXPECT_NE(unknown.find("line 3"), std::string::npos);
  EXPECT_NE(error_of("[run]\nt_end=abc").find("line 2"), std::string::npos);
  EXPECT_NE(error_of("[bogus]").find("unknown section"), std::string::npos);
  EXPECT_NE(error_of("[field]\ntheta=2").find("theta"), std::string::npos);
  EXPECT_NE(error_of("m=1\np_geg=2.5").find("p_geg"), std::string::npos);
}

TEST(Config, SectionsCommentsAndRoundTrip) {
  const PipelineConfig c = parse_config(
      "# comment\nm = 2  # trailing\npreset = gegenbauer\n[run]\nmode = free_stream\nt_end = 40\n"
      "output_times = 10, 20, 40\n[field]\nsoftening = 0.01\nmethod = direct\n[diagnostics]\nfit_window = 10:40\n");
  EXPECT_EQ(c.mode, RunMode::free_stream);
  EXPECT_EQ(c.run.field.method, FieldMethod::direct);
  EXPECT_EQ(c.run.field.softening, 0.01);
  EXPECT_EQ(c.diagnostics.fit_hi, 40.0);
  const PipelineConfig again = parse_config(resolved_config_text(c));
  EXPECT_EQ(again.echo, c.echo);
}

TEST(Csv, SnapshotRoundTripIsBitwise) {
  const ParticleEnsemble e = construct_ensemble(InitialDataSpec::for_order(1));
  const Snapshot s = Snapshot::from_g_frame(2.5, e);
  const fs::path d = fresh_dir("csv");
  write_snapshot_csv(d / "s.csv", s);
  const Snapshot r = read_snapshot_csv(d / "s.csv", 2.5, neutral_pair());
  ASSERT_EQ(r.ensemble().size(), 2u);
  for (std::size_t a = 0; a < 2; ++a) {
    ASSERT_EQ(r.ensemble()[a].size(), e[a].size());
    for (std::size_t j = 0; j < e[a].size(); j += 97) {
      ASSERT_EQ(r.ensemble()[a].positions()[j], e[a].positions()[j]);
      ASSERT_EQ(r.ensemble()[a].weights()[j], e[a].weights()[j]);
    }
  }
  EXPECT_EQ(snapshot_filename(13.3), "snap_t13.3.csv");
  EXPECT_EQ(snapshot_time_from_filename("snap_t13.3.csv"), 13.3);
  EXPECT_THROW(snapshot_time_from_filename("x.csv"), std::invalid_argument);
}

TEST(Csv, MalformedInputNamesLine) {
  const fs::path d = fresh_dir("bad");
  std::ofstream(d / "b.csv") << "a,b\n1,2\n3,x\n";
  try {
    read_csv(d / "b.csv");
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos);
  }
}

TEST(Checksum, Fnv1aKnownVectors) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(Pipeline, DoublingPairs) {
  const auto p = doubling_pairs({10, 20, 40, 80});
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(p[0].second, 20.0);
  EXPECT_EQ(p[2].second, 80.0);
}

TEST(Pipeline, SkipsRerunsAndDetectsCorruption) {
  const std::string text =
      "m=1\n[run]\nmode=free_stream\nt_end=80\noutput_times=10,14,20,28,40,56,80\n[field]\nprobe_resolution=12\n"
      "[diagnostics]\nfit_window=10:80\nvgrid_resolution=12\noracle_resolution=12\nscatter_probes=8\n";
  const fs::path d = fresh_dir("pipeline");
  PipelineConfig cfg = parse_config(text);
  const RunManifest first = run_pipeline(cfg, d);
  ASSERT_EQ(first.stages.size(), 6u);
  for (const auto& s : first.stages) {
    EXPECT_FALSE(s.skipped) << s.name;
    for (const auto& [f, sum] : s.files) EXPECT_EQ(hex64(fnv1a_file(d / f)), sum);
  }
  EXPECT_TRUE(fs::exists(d / "manifest.json"));
  EXPECT_EQ(read_manifest(d / "manifest.json").stages.size(), 6u);

  const RunManifest second = run_pipeline(cfg, d);
  for (const auto& s : second.stages) EXPECT_TRUE(s.skipped) << s.name;

  // new fit window: only the fit and profile stages are recomputed
  PipelineConfig narrow = parse_config(text + "fit_window=10:40\n");
  narrow.run.output_times = cfg.run.output_times;
  const RunManifest third = run_pipeline(narrow, d);
  for (const auto& s : third.stages) {
    const bool expect_run = s.name == "fit-decay" || s.name == "profile";
    EXPECT_EQ(s.skipped, !expect_run) << s.name;
  }

  // outputs are byte-identical when recomputed from scratch
  const fs::path d2 = fresh_dir("pipeline2");
  const RunManifest again = run_pipeline(cfg, d2);
  for (std::size_t k = 0; k < again.stages.size(); ++k) EXPECT_EQ(again.stages[k].files, first.stages[k].files);

  std::ofstream(d2 / "particles.csv", std::ios::app) << "0,0,0,0,0,0,0,1\n";
  try {
    run_pipeline(cfg, d2);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("particles.csv"), std::string::npos);
  }
}

TEST(Pipeline, StageFailureNamesStage) {
  const fs::path d = fresh_dir("fail");
  PipelineConfig cfg = parse_config("m=1\n[run]\nmode=free_stream\nt_end=20\noutput_times=10,20\n");
  // two output times are too few for a five point fit
  try {
    run_pipeline(cfg, d);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("fit-decay"), std::string::npos);
  }
  EXPECT_EQ(read_manifest(d / "manifest.json").stages.size(), 3u);
}

TEST(Pipeline, StageNames) {
  EXPECT_EQ(stage_from_string("simulate"), Stage::evolve);
  EXPECT_EQ(stage_from_string("fit-decay"), Stage::fit_decay);
  EXPECT_THROW(stage_from_string("x"), std::invalid_argument);
}
