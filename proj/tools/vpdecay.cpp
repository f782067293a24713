#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "vpdecay/asymptotics.hpp"
#include "vpdecay/config.hpp"
#include "vpdecay/csv_io.hpp"
#include "vpdecay/diagnostics.hpp"
#include "vpdecay/pipeline.hpp"

namespace fs = std::filesystem;
using namespace vpdecay;

namespace {

struct Globals {
  std::string out_dir = ".";
  int threads = 1;
  int probe_res = 0;  // 0: keep the configured value
};

fs::path under(const Globals& g, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : fs::path(g.out_dir) / path;
}

void apply_globals(const Globals& g, PipelineConfig& cfg) {
  if (g.probe_res > 0) {
    cfg.run.field.probe_resolution = g.probe_res;
    cfg.run.field.validate();
    refresh_echo(cfg);
  }
}

PipelineConfig from_text(const Globals& g, const std::string& text) {
  PipelineConfig cfg = parse_config(text);
  apply_globals(g, cfg);
  return cfg;
}

PipelineConfig from_run_dir(const Globals& g, const fs::path& dir) {
  PipelineConfig cfg = load_config(dir / "config.resolved");
  apply_globals(g, cfg);
  return cfg;
}

std::vector<double> parse_numbers(const std::string& s, char sep) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, sep)) out.push_back(std::stod(cell));
  return out;
}

std::pair<double, double> parse_range(const std::string& s, const std::string& sep) {
  const auto at = s.find(sep);
  if (at == std::string::npos) throw std::invalid_argument("expected lo" + sep + "hi, got '" + s + "'");
  return {std::stod(s.substr(0, at)), std::stod(s.substr(at + sep.size()))};
}

void print_manifest(const RunManifest& m) {
  for (const auto& s : m.stages) {
    std::printf("%-10s %s  %zu file(s)  %.2fs\n", s.name.c_str(), s.skipped ? "skipped" : "ran    ", s.files.size(),
                s.wall_seconds);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multispecies Vlasov-Poisson decay toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--out-dir", g.out_dir, "Base directory for relative output paths");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--probe-res", g.probe_res, "Probe grid nodes per axis for sup norms")->check(CLI::Range(4, 1024));

  // construct
  auto* construct = app.add_subcommand("construct", "Sample initial data and report its spatial moments");
  int c_m = 1;
  std::string c_preset = "gegenbauer", c_res = "8,8", c_out = "particles.csv";
  construct->add_option("--m", c_m, "Decay order");
  construct->add_option("--preset", c_preset, "gegenbauer|gaussian_dipole|exact_overlap|single_species");
  construct->add_option("--resolution", c_res, "Gauss-Legendre nodes per axis nx,nv");
  construct->add_option("--out", c_out, "Particle CSV (moments.csv goes next to it)");

  // free-stream
  auto* free = app.add_subcommand("free-stream", "Oracle density and field series of free transport");
  int f_m = 1, f_count = 12, f_res = 48;
  std::string f_preset = "gegenbauer", f_times = "10..160", f_out = "oracle.csv";
  free->add_option("--m", f_m, "Decay order");
  free->add_option("--preset", f_preset, "Initial data preset");
  free->add_option("--times", f_times, "Log-spaced time range t0..t1");
  free->add_option("--count", f_count, "Number of times")->check(CLI::PositiveNumber);
  free->add_option("--res", f_res, "Oracle grid nodes per axis");
  free->add_option("--out", f_out, "Series CSV");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Construct and integrate a run");
  std::string s_config, s_out = "runs/default";
  sim->add_option("--config", s_config, "Config file")->required();
  sim->add_option("--out", s_out, "Run directory");

  // moments
  auto* mom = app.add_subcommand("moments", "Moment tables F^{alpha,ell} of a snapshot");
  std::string m_snap, m_out, m_charges = "1,-1";
  int m_ell = 0, m_vres = 24;
  double m_time = -1.0, m_vhw = 1.25, m_bw = 2.5;
  mom->add_option("--snap", m_snap, "Snapshot CSV")->required();
  mom->add_option("--ell", m_ell, "Moment order (<= 3)");
  mom->add_option("--out", m_out, "Output CSV (default F_alpha_<ell>.csv)");
  mom->add_option("--time", m_time, "Snapshot time (default: parsed from the file name)");
  mom->add_option("--charges", m_charges, "Species charges, comma separated");
  mom->add_option("--vres", m_vres, "Velocity grid nodes per axis");
  mom->add_option("--vhw", m_vhw, "Velocity grid half width");
  mom->add_option("--bandwidth", m_bw, "Kernel bandwidth in grid spacings");

  // fit-decay
  auto* fit = app.add_subcommand("fit-decay", "Power-law fit of a series column");
  std::string d_series, d_column = "sup_E", d_window = "10:160", d_out = "fit.csv";
  fit->add_option("--series", d_series, "series.csv")->required();
  fit->add_option("--column", d_column, "Column to fit");
  fit->add_option("--window", d_window, "Fit window lo:hi");
  fit->add_option("--out", d_out, "Fit CSV");

  // profile
  auto* prof = app.add_subcommand("profile", "Self-similar profile error of a run");
  std::string p_run;
  int p_ell = -1;
  prof->add_option("--run", p_run, "Run directory")->required();
  prof->add_option("--ell", p_ell, "Profile order (default: configured)");

  // scatter
  auto* scat = app.add_subcommand("scatter", "Scattering defects of a run");
  std::string x_run, x_mode = "linear";
  scat->add_option("--run", x_run, "Run directory")->required();
  scat->add_option("--mode", x_mode, "linear|modified");

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "Run all stages with checksummed, resumable outputs");
  std::string q_config, q_out = "runs/default", q_until = "scatter";
  bool q_force = false;
  pipe->add_option("--config", q_config, "Config file")->required();
  pipe->add_option("--out", q_out, "Run directory");
  pipe->add_option("--until", q_until, "Last stage to run");
  pipe->add_flag("--force", q_force, "Ignore the previous manifest");

  CLI11_PARSE(app, argc, argv);

  try {
    set_thread_count(g.threads);

    if (*construct) {
      const auto res = parse_numbers(c_res, ',');
      if (res.size() != 2) throw std::invalid_argument("--resolution: expected nx,nv");
      std::ostringstream text;
      text << "m=" << c_m << "\npreset=" << c_preset << "\nnx=" << int(res[0]) << "\nnv=" << int(res[1]) << "\n";
      const PipelineConfig cfg = from_text(g, text.str());
      const fs::path out = under(g, c_out);
      if (out.has_parent_path()) fs::create_directories(out.parent_path());
      const InitialData data = build_initial_data(cfg.initial);
      const ParticleEnsemble e = sample(data, cfg.initial.nx, cfg.initial.nv);
      write_snapshot_csv(out, Snapshot::from_g_frame(0.0, e));
      write_moments_report(out.parent_path() / "moments.csv", data, cfg.initial.m + 1);
      std::printf("%zu particles -> %s\n", particle_count(e), out.string().c_str());
    } else if (*free) {
      const auto [t0, t1] = parse_range(f_times, "..");
      std::ostringstream text;
      text << "m=" << f_m << "\npreset=" << f_preset << "\n";
      const PipelineConfig cfg = from_text(g, text.str());
      const fs::path out = under(g, f_out);
      if (out.has_parent_path()) fs::create_directories(out.parent_path());
      const TimeSeries ts =
          free_stream_series(build_initial_data(cfg.initial), log_spaced(t0, t1, f_count), f_res, cfg.run.field.theta);
      write_series_csv(out, ts);
      std::printf("%zu times -> %s\n", ts.rows().size(), out.string().c_str());
    } else if (*sim) {
      PipelineConfig cfg = load_config(s_config);
      cfg.mode = RunMode::simulate;
      refresh_echo(cfg);
      apply_globals(g, cfg);
      print_manifest(run_pipeline(cfg, under(g, s_out), {Stage::evolve, false}));
    } else if (*mom) {
      const fs::path snap(m_snap);
      const double t = m_time >= 0.0 ? m_time : snapshot_time_from_filename(snap.filename().string());
      std::vector<Species> species;
      int id = 0;
      for (double q : parse_numbers(m_charges, ',')) species.push_back({id++, q, 1.0});
      const Snapshot s = read_snapshot_csv(snap, t, species);
      const Grid3 vg = Grid3::cube(-m_vhw, m_vhw, m_vres);
      const auto tables = moment_table(s, m_ell, vg, m_bw * vg.axes[0].spacing());
      const fs::path out = under(g, m_out.empty() ? "F_alpha_" + std::to_string(m_ell) + ".csv" : m_out);
      write_moment_tables_csv(out, tables);
      std::printf("F^{alpha,%d} at t=%g -> %s\n", m_ell, t, out.string().c_str());
    } else if (*fit) {
      const auto [lo, hi] = parse_range(d_window, ":");
      const CsvTable table = read_csv(d_series);
      const DecayFit f = fit_decay(table.column("t"), table.column(d_column), lo, hi);
      const fs::path out = under(g, d_out);
      write_fit_csv(out, {{d_column, f}});
      std::printf("%s exponent = %.6f +- %.6f over [%g, %g] (%d points)\n", d_column.c_str(), f.exponent,
                  f.stderr_exponent, lo, hi, f.points);
    } else if (*prof) {
      PipelineConfig cfg = from_run_dir(g, p_run);
      if (p_ell >= 0) cfg.diagnostics.ell = p_ell;
      stage_profile(cfg, p_run);
      const CsvTable t = read_csv(fs::path(p_run) / "profile_error.csv");
      for (const auto& r : t.rows) std::printf("t=%-10g error=%.6e noise=%.3e\n", r[0], r[1], r[2]);
    } else if (*scat) {
      PipelineConfig cfg = from_run_dir(g, x_run);
      cfg.diagnostics.scatter_mode = scatter_mode_from_string(x_mode);
      stage_scatter(cfg, x_run);
      const CsvTable t = read_csv(fs::path(x_run) / "scatter.csv");
      for (const auto& r : t.rows) {
        std::printf("t1=%-8g t2=%-8g defect=%.6e noise=%.3e%s\n", r[0], r[1], r[2], r[3],
                    r[4] != 0.0 ? " (inconclusive)" : "");
      }
    } else if (*pipe) {
      PipelineConfig cfg = load_config(q_config);
      apply_globals(g, cfg);
      print_manifest(run_pipeline(cfg, under(g, q_out), {stage_from_string(q_until), q_force}));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
