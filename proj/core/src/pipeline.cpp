#include "vpdecay/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "vpdecay/asymptotics.hpp"
#include "vpdecay/csv_io.hpp"
#include "vpdecay/diagnostics.hpp"

namespace fs = std::filesystem;

namespace vpdecay {

std::string version() { return VPDECAY_VERSION; }

std::string to_string(Stage s) {
  switch (s) {
    case Stage::construct: return "construct";
    case Stage::evolve: return "evolve";
    case Stage::moments: return "moments";
    case Stage::fit_decay: return "fit-decay";
    case Stage::profile: return "profile";
    case Stage::scatter: return "scatter";
  }
  return "?";
}

Stage stage_from_string(const std::string& tag) {
  if (tag == "construct") return Stage::construct;
  if (tag == "evolve" || tag == "simulate" || tag == "free-stream" || tag == "free_stream") return Stage::evolve;
  if (tag == "moments") return Stage::moments;
  if (tag == "fit-decay" || tag == "fit_decay") return Stage::fit_decay;
  if (tag == "profile") return Stage::profile;
  if (tag == "scatter") return Stage::scatter;
  throw std::invalid_argument("unknown stage '" + tag + "'");
}

const StageRecord* RunManifest::find(const std::string& stage) const {
  for (const auto& s : stages) {
    if (s.name == stage) return &s;
  }
  return nullptr;
}

void write_manifest(const fs::path& path, const RunManifest& m) {
  nlohmann::ordered_json j;
  j["version"] = m.version;
  j["config"] = m.config;
  j["stages"] = nlohmann::ordered_json::array();
  for (const auto& s : m.stages) {
    nlohmann::ordered_json e;
    e["name"] = s.name;
    e["fingerprint"] = s.fingerprint;
    e["files"] = s.files;
    e["wall_seconds"] = s.wall_seconds;
    e["skipped"] = s.skipped;
    j["stages"].push_back(e);
  }
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << j.dump(2) << "\n";
  }
  fs::rename(tmp, path);
}

RunManifest read_manifest(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read manifest " + path.string());
  RunManifest m;
  try {
    const auto j = nlohmann::json::parse(f);
    m.version = j.at("version").get<std::string>();
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    for (const auto& e : j.at("stages")) {
      StageRecord s;
      s.name = e.at("name").get<std::string>();
      s.fingerprint = e.at("fingerprint").get<std::string>();
      s.files = e.at("files").get<std::map<std::string, std::string>>();
      s.wall_seconds = e.value("wall_seconds", 0.0);
      s.skipped = e.value("skipped", false);
      m.stages.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw std::runtime_error("malformed manifest " + path.string() + ": " + ex.what());
  }
  return m;
}

// ------------------------------------------------------------------ helpers

namespace {

std::vector<Vec3> test_centers() { return {{0.0, 0.0, 0.0}, {0.3, 0.0, 0.0}, {0.0, 0.25, -0.2}}; }
constexpr double kTestWidth = 0.4;

Grid3 velocity_grid(const DiagnosticsPlan& d) {
  return Grid3::cube(-d.vgrid_half_width, d.vgrid_half_width, d.vgrid_resolution);
}

double vgrid_bandwidth(const DiagnosticsPlan& d) { return d.kde_bandwidth * velocity_grid(d).axes[0].spacing(); }

std::string table_name(int ell, double t) {
  if (std::isinf(t)) return "F_alpha_" + std::to_string(ell) + "_inf.csv";
  char buf[64];
  std::snprintf(buf, sizeof buf, "F_alpha_%d_t%.6g.csv", ell, t);
  return buf;
}

Snapshot load_particles(const PipelineConfig& cfg, const fs::path& dir, double t) {
  const auto species = build_initial_data(cfg.initial).species;
  return read_snapshot_csv(dir / "particles.csv", t, species);
}

/// Snapshots at every output time: simulated files, or the initial nodes
/// relabeled in time for free transport (g is constant).
std::vector<Snapshot> load_snapshots(const PipelineConfig& cfg, const fs::path& dir) {
  std::vector<Snapshot> out;
  const auto times = cfg.run.resolved_output_times();
  if (cfg.mode == RunMode::free_stream) {
    const Snapshot s0 = load_particles(cfg, dir, 0.0);
    for (double t : times) out.push_back(Snapshot::from_g_frame(t, s0.ensemble()));
    return out;
  }
  const auto species = build_initial_data(cfg.initial).species;
  for (double t : times) out.push_back(read_snapshot_csv(dir / snapshot_filename(t), t, species));
  return out;
}

/// Limit rho_{ell,inf} on the velocity grid: analytic for free transport,
/// extrapolated from the moment tables otherwise.
LimitProfile limit_profile(const PipelineConfig& cfg, const std::vector<Snapshot>& snaps, int ell) {
  const Grid3 vg = velocity_grid(cfg.diagnostics);
  if (cfg.mode == RunMode::free_stream) return analytic_rho_ell(build_initial_data(cfg.initial), ell, vg);
  const double h = vgrid_bandwidth(cfg.diagnostics);
  std::vector<std::vector<MomentTable>> per_species;
  for (const auto& s : snaps) {
    auto tables = moment_table(s, ell, vg, h);
    if (per_species.empty()) per_species.resize(tables.size());
    for (std::size_t a = 0; a < tables.size(); ++a) per_species[a].push_back(std::move(tables[a]));
  }
  std::vector<MomentTable> limits;
  std::vector<double> charges;
  for (std::size_t a = 0; a < per_species.size(); ++a) {
    limits.push_back(extrapolate_limit(per_species[a]).limit);
    charges.push_back(snaps.front().ensemble()[a].species().charge);
  }
  return rho_ell(limits, charges);
}

}  // namespace

void write_moments_report(const fs::path& path, const InitialData& data, int max_order) {
  CsvTable t;
  t.header = {"b1", "b2", "b3", "value"};
  for (int k = 0; k <= max_order; ++k) {
    for (const auto& b : multi_indices_of_order(k)) {
      t.rows.push_back({double(b[0]), double(b[1]), double(b[2]), net_spatial_moment(data, b)});
    }
  }
  write_csv(path, t);
}

void write_moment_tables_csv(const fs::path& path, const std::vector<MomentTable>& tables) {
  if (tables.empty()) throw std::invalid_argument("write_moment_tables_csv: no tables");
  CsvTable t;
  t.header = {"v1", "v2", "v3"};
  for (const auto& tab : tables) t.header.push_back("value_s" + std::to_string(tab.species));
  const Grid3& g = tables.front().grid;
  for (std::size_t f = 0; f < g.size(); ++f) {
    const Vec3 v = g.node(f);
    std::vector<double> row{v[0], v[1], v[2]};
    for (const auto& tab : tables) row.push_back(tab.values[f]);
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

TimeSeries free_stream_series(const InitialData& data, const std::vector<double>& times, int n, double theta) {
  const double charge = data.net().mass();
  TimeSeries ts;
  for (double t : times) {
    TimeSeriesRow r;
    r.t = t;
    const Grid3 g = free_stream_grid(data, t, n);
    r.sup_rho = free_stream_density(data, t, g).sup_norm();
    r.sup_E = free_stream_field_sup(data, t, n, theta);
    r.t53_sup_E = std::pow(t, 5.0 / 3.0) * r.sup_E;
    double d2 = 0.0;
    for (int a = 0; a < 3; ++a) d2 += std::pow((g.axes[a].hi - g.axes[a].lo) / 1.05, 2);
    r.support_diameter = std::sqrt(d2);
    r.total_charge = charge;
    ts.append(r);
  }
  return ts;
}

void write_fit_csv(const fs::path& path, const std::vector<std::pair<std::string, DecayFit>>& fits) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << "column,t_lo,t_hi,exponent,stderr,intercept,residual_rms,points\n";
  for (const auto& [name, d] : fits) {
    f << name << ',' << format_double(d.t_lo) << ',' << format_double(d.t_hi) << ',' << format_double(d.exponent)
      << ',' << format_double(d.stderr_exponent) << ',' << format_double(d.intercept) << ','
      << format_double(d.residual_rms) << ',' << d.points << '\n';
  }
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::vector<std::pair<double, double>> doubling_pairs(const std::vector<double>& times) {
  std::vector<std::pair<double, double>> out;
  if (times.empty()) return out;
  for (double t : times) {
    if (2.0 * t > times.back() * 1.05) break;
    double best = times.front();
    for (double s : times) {
      if (std::abs(s - 2.0 * t) < std::abs(best - 2.0 * t)) best = s;
    }
    if (best > t) out.emplace_back(t, best);
  }
  return out;
}

// ------------------------------------------------------------------ stages

std::vector<std::string> stage_construct(const PipelineConfig& cfg, const fs::path& dir) {
  const InitialData data = build_initial_data(cfg.initial);
  const ParticleEnsemble e = sample(data, cfg.initial.nx, cfg.initial.nv);
  write_snapshot_csv(dir / "particles.csv", Snapshot::from_g_frame(0.0, e));
  write_moments_report(dir / "moments.csv", data, cfg.initial.m + 1);
  return {"particles.csv", "moments.csv"};
}

std::vector<std::string> stage_evolve(const PipelineConfig& cfg, const fs::path& dir) {
  const auto times = cfg.run.resolved_output_times();
  if (cfg.mode == RunMode::free_stream) {
    const TimeSeries ts = free_stream_series(build_initial_data(cfg.initial), times,
                                             cfg.diagnostics.oracle_resolution, cfg.run.field.theta);
    write_series_csv(dir / "series.csv", ts);
    return {"series.csv"};
  }
  const Snapshot s0 = load_particles(cfg, dir, cfg.run.t_start);
  std::vector<std::string> files;
  const RunResult res = run(
      s0.ensemble(), cfg.run,
      [&](const Snapshot& s, const TimeSeriesRow&) {
        const std::string name = snapshot_filename(s.time());
        write_snapshot_csv(dir / name, s);
        files.push_back(name);
      },
      false);
  write_series_csv(dir / "series.csv", res.series);
  write_momentum_csv(dir / "momentum.csv", res.series);
  files.push_back("series.csv");
  files.push_back("momentum.csv");
  return files;
}

std::vector<std::string> stage_moments(const PipelineConfig& cfg, const fs::path& dir) {
  const auto snaps = load_snapshots(cfg, dir);
  const int ell = cfg.diagnostics.ell;
  const Grid3 vg = velocity_grid(cfg.diagnostics);
  const double h = vgrid_bandwidth(cfg.diagnostics);
  std::vector<std::string> files;
  std::vector<std::vector<MomentTable>> per_species;
  for (const auto& s : snaps) {
    auto tables = moment_table(s, ell, vg, h);
    const std::string name = table_name(ell, s.time());
    write_moment_tables_csv(dir / name, tables);
    files.push_back(name);
    if (per_species.empty()) per_species.resize(tables.size());
    for (std::size_t a = 0; a < tables.size(); ++a) per_species[a].push_back(std::move(tables[a]));
  }
  if (snaps.size() >= 3) {
    std::vector<MomentTable> limits;
    double residual = 0.0;
    for (auto& tabs : per_species) {
      auto ex = extrapolate_limit(tabs);
      residual = std::max(residual, ex.cauchy_residual);
      limits.push_back(std::move(ex.limit));
    }
    const std::string name = table_name(ell, INFINITY);
    write_moment_tables_csv(dir / name, limits);
    files.push_back(name);
  }

  CsvTable tm;
  tm.header = {"t", "phi"};
  const std::size_t ns = snaps.empty() ? 0 : snaps.front().ensemble().size();
  for (std::size_t a = 0; a < ns; ++a) tm.header.push_back("value_s" + std::to_string(a));
  const auto centers = test_centers();
  for (const auto& s : snaps) {
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const auto m = tested_moment(s, 0, gaussian_test_function(centers[k], kTestWidth));
      std::vector<double> row{s.time(), double(k)};
      row.insert(row.end(), m.begin(), m.end());
      tm.rows.push_back(std::move(row));
    }
  }
  write_csv(dir / "tested_moments.csv", tm);
  files.push_back("tested_moments.csv");
  return files;
}

std::vector<std::string> stage_fit_decay(const PipelineConfig& cfg, const fs::path& dir) {
  const TimeSeries ts = read_series_csv(dir / "series.csv");
  const auto t = ts.column("t");
  std::vector<std::pair<std::string, DecayFit>> fits;
  for (const std::string col : {"sup_rho", "sup_E"}) {
    fits.emplace_back(col, fit_decay(t, ts.column(col), cfg.diagnostics.fit_lo, cfg.diagnostics.fit_hi));
  }
  write_fit_csv(dir / "fit.csv", fits);
  return {"fit.csv"};
}

std::vector<std::string> stage_profile(const PipelineConfig& cfg, const fs::path& dir) {
  const int ell = cfg.diagnostics.ell;
  const auto snaps = load_snapshots(cfg, dir);
  const LimitProfile lim = limit_profile(cfg, snaps, ell);
  const Grid3 vg = velocity_grid(cfg.diagnostics);
  const int n = cfg.diagnostics.oracle_resolution;
  std::vector<DensityField> dens;
  for (const auto& s : snaps) {
    const double t = s.time();
    if (t < cfg.diagnostics.fit_lo || t > cfg.diagnostics.fit_hi) continue;
    Vec3 lo, hi;
    for (int a = 0; a < 3; ++a) {
      lo[a] = t * vg.axes[a].lo;
      hi[a] = t * vg.axes[a].hi;
    }
    const Grid3 g = Grid3::box(lo, hi, n);
    if (cfg.mode == RunMode::free_stream) {
      dens.push_back(free_stream_density(build_initial_data(cfg.initial), t, g));
    } else {
      dens.push_back(density(s, g, cfg.diagnostics.kde_bandwidth * g.axes[0].spacing()));
    }
  }
  const ProfileErrorSeries pe = profile_error(dens, lim, ell);
  CsvTable out;
  out.header = {"t", "error", "noise"};
  for (const auto& r : pe.rows) out.rows.push_back({r.t, r.error, r.noise});
  write_csv(dir / "profile_error.csv", out);
  return {"profile_error.csv"};
}

std::vector<std::string> stage_scatter(const PipelineConfig& cfg, const fs::path& dir) {
  const auto snaps = load_snapshots(cfg, dir);
  std::vector<double> times;
  for (const auto& s : snaps) times.push_back(s.time());
  const LatticeSpacing sp = lattice_spacing(build_initial_data(cfg.initial), cfg.initial.nx, cfg.initial.nv);
  ScatterConfig sc;
  sc.mode = cfg.diagnostics.scatter_mode;
  sc.hx = cfg.diagnostics.kde_bandwidth * sp.dx;
  sc.hv = cfg.diagnostics.kde_bandwidth * sp.dv;
  sc.max_probes = cfg.diagnostics.scatter_probes;
  LimitProfile e0;
  if (sc.mode == ScatterMode::modified) e0 = limit_field(limit_profile(cfg, snaps, 0));
  CsvTable out;
  out.header = {"t1", "t2", "defect", "noise_floor", "inconclusive"};
  for (const auto& [t1, t2] : doubling_pairs(times)) {
    const auto i1 = std::find(times.begin(), times.end(), t1) - times.begin();
    const auto i2 = std::find(times.begin(), times.end(), t2) - times.begin();
    const ScatteringRow r =
        scattering_defect(snaps[i1], snaps[i2], sc, sc.mode == ScatterMode::modified ? &e0 : nullptr);
    out.rows.push_back({r.t1, r.t2, r.defect, r.noise_floor, r.inconclusive ? 1.0 : 0.0});
  }
  write_csv(dir / "scatter.csv", out);
  return {"scatter.csv"};
}

// ---------------------------------------------------------------- pipeline

RunManifest run_pipeline(const PipelineConfig& cfg, const fs::path& out_dir, const PipelineOptions& opt) {
  fs::create_directories(out_dir);
  const fs::path manifest_path = out_dir / "manifest.json";
  RunManifest previous;
  if (!opt.force && fs::exists(manifest_path)) previous = read_manifest(manifest_path);

  {
    std::ofstream f(out_dir / "config.resolved", std::ios::binary);
    f << resolved_config_text(cfg);
    if (!f) throw std::runtime_error("cannot write " + (out_dir / "config.resolved").string());
  }

  RunManifest m;
  m.version = version();
  m.config = cfg.echo;

  using Body = std::vector<std::string> (*)(const PipelineConfig&, const fs::path&);
  struct Step {
    Stage stage;
    Body body;
    std::string inputs;  ///< config text the stage depends on
  };
  const auto& e = cfg.echo;
  const std::string vgrid = "ell=" + e.at("diagnostics.ell") + ";vres=" + e.at("diagnostics.vgrid_resolution") +
                            ";vhw=" + e.at("diagnostics.vgrid_half_width") +
                            ";kde=" + e.at("diagnostics.kde_bandwidth");
  const std::vector<Step> steps = {
      {Stage::construct, &stage_construct, cfg.section_text("initial")},
      {Stage::evolve, &stage_evolve,
       cfg.section_text("run") + cfg.section_text("field") + "oracle=" + e.at("diagnostics.oracle_resolution")},
      {Stage::moments, &stage_moments, vgrid},
      {Stage::fit_decay, &stage_fit_decay, "window=" + e.at("diagnostics.fit_window")},
      {Stage::profile, &stage_profile,
       vgrid + ";window=" + e.at("diagnostics.fit_window") + ";oracle=" + e.at("diagnostics.oracle_resolution")},
      {Stage::scatter, &stage_scatter,
       vgrid + ";mode=" + e.at("diagnostics.scatter_mode") + ";probes=" + e.at("diagnostics.scatter_probes")},
  };

  // Upstream of each stage: construct <- evolve <- {moments, fit, profile, scatter}.
  std::map<Stage, std::string> fp;
  for (const auto& st : steps) {
    const std::string name = to_string(st.stage);
    std::string upstream;
    if (st.stage == Stage::evolve) upstream = fp[Stage::construct];
    if (st.stage > Stage::evolve) upstream = fp[Stage::evolve];
    fp[st.stage] = hex64(fnv1a(m.version + "|" + name + "|" + st.inputs + "|" + upstream));

    StageRecord rec;
    rec.name = name;
    rec.fingerprint = fp[st.stage];
    const StageRecord* old = previous.find(name);
    if (old && old->fingerprint == rec.fingerprint) {
      for (const auto& [file, sum] : old->files) {
        const fs::path p = out_dir / file;
        if (!fs::exists(p)) throw std::runtime_error("stage " + name + ": missing output " + p.string());
        if (hex64(fnv1a_file(p)) != sum) {
          throw std::runtime_error("stage " + name + ": checksum mismatch in " + p.string());
        }
      }
      rec.files = old->files;
      rec.wall_seconds = old->wall_seconds;
      rec.skipped = true;
    } else {
      const auto t0 = std::chrono::steady_clock::now();
      std::vector<std::string> files;
      try {
        files = st.body(cfg, out_dir);
      } catch (const std::exception& ex) {
        write_manifest(manifest_path, m);
        throw std::runtime_error("stage " + name + " failed: " + ex.what());
      }
      rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      for (const auto& f : files) rec.files[f] = hex64(fnv1a_file(out_dir / f));
    }
    m.stages.push_back(std::move(rec));
    write_manifest(manifest_path, m);
    if (st.stage == opt.last) break;
  }
  return m;
}

}  // namespace vpdecay
