#include "vpdecay/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "vpdecay/csv_io.hpp"

namespace vpdecay {

std::string to_string(RunMode m) { return m == RunMode::simulate ? "simulate" : "free_stream"; }

std::string PipelineConfig::section_text(const std::string& section) const {
  std::string out;
  const std::string prefix = section + ".";
  for (const auto& [k, v] : echo) {
    if (k.rfind(prefix, 0) == 0) out += k.substr(prefix.size()) + "=" + v + "\n";
  }
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
  std::size_t used = 0;
  const double x = std::stod(v, &used);
  if (used != v.size()) throw std::invalid_argument("trailing characters");
  return x;
}

int to_int(const std::string& v) {
  std::size_t used = 0;
  const long x = std::stol(v, &used);
  if (used != v.size()) throw std::invalid_argument("trailing characters");
  return static_cast<int>(x);
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("expected true|false");
}

std::vector<double> to_list(const std::string& v) {
  std::vector<double> out;
  std::string cell;
  std::istringstream is(v);
  while (std::getline(is, cell, ',')) out.push_back(to_double(trim(cell)));
  return out;
}

Vec3 to_vec3(const std::string& v) {
  const auto l = to_list(v);
  if (l.size() != 3) throw std::invalid_argument("expected three comma-separated numbers");
  return {l[0], l[1], l[2]};
}

std::string list_text(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

struct Pending {
  bool p_geg = false;
  bool softening_auto = true;
  bool growth_auto = true;
  int n_outputs = 12;
  double t_first = 10.0;
  bool explicit_outputs = false;
};

}  // namespace

void refresh_echo(PipelineConfig& c) {
  auto& e = c.echo;
  e.clear();
  const auto& in = c.initial;
  e["initial.m"] = std::to_string(in.m);
  e["initial.p_geg"] = format_double(in.p_geg);
  e["initial.preset"] = to_string(in.preset);
  e["initial.support_scale"] = format_double(in.support_scale);
  e["initial.center"] = list_text({in.center[0], in.center[1], in.center[2]});
  e["initial.amplitude"] = format_double(in.amplitude);
  e["initial.nx"] = std::to_string(in.nx);
  e["initial.nv"] = std::to_string(in.nv);
  e["initial.mean_plus"] = list_text({in.dipole.mean_plus[0], in.dipole.mean_plus[1], in.dipole.mean_plus[2]});
  e["initial.mean_minus"] = list_text({in.dipole.mean_minus[0], in.dipole.mean_minus[1], in.dipole.mean_minus[2]});
  e["initial.sigma_plus"] = format_double(in.dipole.sigma_plus);
  e["initial.sigma_minus"] = format_double(in.dipole.sigma_minus);
  const auto& r = c.run;
  e["run.mode"] = to_string(c.mode);
  e["run.t_end"] = format_double(r.t_end);
  e["run.dt0"] = format_double(r.steps.dt0);
  e["run.eta"] = format_double(r.steps.eta);
  e["run.dt_max"] = format_double(r.steps.dt_max);
  e["run.output_times"] = list_text(r.resolved_output_times());
  e["run.seed"] = std::to_string(r.seed);
  e["run.density_bandwidth"] = format_double(r.density_bandwidth);
  const auto& f = r.field;
  e["field.method"] = to_string(f.method);
  e["field.softening"] = format_double(f.softening);
  e["field.softening_growth"] = format_double(f.softening_growth);
  e["field.theta"] = format_double(f.theta);
  e["field.remove_net_force"] = f.remove_net_force ? "true" : "false";
  e["field.probe_resolution"] = std::to_string(f.probe_resolution);
  const auto& d = c.diagnostics;
  e["diagnostics.ell"] = std::to_string(d.ell);
  e["diagnostics.fit_window"] = format_double(d.fit_lo) + ":" + format_double(d.fit_hi);
  e["diagnostics.vgrid_resolution"] = std::to_string(d.vgrid_resolution);
  e["diagnostics.vgrid_half_width"] = format_double(d.vgrid_half_width);
  e["diagnostics.kde_bandwidth"] = format_double(d.kde_bandwidth);
  e["diagnostics.scatter_mode"] = to_string(d.scatter_mode);
  e["diagnostics.scatter_probes"] = std::to_string(d.scatter_probes);
  e["diagnostics.oracle_resolution"] = std::to_string(d.oracle_resolution);
}

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig c;
  Pending p;
  using Setter = std::function<void(const std::string&)>;
  const std::map<std::string, std::map<std::string, Setter>> keys = {
      {"initial",
       {{"m", [&](const std::string& v) { c.initial.m = to_int(v); }},
        {"p_geg", [&](const std::string& v) { c.initial.p_geg = to_double(v); p.p_geg = true; }},
        {"preset", [&](const std::string& v) { c.initial.preset = preset_from_string(v); }},
        {"support_scale", [&](const std::string& v) { c.initial.support_scale = to_double(v); }},
        {"center", [&](const std::string& v) { c.initial.center = to_vec3(v); }},
        {"amplitude", [&](const std::string& v) { c.initial.amplitude = to_double(v); }},
        {"nx", [&](const std::string& v) { c.initial.nx = to_int(v); }},
        {"nv", [&](const std::string& v) { c.initial.nv = to_int(v); }},
        {"mean_plus", [&](const std::string& v) { c.initial.dipole.mean_plus = to_vec3(v); }},
        {"mean_minus", [&](const std::string& v) { c.initial.dipole.mean_minus = to_vec3(v); }},
        {"sigma_plus", [&](const std::string& v) { c.initial.dipole.sigma_plus = to_double(v); }},
        {"sigma_minus", [&](const std::string& v) { c.initial.dipole.sigma_minus = to_double(v); }}}},
      {"run",
       {{"mode",
         [&](const std::string& v) {
           if (v == "simulate") c.mode = RunMode::simulate;
           else if (v == "free_stream" || v == "free-stream") c.mode = RunMode::free_stream;
           else throw std::invalid_argument("expected simulate|free_stream");
         }},
        {"t_end", [&](const std::string& v) { c.run.t_end = to_double(v); }},
        {"dt0", [&](const std::string& v) { c.run.steps.dt0 = to_double(v); }},
        {"eta", [&](const std::string& v) { c.run.steps.eta = to_double(v); }},
        {"dt_max", [&](const std::string& v) { c.run.steps.dt_max = to_double(v); }},
        {"output_times", [&](const std::string& v) { c.run.output_times = to_list(v); p.explicit_outputs = true; }},
        {"n_outputs", [&](const std::string& v) { p.n_outputs = to_int(v); }},
        {"t_first", [&](const std::string& v) { p.t_first = to_double(v); }},
        {"seed", [&](const std::string& v) { c.run.seed = static_cast<std::uint64_t>(std::stoull(v)); }},
        {"density_bandwidth", [&](const std::string& v) { c.run.density_bandwidth = to_double(v); }}}},
      {"field",
       {{"method", [&](const std::string& v) { c.run.field.method = field_method_from_string(v); }},
        {"softening",
         [&](const std::string& v) {
           p.softening_auto = v == "auto";
           if (!p.softening_auto) c.run.field.softening = to_double(v);
         }},
        {"softening_growth",
         [&](const std::string& v) {
           p.growth_auto = v == "auto";
           if (!p.growth_auto) c.run.field.softening_growth = to_double(v);
         }},
        {"theta", [&](const std::string& v) { c.run.field.theta = to_double(v); }},
        {"remove_net_force", [&](const std::string& v) { c.run.field.remove_net_force = to_bool(v); }},
        {"probe_resolution", [&](const std::string& v) { c.run.field.probe_resolution = to_int(v); }}}},
      {"diagnostics",
       {{"ell", [&](const std::string& v) { c.diagnostics.ell = to_int(v); }},
        {"fit_window",
         [&](const std::string& v) {
           const auto colon = v.find(':');
           if (colon == std::string::npos) throw std::invalid_argument("expected lo:hi");
           c.diagnostics.fit_lo = to_double(trim(v.substr(0, colon)));
           c.diagnostics.fit_hi = to_double(trim(v.substr(colon + 1)));
         }},
        {"vgrid_resolution", [&](const std::string& v) { c.diagnostics.vgrid_resolution = to_int(v); }},
        {"vgrid_half_width", [&](const std::string& v) { c.diagnostics.vgrid_half_width = to_double(v); }},
        {"kde_bandwidth", [&](const std::string& v) { c.diagnostics.kde_bandwidth = to_double(v); }},
        {"scatter_mode", [&](const std::string& v) { c.diagnostics.scatter_mode = scatter_mode_from_string(v); }},
        {"scatter_probes",
         [&](const std::string& v) { c.diagnostics.scatter_probes = static_cast<std::size_t>(to_int(v)); }},
        {"oracle_resolution", [&](const std::string& v) { c.diagnostics.oracle_resolution = to_int(v); }}}},
  };

  std::string section = "initial";
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw std::invalid_argument(where + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!keys.count(section)) throw std::invalid_argument(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument(where + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& sec = keys.at(section);
    const auto it = sec.find(key);
    if (it == sec.end()) throw std::invalid_argument(where + "unknown key " + key);
    try {
      it->second(value);
    } catch (const std::exception& ex) {
      throw std::invalid_argument(where + key + ": invalid value '" + value + "' (" + ex.what() + ")");
    }
  }

  if (c.initial.m < 0) throw std::invalid_argument("m: constraint m >= 0 violated");
  if (!p.p_geg) c.initial.p_geg = c.initial.m + 3.0;
  if (c.initial.preset == Preset::single_species && c.initial.species.size() != 1) {
    c.initial.species = {Species{0, 1.0, 1.0}};
  }
  c.initial.validate();
  if (!p.explicit_outputs) {
    if (p.n_outputs < 1) throw std::invalid_argument("n_outputs: must be >= 1");
    if (!(p.t_first > 0.0) || !(p.t_first <= c.run.t_end)) throw std::invalid_argument("t_first: must lie in (0, t_end]");
    c.run.output_times = log_spaced(p.t_first, c.run.t_end, p.n_outputs);
  }
  if (c.diagnostics.ell < 0) c.diagnostics.ell = std::min(c.initial.m, 3);
  if (c.diagnostics.ell > 3) throw std::invalid_argument("ell: constraint ell <= 3 violated");
  if (!(c.diagnostics.fit_lo >= 1.0) || !(c.diagnostics.fit_hi > c.diagnostics.fit_lo)) {
    throw std::invalid_argument("fit_window: need 1 <= lo < hi");
  }
  if (c.diagnostics.vgrid_resolution < 4) throw std::invalid_argument("vgrid_resolution: must be >= 4");
  if (!(c.diagnostics.vgrid_half_width > 0.0)) throw std::invalid_argument("vgrid_half_width: must be > 0");
  if (!(c.diagnostics.kde_bandwidth >= 1.0)) throw std::invalid_argument("kde_bandwidth: must be >= 1");
  if (c.diagnostics.scatter_probes == 0) throw std::invalid_argument("scatter_probes: must be >= 1");
  if (c.diagnostics.oracle_resolution < 4) throw std::invalid_argument("oracle_resolution: must be >= 4");
  if (p.softening_auto || p.growth_auto) {
    const LatticeSpacing sp = lattice_spacing(build_initial_data(c.initial), c.initial.nx, c.initial.nv);
    if (p.softening_auto) c.run.field.softening = 0.5 * sp.dx;
    if (p.growth_auto) c.run.field.softening_growth = 0.5 * sp.dv;
  }
  c.run.validate();
  refresh_echo(c);
  return c;
}

std::string resolved_config_text(const PipelineConfig& cfg) {
  std::string out;
  for (const char* sec : {"initial", "run", "field", "diagnostics"}) {
    out += std::string("[") + sec + "]\n" + cfg.section_text(sec);
  }
  return out;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read config " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

}  // namespace vpdecay
