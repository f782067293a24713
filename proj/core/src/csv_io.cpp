#include "vpdecay/csv_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vpdecay {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::size_t CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::invalid_argument("CSV has no column '" + name + "'");
}

std::vector<double> CsvTable::column(const std::string& name) const {
  const std::size_t c = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": not a number: '" + s + "'");
  }
  return v;
}

}  // namespace

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  auto f = open_out(path);
  for (std::size_t i = 0; i < table.header.size(); ++i) f << (i ? "," : "") << table.header[i];
  f << '\n';
  for (const auto& r : table.rows) {
    if (r.size() != table.header.size()) throw std::invalid_argument("write_csv: row width differs from header");
    for (std::size_t i = 0; i < r.size(); ++i) f << (i ? "," : "") << format_double(r[i]);
    f << '\n';
  }
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(f, line)) throw std::runtime_error(path.string() + ": empty file (header expected)");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.header = split(line);
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(t.header.size()) + " columns");
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, path, lineno));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_snapshot_csv(const std::filesystem::path& path, const Snapshot& s) {
  auto f = open_out(path);
  f << "species,x1,x2,x3,v1,v2,v3,weight\n";
  const auto& e = s.ensemble();
  for (std::size_t a = 0; a < e.size(); ++a) {
    const auto X = e[a].positions();
    const auto V = e[a].velocities();
    const auto w = e[a].weights();
    for (std::size_t j = 0; j < X.size(); ++j) {
      f << a;
      for (int k = 0; k < 3; ++k) f << ',' << format_double(X[j][k]);
      for (int k = 0; k < 3; ++k) f << ',' << format_double(V[j][k]);
      f << ',' << format_double(w[j]) << '\n';
    }
  }
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

Snapshot read_snapshot_csv(const std::filesystem::path& path, double t, const std::vector<Species>& species) {
  const CsvTable tab = read_csv(path);
  const std::vector<std::string> expected{"species", "x1", "x2", "x3", "v1", "v2", "v3", "weight"};
  if (tab.header != expected) throw std::runtime_error(path.string() + ": unexpected snapshot header");
  std::vector<std::vector<Vec3>> X(species.size()), V(species.size());
  std::vector<std::vector<double>> w(species.size());
  for (std::size_t r = 0; r < tab.rows.size(); ++r) {
    const auto& row = tab.rows[r];
    const double s = row[0];
    if (!(s >= 0.0) || s != std::floor(s) || s >= static_cast<double>(species.size())) {
      throw std::runtime_error(path.string() + ":" + std::to_string(r + 2) + ": unknown species index");
    }
    const auto a = static_cast<std::size_t>(s);
    X[a].push_back({row[1], row[2], row[3]});
    V[a].push_back({row[4], row[5], row[6]});
    w[a].push_back(row[7]);
  }
  ParticleEnsemble e;
  for (std::size_t a = 0; a < species.size(); ++a) {
    e.emplace_back(species[a], std::move(X[a]), std::move(V[a]), std::move(w[a]));
  }
  return Snapshot::from_g_frame(t, std::move(e));
}

std::string snapshot_filename(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snap_t%.6g.csv", t);
  return buf;
}

double snapshot_time_from_filename(const std::string& name) {
  const std::string prefix = "snap_t", suffix = ".csv";
  if (name.size() <= prefix.size() + suffix.size() || name.rfind(prefix, 0) != 0 ||
      name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
    throw std::invalid_argument("not a snapshot file name: " + name);
  }
  const std::string mid = name.substr(prefix.size(), name.size() - prefix.size() - suffix.size());
  std::size_t used = 0;
  const double t = std::stod(mid, &used);
  if (used != mid.size()) throw std::invalid_argument("not a snapshot file name: " + name);
  return t;
}

void write_series_csv(const std::filesystem::path& path, const TimeSeries& ts) {
  CsvTable t;
  t.header = {"t", "sup_rho", "sup_E", "t53_sup_E", "support_diameter", "total_charge"};
  for (const auto& r : ts.rows()) {
    t.rows.push_back({r.t, r.sup_rho, r.sup_E, r.t53_sup_E, r.support_diameter, r.total_charge});
  }
  write_csv(path, t);
}

TimeSeries read_series_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const auto c_t = t.column_index("t");
  const auto c_rho = t.column_index("sup_rho");
  const auto c_e = t.column_index("sup_E");
  const auto c_53 = t.column_index("t53_sup_E");
  const auto c_d = t.column_index("support_diameter");
  const auto c_q = t.column_index("total_charge");
  TimeSeries ts;
  for (const auto& r : t.rows) {
    TimeSeriesRow row;
    row.t = r[c_t];
    row.sup_rho = r[c_rho];
    row.sup_E = r[c_e];
    row.t53_sup_E = r[c_53];
    row.support_diameter = r[c_d];
    row.total_charge = r[c_q];
    ts.append(row);
  }
  return ts;
}

void write_momentum_csv(const std::filesystem::path& path, const TimeSeries& ts) {
  CsvTable t;
  t.header = {"t", "p1", "p2", "p3"};
  for (const auto& r : ts.rows()) t.rows.push_back({r.t, r.momentum[0], r.momentum[1], r.momentum[2]});
  write_csv(path, t);
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  std::vector<char> buf(1 << 16);
  while (f) {
    f.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h = fnv1a(std::string_view(buf.data(), static_cast<std::size_t>(f.gcount())), h);
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace vpdecay
