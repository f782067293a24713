#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "vpdecay/dynamics.hpp"
#include "vpdecay/types.hpp"

namespace vpdecay {

/// Shortest-safe round-trip text: printf "%.17g".
std::string format_double(double x);

/// Numeric CSV with one header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a named column; throws std::invalid_argument if absent.
  std::size_t column_index(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
/// Throws std::runtime_error naming the file and line on malformed input.
CsvTable read_csv(const std::filesystem::path& path);

/// Header species,x1,x2,x3,v1,v2,v3,weight; g-frame coordinates; species is
/// the index into the ensemble.
void write_snapshot_csv(const std::filesystem::path& path, const Snapshot& s);
/// species[i] describes rows tagged i.
Snapshot read_snapshot_csv(const std::filesystem::path& path, double t, const std::vector<Species>& species);

/// snap_t<%.6g>.csv
std::string snapshot_filename(double t);
/// Inverse of snapshot_filename; throws std::invalid_argument otherwise.
double snapshot_time_from_filename(const std::string& name);

/// t,sup_rho,sup_E,t53_sup_E,support_diameter,total_charge
void write_series_csv(const std::filesystem::path& path, const TimeSeries& ts);
TimeSeries read_series_csv(const std::filesystem::path& path);
/// t,p1,p2,p3
void write_momentum_csv(const std::filesystem::path& path, const TimeSeries& ts);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a_file(const std::filesystem::path& path);
std::string hex64(std::uint64_t v);

}  // namespace vpdecay
