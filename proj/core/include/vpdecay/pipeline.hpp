#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vpdecay/config.hpp"

namespace vpdecay {

/// construct -> evolve (free-stream or simulate) -> moments -> fit-decay ->
/// profile -> scatter.
enum class Stage { construct, evolve, moments, fit_decay, profile, scatter };
std::string to_string(Stage s);
/// Accepts the stage names above; "free-stream" and "simulate" map to evolve.
Stage stage_from_string(const std::string& tag);

struct StageRecord {
  std::string name;
  std::string fingerprint;
  std::map<std::string, std::string> files;  ///< path relative to the run directory -> FNV-1a hex
  double wall_seconds = 0.0;
  bool skipped = false;
};

struct RunManifest {
  std::string version;
  std::map<std::string, std::string> config;
  std::vector<StageRecord> stages;

  const StageRecord* find(const std::string& stage) const;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& path);

struct PipelineOptions {
  Stage last = Stage::scatter;  ///< run the prefix ending here
  bool force = false;           ///< ignore the previous manifest
};

/// Runs the stages into out_dir and writes out_dir/manifest.json after each
/// stage. A stage whose fingerprint (relevant config plus upstream
/// fingerprints) matches the previous manifest is skipped after verifying
/// the checksums of its files; a mismatch throws std::runtime_error naming
/// the file. Stage failures are rethrown prefixed with the stage name.
RunManifest run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& out_dir,
                         const PipelineOptions& opt = {});

// Stage bodies, also used by the single-purpose CLI subcommands. Each returns
// the files it wrote, relative to dir.
std::vector<std::string> stage_construct(const PipelineConfig& cfg, const std::filesystem::path& dir);
std::vector<std::string> stage_evolve(const PipelineConfig& cfg, const std::filesystem::path& dir);
std::vector<std::string> stage_moments(const PipelineConfig& cfg, const std::filesystem::path& dir);
std::vector<std::string> stage_fit_decay(const PipelineConfig& cfg, const std::filesystem::path& dir);
std::vector<std::string> stage_profile(const PipelineConfig& cfg, const std::filesystem::path& dir);
std::vector<std::string> stage_scatter(const PipelineConfig& cfg, const std::filesystem::path& dir);

/// b1,b2,b3,value: net spatial moments for |beta| <= max_order.
void write_moments_report(const std::filesystem::path& path, const InitialData& data, int max_order);

/// v1,v2,v3,value_s0,value_s1,...: one column per species table.
void write_moment_tables_csv(const std::filesystem::path& path, const std::vector<MomentTable>& tables);

/// Oracle series of the free transport: sup rho and sup E on grids of n^3
/// nodes; total charge and diameter of the analytic support.
TimeSeries free_stream_series(const InitialData& data, const std::vector<double>& times, int n, double theta);

/// column,t_lo,t_hi,exponent,stderr,intercept,residual_rms,points
void write_fit_csv(const std::filesystem::path& path, const std::vector<std::pair<std::string, DecayFit>>& fits);

/// Output times paired with the stored time nearest to 2t (pairs with
/// t2 <= t are dropped).
std::vector<std::pair<double, double>> doubling_pairs(const std::vector<double>& times);

/// Library version string.
std::string version();

}  // namespace vpdecay
