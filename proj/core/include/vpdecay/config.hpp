#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "vpdecay/asymptotics.hpp"
#include "vpdecay/dynamics.hpp"
#include "vpdecay/initial_data.hpp"

namespace vpdecay {

enum class RunMode { simulate, free_stream };
std::string to_string(RunMode m);

struct DiagnosticsPlan {
  int ell = -1;  ///< moment order; -1 resolves to min(m, 3)
  double fit_lo = 10.0;
  double fit_hi = 160.0;
  int vgrid_resolution = 24;
  double vgrid_half_width = 1.25;
  double kde_bandwidth = 2.5;  ///< in velocity-grid spacings
  ScatterMode scatter_mode = ScatterMode::linear;
  std::size_t scatter_probes = 256;
  int oracle_resolution = 48;
};

/// Fully resolved configuration. `echo` maps "section.key" to the concrete
/// value used, including every default.
struct PipelineConfig {
  InitialDataSpec initial{};
  RunConfig run{};
  RunMode mode = RunMode::simulate;
  DiagnosticsPlan diagnostics{};
  std::map<std::string, std::string> echo;

  /// Echo entries of one section as "key=value\n" lines (stable order).
  std::string section_text(const std::string& section) const;
};

/// Parses key = value text with sections [initial], [run], [field],
/// [diagnostics]; keys before the first header belong to [initial]. '#'
/// starts a comment. Unknown keys and malformed values throw
/// std::invalid_argument with the line number; range violations name the key.
/// "auto" softening resolves to half the initial lattice spacing, growing at
/// half the velocity spacing per unit time.
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);

/// The echo as parseable config text (one section per header).
std::string resolved_config_text(const PipelineConfig& cfg);

/// Re-derives `echo` after programmatic edits (e.g. CLI overrides).
void refresh_echo(PipelineConfig& cfg);

}  // namespace vpdecay
