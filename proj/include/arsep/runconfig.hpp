#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "arsep/experiment.hpp"

namespace arsep {

/// Resolved settings for a benchmark sweep: the benchmark knobs plus the
/// experiment grid. Keys are dotted ("schedule.steps"); see config_keys().
struct RunConfig {
  BenchmarkConfig bench;
  std::vector<std::string> modes{"naive", "segmented", "ar", "ar-tf", "nmf"};
  std::vector<double> overlaps{0.75};
  std::vector<std::uint64_t> seeds;  // empty means 0..19
  std::size_t workers = 0;           // 0: ARSEP_WORKERS, else hardware threads

  RunConfig();

  /// Throws ConfigError for an unknown key or a malformed value.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  void validate() const;

  /// Canonical key/value pairs in config_keys() order.
  std::vector<std::pair<std::string, std::string>> entries() const;
};

const std::vector<std::string>& config_keys();

/// Parses `key = value` lines with optional `[section]` headers that prefix
/// the following keys; `#` starts a comment. Values override `base`.
RunConfig parse_run_config(std::string_view text, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

/// Text that parse_run_config reads back to the same config.
std::string to_text(const RunConfig& config);

/// ARSEP_WORKERS if set and positive, else the hardware thread count.
std::size_t default_workers();

}  // namespace arsep
