#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "arsep/experiment.hpp"
#include "arsep/runconfig.hpp"

namespace arsep {

/// Mean and sample standard deviation; std is absent for fewer than 2 values.
struct Summary {
  std::size_t n = 0;
  std::optional<double> mean;
  std::optional<double> std;
};

Summary summarize(const std::vector<double>& values);

/// Aggregate over the seeds of one (mode, overlap) grid cell. Error rows are
/// counted in `errors` and excluded from the statistics.
struct CellStats {
  std::string mode;
  double overlap = 0.0;
  std::size_t errors = 0;
  Summary si_sdri;
  Summary sdri;
  Summary identity_switch_rate;
};

struct SweepReport {
  RunConfig config;
  std::vector<RunRow> rows;     // grid order: seed, then overlap, then mode
  std::vector<CellStats> cells;  // overlap ascending, then grid mode order
};

/// Produces one row; must not throw for ordinary run failures.
using RowRunner = std::function<RunRow(std::uint64_t seed, const std::string& mode, double overlap)>;

/// Cells of `rows`, ordered by overlap and then by first appearance of the mode.
std::vector<CellStats> aggregate(const std::vector<RunRow>& rows);

/// Runs every (mode, overlap, seed) row on `workers` threads. A row whose
/// run throws becomes an error row and the sweep carries on. The default
/// runner renders each seed's benchmark instance once and shares it.
SweepReport sweep(const RunConfig& config, const RowRunner& runner = {},
                  const std::function<void(const RunRow&)>& on_row = {});

/// The config that reproduces one row on its own.
RunConfig row_config(const RunConfig& config, const RunRow& row);

nlohmann::json to_json(const SweepReport& report);
std::string rows_csv(const SweepReport& report);
std::string cells_csv(const SweepReport& report);

/// Gnuplot text: one block per cell (overlap ascending) headed by a comment
/// naming the cell, holding "mean std n" of SI-SDRi; blocks are separated by
/// two blank lines so `index` selects them. Missing values print as NaN.
/// Throws DomainError for a report without cells.
std::string plot_data(const SweepReport& report);

}  // namespace arsep
