#include "arsep/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "arsep/errors.hpp"
#include "arsep/kernels.hpp"

namespace arsep {

Summary summarize(const std::vector<double>& values) {
  Summary s;
  s.n = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  s.mean = mean;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::vector<CellStats> aggregate(const std::vector<RunRow>& rows) {
  std::vector<std::string> mode_order;
  for (const auto& r : rows)
    if (std::find(mode_order.begin(), mode_order.end(), r.mode) == mode_order.end())
      mode_order.push_back(r.mode);
  auto rank = [&](const std::string& m) {
    return std::find(mode_order.begin(), mode_order.end(), m) - mode_order.begin();
  };

  std::map<std::pair<double, std::ptrdiff_t>, std::vector<const RunRow*>> groups;
  for (const auto& r : rows) groups[{r.overlap, rank(r.mode)}].push_back(&r);

  std::vector<CellStats> cells;
  for (const auto& [key, members] : groups) {
    CellStats c;
    c.mode = mode_order[static_cast<std::size_t>(key.second)];
    c.overlap = key.first;
    std::vector<double> si, sd, id;
    for (const RunRow* r : members) {
      if (r->error || !r->si_sdri) {
        ++c.errors;
        continue;
      }
      si.push_back(*r->si_sdri);
      if (r->sdri) sd.push_back(*r->sdri);
      if (r->identity_switch_rate) id.push_back(*r->identity_switch_rate);
    }
    c.si_sdri = summarize(si);
    c.sdri = summarize(sd);
    c.identity_switch_rate = summarize(id);
    cells.push_back(std::move(c));
  }
  return cells;
}

namespace {

// Shares one rendered instance per seed among the rows that need it and drops
// it after the last of them.
class InstanceCache {
 public:
  InstanceCache(const BenchmarkConfig& config, std::size_t rows_per_seed)
      : config_(config), rows_per_seed_(rows_per_seed) {}

  std::shared_ptr<const BenchmarkInstance> acquire(std::uint64_t seed) {
    std::shared_future<std::shared_ptr<const BenchmarkInstance>> future;
    bool build = false;
    std::promise<std::shared_ptr<const BenchmarkInstance>> promise;
    {
      std::lock_guard lock(mutex_);
      auto& slot = slots_[seed];
      if (!slot.future.valid()) {
        slot.future = promise.get_future().share();
        build = true;
      }
      future = slot.future;
    }
    if (build) {
      try {
        promise.set_value(std::make_shared<const BenchmarkInstance>(make_instance(config_, seed)));
      } catch (...) {
        promise.set_exception(std::current_exception());
      }
    }
    return future.get();
  }

  void release(std::uint64_t seed) {
    std::lock_guard lock(mutex_);
    auto& slot = slots_[seed];
    if (++slot.done == rows_per_seed_) slot.future = {};
  }

 private:
  struct Slot {
    std::shared_future<std::shared_ptr<const BenchmarkInstance>> future;
    std::size_t done = 0;
  };
  BenchmarkConfig config_;
  std::size_t rows_per_seed_;
  std::mutex mutex_;
  std::map<std::uint64_t, Slot> slots_;
};

struct Task {
  std::uint64_t seed;
  double overlap;
  std::string mode;
};

}  // namespace

SweepReport sweep(const RunConfig& config, const RowRunner& runner,
                  const std::function<void(const RunRow&)>& on_row) {
  config.validate();
  std::vector<Task> tasks;
  for (auto seed : config.seeds)
    for (double r : config.overlaps)
      for (const auto& m : config.modes) tasks.push_back({seed, r, m});

  InstanceCache cache(config.bench, config.overlaps.size() * config.modes.size());
  RowRunner run = runner;
  if (!run) {
    run = [&](std::uint64_t seed, const std::string& mode, double overlap) {
      RunRow row;
      try {
        const auto instance = cache.acquire(seed);
        row = run_mode(*instance, config.bench, mode, overlap).row;
      } catch (const std::exception& e) {
        row.mode = mode;
        row.overlap = overlap;
        row.seed = seed;
        row.error = e.what();
      }
      cache.release(seed);
      return row;
    };
  }

  const std::size_t workers =
      std::max<std::size_t>(1, std::min(tasks.size(), config.workers ? config.workers : default_workers()));
  const int threads_per_worker =
      std::max(1, static_cast<int>(std::thread::hardware_concurrency() / workers));

  SweepReport report;
  report.config = config;
  report.rows.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex emit;
  auto work = [&] {
    kernels::set_threads(threads_per_worker);
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
      const auto& t = tasks[i];
      RunRow row;
      try {
        row = run(t.seed, t.mode, t.overlap);
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      row.mode = t.mode;
      row.overlap = t.overlap;
      row.seed = t.seed;
      report.rows[i] = row;
      if (on_row) {
        std::lock_guard lock(emit);
        on_row(row);
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  report.cells = aggregate(report.rows);
  return report;
}

RunConfig row_config(const RunConfig& config, const RunRow& row) {
  RunConfig c = config;
  c.modes = {row.mode};
  c.overlaps = {row.overlap};
  c.seeds = {row.seed};
  c.workers = 1;
  return c;
}

namespace {

nlohmann::json opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json config_json(const RunConfig& config) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : config.entries()) j[k] = v;
  return j;
}

nlohmann::json summary_json(const Summary& s) {
  return {{"n", s.n}, {"mean", opt(s.mean)}, {"std", opt(s.std)}};
}

std::string csv_number(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os.precision(17);
  os << *v;
  return os.str();
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

nlohmann::json to_json(const SweepReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"mode", r.mode},
                    {"overlap", r.overlap},
                    {"seed", r.seed},
                    {"si_sdri", opt(r.si_sdri)},
                    {"sdri", opt(r.sdri)},
                    {"identity_switch_rate", opt(r.identity_switch_rate)},
                    {"seconds", r.seconds},
                    {"error", r.error ? nlohmann::json(*r.error) : nlohmann::json(nullptr)},
                    {"config", config_json(row_config(report.config, r))}});
  }
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : report.cells) {
    cells.push_back({{"mode", c.mode},
                     {"overlap", c.overlap},
                     {"errors", c.errors},
                     {"si_sdri", summary_json(c.si_sdri)},
                     {"sdri", summary_json(c.sdri)},
                     {"identity_switch_rate", summary_json(c.identity_switch_rate)}});
  }
  return {{"config", config_json(report.config)}, {"rows", rows}, {"cells", cells}};
}

std::string rows_csv(const SweepReport& report) {
  std::ostringstream os;
  os << "mode,overlap,seed,si_sdri,sdri,identity_switch_rate,seconds,error,config\n";
  for (const auto& r : report.rows) {
    std::string cfg;
    for (const auto& [k, v] : row_config(report.config, r).entries())
      cfg += (cfg.empty() ? "" : "; ") + k + "=" + v;
    os << r.mode << ',' << csv_number(r.overlap) << ',' << r.seed << ',' << csv_number(r.si_sdri)
       << ',' << csv_number(r.sdri) << ',' << csv_number(r.identity_switch_rate) << ','
       << csv_number(r.seconds) << ',' << (r.error ? csv_quote(*r.error) : "") << ','
       << csv_quote(cfg) << '\n';
  }
  return os.str();
}

std::string cells_csv(const SweepReport& report) {
  std::ostringstream os;
  os << "mode,overlap,n,errors,si_sdri_mean,si_sdri_std,sdri_mean,sdri_std,"
        "identity_switch_rate_mean,identity_switch_rate_std\n";
  for (const auto& c : report.cells) {
    os << c.mode << ',' << csv_number(c.overlap) << ',' << c.si_sdri.n << ',' << c.errors << ','
       << csv_number(c.si_sdri.mean) << ',' << csv_number(c.si_sdri.std) << ','
       << csv_number(c.sdri.mean) << ',' << csv_number(c.sdri.std) << ','
       << csv_number(c.identity_switch_rate.mean) << ',' << csv_number(c.identity_switch_rate.std)
       << '\n';
  }
  return os.str();
}

std::string plot_data(const SweepReport& report) {
  if (report.cells.empty()) throw DomainError("plot_data: report has no cells");
  auto cells = report.cells;
  std::stable_sort(cells.begin(), cells.end(),
                   [](const CellStats& a, const CellStats& b) { return a.overlap < b.overlap; });
  auto field = [](const std::optional<double>& v) { return v ? csv_number(v) : std::string("NaN"); };
  std::ostringstream os;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    if (i) os << "\n\n";
    os << "# mode=" << c.mode << " overlap=" << csv_number(c.overlap) << " (SI-SDRi mean std n)\n";
    os << field(c.si_sdri.mean) << ' ' << field(c.si_sdri.std) << ' ' << c.si_sdri.n << '\n';
  }
  return os.str();
}

}  // namespace arsep
