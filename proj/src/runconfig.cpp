#include "arsep/runconfig.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "arsep/errors.hpp"

namespace arsep {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty())
    throw ConfigError("bad value for " + key + ": '" + text + "'");
  return value;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <class T>
std::string join(const std::vector<T>& values, const std::function<std::string(const T&)>& f) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ", " : "") + f(values[i]);
  return out;
}

// Seeds accept single values and inclusive ranges "a..b".
std::vector<std::uint64_t> parse_seeds(const std::string& key, const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& item : split_list(text)) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      seeds.push_back(parse_number<std::uint64_t>(key, item));
      continue;
    }
    const auto lo = parse_number<std::uint64_t>(key, trim(item.substr(0, dots)));
    const auto hi = parse_number<std::uint64_t>(key, trim(item.substr(dots + 2)));
    if (hi < lo) throw ConfigError("empty seed range " + item);
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  return seeds;
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
Field number_field(std::string key, T BenchmarkConfig::*member) {
  return {key,
          [member](RunConfig& c, const std::string& k, const std::string& v) {
            c.bench.*member = parse_number<T>(k, v);
          },
          [member](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>) return format_double(c.bench.*member);
            else return std::to_string(c.bench.*member);
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> t;
    t.push_back({"scenario.kind",
                 [](RunConfig& c, const std::string& k, const std::string& v) {
                   try {
                     c.bench.scenario = parse_scenario(v);
                   } catch (const Error&) {
                     throw ConfigError("bad value for " + k + ": '" + v + "'");
                   }
                 },
                 [](const RunConfig& c) { return to_string(c.bench.scenario); }});
    t.push_back(number_field("scenario.duration", &BenchmarkConfig::duration));
    t.push_back(number_field("scenario.sample_rate", &BenchmarkConfig::sample_rate));
    t.push_back(number_field("bank.distractors", &BenchmarkConfig::distractor_phrases));
    t.push_back(number_field("bank.hop", &BenchmarkConfig::bank_hop));
    t.push_back(number_field("bank.bandwidth_scale", &BenchmarkConfig::bandwidth_scale));
    t.push_back(number_field("schedule.sigma_min", &BenchmarkConfig::sigma_min));
    t.push_back(number_field("schedule.sigma_max", &BenchmarkConfig::sigma_max));
    t.push_back(number_field("schedule.steps", &BenchmarkConfig::steps));
    t.push_back({"sampler.integrator",
                 [](RunConfig& c, const std::string& k, const std::string& v) {
                   if (v == "heun") c.bench.integrator = Integrator::Heun;
                   else if (v == "euler") c.bench.integrator = Integrator::Euler;
                   else throw ConfigError("bad value for " + k + ": '" + v + "'");
                 },
                 [](const RunConfig& c) {
                   return std::string(c.bench.integrator == Integrator::Heun ? "heun" : "euler");
                 }});
    t.push_back(number_field("sampler.seed", &BenchmarkConfig::sampler_seed));
    t.push_back(number_field("sampler.best_of_k", &BenchmarkConfig::best_of_k));
    t.push_back(number_field("pipeline.segment", &BenchmarkConfig::segment_length));
    t.push_back({"pipeline.selection",
                 [](RunConfig& c, const std::string& k, const std::string& v) {
                   try {
                     c.bench.selection = parse_selection(v);
                   } catch (const Error&) {
                     throw ConfigError("bad value for " + k + ": '" + v + "'");
                   }
                 },
                 [](const RunConfig& c) { return to_string(c.bench.selection); }});
    t.push_back(number_field("nmf.components", &BenchmarkConfig::nmf_components));
    t.push_back(number_field("nmf.iterations", &BenchmarkConfig::nmf_iterations));
    t.push_back(number_field("nmf.frame", &BenchmarkConfig::nmf_frame));
    t.push_back(number_field("nmf.hop", &BenchmarkConfig::nmf_hop));
    t.push_back(number_field("nmf.fmin", &BenchmarkConfig::nmf_fmin));
    t.push_back(number_field("nmf.fmax", &BenchmarkConfig::nmf_fmax));
    t.push_back(number_field("metrics.identity_frame", &BenchmarkConfig::identity_frame));
    t.push_back({"grid.modes",
                 [](RunConfig& c, const std::string&, const std::string& v) { c.modes = split_list(v); },
                 [](const RunConfig& c) {
                   return join<std::string>(c.modes, [](const std::string& s) { return s; });
                 }});
    t.push_back({"grid.overlaps",
                 [](RunConfig& c, const std::string& k, const std::string& v) {
                   c.overlaps.clear();
                   for (const auto& item : split_list(v)) c.overlaps.push_back(parse_number<double>(k, item));
                 },
                 [](const RunConfig& c) { return join<double>(c.overlaps, format_double); }});
    t.push_back({"grid.seeds",
                 [](RunConfig& c, const std::string& k, const std::string& v) { c.seeds = parse_seeds(k, v); },
                 [](const RunConfig& c) {
                   return join<std::uint64_t>(c.seeds, [](const std::uint64_t& s) { return std::to_string(s); });
                 }});
    t.push_back({"sweep.workers",
                 [](RunConfig& c, const std::string& k, const std::string& v) {
                   c.workers = parse_number<std::size_t>(k, v);
                 },
                 [](const RunConfig& c) { return std::to_string(c.workers); }});
    return t;
  }();
  return table;
}

const Field& field(const std::string& key) {
  // sampler.steps is the sampler-side name of the same knob.
  const std::string& name = key == "sampler.steps" ? std::string("schedule.steps") : key;
  for (const auto& f : fields())
    if (f.key == name) return f;
  throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

RunConfig::RunConfig() {
  for (std::uint64_t s = 0; s < 20; ++s) seeds.push_back(s);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  field(key).set(*this, key, value);
}

std::string RunConfig::get(const std::string& key) const { return field(key).get(*this); }

void RunConfig::validate() const {
  bench.validate();
  if (modes.empty()) throw ConfigError("grid.modes is empty");
  for (const auto& m : modes)
    if (std::find(benchmark_modes().begin(), benchmark_modes().end(), m) == benchmark_modes().end())
      throw ConfigError("unknown mode '" + m + "' in grid.modes");
  if (overlaps.empty()) throw ConfigError("grid.overlaps is empty");
  for (double r : overlaps)
    if (!(r >= 0.0 && r < 1.0)) throw ConfigError("overlap ratios must lie in [0, 1)");
  if (seeds.empty()) throw ConfigError("grid.seeds is empty");
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(*this));
  return out;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

RunConfig parse_run_config(std::string_view text, RunConfig base) {
  std::string section;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const auto key = trim(std::string_view(line).substr(0, eq));
    const auto value = unquote(trim(std::string_view(line).substr(eq + 1)));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    base.set(section.empty() ? key : section + "." + key, value);
  }
  return base;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), std::move(base));
}

std::string to_text(const RunConfig& config) {
  std::string out, section;
  for (const auto& [key, value] : config.entries()) {
    const auto dot = key.find('.');
    const auto sec = key.substr(0, dot);
    if (sec != section) {
      out += (section.empty() ? "[" : "\n[") + sec + "]\n";
      section = sec;
    }
    out += key.substr(dot + 1) + " = " + value + "\n";
  }
  return out;
}

std::size_t default_workers() {
  if (const char* env = std::getenv("ARSEP_WORKERS")) {
    std::size_t n = 0;
    const std::string s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec == std::errc{} && ptr == s.data() + s.size() && n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace arsep
