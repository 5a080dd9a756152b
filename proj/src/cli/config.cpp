#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "quantamimo/bench_cli.hpp"
#include "quantamimo/constellation.hpp"

namespace qmimo::cli {

ConfigError::ConfigError(const std::string& origin, int line, const std::string& key,
                         const std::string& message)
    : ContractViolation(origin + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " +
                        key + ": " + message),
      key_(key),
      line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Value conversion failures carry only the message; the caller adds the key
// and line.
struct BadValue {
  std::string message;
};

template <typename T>
T parse_number(std::string_view s) {
  s = trim(s);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    if constexpr (std::is_integral_v<T>)
      throw BadValue{"expected an integer, got '" + std::string(s) + "'"};
    else
      throw BadValue{"expected a number, got '" + std::string(s) + "'"};
  }
  return value;
}

bool parse_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw BadValue{"expected true or false, got '" + std::string(s) + "'"};
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  s = trim(s);
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    const auto item = trim(s.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (item.empty()) throw BadValue{"empty list entry"};
    out.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T, typename Fn>
std::vector<T> parse_list(std::string_view s, Fn&& one) {
  std::vector<T> out;
  for (auto item : split_list(s)) out.push_back(one(item));
  return out;
}

// Names raise ContractViolation; convert so the caller can attach the key.
template <typename Fn>
auto named(Fn&& fn, std::string_view s) {
  try {
    return fn(trim(s));
  } catch (const ContractViolation& e) {
    throw BadValue{e.what()};
  }
}

template <typename T, typename Fn>
std::string join(const std::vector<T>& values, Fn&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += fmt(values[i]);
  }
  return out;
}

std::string int_text(int v) { return std::to_string(v); }
std::string dbl_text(double v) { return format_exact(v); }

struct KeySpec {
  std::string name;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;  // empty string: omit
};

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = [] {
    std::vector<KeySpec> t;
    auto int_key = [&](std::string name, auto member) {
      t.push_back({name, [member](RunConfig& c, std::string_view v) { c.*member = parse_number<int>(v); },
                   [member](const RunConfig& c) { return int_text(c.*member); }});
    };
    auto sim_int = [&](std::string name, int SimConfig::*member) {
      t.push_back({name,
                   [member](RunConfig& c, std::string_view v) { c.sim.*member = parse_number<int>(v); },
                   [member](const RunConfig& c) { return int_text(c.sim.*member); }});
    };
    auto geo = [&](std::string name, double GeometryConfig::*member) {
      t.push_back({name,
                   [member](RunConfig& c, std::string_view v) {
                     c.geometry.*member = parse_number<double>(v);
                   },
                   [member](const RunConfig& c) { return dbl_text(c.geometry.*member); }});
    };

    sim_int("antennas", &SimConfig::antennas);
    sim_int("users", &SimConfig::users);
    sim_int("coherence", &SimConfig::coherence);
    t.push_back({"snr_db",
                 [](RunConfig& c, std::string_view v) { c.sim.snr_db = parse_number<double>(v); },
                 [](const RunConfig& c) { return dbl_text(c.sim.snr_db); }});
    t.push_back({"powers",
                 [](RunConfig& c, std::string_view v) {
                   c.sim.powers = parse_list<double>(v, parse_number<double>);
                 },
                 [](const RunConfig& c) { return join(c.sim.powers, dbl_text); }});
    t.push_back({"constellation",
                 [](RunConfig& c, std::string_view v) {
                   c.sim.constellation_order = named(constellation_order_from_name, v);
                 },
                 [](const RunConfig& c) { return constellation_name(c.sim.constellation_order); }});
    sim_int("bits", &SimConfig::bits);
    t.push_back({"dither", [](RunConfig& c, std::string_view v) { c.sim.dither = parse_bool(v); },
                 [](const RunConfig& c) { return std::string(c.sim.dither ? "true" : "false"); }});
    t.push_back({"detector",
                 [](RunConfig& c, std::string_view v) { c.sim.detector = named(detector_from_name, v); },
                 [](const RunConfig& c) { return std::string(to_string(c.sim.detector)); }});
    t.push_back({"csi",
                 [](RunConfig& c, std::string_view v) { c.sim.csi = named(csi_mode_from_name, v); },
                 [](const RunConfig& c) { return std::string(to_string(c.sim.csi)); }});
    t.push_back({"channel_model",
                 [](RunConfig& c, std::string_view v) {
                   c.sim.channel = named(channel_model_from_name, v);
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.sim.channel)); }});
    t.push_back({"pilots_per_user",
                 [](RunConfig& c, std::string_view v) {
                   if (trim(v) == "optimize") {
                     c.sim.pilots_per_user = 0;
                     return;
                   }
                   const int p = parse_number<int>(v);
                   if (p < 1) throw BadValue{"expected a positive integer or 'optimize'"};
                   c.sim.pilots_per_user = p;
                 },
                 [](const RunConfig& c) {
                   return c.sim.optimize_pilots() ? std::string("optimize")
                                                  : int_text(c.sim.pilots_per_user);
                 }});
    t.push_back({"pilot_candidates",
                 [](RunConfig& c, std::string_view v) {
                   c.sim.pilot_candidates = parse_list<int>(v, parse_number<int>);
                 },
                 [](const RunConfig& c) { return join(c.sim.pilot_candidates, int_text); }});
    sim_int("channel_realizations", &SimConfig::channel_realizations);
    sim_int("noise_trials", &SimConfig::noise_trials);
    sim_int("grid_bins", &SimConfig::grid_bins);
    sim_int("mixture_samples", &SimConfig::mixture_samples);
    sim_int("zf_covariance_trials", &SimConfig::zf_covariance_trials);
    t.push_back({"seed",
                 [](RunConfig& c, std::string_view v) {
                   c.sim.seed = parse_number<std::uint64_t>(v);
                 },
                 [](const RunConfig& c) { return std::to_string(c.sim.seed); }});
    t.push_back({"rate_method",
                 [](RunConfig& c, std::string_view v) {
                   c.rate_method = named(rate_method_from_name, v);
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.rate_method)); }});

    t.push_back({"sweep_bits",
                 [](RunConfig& c, std::string_view v) {
                   c.sweep_bits = parse_list<int>(v, parse_number<int>);
                 },
                 [](const RunConfig& c) { return join(c.sweep_bits, int_text); }});
    t.push_back({"sweep_detectors",
                 [](RunConfig& c, std::string_view v) {
                   c.sweep_detectors = parse_list<Detector>(
                       v, [](std::string_view s) { return named(detector_from_name, s); });
                 },
                 [](const RunConfig& c) {
                   return join(c.sweep_detectors,
                               [](Detector d) { return std::string(to_string(d)); });
                 }});
    t.push_back({"sweep_constellations",
                 [](RunConfig& c, std::string_view v) {
                   c.sweep_constellations = parse_list<int>(
                       v, [](std::string_view s) { return named(constellation_order_from_name, s); });
                 },
                 [](const RunConfig& c) { return join(c.sweep_constellations, constellation_name); }});
    t.push_back({"sweep_csi",
                 [](RunConfig& c, std::string_view v) {
                   c.sweep_csi = parse_list<CsiMode>(
                       v, [](std::string_view s) { return named(csi_mode_from_name, s); });
                 },
                 [](const RunConfig& c) {
                   return join(c.sweep_csi, [](CsiMode m) { return std::string(to_string(m)); });
                 }});
    t.push_back({"snr_values_db",
                 [](RunConfig& c, std::string_view v) {
                   c.snr_values_db = parse_list<double>(v, parse_number<double>);
                 },
                 [](const RunConfig& c) { return join(c.snr_values_db, dbl_text); }});
    t.push_back({"antenna_values",
                 [](RunConfig& c, std::string_view v) {
                   c.antenna_values = parse_list<int>(v, parse_number<int>);
                 },
                 [](const RunConfig& c) { return join(c.antenna_values, int_text); }});
    t.push_back({"coherence_values",
                 [](RunConfig& c, std::string_view v) {
                   c.coherence_values = parse_list<int>(v, parse_number<int>);
                 },
                 [](const RunConfig& c) { return join(c.coherence_values, int_text); }});
    t.push_back({"sir_values_db",
                 [](RunConfig& c, std::string_view v) {
                   c.sir_values_db = parse_list<double>(v, parse_number<double>);
                 },
                 [](const RunConfig& c) { return join(c.sir_values_db, dbl_text); }});
    t.push_back({"spread_values_m",
                 [](RunConfig& c, std::string_view v) {
                   c.spread_values_m = parse_list<double>(v, parse_number<double>);
                 },
                 [](const RunConfig& c) { return join(c.spread_values_m, dbl_text); }});
    int_key("drops", &RunConfig::drops);
    t.push_back({"d1_m", [](RunConfig& c, std::string_view v) { c.d1_m = parse_number<double>(v); },
                 [](const RunConfig& c) { return dbl_text(c.d1_m); }});
    t.push_back({"percentile",
                 [](RunConfig& c, std::string_view v) { c.percentile = parse_number<double>(v); },
                 [](const RunConfig& c) { return dbl_text(c.percentile); }});
    int_key("scatter_symbols", &RunConfig::scatter_symbols);
    int_key("scatter_pilots", &RunConfig::scatter_pilots);
    t.push_back({"table_bits",
                 [](RunConfig& c, std::string_view v) {
                   c.table_bits = parse_list<int>(v, parse_number<int>);
                 },
                 [](const RunConfig& c) { return join(c.table_bits, int_text); }});
    t.push_back({"table_variance",
                 [](RunConfig& c, std::string_view v) { c.table_variance = parse_number<double>(v); },
                 [](const RunConfig& c) { return dbl_text(c.table_variance); }});

    geo("cell_radius_m", &GeometryConfig::cell_radius_m);
    geo("min_distance_m", &GeometryConfig::min_distance_m);
    geo("pathloss_offset_db", &GeometryConfig::pathloss_offset_db);
    geo("pathloss_slope_db_per_decade", &GeometryConfig::pathloss_slope_db_per_decade);
    geo("tx_power_dbm", &GeometryConfig::tx_power_dbm);
    geo("bandwidth_hz", &GeometryConfig::bandwidth_hz);
    geo("noise_psd_dbm_hz", &GeometryConfig::noise_psd_dbm_hz);
    geo("noise_figure_db", &GeometryConfig::noise_figure_db);
    return t;
  }();
  return table;
}

// Leading identifier of a validation message ("bits: must ..." -> "bits").
std::string message_key(const std::string& message) {
  std::size_t n = 0;
  while (n < message.size() && (std::isalnum(static_cast<unsigned char>(message[n])) ||
                                message[n] == '_'))
    ++n;
  return message.substr(0, n);
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : key_table()) out.push_back(k.name);
  return out;
}

SweepPlan RunConfig::plan() const {
  SweepPlan p;
  p.base = sim;
  p.bits = sweep_bits;
  p.detectors = sweep_detectors;
  p.constellations = sweep_constellations;
  p.csi = sweep_csi;
  p.rate_method = rate_method;
  return p;
}

void RunConfig::validate(const std::string& origin) const {
  auto fail = [&](const std::string& message) {
    std::string key = message_key(message);
    const auto it = key_lines.find(key);
    const int line = it == key_lines.end() ? 0 : it->second;
    const auto colon = message.find(':');
    const std::string rest =
        colon != std::string::npos && colon == key.size()
            ? std::string(trim(std::string_view(message).substr(colon + 1)))
            : std::string(trim(std::string_view(message).substr(key.size())));
    if (key.empty()) key = "config";
    throw ConfigError(origin, line, key, rest);
  };
  try {
    sim.validate();
    geometry.validate();
    for (int b : sweep_bits) require(b >= 0 && b <= 8, "sweep_bits: entries must lie in [0, 8]");
    for (int n : antenna_values) require(n >= sim.users, "antenna_values: entries must be >= users");
    for (int t : coherence_values) require(t >= 1, "coherence_values: entries must be >= 1");
    require(drops >= 1, "drops: must be >= 1");
    require(d1_m > 0.0, "d1_m: must be positive");
    require(percentile > 0.0 && percentile <= 1.0, "percentile: must lie in (0, 1]");
    for (double s : spread_values_m) require(s >= 0.0, "spread_values_m: entries must be >= 0");
    require(scatter_symbols >= 1, "scatter_symbols: must be >= 1");
    require(scatter_pilots >= 1, "scatter_pilots: must be >= 1");
    for (int b : table_bits) require(b >= 1 && b <= 8, "table_bits: entries must lie in [1, 8]");
    require(table_variance > 0.0, "table_variance: must be positive");
  } catch (const ConfigError&) {
    throw;
  } catch (const ContractViolation& e) {
    fail(e.what());
  }
}

RunConfig parse_config_text(std::string_view text, const std::string& origin) {
  RunConfig config;
  const auto& table = key_table();
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(origin, line_no, std::string(line), "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto spec = std::find_if(table.begin(), table.end(),
                                   [&](const KeySpec& k) { return k.name == key; });
    if (spec == table.end()) throw ConfigError(origin, line_no, key, "unknown key");
    if (config.key_lines.count(key))
      throw ConfigError(origin, line_no, key,
                        "duplicate key (first set on line " +
                            std::to_string(config.key_lines.at(key)) + ")");
    if (value.empty()) throw ConfigError(origin, line_no, key, "missing value");
    try {
      spec->set(config, value);
    } catch (const BadValue& e) {
      throw ConfigError(origin, line_no, key, e.message);
    }
    config.key_lines[key] = line_no;
  }
  config.validate(origin);
  return config;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), 0, "config", "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

std::string render_config(const RunConfig& config) {
  std::string out;
  for (const auto& k : key_table()) {
    const std::string value = k.get(config);
    if (value.empty()) continue;
    out += k.name + " = " + value + "\n";
  }
  return out;
}

Profile profile_from_name(std::string_view name) {
  if (name == "full") return Profile::full;
  if (name == "ci") return Profile::ci;
  throw ContractViolation("unknown profile '" + std::string(name) + "' (expected full or ci)");
}

std::string_view to_string(Profile profile) { return profile == Profile::ci ? "ci" : "full"; }

void apply_profile(RunConfig& config, Profile profile) {
  if (profile != Profile::ci) return;
  auto cap = [](int& v, int limit) { v = std::min(v, limit); };
  cap(config.sim.channel_realizations, 20);
  cap(config.sim.noise_trials, 500);
  cap(config.sim.mixture_samples, 20'000);
  cap(config.sim.zf_covariance_trials, 500);
  cap(config.drops, 50);
  cap(config.scatter_symbols, 800);
}

}  // namespace qmimo::cli
