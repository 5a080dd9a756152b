#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quantamimo/channel.hpp"
#include "quantamimo/experiments.hpp"
#include "quantamimo/sim_config.hpp"

namespace qmimo::cli {

/// Bad config file entry.  what() reads "<origin>:<line>: <key>: <message>".
class ConfigError : public ContractViolation {
 public:
  ConfigError(const std::string& origin, int line, const std::string& key,
              const std::string& message);
  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

/// Everything a run reads from the flat key = value config file.  Empty
/// lists mean "use the subcommand default".
struct RunConfig {
  SimConfig sim;
  GeometryConfig geometry;
  RateMethod rate_method = RateMethod::mc;

  std::vector<int> sweep_bits;
  std::vector<Detector> sweep_detectors;
  std::vector<int> sweep_constellations;
  std::vector<CsiMode> sweep_csi;

  std::vector<double> snr_values_db;
  std::vector<int> antenna_values;
  std::vector<int> coherence_values;
  std::vector<double> sir_values_db;
  std::vector<double> spread_values_m;
  int drops = 1000;
  double d1_m = 185.0;
  double percentile = 0.1;

  int scatter_symbols = 1600;
  int scatter_pilots = 20;

  std::vector<int> table_bits{1, 2, 3, 4};
  double table_variance = 1.0;

  /// Keys present in the file, with their line numbers.
  std::map<std::string, int> key_lines;

  bool has(const std::string& key) const { return key_lines.count(key) > 0; }
  SweepPlan plan() const;
  /// Validates every section; errors name the offending key.
  void validate(const std::string& origin = "config") const;
};

/// Names of every accepted key, in documentation order.
std::vector<std::string> config_keys();

RunConfig parse_config_text(std::string_view text, const std::string& origin = "config");
RunConfig parse_config(const std::filesystem::path& path);
/// Renders `config` back to key = value text that parses to the same values.
std::string render_config(const RunConfig& config);

enum class Profile { full, ci };
Profile profile_from_name(std::string_view name);
std::string_view to_string(Profile profile);
/// The ci profile caps trial, drop and sample counts for quick runs.
void apply_profile(RunConfig& config, Profile profile);

/// Six significant digits, '.' decimal point regardless of locale.
std::string format_sig(double value, int digits = 6);
/// Shortest text that parses back to the same double.
std::string format_exact(double value);

inline constexpr std::string_view kCsvHeader =
    "sweep_var,sweep_value,bits,detector,constellation,rate_bpcu,ci_halfwidth,pilots_used,seed";

void write_csv(const SweepResult& result, std::ostream& out);
/// Inverse of write_csv for every emitted field.
SweepResult parse_csv(std::istream& in);

void write_scatter_csv(std::span<const ScatterPoint> points, std::ostream& out);

/// Rate against the sweep variable, one polyline per variant (approximation
/// series dashed).
std::string render_line_plot(const SweepResult& result, const std::string& title);
std::string render_scatter_plot(std::span<const ScatterPoint> points, const std::string& title);

struct RunOptions {
  std::string subcommand;
  std::filesystem::path config;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  Profile profile = Profile::full;
};

std::vector<std::string> subcommands();

/// Executes one subcommand, writing results.csv, manifest.json and plots to
/// options.out.  Progress goes to `log`.  Throws on any failure.
void run(const RunOptions& options, std::ostream& log);

}  // namespace qmimo::cli
