#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "quantamimo/bench_cli.hpp"
#include "quantamimo/constellation.hpp"
#include "quantamimo/quantizer.hpp"

namespace qmimo::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

template <typename Fn>
std::string to_text(Fn&& fn) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  fn(s);
  return s.str();
}

struct Context {
  const RunOptions& options;
  RunConfig config;
  std::ostream& log;
  json points = json::array();
  std::vector<std::string> outputs;

  void emit(const std::string& name, const std::string& content) {
    write_file(options.out / name, content);
    outputs.push_back(name);
  }
};

template <typename T>
std::vector<T> or_default(const std::vector<T>& values, std::vector<T> fallback) {
  return values.empty() ? fallback : values;
}

template <typename T, typename Sweep>
void run_sweep(Context& ctx, const std::string& title, const std::vector<T>& values, Sweep&& sweep) {
  const SweepPlan plan = ctx.config.plan();
  SweepResult all;
  all.seed = plan.base.seed;
  for (const T& v : values) {
    // Points are independent, so one call per value reproduces the full sweep.
    const std::vector<T> one{v};
    SweepResult r = sweep(plan, std::span<const T>(one));
    all.sweep_var = r.sweep_var;
    all.values.insert(all.values.end(), r.values.begin(), r.values.end());
    all.rows.insert(all.rows.end(), r.rows.begin(), r.rows.end());
    all.point_seconds.insert(all.point_seconds.end(), r.point_seconds.begin(),
                             r.point_seconds.end());
    ctx.points.push_back({{"sweep_value", static_cast<double>(v)},
                          {"seconds", r.point_seconds.empty() ? 0.0 : r.point_seconds.front()}});
    ctx.log << ctx.options.subcommand << ": " << all.sweep_var << " = " << format_exact(v)
            << " done in " << format_sig(r.point_seconds.front(), 3) << " s\n";
  }
  ctx.emit("results.csv", to_text([&](std::ostream& s) { write_csv(all, s); }));
  ctx.emit("plot.svg", render_line_plot(all, title));
}

void cmd_sweep_snr(Context& ctx) {
  const auto values = or_default(ctx.config.snr_values_db, {-10, -5, 0, 5, 10, 15, 20, 25, 30});
  run_sweep(ctx, "Rate versus SNR", values,
            [](const SweepPlan& p, std::span<const double> v) { return sweep_snr(p, v); });
}

void cmd_sweep_n(Context& ctx) {
  const auto values = or_default(ctx.config.antenna_values, {50, 100, 150, 200, 300, 400});
  run_sweep(ctx, "Rate versus number of antennas", values,
            [](const SweepPlan& p, std::span<const int> v) { return sweep_antennas(p, v); });
}

void cmd_sweep_t(Context& ctx) {
  const auto values =
      or_default(ctx.config.coherence_values, {5, 10, 20, 50, 100, 200, 500, 1142});
  run_sweep(ctx, "Rate versus coherence interval", values,
            [](const SweepPlan& p, std::span<const int> v) { return sweep_coherence(p, v); });
}

void cmd_sweep_sir(Context& ctx) {
  // Two users with ten pilots each unless the config says otherwise.
  if (!ctx.config.has("users")) ctx.config.sim.users = 2;
  if (!ctx.config.has("pilots_per_user")) ctx.config.sim.pilots_per_user = 10;
  ctx.config.validate(ctx.options.config.string());
  const auto values = or_default(ctx.config.sir_values_db, {0, -10, -20, -30, -40});
  run_sweep(ctx, "Rate of user 1 versus SIR", values,
            [](const SweepPlan& p, std::span<const double> v) { return sweep_sir(p, v); });
}

void cmd_drops(Context& ctx) {
  if (!ctx.config.has("users")) ctx.config.sim.users = 10;
  if (!ctx.config.has("pilots_per_user")) ctx.config.sim.pilots_per_user = 10;
  ctx.config.validate(ctx.options.config.string());
  require(ctx.config.rate_method == RateMethod::mc, "rate_method: the drops study uses mc");
  const auto values = or_default(ctx.config.spread_values_m, {0, 50, 100, 150});
  run_sweep(ctx, "10% worst rate versus distance spread", values,
            [&](const SweepPlan& p, std::span<const double> v) {
              DistanceSpreadOptions o;
              o.d1_m = ctx.config.d1_m;
              o.spreads_m.assign(v.begin(), v.end());
              o.drops = ctx.config.drops;
              o.percentile = ctx.config.percentile;
              return study_distance_spread(ctx.config.geometry, p, o);
            });
}

void cmd_scatter(Context& ctx) {
  struct Panel {
    const char* name;
    int antennas;
    double snr_db;
    ScatterScenario scenario;
  };
  const Panel panels[] = {
      {"a", 20, 0.0, ScatterScenario::iid},
      {"b", 200, 0.0, ScatterScenario::iid},
      {"c", 200, 20.0, ScatterScenario::iid},
      {"d", 200, 20.0, ScatterScenario::correlated},
      {"e", 200, 20.0, ScatterScenario::nonfading},
      {"f", 200, 20.0, ScatterScenario::nonfading_dither},
  };
  std::ostringstream csv;
  csv.imbue(std::locale::classic());
  csv << "panel,antennas,snr_db,scenario,symbol,input_re,input_im,output_re,output_im\n";
  for (const Panel& p : panels) {
    const auto start = std::chrono::steady_clock::now();
    SimConfig cfg = ctx.config.sim;
    cfg.antennas = p.antennas;
    cfg.snr_db = p.snr_db;
    const auto pts = scatter_demo(cfg, p.scenario, ctx.config.scatter_symbols,
                                  ctx.config.scatter_pilots);
    for (const auto& q : pts)
      csv << p.name << ',' << p.antennas << ',' << format_exact(p.snr_db) << ','
          << to_string(p.scenario) << ',' << q.symbol << ',' << format_sig(q.input.real()) << ','
          << format_sig(q.input.imag()) << ',' << format_sig(q.output.real()) << ','
          << format_sig(q.output.imag()) << '\n';
    const std::string title = "N = " + std::to_string(p.antennas) + ", SNR = " +
                              format_exact(p.snr_db) + " dB, " + std::string(to_string(p.scenario));
    ctx.emit(std::string("scatter_") + p.name + ".svg", render_scatter_plot(pts, title));
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ctx.points.push_back({{"panel", p.name}, {"seconds", secs}});
    ctx.log << "scatter: panel " << p.name << " done in " << format_sig(secs, 3) << " s\n";
  }
  ctx.emit("results.csv", csv.str());
}

void cmd_quantizer_table(Context& ctx) {
  std::ostringstream csv;
  csv.imbue(std::locale::classic());
  csv << "bits,variance,cell,lower,upper,label,iterations\n";
  for (int b : ctx.config.table_bits) {
    const LloydMaxDesign d = design_lloyd_max(b, ctx.config.table_variance);
    const auto& t = d.spec.thresholds();
    const auto& labels = d.spec.labels();
    for (std::size_t i = 0; i < labels.size(); ++i)
      csv << b << ',' << format_exact(ctx.config.table_variance) << ',' << i << ','
          << format_sig(t[i], 10) << ',' << format_sig(t[i + 1], 10) << ','
          << format_sig(labels[i], 10) << ',' << d.iterations << '\n';
    ctx.log << "quantizer-table: " << b << " bits converged after " << d.iterations
            << " iterations\n";
  }
  ctx.emit("results.csv", csv.str());
}

}  // namespace

std::vector<std::string> subcommands() {
  return {"sweep-snr", "sweep-n", "sweep-t", "sweep-sir", "drops", "scatter", "quantizer-table"};
}

void run(const RunOptions& options, std::ostream& log) {
  const auto names = subcommands();
  require(std::find(names.begin(), names.end(), options.subcommand) != names.end(),
          "unknown subcommand '" + options.subcommand + "'");
  Context ctx{options, parse_config(options.config), log, json::array(), {}};
  if (options.seed) ctx.config.sim.seed = *options.seed;
  apply_profile(ctx.config, options.profile);
  ctx.config.validate(options.config.string());

  fs::create_directories(options.out);
  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();

  if (options.subcommand == "sweep-snr") cmd_sweep_snr(ctx);
  else if (options.subcommand == "sweep-n") cmd_sweep_n(ctx);
  else if (options.subcommand == "sweep-t") cmd_sweep_t(ctx);
  else if (options.subcommand == "sweep-sir") cmd_sweep_sir(ctx);
  else if (options.subcommand == "drops") cmd_drops(ctx);
  else if (options.subcommand == "scatter") cmd_scatter(ctx);
  else cmd_quantizer_table(ctx);

  json manifest;
  manifest["tool"] = "quantamimo";
  manifest["subcommand"] = options.subcommand;
  manifest["profile"] = std::string(to_string(options.profile));
  manifest["seed"] = ctx.config.sim.seed;
  manifest["workers"] = ctx.config.sim.resolved_workers();
  manifest["config_path"] = options.config.string();
  // Effective values after profile and subcommand defaults; rerun with
  // --profile full to reproduce.
  manifest["config_text"] = render_config(ctx.config);
  manifest["started_utc"] = started;
  manifest["finished_utc"] = utc_now();
  manifest["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  manifest["points"] = ctx.points;
  ctx.outputs.push_back("manifest.json");
  manifest["outputs"] = ctx.outputs;
  write_file(options.out / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace qmimo::cli
