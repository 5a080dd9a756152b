#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "quantamimo/bench_cli.hpp"
#include "quantamimo/experiments.hpp"
#include "quantamimo/quantizer.hpp"
#include "quantamimo/rate_approx.hpp"
#include "quantamimo/rate_mc.hpp"

namespace py = pybind11;
using namespace qmimo;

namespace {

#define SWEEP_ARGS                                                                     \
  py::arg("bits") = std::vector<int>{}, py::arg("detectors") = std::vector<Detector>{},     \
      py::arg("constellations") = std::vector<int>{}, py::arg("csi") = std::vector<CsiMode>{}, \
      py::arg("rate_method") = "mc"

SweepPlan make_plan(const SimConfig& base, std::vector<int> bits, std::vector<Detector> detectors,
                    std::vector<int> constellations, std::vector<CsiMode> csi,
                    const std::string& rate_method) {
  SweepPlan p;
  p.base = base;
  p.bits = std::move(bits);
  p.detectors = std::move(detectors);
  p.constellations = std::move(constellations);
  p.csi = std::move(csi);
  p.rate_method = rate_method_from_name(rate_method);
  return p;
}

py::list rows_to_python(const SweepResult& r) {
  py::list out;
  for (const auto& row : r.rows) {
    py::dict d;
    d["sweep_var"] = row.sweep_var;
    d["sweep_value"] = row.sweep_value;
    d["bits"] = row.variant.bits;
    d["detector"] = std::string(to_string(row.variant.detector));
    d["constellation_order"] = row.variant.constellation_order;
    d["csi"] = std::string(to_string(row.variant.csi));
    d["rate"] = row.rate.rate;
    d["ci_halfwidth"] = row.rate.ci_halfwidth;
    d["pilots_used"] = row.rate.pilots_used;
    d["approx_rate"] = row.approx ? py::object(py::float_(row.approx->rate)) : py::object(py::none());
    d["seed"] = row.seed;
    out.append(d);
  }
  return out;
}

// Sweeps release the GIL; the core is pure C++.
template <typename T, typename Fn>
py::list sweep(Fn fn, const SimConfig& base, const std::vector<T>& values, std::vector<int> bits,
               std::vector<Detector> detectors, std::vector<int> constellations,
               std::vector<CsiMode> csi, const std::string& rate_method) {
  const SweepPlan plan = make_plan(base, std::move(bits), std::move(detectors),
                                   std::move(constellations), std::move(csi), rate_method);
  SweepResult r;
  {
    py::gil_scoped_release release;
    r = fn(plan, std::span<const T>(values));
  }
  return rows_to_python(r);
}

}  // namespace

PYBIND11_MODULE(_quantamimo, m) {
  m.doc() = "Quantized massive-MIMO uplink rate simulator";

  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
  py::register_exception<SingularGram>(m, "SingularGram", PyExc_ArithmeticError);

  py::enum_<Detector>(m, "Detector").value("mrc", Detector::mrc).value("zf", Detector::zf);
  py::enum_<CsiMode>(m, "CsiMode")
      .value("estimated", CsiMode::estimated)
      .value("perfect", CsiMode::perfect);
  py::enum_<ChannelModel>(m, "ChannelModel")
      .value("iid", ChannelModel::iid)
      .value("correlated", ChannelModel::correlated)
      .value("nonfading", ChannelModel::nonfading);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("antennas", &SimConfig::antennas)
      .def_readwrite("users", &SimConfig::users)
      .def_readwrite("coherence", &SimConfig::coherence)
      .def_readwrite("snr_db", &SimConfig::snr_db)
      .def_readwrite("powers", &SimConfig::powers)
      .def_readwrite("constellation_order", &SimConfig::constellation_order)
      .def_readwrite("bits", &SimConfig::bits)
      .def_readwrite("dither", &SimConfig::dither)
      .def_readwrite("detector", &SimConfig::detector)
      .def_readwrite("csi", &SimConfig::csi)
      .def_readwrite("channel", &SimConfig::channel)
      .def_readwrite("pilots_per_user", &SimConfig::pilots_per_user)
      .def_readwrite("pilot_candidates", &SimConfig::pilot_candidates)
      .def_readwrite("channel_realizations", &SimConfig::channel_realizations)
      .def_readwrite("noise_trials", &SimConfig::noise_trials)
      .def_readwrite("grid_bins", &SimConfig::grid_bins)
      .def_readwrite("mixture_samples", &SimConfig::mixture_samples)
      .def_readwrite("zf_covariance_trials", &SimConfig::zf_covariance_trials)
      .def_readwrite("seed", &SimConfig::seed)
      .def_readwrite("workers", &SimConfig::workers)
      .def("validate", &SimConfig::validate)
      .def("candidate_slots", &SimConfig::candidate_slots);

  py::class_<RateEstimate>(m, "RateEstimate")
      .def_readonly("rate", &RateEstimate::rate)
      .def_readonly("ci_halfwidth", &RateEstimate::ci_halfwidth)
      .def_readonly("pilots_used", &RateEstimate::pilots_used)
      .def_readonly("channel_realizations", &RateEstimate::channel_realizations)
      .def_readonly("noise_trials", &RateEstimate::noise_trials)
      .def("__repr__", [](const RateEstimate& r) {
        return "RateEstimate(rate=" + cli::format_sig(r.rate) +
               ", ci_halfwidth=" + cli::format_sig(r.ci_halfwidth) +
               ", pilots_used=" + std::to_string(r.pilots_used) + ")";
      });

  py::class_<GeometryConfig>(m, "GeometryConfig")
      .def(py::init<>())
      .def_readwrite("cell_radius_m", &GeometryConfig::cell_radius_m)
      .def_readwrite("min_distance_m", &GeometryConfig::min_distance_m)
      .def_readwrite("pathloss_offset_db", &GeometryConfig::pathloss_offset_db)
      .def_readwrite("pathloss_slope_db_per_decade", &GeometryConfig::pathloss_slope_db_per_decade)
      .def_readwrite("tx_power_dbm", &GeometryConfig::tx_power_dbm)
      .def_readwrite("bandwidth_hz", &GeometryConfig::bandwidth_hz)
      .def_readwrite("noise_psd_dbm_hz", &GeometryConfig::noise_psd_dbm_hz)
      .def_readwrite("noise_figure_db", &GeometryConfig::noise_figure_db);

  m.def("std_normal_cdf", &std_normal_cdf, py::arg("x"));

  m.def(
      "lloyd_max",
      [](int bits, double variance, double tolerance) {
        const QuantizerSpec q = lloyd_max(bits, variance, tolerance);
        py::dict d;
        d["thresholds"] = q.interior_thresholds();
        d["labels"] = q.labels();
        return d;
      },
      py::arg("bits"), py::arg("variance") = 1.0, py::arg("tolerance") = 1e-9);

  m.def(
      "mutual_info_grid",
      [](py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast> values,
         int bins) {
        if (values.ndim() != 2) throw ContractViolation("mutual_info_grid: expected an (M, n) array");
        const auto order = static_cast<int>(values.shape(0));
        const std::span<const cplx> data(values.data(), static_cast<std::size_t>(values.size()));
        return mutual_info_grid(data, order, GridSpec{bins, 0.01});
      },
      py::arg("values"), py::arg("bins") = 64,
      "Plug-in mutual information (bits); row m holds the outputs for input symbol m.");

  m.def(
      "estimate_rate",
      [](const SimConfig& c, int user) {
        py::gil_scoped_release release;
        return estimate_rate(c, user);
      },
      py::arg("config"), py::arg("user") = 0);
  m.def(
      "approx_rate",
      [](const SimConfig& c, int user) {
        py::gil_scoped_release release;
        return approx_rate(c, user);
      },
      py::arg("config"), py::arg("user") = 0);

  m.def(
      "sweep_snr",
      [](const SimConfig& c, const std::vector<double>& v, std::vector<int> b,
         std::vector<Detector> d, std::vector<int> k, std::vector<CsiMode> s,
         const std::string& rm) {
        return sweep<double>(&sweep_snr, c, v, std::move(b), std::move(d), std::move(k),
                             std::move(s), rm);
      },
      py::arg("config"), py::arg("snrs_db"), SWEEP_ARGS);
  m.def(
      "sweep_antennas",
      [](const SimConfig& c, const std::vector<int>& v, std::vector<int> b,
         std::vector<Detector> d, std::vector<int> k, std::vector<CsiMode> s,
         const std::string& rm) {
        return sweep<int>(&sweep_antennas, c, v, std::move(b), std::move(d), std::move(k),
                          std::move(s), rm);
      },
      py::arg("config"), py::arg("antennas"), SWEEP_ARGS);
  m.def(
      "sweep_coherence",
      [](const SimConfig& c, const std::vector<int>& v, std::vector<int> b,
         std::vector<Detector> d, std::vector<int> k, std::vector<CsiMode> s,
         const std::string& rm) {
        return sweep<int>(&sweep_coherence, c, v, std::move(b), std::move(d), std::move(k),
                          std::move(s), rm);
      },
      py::arg("config"), py::arg("coherence"), SWEEP_ARGS);
  m.def(
      "sweep_sir",
      [](const SimConfig& c, const std::vector<double>& v, std::vector<int> b,
         std::vector<Detector> d, std::vector<int> k, std::vector<CsiMode> s,
         const std::string& rm) {
        return sweep<double>(&sweep_sir, c, v, std::move(b), std::move(d), std::move(k),
                             std::move(s), rm);
      },
      py::arg("config"), py::arg("sirs_db"), SWEEP_ARGS);

  m.def("snr_from_distance", &snr_from_distance, py::arg("geometry"), py::arg("distance_m"));
  m.def(
      "drop_interferers",
      [](const GeometryConfig& g, double d1, double spread, int count, std::uint64_t seed) {
        RngStream stream(seed);
        return drop_interferers(stream, g, d1, spread, count);
      },
      py::arg("geometry"), py::arg("d1_m"), py::arg("spread_m"), py::arg("count"),
      py::arg("seed") = 1);
  m.def("nearest_rank_percentile", &nearest_rank_percentile, py::arg("values"), py::arg("q"));

  m.def(
      "scatter_demo",
      [](const SimConfig& c, const std::string& scenario, int symbols, int pilots) {
        std::vector<ScatterPoint> pts;
        const ScatterScenario sc = scatter_scenario_from_name(scenario);
        {
          py::gil_scoped_release release;
          pts = scatter_demo(c, sc, symbols, pilots);
        }
        py::array_t<int> sym(static_cast<py::ssize_t>(pts.size()));
        py::array_t<std::complex<double>> out(static_cast<py::ssize_t>(pts.size()));
        auto s = sym.mutable_unchecked<1>();
        auto o = out.mutable_unchecked<1>();
        for (std::size_t i = 0; i < pts.size(); ++i) {
          s(static_cast<py::ssize_t>(i)) = pts[i].symbol;
          o(static_cast<py::ssize_t>(i)) = pts[i].output;
        }
        return py::make_tuple(sym, out, nearest_centroid_accuracy(pts, c.constellation_order));
      },
      py::arg("config"), py::arg("scenario") = "iid", py::arg("symbols") = 1600,
      py::arg("pilots") = 20,
      "Returns (symbols, outputs, nearest-centroid accuracy).");

  m.def(
      "parse_config_text",
      [](const std::string& text) {
        const cli::RunConfig rc = cli::parse_config_text(text, "<string>");
        rc.validate("<string>");
        return py::make_tuple(rc.sim, rc.geometry, std::string(to_string(rc.rate_method)));
      },
      py::arg("text"), "Parses key = value text into (SimConfig, GeometryConfig, rate_method).");
}
