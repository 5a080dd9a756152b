#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "quantamimo/bench_cli.hpp"
#include "quantamimo/constellation.hpp"

namespace qmimo::cli {

std::string format_sig(double value, int digits) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) value = 0.0;  // drop the sign of -0
  std::array<char, 64> buf{};
  const auto [ptr, ec] =
      std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, digits);
  return {buf.data(), ptr};
}

std::string format_exact(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return {buf.data(), ptr};
}

namespace {

constexpr std::string_view kCsiColumn = "csi";
constexpr std::string_view kApproxColumns = "approx_rate_bpcu,approx_ci_halfwidth";

double parse_double(std::string_view s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(!s.empty() && ec == std::errc() && ptr == s.data() + s.size(),
          "csv: bad number '" + std::string(s) + "'");
  return v;
}

template <typename T>
T parse_integer(std::string_view s) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(!s.empty() && ec == std::errc() && ptr == s.data() + s.size(),
          "csv: bad integer '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

// Roughly five round-number ticks covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi) {
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step)
    out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  return out;
}

constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                  "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
                                                  "#bcbd22", "#17becf"};

struct Frame {
  double width = 720, height = 440;
  double left = 70, right = 190, top = 40, bottom = 55;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
  double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

void svg_open(std::ostringstream& s, const Frame& f, const std::string& title) {
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << f.width
    << "\" height=\"" << f.height << "\" viewBox=\"0 0 " << f.width << ' ' << f.height << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << f.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\""
    << " font-size=\"15\">" << xml_escape(title) << "</text>\n";
}

void svg_axes(std::ostringstream& s, const Frame& f, const std::string& xlabel,
              const std::string& ylabel) {
  const double xa = f.px(f.x0), xb = f.px(f.x1), ya = f.py(f.y0), yb = f.py(f.y1);
  s << "<g stroke=\"black\" fill=\"none\">\n"
    << "<rect x=\"" << xa << "\" y=\"" << yb << "\" width=\"" << xb - xa << "\" height=\""
    << ya - yb << "\"/>\n</g>\n";
  s << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (double t : nice_ticks(f.x0, f.x1)) {
    const double x = f.px(t);
    s << "<line x1=\"" << x << "\" y1=\"" << ya << "\" x2=\"" << x << "\" y2=\"" << ya + 5
      << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << x << "\" y=\"" << ya + 18 << "\" text-anchor=\"middle\">"
      << format_sig(t, 4) << "</text>\n";
  }
  for (double t : nice_ticks(f.y0, f.y1)) {
    const double y = f.py(t);
    s << "<line x1=\"" << xa - 5 << "\" y1=\"" << y << "\" x2=\"" << xa << "\" y2=\"" << y
      << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << xa - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
      << format_sig(t, 4) << "</text>\n";
  }
  s << "<text x=\"" << (xa + xb) / 2 << "\" y=\"" << f.height - 12
    << "\" text-anchor=\"middle\">" << xml_escape(xlabel) << "</text>\n"
    << "<text transform=\"translate(18," << (ya + yb) / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << xml_escape(ylabel) << "</text>\n</g>\n";
}

std::string variant_label(const SweepVariant& v) {
  std::string s = v.bits == 0 ? "inf-bit" : std::to_string(v.bits) + "-bit";
  s += " " + std::string(to_string(v.detector)) + " " + constellation_name(v.constellation_order);
  if (v.csi == CsiMode::perfect) s += " perfect";
  return s;
}

}  // namespace

void write_csv(const SweepResult& result, std::ostream& out) {
  const bool with_csi = std::any_of(result.rows.begin(), result.rows.end(), [](const SweepRow& r) {
    return r.variant.csi != CsiMode::estimated;
  });
  const bool with_approx = std::any_of(result.rows.begin(), result.rows.end(),
                                       [](const SweepRow& r) { return r.approx.has_value(); });
  out << kCsvHeader;
  if (with_csi) out << ',' << kCsiColumn;
  if (with_approx) out << ',' << kApproxColumns;
  out << '\n';
  for (const auto& r : result.rows) {
    out << r.sweep_var << ',' << format_exact(r.sweep_value) << ',' << r.variant.bits << ','
        << to_string(r.variant.detector) << ',' << constellation_name(r.variant.constellation_order)
        << ',' << format_sig(r.rate.rate) << ',' << format_sig(r.rate.ci_halfwidth) << ','
        << r.rate.pilots_used << ',' << r.seed;
    if (with_csi) out << ',' << to_string(r.variant.csi);
    if (with_approx) {
      if (r.approx)
        out << ',' << format_sig(r.approx->rate) << ',' << format_sig(r.approx->ci_halfwidth);
      else
        out << ",,";
    }
    out << '\n';
  }
}

SweepResult parse_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "csv: missing header");
  const auto header = split(line);
  const auto base = split(kCsvHeader);
  require(header.size() >= base.size() && std::equal(base.begin(), base.end(), header.begin()),
          "csv: unexpected header '" + line + "'");
  std::map<std::string_view, std::size_t> extra;
  for (std::size_t i = base.size(); i < header.size(); ++i) extra[header[i]] = i;
  for (const auto& [name, idx] : extra)
    require(name == kCsiColumn || name == "approx_rate_bpcu" || name == "approx_ci_halfwidth",
            "csv: unknown column '" + std::string(name) + "'");
  require(extra.count("approx_rate_bpcu") == extra.count("approx_ci_halfwidth"),
          "csv: approximation columns come in pairs");

  SweepResult result;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    require(f.size() == header.size(), "csv: wrong field count in '" + line + "'");
    SweepRow row;
    row.sweep_var = std::string(f[0]);
    row.sweep_value = parse_double(f[1]);
    row.variant.bits = parse_integer<int>(f[2]);
    row.variant.detector = detector_from_name(f[3]);
    row.variant.constellation_order = constellation_order_from_name(f[4]);
    row.rate.rate = parse_double(f[5]);
    row.rate.ci_halfwidth = parse_double(f[6]);
    row.rate.pilots_used = parse_integer<int>(f[7]);
    row.seed = parse_integer<std::uint64_t>(f[8]);
    if (extra.count(kCsiColumn)) row.variant.csi = csi_mode_from_name(f[extra.at(kCsiColumn)]);
    if (extra.count("approx_rate_bpcu") && !f[extra.at("approx_rate_bpcu")].empty()) {
      RateEstimate a;
      a.rate = parse_double(f[extra.at("approx_rate_bpcu")]);
      a.ci_halfwidth = parse_double(f[extra.at("approx_ci_halfwidth")]);
      a.pilots_used = 0;
      row.approx = a;
    }
    if (result.rows.empty()) {
      result.sweep_var = row.sweep_var;
      result.seed = row.seed;
    }
    if (result.values.empty() || result.values.back() != row.sweep_value)
      result.values.push_back(row.sweep_value);
    result.rows.push_back(std::move(row));
  }
  return result;
}

void write_scatter_csv(std::span<const ScatterPoint> points, std::ostream& out) {
  out << "symbol,input_re,input_im,output_re,output_im\n";
  for (const auto& p : points)
    out << p.symbol << ',' << format_sig(p.input.real()) << ',' << format_sig(p.input.imag())
        << ',' << format_sig(p.output.real()) << ',' << format_sig(p.output.imag()) << '\n';
}

std::string render_line_plot(const SweepResult& result, const std::string& title) {
  struct Series {
    std::string label;
    bool dashed = false;
    std::vector<std::pair<double, double>> points;
  };
  std::vector<Series> series;
  std::map<std::string, std::size_t> index;
  auto add = [&](const std::string& label, bool dashed, double x, double y) {
    auto it = index.find(label);
    if (it == index.end()) {
      it = index.emplace(label, series.size()).first;
      series.push_back({label, dashed, {}});
    }
    series[it->second].points.emplace_back(x, y);
  };
  for (const auto& r : result.rows) {
    const std::string label = variant_label(r.variant);
    add(label, false, r.sweep_value, r.rate.rate);
    if (r.approx) add(label + " approx", true, r.sweep_value, r.approx->rate);
  }

  Frame f;
  if (!result.rows.empty()) {
    f.x0 = f.x1 = result.rows.front().sweep_value;
    double ymax = 0.0;
    for (const auto& s : series)
      for (const auto& [x, y] : s.points) {
        f.x0 = std::min(f.x0, x);
        f.x1 = std::max(f.x1, x);
        ymax = std::max(ymax, y);
      }
    if (f.x1 == f.x0) {
      f.x0 -= 1.0;
      f.x1 += 1.0;
    }
    f.y1 = ymax > 0.0 ? ymax * 1.08 : 1.0;
  }

  std::ostringstream s;
  s.imbue(std::locale::classic());
  svg_open(s, f, title);
  svg_axes(s, f, result.sweep_var, "rate [bit/channel use]");
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % kPalette.size()];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\"";
    if (series[i].dashed) s << " stroke-dasharray=\"6,4\"";
    s << " points=\"";
    for (const auto& [x, y] : series[i].points) s << format_sig(f.px(x)) << ',' << format_sig(f.py(y)) << ' ';
    s << "\"/>\n";
    if (!series[i].dashed)
      for (const auto& [x, y] : series[i].points)
        s << "<circle cx=\"" << format_sig(f.px(x)) << "\" cy=\"" << format_sig(f.py(y))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    const double ly = f.top + 14.0 * static_cast<double>(i) + 10.0;
    const double lx = f.width - f.right + 12.0;
    s << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 20 << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"2\""
      << (series[i].dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n"
      << "<text x=\"" << lx + 25 << "\" y=\"" << ly + 4
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(series[i].label)
      << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string render_scatter_plot(std::span<const ScatterPoint> points, const std::string& title) {
  Frame f;
  f.width = 460;
  f.height = 460;
  f.right = 30;
  double lim = 0.0;
  for (const auto& p : points)
    if (std::isfinite(std::abs(p.output)))
      lim = std::max({lim, std::abs(p.output.real()), std::abs(p.output.imag())});
  lim = lim > 0.0 ? lim * 1.1 : 1.0;
  f.x0 = f.y0 = -lim;
  f.x1 = f.y1 = lim;

  std::ostringstream s;
  s.imbue(std::locale::classic());
  svg_open(s, f, title);
  svg_axes(s, f, "real part", "imaginary part");
  for (const auto& p : points) {
    if (!std::isfinite(std::abs(p.output))) continue;
    s << "<circle cx=\"" << format_sig(f.px(p.output.real())) << "\" cy=\""
      << format_sig(f.py(p.output.imag())) << "\" r=\"1.6\" fill=\""
      << kPalette[static_cast<std::size_t>(p.symbol) % kPalette.size()] << "\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace qmimo::cli
