#include "quantamimo/rate_mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>

#include "quantamimo/constellation.hpp"
#include "quantamimo/parallel.hpp"
#include "quantamimo/quantizer.hpp"

namespace qmimo {

// ---------------------------------------------------------------------------
// Grid mutual information

double mutual_info_grid(std::span<const cplx> values, int order, const GridSpec& grid) {
  require(order >= 1, "mutual_info_grid: need at least one symbol");
  require(!values.empty(), "mutual_info_grid: empty sample list");
  require(values.size() % static_cast<std::size_t>(order) == 0,
          "mutual_info_grid: every symbol needs the same number of samples");
  require(grid.bins_per_dim >= 2, "mutual_info_grid: need at least 2 bins per dimension");

  double lo_re = std::numeric_limits<double>::infinity(), hi_re = -lo_re;
  double lo_im = lo_re, hi_im = -lo_re;
  for (const cplx& v : values) {
    lo_re = std::min(lo_re, v.real());
    hi_re = std::max(hi_re, v.real());
    lo_im = std::min(lo_im, v.imag());
    hi_im = std::max(hi_im, v.imag());
  }
  auto widen = [&](double& lo, double& hi) {
    const double span = hi - lo;
    const double pad = span > 0.0 ? grid.widen * span
                                  : 1e-9 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
    lo -= pad;
    hi += pad;
  };
  widen(lo_re, hi_re);
  widen(lo_im, hi_im);

  const int bins = grid.bins_per_dim;
  const double scale_re = bins / (hi_re - lo_re);
  const double scale_im = bins / (hi_im - lo_im);
  auto bin = [bins](double v, double lo, double scale) {
    const auto b = static_cast<int>((v - lo) * scale);
    return std::clamp(b, 0, bins - 1);
  };

  const std::size_t cells = static_cast<std::size_t>(bins) * static_cast<std::size_t>(bins);
  std::vector<std::uint32_t> cell_of(values.size());
  std::vector<std::uint32_t> total(cells, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto c = static_cast<std::uint32_t>(bin(values[i].real(), lo_re, scale_re) +
                                              bins * bin(values[i].imag(), lo_im, scale_im));
    cell_of[i] = c;
    ++total[c];
  }

  const std::size_t per_symbol = values.size() / static_cast<std::size_t>(order);
  std::vector<std::uint32_t> local(cells, 0);
  std::vector<std::uint32_t> touched;
  touched.reserve(per_symbol);
  double acc = 0.0;
  for (int m = 0; m < order; ++m) {
    const std::size_t begin = static_cast<std::size_t>(m) * per_symbol;
    for (std::size_t i = begin; i < begin + per_symbol; ++i) {
      if (local[cell_of[i]]++ == 0) touched.push_back(cell_of[i]);
    }
    for (std::uint32_t c : touched) {
      const double count = local[c];
      acc += count * std::log2(order * count / total[c]);
      local[c] = 0;
    }
    touched.clear();
  }
  const double mi = acc / static_cast<double>(values.size());
  return std::clamp(mi, 0.0, std::log2(static_cast<double>(order)));
}

double mutual_info_grid(std::span<const SoftSample> samples, int order, const GridSpec& grid) {
  require(!samples.empty(), "mutual_info_grid: empty sample list");
  require(order >= 1, "mutual_info_grid: need at least one symbol");
  std::vector<std::size_t> counts(static_cast<std::size_t>(order), 0);
  for (const auto& s : samples) {
    require(s.symbol >= 0 && s.symbol < order, "mutual_info_grid: symbol index out of range");
    ++counts[s.symbol];
  }
  const std::size_t per_symbol = counts[0];
  for (std::size_t c : counts)
    require(c == per_symbol && c > 0,
            "mutual_info_grid: every symbol needs the same number of samples");

  std::vector<cplx> values(samples.size());
  std::vector<std::size_t> fill(static_cast<std::size_t>(order), 0);
  for (const auto& s : samples)
    values[static_cast<std::size_t>(s.symbol) * per_symbol + fill[s.symbol]++] = s.value;
  return mutual_info_grid(std::span<const cplx>(values), order, grid);
}

// ---------------------------------------------------------------------------
// Monte-Carlo link simulation

const RateEstimate& RateTable::best(std::size_t variant) const {
  const auto& row = rates.at(variant);
  require(!row.empty(), "RateTable::best: no entries");
  std::size_t arg = 0;
  for (std::size_t c = 1; c < row.size(); ++c) {
    const bool better = row[c].rate > row[arg].rate ||
                        (row[c].rate == row[arg].rate && row[c].pilots_used < row[arg].pilots_used);
    if (better) arg = c;
  }
  return row[arg];
}

std::pair<double, double> mean_and_halfwidth(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return {mean, 1.96 * sd / std::sqrt(static_cast<double>(values.size()))};
}

namespace {

constexpr int kBatch = 128;

struct FilterSlot {
  std::size_t variant = 0;
  std::size_t candidate = 0;
  int pilots = 0;
  std::vector<double> re, im;  // a_k per antenna
};

struct AdcGroup {
  QuantizerSpec adc = QuantizerSpec::infinite_precision();
  std::vector<std::size_t> filters;
};

void quantize_block(const QuantizerSpec& adc, const std::vector<double>& in,
                    std::vector<double>& out) {
  if (adc.bits() == 1 && adc.interior_thresholds()[0] == 0.0) {
    const double neg = adc.labels()[0];
    const double pos = adc.labels()[1];
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] >= 0.0 ? pos : neg;
    return;
  }
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = adc.apply(in[i]);
}

ComplexVector filter_column(const ComplexMatrix& h_est, Detector detector, int user) {
  if (detector == Detector::zf) return left_pseudo_inverse_column(h_est, user);
  const double norm2 = h_est.col(user).squaredNorm();
  if (!(norm2 > 0.0)) throw SingularGram(std::numeric_limits<double>::infinity());
  return h_est.col(user) / norm2;
}

// A receiver whose channel estimate cannot be inverted detects nothing in this
// realization; its rate stays at zero.
std::optional<ComplexVector> usable_filter(const ComplexMatrix& h_est, Detector detector, int user) {
  try {
    return filter_column(h_est, detector, user);
  } catch (const SingularGram&) {
    return std::nullopt;
  }
}

class LinkSimulation {
 public:
  LinkSimulation(const SimConfig& cfg, std::span<const ReceiverVariant> variants,
                 std::vector<int> slots, int user)
      : cfg_(cfg),
        variants_(variants.begin(), variants.end()),
        slots_(std::move(slots)),
        user_(user),
        powers_(cfg.user_powers()),
        constellation_(Constellation::qam(cfg.constellation_order)) {
    // Each rail of CN(0, sum rho + 1) is N(0, (sum rho + 1) / 2).
    double total_power = 1.0;
    for (double p : powers_) total_power += p;
    std::map<int, std::size_t> by_bits;
    for (const auto& v : variants_) {
      if (by_bits.count(v.bits)) continue;
      by_bits[v.bits] = groups_.size();
      groups_.push_back({quantizer_for_bits(v.bits, 0.5 * total_power), {}});
    }
    for (const auto& v : variants_) group_of_.push_back(by_bits.at(v.bits));
    for (int p : slots_)
      if (p < cfg_.coherence) max_slots_ = std::max(max_slots_, p);
    dither_snr_ = cfg_.dither ? cfg_.snr_linear() : 0.0;
  }

  /// Rate (bits per channel use) per (variant, candidate) for one realization.
  std::vector<std::vector<double>> run(const RngStream& realization) const;

  std::size_t candidates_of(std::size_t v) const {
    return variants_[v].csi == CsiMode::perfect ? 1 : slots_.size();
  }
  int pilots_of(std::size_t v, std::size_t c) const {
    return variants_[v].csi == CsiMode::perfect ? 0 : slots_[c];
  }

 private:
  void build_filters(const ChannelBlock& block, const RngStream& realization,
                     std::vector<FilterSlot>& filters,
                     std::vector<std::vector<std::size_t>>& group_filters) const;

  const SimConfig& cfg_;
  std::vector<ReceiverVariant> variants_;
  std::vector<int> slots_;
  int user_;
  std::vector<double> powers_;
  Constellation constellation_;
  std::vector<AdcGroup> groups_;
  std::vector<std::size_t> group_of_;
  int max_slots_ = 0;
  double dither_snr_ = 0.0;
};

void LinkSimulation::build_filters(const ChannelBlock& block, const RngStream& realization,
                                   std::vector<FilterSlot>& filters,
                                   std::vector<std::vector<std::size_t>>& group_filters) const {
  const int n_ant = cfg_.antennas;
  const int k_users = cfg_.users;
  group_filters.assign(groups_.size(), {});

  auto add = [&](std::size_t v, std::size_t c, int pilots, const ComplexVector& a) {
    FilterSlot f;
    f.variant = v;
    f.candidate = c;
    f.pilots = pilots;
    f.re.resize(static_cast<std::size_t>(n_ant));
    f.im.resize(static_cast<std::size_t>(n_ant));
    for (int n = 0; n < n_ant; ++n) {
      f.re[n] = a[n].real();
      f.im[n] = a[n].imag();
    }
    group_filters[group_of_[v]].push_back(filters.size());
    filters.push_back(std::move(f));
  };

  // Unquantized pilot observations, one substream per slot so the draws do
  // not depend on which candidates are evaluated.
  const bool need_pilots = max_slots_ > 0 &&
      std::any_of(variants_.begin(), variants_.end(),
                  [](const ReceiverVariant& v) { return v.csi == CsiMode::estimated; });
  std::vector<double> amplitude(static_cast<std::size_t>(k_users));
  for (int u = 0; u < k_users; ++u) amplitude[u] = std::sqrt(k_users * powers_[u]);
  ComplexMatrix y_pilot;
  if (need_pilots) {
    y_pilot.resize(n_ant, max_slots_);
    const RngStream pilot_root = realization.child(kPilotStream);
    for (int t = 0; t < max_slots_; ++t) {
      RngStream s = pilot_root.child(static_cast<std::uint64_t>(t));
      const int u = t % k_users;
      for (int n = 0; n < n_ant; ++n) y_pilot(n, t) = block.h(n, u) * amplitude[u] + s.cgauss(1.0);
      if (dither_snr_ >= 1.0)
        for (int n = 0; n < n_ant; ++n) y_pilot(n, t) += s.cgauss(dither_snr_ - 1.0);
    }
  }

  for (std::size_t g = 0; g < groups_.size(); ++g) {
    // LS estimates for every candidate from running per-user sums.
    std::vector<ComplexMatrix> estimates(slots_.size());
    bool group_needs_ls = false;
    for (std::size_t v = 0; v < variants_.size(); ++v)
      group_needs_ls |= group_of_[v] == g && variants_[v].csi == CsiMode::estimated;
    if (group_needs_ls && max_slots_ > 0) {
      ComplexMatrix sums = ComplexMatrix::Zero(n_ant, k_users);
      const int rounds = max_slots_ / k_users;
      for (int l = 0; l < rounds; ++l) {
        for (int u = 0; u < k_users; ++u) {
          const int t = l * k_users + u;
          for (int n = 0; n < n_ant; ++n) sums(n, u) += groups_[g].adc.apply(y_pilot(n, t));
        }
        const int p = (l + 1) * k_users;
        for (std::size_t c = 0; c < slots_.size(); ++c) {
          if (slots_[c] != p) continue;
          ComplexMatrix est(n_ant, k_users);
          for (int u = 0; u < k_users; ++u) {
            if (!(amplitude[u] > 0.0)) throw SingularGram(std::numeric_limits<double>::infinity());
            est.col(u) = sums.col(u) / ((l + 1) * amplitude[u]);
          }
          estimates[c] = std::move(est);
        }
      }
    }

    for (std::size_t v = 0; v < variants_.size(); ++v) {
      if (group_of_[v] != g) continue;
      if (variants_[v].csi == CsiMode::perfect) {
        if (auto a = usable_filter(block.h, variants_[v].detector, user_)) add(v, 0, 0, *a);
        continue;
      }
      for (std::size_t c = 0; c < slots_.size(); ++c) {
        if (slots_[c] >= cfg_.coherence) continue;  // no data slots left
        if (auto a = usable_filter(estimates[c], variants_[v].detector, user_))
          add(v, c, slots_[c], *a);
      }
    }
  }
}

std::vector<std::vector<double>> LinkSimulation::run(const RngStream& realization) const {
  const int n_ant = cfg_.antennas;
  const int k_users = cfg_.users;
  const int order = constellation_.order();
  const int trials = cfg_.noise_trials;
  const double t_total = cfg_.coherence;

  RngStream fading = realization.child(kFadingStream);
  const ChannelBlock block = draw_channel(cfg_, fading, powers_);

  std::vector<FilterSlot> filters;
  std::vector<std::vector<std::size_t>> group_filters;
  build_filters(block, realization, filters, group_filters);

  // Split-complex channel with the transmit amplitude folded in per user.
  std::vector<double> amp(static_cast<std::size_t>(k_users));
  for (int j = 0; j < k_users; ++j) amp[j] = std::sqrt(powers_[j]);
  std::vector<double> h_re(static_cast<std::size_t>(n_ant * k_users));
  std::vector<double> h_im(h_re.size());
  for (int n = 0; n < n_ant; ++n)
    for (int j = 0; j < k_users; ++j) {
      h_re[n * k_users + j] = block.h(n, j).real();
      h_im[n * k_users + j] = block.h(n, j).imag();
    }

  const std::size_t block_len = static_cast<std::size_t>(n_ant) * kBatch;
  std::vector<double> y_re(block_len), y_im(block_len), r_re(block_len), r_im(block_len);
  std::vector<double> x_re(static_cast<std::size_t>(k_users) * kBatch);
  std::vector<double> x_im(x_re.size());
  std::vector<double> s_re(kBatch), s_im(kBatch);

  std::vector<std::vector<cplx>> values(filters.size(),
                                        std::vector<cplx>(static_cast<std::size_t>(order) * trials));

  const RngStream data_root = realization.child(kDataStream);
  for (int m = 0; m < order; ++m) {
    RngStream s = data_root.child(static_cast<std::uint64_t>(m));
    for (int t0 = 0; t0 < trials; t0 += kBatch) {
      const int b = std::min(kBatch, trials - t0);
      for (int t = 0; t < b; ++t) {
        for (int j = 0; j < k_users; ++j) {
          const cplx sym = j == user_ ? constellation_[m] : constellation_[s.index(order)];
          x_re[j * kBatch + t] = amp[j] * sym.real();
          x_im[j * kBatch + t] = amp[j] * sym.imag();
        }
        for (int n = 0; n < n_ant; ++n) {
          const cplx w = s.cgauss(1.0);
          y_re[n * kBatch + t] = w.real();
          y_im[n * kBatch + t] = w.imag();
        }
        if (dither_snr_ >= 1.0) {
          for (int n = 0; n < n_ant; ++n) {
            const cplx d = s.cgauss(dither_snr_ - 1.0);
            y_re[n * kBatch + t] += d.real();
            y_im[n * kBatch + t] += d.imag();
          }
        }
      }
      // y += H x
      for (int n = 0; n < n_ant; ++n) {
        double* yr = &y_re[n * kBatch];
        double* yi = &y_im[n * kBatch];
        for (int j = 0; j < k_users; ++j) {
          const double hr = h_re[n * k_users + j];
          const double hi = h_im[n * k_users + j];
          const double* xr = &x_re[j * kBatch];
          const double* xi = &x_im[j * kBatch];
          for (int t = 0; t < b; ++t) {
            yr[t] += hr * xr[t] - hi * xi[t];
            yi[t] += hr * xi[t] + hi * xr[t];
          }
        }
      }

      for (std::size_t g = 0; g < groups_.size(); ++g) {
        if (group_filters[g].empty()) continue;
        const bool pass = groups_[g].adc.is_infinite_precision();
        if (!pass) {
          quantize_block(groups_[g].adc, y_re, r_re);
          quantize_block(groups_[g].adc, y_im, r_im);
        }
        const std::vector<double>& rr = pass ? y_re : r_re;
        const std::vector<double>& ri = pass ? y_im : r_im;
        for (std::size_t fi : group_filters[g]) {
          const FilterSlot& f = filters[fi];
          std::fill(s_re.begin(), s_re.end(), 0.0);
          std::fill(s_im.begin(), s_im.end(), 0.0);
          // conj(a) r = (ar r_re + ai r_im) + j (ar r_im - ai r_re)
          for (int n = 0; n < n_ant; ++n) {
            const double ar = f.re[n];
            const double ai = f.im[n];
            const double* pr = &rr[n * kBatch];
            const double* pi = &ri[n * kBatch];
            for (int t = 0; t < b; ++t) {
              s_re[t] += ar * pr[t] + ai * pi[t];
              s_im[t] += ar * pi[t] - ai * pr[t];
            }
          }
          cplx* out = &values[fi][static_cast<std::size_t>(m) * trials + t0];
          for (int t = 0; t < b; ++t) out[t] = {s_re[t], s_im[t]};
        }
      }
    }
  }

  std::vector<std::vector<double>> rates(variants_.size());
  for (std::size_t v = 0; v < variants_.size(); ++v) rates[v].assign(candidates_of(v), 0.0);
  const GridSpec grid{cfg_.grid_bins, 0.01};
  for (std::size_t fi = 0; fi < filters.size(); ++fi) {
    const double mi = mutual_info_grid(std::span<const cplx>(values[fi]), order, grid);
    const double fraction = (t_total - filters[fi].pilots) / t_total;
    rates[filters[fi].variant][filters[fi].candidate] = mi * fraction;
  }
  return rates;
}

}  // namespace

RateTable evaluate_rates(const SimConfig& config, std::span<const ReceiverVariant> variants,
                         std::span<const int> pilot_slots, int user, const RngStream& root) {
  config.validate();
  require(user >= 0 && user < config.users, "evaluate_rates: user index out of range");
  require(!variants.empty(), "evaluate_rates: no receiver variants");
  for (const auto& v : variants) require(v.bits >= 0 && v.bits <= 8, "bits: must lie in [0, 8]");

  const bool any_estimated = std::any_of(variants.begin(), variants.end(), [](const auto& v) {
    return v.csi == CsiMode::estimated;
  });
  std::vector<int> slots(pilot_slots.begin(), pilot_slots.end());
  std::sort(slots.begin(), slots.end());
  slots.erase(std::unique(slots.begin(), slots.end()), slots.end());
  if (any_estimated) require(!slots.empty(), "evaluate_rates: empty pilot candidate list");
  for (int p : slots)
    require(p >= config.users && p % config.users == 0 && p <= config.coherence,
            "pilots: need K <= P <= T with P a multiple of K");

  const LinkSimulation sim(config, variants, slots, user);
  const auto realizations = static_cast<std::size_t>(config.channel_realizations);
  std::vector<std::vector<std::vector<double>>> per_real(realizations);
  parallel_for(realizations, config.resolved_workers(),
               [&](std::size_t r) { per_real[r] = sim.run(root.child(r)); });

  RateTable table;
  table.variants.assign(variants.begin(), variants.end());
  table.pilot_slots = slots;
  table.rates.resize(variants.size());
  std::vector<double> column(realizations);
  for (std::size_t v = 0; v < variants.size(); ++v) {
    for (std::size_t c = 0; c < sim.candidates_of(v); ++c) {
      for (std::size_t r = 0; r < realizations; ++r) column[r] = per_real[r][v][c];
      const auto [mean, half] = mean_and_halfwidth(column);
      table.rates[v].push_back(
          {mean, half, sim.pilots_of(v, c), config.channel_realizations, config.noise_trials});
    }
  }
  return table;
}

RateEstimate estimate_rate(const SimConfig& config, int user) {
  config.validate();
  const ReceiverVariant variant{config.bits, config.detector, config.csi};
  const RngStream root(config.seed);
  if (config.csi == CsiMode::perfect) {
    return evaluate_rates(config, std::span(&variant, 1), {}, user, root).best(0);
  }
  const auto slots = config.candidate_slots();
  if (slots.empty()) {
    // T < K: no room for orthogonal pilots.
    return {0.0, 0.0, 0, config.channel_realizations, config.noise_trials};
  }
  return evaluate_rates(config, std::span(&variant, 1), slots, user, root).best(0);
}

std::pair<int, RateEstimate> optimize_pilots(const SimConfig& config,
                                             std::span<const int> candidates, int user) {
  require(!candidates.empty(), "optimize_pilots: empty candidate list");
  for (int p : candidates)
    require(p >= config.users && p % config.users == 0 && p < config.coherence,
            "optimize_pilots: candidates must be multiples of K within [K, T)");
  SimConfig cfg = config;
  cfg.csi = CsiMode::estimated;
  const ReceiverVariant variant{cfg.bits, cfg.detector, CsiMode::estimated};
  const auto table = evaluate_rates(cfg, std::span(&variant, 1), candidates, user,
                                    RngStream(cfg.seed));
  const auto& best = table.best(0);
  return {best.pilots_used, best};
}

}  // namespace qmimo
