#include "misodof/rate_evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace misodof {

namespace {

// Trials are reduced in fixed-size blocks so sums do not depend on threads.
constexpr std::size_t kTrialBlock = 64;

struct SlotSignals {
  std::vector<ComplexVec2> precoder;
  std::vector<double> power;
  std::vector<std::array<Complex, 2>> gain;  // true_channel(k)^H w
  std::vector<std::array<double, 2>> rx;     // |gain|^2 * power
};

SlotSignals slot_signals(const SlotPlan& slot, const ChannelRealization& ch, double p) {
  SlotSignals s;
  const std::size_t n = slot.layers.size();
  s.precoder.resize(n);
  s.power.resize(n);
  s.gain.resize(n);
  s.rx.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const SymbolLayer& l = slot.layers[i];
    s.precoder[i] = precoder_vector(l.precoder, ch);
    s.power[i] = l.power.at(p);
    for (User u : {User::One, User::Two}) {
      const int k = index_of(u);
      s.gain[i][k] = inner(ch.true_channel(u), s.precoder[i]);
      s.rx[i][k] = std::norm(s.gain[i][k]) * s.power[i];
    }
  }
  return s;
}

struct CompiledSlot {
  std::vector<std::size_t> multicast;              // positions, decode order
  std::array<std::vector<std::size_t>, 2> own;     // private positions per user
  std::array<int, 2> observed_link{-1, -1};        // link overheard by user k
};

struct CompiledLink {
  std::size_t slot_pos = 0;
  User observer = User::One;
  int carrier_multicast = -1;
  double quant_prelog = 0.0;
  std::string carrier_id;
};

struct CompiledPlan {
  std::vector<const SlotPlan*> slots;
  std::vector<CompiledSlot> info;
  std::vector<std::size_t> layer_offset;
  std::size_t n_layers = 0;
  std::vector<std::size_t> multicast_global;  // global layer index per multicast layer
  std::vector<int> multicast_of_global;       // -1 for private layers
  std::vector<CompiledLink> links;
};

CompiledPlan compile(const SchemePlan& plan) {
  CompiledPlan c;
  c.slots = plan.schedule();
  c.info.resize(c.slots.size());
  for (std::size_t s = 0; s < c.slots.size(); ++s) {
    c.layer_offset.push_back(c.n_layers);
    const auto& layers = c.slots[s]->layers;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const SymbolLayer& l = layers[i];
      if (l.multicast()) {
        c.info[s].multicast.push_back(i);
        c.multicast_of_global.push_back(static_cast<int>(c.multicast_global.size()));
        c.multicast_global.push_back(c.n_layers + i);
      } else {
        c.info[s].own[l.owner == Owner::User1 ? 0 : 1].push_back(i);
        c.multicast_of_global.push_back(-1);
      }
    }
    c.n_layers += layers.size();
  }

  auto slot_pos_of = [&](std::size_t index) {
    for (std::size_t s = 0; s < c.slots.size(); ++s) {
      if (c.slots[s]->index == index) return s;
    }
    throw std::invalid_argument("slot " + std::to_string(index) + " not in schedule");
  };
  for (const auto& link : plan.links) {
    CompiledLink cl;
    cl.slot_pos = slot_pos_of(link.source_slot);
    cl.observer = link.observer;
    cl.quant_prelog = link.quant_prelog;
    cl.carrier_id = link.retransmit_layer;
    std::size_t carrier_slot = 0;
    const SymbolLayer* carrier = plan.find_layer(link.retransmit_layer, &carrier_slot);
    const std::size_t cs = slot_pos_of(carrier_slot);
    const auto pos = static_cast<std::size_t>(carrier - c.slots[cs]->layers.data());
    cl.carrier_multicast = c.multicast_of_global[c.layer_offset[cs] + pos];
    c.info[cl.slot_pos].observed_link[index_of(link.observer)] = static_cast<int>(c.links.size());
    c.links.push_back(std::move(cl));
  }
  return c;
}

// SIC rate of the j-th multicast layer of a slot at receiver k.
double multicast_mi(const CompiledSlot& info, const SlotSignals& sig, std::size_t j, int k) {
  double below = 0.0;
  for (std::size_t m = j + 1; m < info.multicast.size(); ++m) below += sig.rx[info.multicast[m]][k];
  for (const auto& own : info.own) {
    for (std::size_t i : own) below += sig.rx[i][k];
  }
  return std::log2(1.0 + sig.rx[info.multicast[j]][k] / (1.0 + below));
}

double overheard_power(const CompiledSlot& info, const SlotSignals& sig, int observer) {
  double s = 0.0;
  for (std::size_t i : info.own[1 - observer]) s += sig.rx[i][observer];
  return s;
}

// Gaussian reverse water-filling: the level theta >= 1 at which
// mean_i max(0, log2(sigma2_i / theta)) equals the available rate.
double water_level(std::span<const double> sigma2, double rate_bits) {
  auto rate_at = [&](double log2_theta) {
    double r = 0.0;
    for (double s : sigma2) r += std::max(0.0, std::log2(s) - log2_theta);
    return r / static_cast<double>(sigma2.size());
  };
  if (rate_at(0.0) <= rate_bits) return 1.0;
  double lo = 0.0;
  double hi = std::log2(*std::max_element(sigma2.begin(), sigma2.end()));
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    (rate_at(mid) > rate_bits ? lo : hi) = mid;
  }
  return std::exp2(0.5 * (lo + hi));
}

template <class F>
void for_each_block(std::size_t n_blocks, unsigned threads, F&& fn) {
  unsigned n_threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, n_blocks));
  if (n_threads <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) fn(b);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < n_threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t b = t; b < n_blocks; b += n_threads) fn(b);
    });
  }
}

struct BlockSums {
  std::vector<double> layer_rate;
  std::vector<double> residual;
};

}  // namespace

double log2_det_identity_plus_gram(std::span<const Complex> a, std::size_t rows, std::size_t cols) {
  if (a.size() != rows * cols) throw std::invalid_argument("log2_det_identity_plus_gram: size mismatch");
  const std::size_t len = rows + cols;
  std::vector<Complex> q(len * cols, Complex{});
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t r = 0; r < rows; ++r) q[j * len + r] = a[j * rows + r];
    q[j * len + rows + j] = 1.0;
  }
  double log_det = 0.0;
  for (std::size_t j = 0; j < cols; ++j) {
    Complex* qj = &q[j * len];
    for (std::size_t i = 0; i < j; ++i) {
      const Complex* qi = &q[i * len];
      Complex proj{};
      for (std::size_t r = 0; r < len; ++r) proj += std::conj(qi[r]) * qj[r];
      for (std::size_t r = 0; r < len; ++r) qj[r] -= proj * qi[r];
    }
    double nrm = 0.0;
    for (std::size_t r = 0; r < len; ++r) nrm += std::norm(qj[r]);
    nrm = std::sqrt(nrm);
    log_det += 2.0 * std::log2(nrm);
    for (std::size_t r = 0; r < len; ++r) qj[r] /= nrm;
  }
  return std::max(log_det, 0.0);
}

CommonLayerRates rate_common_layer(const SlotPlan& slot, const SymbolLayer& layer, const ChannelRealization& ch,
                                   const SnrPoint& snr) {
  CompiledSlot info;
  std::size_t j = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < slot.layers.size(); ++i) {
    const SymbolLayer& l = slot.layers[i];
    if (l.multicast()) {
      if (&l == &layer || l.id == layer.id) j = info.multicast.size();
      info.multicast.push_back(i);
    } else {
      info.own[l.owner == Owner::User1 ? 0 : 1].push_back(i);
    }
  }
  if (j == std::numeric_limits<std::size_t>::max()) {
    throw std::invalid_argument("rate_common_layer: " + layer.id + " is not a multicast layer of slot " +
                                std::to_string(slot.index));
  }
  const SlotSignals sig = slot_signals(slot, ch, snr.p());
  return {multicast_mi(info, sig, j, 0), multicast_mi(info, sig, j, 1)};
}

double rate_zf_symbol(const SymbolLayer& layer, User receiver, const ChannelRealization& ch, const SnrPoint& snr,
                      const NoiseAccounting& noise) {
  const Complex g = inner(ch.true_channel(receiver), precoder_vector(layer.precoder, ch));
  return std::log2(1.0 + std::norm(g) * layer.power.at(snr.p()) /
                             (1.0 + noise.residual_interference + noise.quantization_error));
}

double rate_joint_vector(std::span<const SymbolLayer> layers, std::span<const ObservationRow> rows,
                         const ChannelRealization& ch, const SnrPoint& snr) {
  std::vector<Complex> a(rows.size() * layers.size());
  for (const auto& row : rows) {
    if (!(row.noise_power > 0.0)) throw std::invalid_argument("rate_joint_vector: singular noise covariance");
  }
  for (std::size_t c = 0; c < layers.size(); ++c) {
    const ComplexVec2 w = precoder_vector(layers[c].precoder, ch);
    const double pw = layers[c].power.at(snr.p());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      a[c * rows.size() + r] = inner(rows[r].channel, w) * std::sqrt(pw / rows[r].noise_power);
    }
  }
  return log2_det_identity_plus_gram(a, rows.size(), layers.size());
}

RateLedger evaluate_plan(const SchemePlan& plan, const SnrPoint& snr, const MonteCarloOptions& options) {
  if (options.n_trials == 0) throw std::invalid_argument("evaluate_plan: n_trials must be >= 1");
  if (const auto diags = validate_plan(plan); !diags.empty()) {
    throw std::invalid_argument("evaluate_plan: invalid plan: " + diags.front());
  }
  const CompiledPlan c = compile(plan);
  const std::size_t n = options.n_trials;
  const std::size_t n_mc = c.multicast_global.size();
  const std::size_t n_links = c.links.size();
  const std::size_t n_blocks = (n + kTrialBlock - 1) / kTrialBlock;
  const double p = snr.p();

  // Pass 1: multicast MIs and overheard-interference variances per trial.
  std::vector<std::array<double, 2>> mi(n * n_mc);
  std::vector<double> sigma2(n * n_links);
  for_each_block(n_blocks, options.threads, [&](std::size_t b) {
    for (std::size_t t = b * kTrialBlock; t < std::min(n, (b + 1) * kTrialBlock); ++t) {
      Rng rng = Rng::for_stream(options.seed, t);
      for (std::size_t s = 0; s < c.slots.size(); ++s) {
        const ChannelRealization ch = sample_channel(snr, rng);
        const SlotSignals sig = slot_signals(*c.slots[s], ch, p);
        const CompiledSlot& info = c.info[s];
        for (std::size_t j = 0; j < info.multicast.size(); ++j) {
          const int m = c.multicast_of_global[c.layer_offset[s] + info.multicast[j]];
          mi[t * n_mc + m] = {multicast_mi(info, sig, j, 0), multicast_mi(info, sig, j, 1)};
        }
        for (int k = 0; k < 2; ++k) {
          if (info.observed_link[k] >= 0) {
            sigma2[t * n_links + info.observed_link[k]] = overheard_power(info, sig, k);
          }
        }
      }
    }
  });

  std::vector<CommonLayerRates> mean_mi(n_mc);
  for (std::size_t m = 0; m < n_mc; ++m) {
    for (std::size_t t = 0; t < n; ++t) {
      mean_mi[m].user1 += mi[t * n_mc + m][0];
      mean_mi[m].user2 += mi[t * n_mc + m][1];
    }
    mean_mi[m].user1 /= static_cast<double>(n);
    mean_mi[m].user2 /= static_cast<double>(n);
  }

  std::vector<double> usable(n_links), level(n_links);
  {
    std::vector<double> column(n);
    for (std::size_t l = 0; l < n_links; ++l) {
      const CompiledLink& link = c.links[l];
      usable[l] = std::min(link.quant_prelog * snr.log2_p(), mean_mi[link.carrier_multicast].deliverable());
      for (std::size_t t = 0; t < n; ++t) column[t] = std::max(sigma2[t * n_links + l], 1e-300);
      level[l] = water_level(column, usable[l]);
    }
  }

  // Pass 2: private-layer rates with the quantization distortions fixed.
  RateLedger ledger{snr, 0, 0, {}, {}, {}, {0.0, 0.0}, 0.0, {}};
  ledger.n_trials = n;
  ledger.seed = options.seed;
  ledger.channel_uses = plan.channel_uses();
  ledger.trial_rate_per_use.resize(n);
  std::vector<BlockSums> blocks(n_blocks);

  for_each_block(n_blocks, options.threads, [&](std::size_t b) {
    BlockSums& sums = blocks[b];
    sums.layer_rate.assign(c.n_layers, 0.0);
    sums.residual.assign(n_links, 0.0);
    std::vector<Complex> a;
    std::vector<ObservationRow> rows;
    for (std::size_t t = b * kTrialBlock; t < std::min(n, (b + 1) * kTrialBlock); ++t) {
      Rng rng = Rng::for_stream(options.seed, t);
      Rng quant_rng = Rng::for_stream(options.seed, t, 1);
      std::array<double, 2> total{0.0, 0.0};
      for (std::size_t s = 0; s < c.slots.size(); ++s) {
        const SlotPlan& slot = *c.slots[s];
        const ChannelRealization ch = sample_channel(snr, rng);
        const SlotSignals sig = slot_signals(slot, ch, p);
        const CompiledSlot& info = c.info[s];
        const std::size_t off = c.layer_offset[s];

        std::array<double, 2> var{0.0, 0.0}, dist{0.0, 0.0};
        for (int k = 0; k < 2; ++k) {
          const int l = info.observed_link[k];
          if (l < 0) continue;
          var[k] = sigma2[t * n_links + l];
          dist[k] = std::min(var[k], level[l]);
          const Complex eta_hat = std::sqrt(var[k] - dist[k]) * quant_rng.complex_normal();
          const Complex err = std::sqrt(dist[k]) * quant_rng.complex_normal();
          const QuantizedInterference qi{{}, eta_hat + err, err};
          sums.residual[l] += std::norm(qi.clean_value - qi.reconstructed());
        }

        // Multicast data layers count at the receiver with the lower mean MI.
        for (std::size_t j = 0; j < info.multicast.size(); ++j) {
          const SymbolLayer& layer = slot.layers[info.multicast[j]];
          if (layer.owner == Owner::Common) continue;
          const int m = c.multicast_of_global[off + info.multicast[j]];
          const int bottleneck = mean_mi[m].user1 <= mean_mi[m].user2 ? 0 : 1;
          const double r = mi[t * n_mc + m][bottleneck];
          sums.layer_rate[off + info.multicast[j]] += r;
          total[layer.owner == Owner::User1 ? 0 : 1] += r;
        }

        for (int k = 0; k < 2; ++k) {
          const auto& own = info.own[k];
          if (own.empty()) continue;
          const User me = k == 0 ? User::One : User::Two;
          rows.clear();
          const double direct_extra =
              info.observed_link[k] >= 0 ? dist[k] : overheard_power(info, sig, k);
          rows.push_back({ch.true_channel(me), 1.0 + direct_extra});
          // The other receiver's quantized interference observes our symbols.
          // Forward-channel noise of the reverse water-filling test channel.
          const int o = 1 - k;
          if (info.observed_link[o] >= 0 && dist[o] < var[o]) {
            rows.push_back({ch.true_channel(other(me)), dist[o] * var[o] / (var[o] - dist[o])});
          }

          // Chain rule in decode order: I(x_i; obs | x_1..x_{i-1}).
          const std::size_t nl = own.size();
          a.assign(rows.size() * nl, Complex{});
          for (std::size_t ci = 0; ci < nl; ++ci) {
            const std::size_t li = own[ci];
            for (std::size_t r = 0; r < rows.size(); ++r) {
              const Complex g = r == 0 ? sig.gain[li][k] : sig.gain[li][o];
              a[ci * rows.size() + r] = g * std::sqrt(sig.power[li] / rows[r].noise_power);
            }
          }
          double tail = 0.0;
          std::vector<double> suffix(nl + 1, 0.0);
          for (std::size_t ci = nl; ci-- > 0;) {
            std::span<const Complex> cols(a.data() + ci * rows.size(), (nl - ci) * rows.size());
            suffix[ci] = log2_det_identity_plus_gram(cols, rows.size(), nl - ci);
          }
          for (std::size_t ci = 0; ci < nl; ++ci) {
            const double r = std::max(0.0, suffix[ci] - suffix[ci + 1]);
            sums.layer_rate[off + own[ci]] += r;
            tail += r;
          }
          total[k] += tail;
        }
      }
      ledger.trial_rate_per_use[t] = {total[0] / ledger.channel_uses, total[1] / ledger.channel_uses};
    }
  });

  std::vector<double> layer_rate(c.n_layers, 0.0), residual(n_links, 0.0);
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < c.n_layers; ++i) layer_rate[i] += b.layer_rate[i];
    for (std::size_t l = 0; l < n_links; ++l) residual[l] += b.residual[l];
  }
  const double inv_n = 1.0 / static_cast<double>(n);

  for (std::size_t s = 0; s < c.slots.size(); ++s) {
    const auto& layers = c.slots[s]->layers;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const std::size_t g = c.layer_offset[s] + i;
      const SymbolLayer& l = layers[i];
      if (l.owner != Owner::Common) {
        ledger.per_symbol_rate[l.id] = layer_rate[g] * inv_n;
        if (l.owner == Owner::User1) ledger.user_rate[0] += layer_rate[g] * inv_n;
        if (l.owner == Owner::User2) ledger.user_rate[1] += layer_rate[g] * inv_n;
      }
      if (c.multicast_of_global[g] >= 0) ledger.common_layer_mi[l.id] = mean_mi[c.multicast_of_global[g]];
    }
  }
  for (std::size_t l = 0; l < n_links; ++l) {
    ledger.per_symbol_rate[c.links[l].carrier_id] = usable[l];
    ledger.residual_power[c.links[l].carrier_id] = residual[l] * inv_n;
  }
  return ledger;
}

double ls_slope(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

DofEstimate estimate_dof(const SchemePlan& plan, std::span<const SnrPoint> grid, const MonteCarloOptions& options) {
  if (grid.size() < 3) throw std::invalid_argument("estimate_dof: need at least 3 SNR points");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i].p() > grid[i - 1].p())) throw std::invalid_argument("estimate_dof: grid must be increasing");
  }
  if (grid.back().p_db() - grid.front().p_db() < 40.0 - 1e-9) {
    throw std::invalid_argument("estimate_dof: grid must span at least 40 dB");
  }

  DofEstimate est;
  for (const auto& snr : grid) {
    est.ledgers.push_back(evaluate_plan(plan, snr, options));
    const auto r = est.ledgers.back().rate_per_use();
    est.points.push_back({snr.log2_p(), r[0], r[1]});
  }

  // Upper half of the grid only: low-SNR points carry O(1) offsets.
  const std::size_t first = grid.size() / 2;
  std::vector<double> x;
  for (std::size_t i = first; i < grid.size(); ++i) x.push_back(grid[i].log2_p());
  if (x.size() < 2) throw std::invalid_argument("estimate_dof: fewer than 2 usable points");

  const std::size_t n = options.n_trials;
  std::array<std::vector<double>, 2> slopes;
  std::vector<double> y(x.size());
  for (int k = 0; k < 2; ++k) {
    slopes[k].resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = est.ledgers[first + i].trial_rate_per_use[t][k];
      slopes[k][t] = ls_slope(x, y);
    }
  }
  std::array<double, 2> mean{0.0, 0.0};
  for (int k = 0; k < 2; ++k) {
    mean[k] = std::accumulate(slopes[k].begin(), slopes[k].end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double s : slopes[k]) ss += (s - mean[k]) * (s - mean[k]);
    const double var = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
    est.std_error[k] = std::sqrt(var / static_cast<double>(n));
    if (!std::isfinite(mean[k])) throw std::runtime_error("estimate_dof: slope is not finite");
  }
  est.slope = {mean[0], mean[1]};
  return est;
}

std::map<std::string, double> residual_power_probe(const SchemePlan& plan, const SnrPoint& snr,
                                                   const MonteCarloOptions& options) {
  return evaluate_plan(plan, snr, options).residual_power;
}

}  // namespace misodof
