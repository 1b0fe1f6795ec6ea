#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "misodof/channel_model.hpp"
#include "misodof/dof_geometry.hpp"
#include "misodof/scheme.hpp"

namespace misodof {

/// Mutual information (bits) of a multicast layer at each receiver.
struct CommonLayerRates {
  double user1 = 0.0;
  double user2 = 0.0;

  double at(User u) const noexcept { return u == User::One ? user1 : user2; }
  double deliverable() const noexcept { return user1 < user2 ? user1 : user2; }
};

/// Noise seen by a zero-forced symbol on top of unit-power AWGN.
struct NoiseAccounting {
  double residual_interference = 0.0;
  double quantization_error = 0.0;
};

/// One row of a receiver's effective observation: the true channel that
/// maps the transmit vector into it, and the total noise power on it.
struct ObservationRow {
  ComplexVec2 channel;
  double noise_power = 1.0;
};

/// One realization of an overheard interference and its quantization,
/// eta = eta_hat + quant_error with quant_error independent of eta_hat.
struct QuantizedInterference {
  QuantizationLink link;
  Complex clean_value;
  Complex quant_error;

  Complex reconstructed() const noexcept { return clean_value - quant_error; }
};

/// log2 det(I + A^H A) for a matrix given column-major as `cols` columns of
/// `rows` entries. Factorizes [A; I] by modified Gram-Schmidt so nearly
/// collinear columns do not lose precision.
double log2_det_identity_plus_gram(std::span<const Complex> a, std::size_t rows, std::size_t cols);

/// SIC rate of a multicast layer at both receivers: every layer after it in
/// the slot (weaker commons and all private layers) is treated as noise.
/// Throws std::invalid_argument if the layer is not a multicast layer of the slot.
CommonLayerRates rate_common_layer(const SlotPlan& slot, const SymbolLayer& layer, const ChannelRealization& ch,
                                   const SnrPoint& snr);

/// log2(1 + |c^H w|^2 P_u / (1 + residual + quantization error)) for the
/// receiver's true channel c and the layer's precoder w.
double rate_zf_symbol(const SymbolLayer& layer, User receiver, const ChannelRealization& ch, const SnrPoint& snr,
                      const NoiseAccounting& noise);

/// log2 det(I + N^{-1} H W Q W^H H^H) with H stacking the observation rows,
/// W the layers' precoders, Q their powers and N the row noise powers.
double rate_joint_vector(std::span<const SymbolLayer> layers, std::span<const ObservationRow> rows,
                         const ChannelRealization& ch, const SnrPoint& snr);

struct MonteCarloOptions {
  std::size_t n_trials = 2000;
  std::uint64_t seed = 7;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Averaged rates of one plan at one SNR point.
struct RateLedger {
  SnrPoint snr;
  std::size_t n_trials = 0;
  std::uint64_t seed = 0;
  // Bits per channel use of the slot, averaged over trials. Common layers
  // report the rate usable by their quantization link.
  std::map<std::string, double> per_symbol_rate;
  // Raw mean mutual information of each multicast layer at each receiver.
  std::map<std::string, CommonLayerRates> common_layer_mi;
  // Mean |eta - eta_hat|^2 after subtraction, keyed by the carrier layer.
  std::map<std::string, double> residual_power;
  // Bits per user over the whole schedule, mean over trials.
  std::array<double, 2> user_rate{0.0, 0.0};
  double channel_uses = 0.0;
  // Per-trial user rates in bits per channel use.
  std::vector<std::array<double, 2>> trial_rate_per_use;

  std::array<double, 2> rate_per_use() const noexcept {
    return {user_rate[0] / channel_uses, user_rate[1] / channel_uses};
  }
};

/// Monte-Carlo Gaussian mutual-information evaluation of a plan.
///
/// Every trial draws one channel realization per slot from its own stream,
/// keyed by (seed, trial index) and independent of P, so ledgers along an
/// SNR grid share channel draws. Results do not depend on the thread count.
///
/// Decoding per slot follows the plan: multicast layers by SIC at both
/// receivers, then each receiver removes its overheard interference with the
/// quantized copy and decodes its own layers jointly from the direct
/// observation plus the quantized copy of the other receiver's overheard
/// interference. Interference without a link stays in the noise at its true
/// power.
///
/// Each link is quantized at min(quant_prelog * log2 P, delivered rate of its
/// carrier) bits, where the delivered rate is the smaller of the two
/// receivers' mean MI. The per-trial distortion follows Gaussian reverse
/// water-filling over trials with the water level floored at the unit AWGN
/// power.
///
/// Throws std::invalid_argument if validate_plan reports problems or n_trials is 0.
RateLedger evaluate_plan(const SchemePlan& plan, const SnrPoint& snr, const MonteCarloOptions& options);

struct DofEstimate {
  struct Point {
    double log2_p = 0.0;
    double rate1 = 0.0;  // bits per channel use
    double rate2 = 0.0;
  };
  std::vector<Point> points;
  DofPoint slope;
  std::array<double, 2> std_error{0.0, 0.0};
  std::vector<RateLedger> ledgers;
};

/// Least-squares slope of the per-user rate against log2 P over the upper
/// half of the grid. The standard error is taken across per-trial slopes.
/// The grid needs at least three strictly increasing points spanning 40 dB.
DofEstimate estimate_dof(const SchemePlan& plan, std::span<const SnrPoint> grid, const MonteCarloOptions& options);

/// Mean residual power |eta - eta_hat|^2 at every subtraction point, keyed by
/// the carrier layer id. Unit when a link is quantized at its full rate.
std::map<std::string, double> residual_power_probe(const SchemePlan& plan, const SnrPoint& snr,
                                                   const MonteCarloOptions& options);

/// Least-squares slope of y against x.
double ls_slope(std::span<const double> x, std::span<const double> y);

}  // namespace misodof
