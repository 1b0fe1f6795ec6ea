#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <random>

#include "misodof/dof_geometry.hpp"

namespace misodof {

using Complex = std::complex<double>;

enum class User { One, Two };

inline constexpr User other(User u) noexcept { return u == User::One ? User::Two : User::One; }
inline constexpr int index_of(User u) noexcept { return u == User::One ? 0 : 1; }

/// Two-antenna channel or precoding vector.
struct ComplexVec2 {
  Complex x0;
  Complex x1;

  double norm_sq() const noexcept { return std::norm(x0) + std::norm(x1); }
  double norm() const noexcept { return std::sqrt(norm_sq()); }

  friend ComplexVec2 operator+(const ComplexVec2& a, const ComplexVec2& b) noexcept {
    return {a.x0 + b.x0, a.x1 + b.x1};
  }
  friend ComplexVec2 operator-(const ComplexVec2& a, const ComplexVec2& b) noexcept {
    return {a.x0 - b.x0, a.x1 - b.x1};
  }
  friend ComplexVec2 operator*(double s, const ComplexVec2& a) noexcept { return {s * a.x0, s * a.x1}; }
  friend bool operator==(const ComplexVec2&, const ComplexVec2&) = default;
};

/// a^H b
inline Complex inner(const ComplexVec2& a, const ComplexVec2& b) noexcept {
  return std::conj(a.x0) * b.x0 + std::conj(a.x1) * b.x1;
}

/// v / |v|. Throws std::invalid_argument for the zero vector.
ComplexVec2 unit(const ComplexVec2& v);

/// Unit vector orthogonal to v: (-conj(v1), conj(v0)) / |v|.
/// Throws std::invalid_argument for the zero vector.
ComplexVec2 orth_complement(const ComplexVec2& v);

/// Transmit power P (linear) together with the CSIT quality it is evaluated at.
class SnrPoint {
 public:
  SnrPoint(double p, CsitQuality quality);
  static SnrPoint from_db(double p_db, CsitQuality quality);

  double p() const noexcept { return p_; }
  double p_db() const noexcept { return 10.0 * std::log10(p_); }
  double log2_p() const noexcept { return std::log2(p_); }
  const CsitQuality& quality() const noexcept { return quality_; }

  /// sigma_k^2 = P^{-alpha_k}, total estimation-error variance E|h_err|^2.
  double error_variance(User user) const noexcept;

 private:
  double p_;
  CsitQuality quality_;
};

/// One slot's true channels, transmitter estimates and estimation errors.
/// true == est + err holds exactly.
struct ChannelRealization {
  ComplexVec2 h_true;
  ComplexVec2 g_true;
  ComplexVec2 h_est;
  ComplexVec2 g_est;
  ComplexVec2 h_err;
  ComplexVec2 g_err;

  const ComplexVec2& true_channel(User u) const noexcept { return u == User::One ? h_true : g_true; }
  const ComplexVec2& estimate(User u) const noexcept { return u == User::One ? h_est : g_est; }
};

/// Seedable stream of uniform, Gaussian and circularly-symmetric Gaussian draws.
///
/// Built on std::mt19937_64 (whose output sequence is fixed by the standard)
/// with a Box-Muller transform, so sequences do not depend on the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for (seed, stream, substream), e.g. one per trial.
  static Rng for_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0);

  /// Uniform on (0, 1].
  double uniform();
  /// Standard normal.
  double normal();
  /// CN(0, 1): real and imaginary parts each with variance 1/2.
  Complex complex_normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Draws h, g ~ CN(0, I2) split into independent estimate and error parts.
///
/// The error has per-entry variance sigma_k^2 / 2 and the estimate per-entry
/// variance 1 - sigma_k^2 / 2, so E[h h^H] = I2 at every P. Consumes exactly
/// eight complex draws regardless of P, so streams line up across SNR points.
ChannelRealization sample_channel(const SnrPoint& snr, Rng& rng);

}  // namespace misodof
