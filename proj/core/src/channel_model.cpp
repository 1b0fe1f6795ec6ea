#include "misodof/channel_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace misodof {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

ComplexVec2 unit(const ComplexVec2& v) {
  const double n = v.norm();
  if (!(n > 0.0)) throw std::invalid_argument("unit: zero vector");
  return (1.0 / n) * v;
}

ComplexVec2 orth_complement(const ComplexVec2& v) {
  const double n = v.norm();
  if (!(n > 0.0)) throw std::invalid_argument("orth_complement: zero vector");
  return {-std::conj(v.x1) / n, std::conj(v.x0) / n};
}

SnrPoint::SnrPoint(double p, CsitQuality quality) : p_(p), quality_(quality) {
  if (!std::isfinite(p) || !(p > 1.0)) {
    throw std::invalid_argument("SnrPoint: transmit power must be finite and > 1");
  }
}

SnrPoint SnrPoint::from_db(double p_db, CsitQuality quality) {
  return SnrPoint(std::pow(10.0, p_db / 10.0), quality);
}

double SnrPoint::error_variance(User user) const noexcept {
  const double alpha = user == User::One ? quality_.alpha1() : quality_.alpha2();
  return std::pow(p_, -alpha);
}

Rng Rng::for_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ stream);
  s = splitmix64(s ^ (substream * 0xd1b54a32d192ed03ULL));
  return Rng(s);
}

double Rng::uniform() {
  // 53 random mantissa bits, shifted into (0, 1].
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double theta = 2.0 * std::numbers::pi * uniform();
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Complex Rng::complex_normal() {
  const double re = normal();
  const double im = normal();
  return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

ChannelRealization sample_channel(const SnrPoint& snr, Rng& rng) {
  ChannelRealization ch;
  auto draw = [&](User u, ComplexVec2& est, ComplexVec2& err, ComplexVec2& tru) {
    const double sigma2 = snr.error_variance(u);
    const double s_est = std::sqrt(1.0 - sigma2 / 2.0);
    const double s_err = std::sqrt(sigma2 / 2.0);
    est.x0 = s_est * rng.complex_normal();
    est.x1 = s_est * rng.complex_normal();
    err.x0 = s_err * rng.complex_normal();
    err.x1 = s_err * rng.complex_normal();
    tru = est + err;
  };
  draw(User::One, ch.h_est, ch.h_err, ch.h_true);
  draw(User::Two, ch.g_est, ch.g_err, ch.g_true);
  return ch;
}

}  // namespace misodof
