#pragma once

#include <string>
#include <utility>
#include <vector>

namespace misodof {

// Tolerance used when deciding which side of the 2*alpha2 - alpha1 = 1 split
// a quality pair falls on. The boundary itself belongs to the upper-edge case.
inline constexpr double kCaseSplitTolerance = 1e-12;

/// Current-CSIT accuracy exponents of the two users.
///
/// The error variance of user k's channel estimate scales as P^{-alpha_k}.
/// Users are labelled so that alpha1 <= alpha2; construction rejects pairs
/// outside 0 <= alpha1 <= alpha2 <= 1.
class CsitQuality {
 public:
  CsitQuality(double alpha1, double alpha2);

  double alpha1() const noexcept { return alpha1_; }
  double alpha2() const noexcept { return alpha2_; }
  double delta() const noexcept { return alpha2_ - alpha1_; }

  /// True iff 2*alpha2 - alpha1 >= 1, i.e. the max-sum point lies on d2 = 1.
  bool max_sum_on_upper_edge() const noexcept {
    return 2.0 * alpha2_ - alpha1_ >= 1.0 - kCaseSplitTolerance;
  }

  friend bool operator==(const CsitQuality&, const CsitQuality&) = default;

 private:
  double alpha1_;
  double alpha2_;
};

struct DofPoint {
  double d1 = 0.0;
  double d2 = 0.0;
};

/// a*d1 + b*d2 <= c
class Halfspace {
 public:
  Halfspace(double a, double b, double c);

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double c() const noexcept { return c_; }

  /// c - (a*d1 + b*d2); nonnegative iff the point satisfies the constraint.
  double slack(const DofPoint& p) const noexcept { return c_ - (a_ * p.d1 + b_ * p.d2); }

 private:
  double a_;
  double b_;
  double c_;
};

struct DofRegion {
  CsitQuality quality;
  std::vector<Halfspace> halfspaces;
  // Counter-clockwise, starting at the origin.
  std::vector<DofPoint> vertices;
};

/// Optimal DoF region: nonnegativity, d1 <= 1, d2 <= 1,
/// d1 + 2 d2 <= 2 + alpha2 and 2 d1 + d2 <= 2 + alpha1, with its vertex polygon.
DofRegion dof_region(const CsitQuality& quality);

/// Nontrivial corner points of the region.
///
/// Returns (1, alpha1), (alpha2, 1) and the two-line intersection
/// ((2+2a1-a2)/3, (2+2a2-a1)/3) when 2*alpha2 - alpha1 <= 1. Otherwise the
/// intersection and (alpha2, 1) fall outside d2 <= 1 and the list is
/// (1, alpha1), ((1+alpha1)/2, 1). Coincident points are merged.
std::vector<DofPoint> corner_points(const CsitQuality& quality);

/// True iff p satisfies every halfspace of the region with slack >= -tol.
bool contains(const DofRegion& region, const DofPoint& p, double tol);

/// Slack of the two converse inequalities R1 + 2 R2 <= (2+alpha2) log P and
/// 2 R1 + R2 <= (2+alpha1) log P, expressed per log P.
std::pair<double, double> outer_bound_slack(const CsitQuality& quality, const DofPoint& p);

/// Vertices as a JSON array of [d1, d2] pairs.
std::string vertices_json(const DofRegion& region);

}  // namespace misodof
