#include "misodof/dof_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

namespace misodof {

namespace {

constexpr double kFeasibilityTol = 1e-12;
constexpr double kDedupDistance = 1e-9;

bool near(const DofPoint& a, const DofPoint& b, double dist) {
  return std::hypot(a.d1 - b.d1, a.d2 - b.d2) <= dist;
}

void push_unique(std::vector<DofPoint>& points, const DofPoint& p) {
  for (const auto& q : points) {
    if (near(p, q, kDedupDistance)) return;
  }
  points.push_back(p);
}

}  // namespace

CsitQuality::CsitQuality(double alpha1, double alpha2) : alpha1_(alpha1), alpha2_(alpha2) {
  if (!std::isfinite(alpha1) || !std::isfinite(alpha2)) {
    throw std::invalid_argument("CsitQuality: exponents must be finite");
  }
  if (alpha1 < 0.0 || alpha2 > 1.0 || alpha1 > alpha2) {
    throw std::invalid_argument("CsitQuality: require 0 <= alpha1 <= alpha2 <= 1");
  }
}

Halfspace::Halfspace(double a, double b, double c) : a_(a), b_(b), c_(c) {
  if (a == 0.0 && b == 0.0) {
    throw std::invalid_argument("Halfspace: coefficients (a, b) must not both be zero");
  }
}

DofRegion dof_region(const CsitQuality& quality) {
  DofRegion region{quality, {}, {}};
  auto& hs = region.halfspaces;
  hs.emplace_back(-1.0, 0.0, 0.0);
  hs.emplace_back(0.0, -1.0, 0.0);
  hs.emplace_back(1.0, 0.0, 1.0);
  hs.emplace_back(0.0, 1.0, 1.0);
  hs.emplace_back(1.0, 2.0, 2.0 + quality.alpha2());
  hs.emplace_back(2.0, 1.0, 2.0 + quality.alpha1());

  // Brute force over line pairs; the plane is small enough that an LP would
  // only add machinery.
  std::vector<DofPoint> candidates;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    for (std::size_t j = i + 1; j < hs.size(); ++j) {
      const double det = hs[i].a() * hs[j].b() - hs[j].a() * hs[i].b();
      if (std::abs(det) < 1e-14) continue;
      const DofPoint p{(hs[i].c() * hs[j].b() - hs[j].c() * hs[i].b()) / det,
                       (hs[i].a() * hs[j].c() - hs[j].a() * hs[i].c()) / det};
      const bool feasible = std::all_of(hs.begin(), hs.end(), [&](const Halfspace& h) {
        return h.slack(p) >= -kFeasibilityTol;
      });
      if (feasible) push_unique(candidates, p);
    }
  }

  DofPoint centroid;
  for (const auto& p : candidates) {
    centroid.d1 += p.d1;
    centroid.d2 += p.d2;
  }
  centroid.d1 /= static_cast<double>(candidates.size());
  centroid.d2 /= static_cast<double>(candidates.size());

  auto angle = [&](const DofPoint& p) {
    double a = std::atan2(p.d2 - centroid.d2, p.d1 - centroid.d1);
    return a < 0.0 ? a + 2.0 * std::numbers::pi : a;
  };
  std::sort(candidates.begin(), candidates.end(),
            [&](const DofPoint& x, const DofPoint& y) { return angle(x) < angle(y); });

  auto origin = std::find_if(candidates.begin(), candidates.end(),
                             [](const DofPoint& p) { return near(p, DofPoint{}, kDedupDistance); });
  if (origin != candidates.end()) std::rotate(candidates.begin(), origin, candidates.end());

  region.vertices = std::move(candidates);
  return region;
}

std::vector<DofPoint> corner_points(const CsitQuality& quality) {
  const double a1 = quality.alpha1();
  const double a2 = quality.alpha2();
  std::vector<DofPoint> corners;
  push_unique(corners, {1.0, a1});
  if (2.0 * a2 - a1 <= 1.0 + kCaseSplitTolerance) {
    push_unique(corners, {a2, 1.0});
    push_unique(corners, {(2.0 + 2.0 * a1 - a2) / 3.0, (2.0 + 2.0 * a2 - a1) / 3.0});
  } else {
    push_unique(corners, {(1.0 + a1) / 2.0, 1.0});
  }
  return corners;
}

bool contains(const DofRegion& region, const DofPoint& p, double tol) {
  return std::all_of(region.halfspaces.begin(), region.halfspaces.end(),
                     [&](const Halfspace& h) { return h.slack(p) >= -tol; });
}

std::pair<double, double> outer_bound_slack(const CsitQuality& quality, const DofPoint& p) {
  return {(2.0 + quality.alpha2()) - (p.d1 + 2.0 * p.d2),
          (2.0 + quality.alpha1()) - (2.0 * p.d1 + p.d2)};
}

std::string vertices_json(const DofRegion& region) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& v : region.vertices) arr.push_back({v.d1, v.d2});
  return arr.dump();
}

}  // namespace misodof
