#pragma once

#include <algorithm>

#include "oacollab/error.hpp"
#include "oacollab/vec2.hpp"

namespace oacollab {

/// Thin line obstacle between two distinct endpoints.
struct Obstacle {
  Vec2 endpoint_a;
  Vec2 endpoint_b;

  Vec2 midpoint() const { return (endpoint_a + endpoint_b) * 0.5; }
  double length() const { return norm(endpoint_b - endpoint_a); }
  bool valid() const {
    return is_finite(endpoint_a) && is_finite(endpoint_b) && !(endpoint_a == endpoint_b);
  }

  friend bool operator==(const Obstacle&, const Obstacle&) = default;
};

struct SegmentDistance {
  double distance = 0.0;  ///< m
  Vec2 closest;           ///< nearest point on the segment
};

/// Euclidean distance from `x` to the obstacle segment and the nearest segment point.
inline SegmentDistance segment_distance(const Vec2& x, const Obstacle& obstacle) {
  const Vec2 ab = obstacle.endpoint_b - obstacle.endpoint_a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(x - obstacle.endpoint_a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  // Exactly collinear interior points are on the obstacle; projection rounding would say otherwise.
  if (t > 0.0 && t < 1.0 && cross(ab, x - obstacle.endpoint_a) == 0.0) return {0.0, x};
  // Pin the endpoints exactly so that swapping a and b yields identical results.
  const Vec2 closest = t == 0.0   ? obstacle.endpoint_a
                       : t == 1.0 ? obstacle.endpoint_b
                                  : obstacle.endpoint_a + ab * t;
  return {norm(x - closest), closest};
}

/// Unit gradient of the distance field, (x - closest) / p. Throws DegenerateGradient on contact.
inline Vec2 distance_gradient(const Vec2& x, const Obstacle& obstacle) {
  const auto [p, closest] = segment_distance(x, obstacle);
  if (!(p > 0.0)) throw Error(ErrorCode::DegenerateGradient, "point lies on the obstacle");
  return (x - closest) / p;
}

namespace detail {

inline int orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

// c is collinear with a-b; true when it lies inside their bounding box.
inline bool within_box(const Vec2& a, const Vec2& b, const Vec2& c) {
  return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= c.y && c.y <= std::max(a.y, b.y);
}

}  // namespace detail

/// True iff the motion segment from→to touches the obstacle, collinear overlap included.
inline bool swept_collision(const Vec2& from, const Vec2& to, const Obstacle& obstacle) {
  using detail::orientation;
  using detail::within_box;
  const Vec2& a = obstacle.endpoint_a;
  const Vec2& b = obstacle.endpoint_b;

  const int o1 = orientation(from, to, a);
  const int o2 = orientation(from, to, b);
  const int o3 = orientation(a, b, from);
  const int o4 = orientation(a, b, to);

  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && within_box(from, to, a)) return true;
  if (o2 == 0 && within_box(from, to, b)) return true;
  if (o3 == 0 && within_box(a, b, from)) return true;
  if (o4 == 0 && within_box(a, b, to)) return true;
  return false;
}

}  // namespace oacollab
