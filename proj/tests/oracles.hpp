#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <cmath>
#include <random>

#include "oacollab/geometry.hpp"
#include "oacollab/vec2.hpp"

namespace oracle {

using oacollab::Obstacle;
using oacollab::Vec2;

/// U = lambda (-cos θ)^beta |v| / p with the closest point c held fixed; 0 when inactive.
inline double potential(const Vec2& x, const Vec2& v, const Vec2& c, double lambda, double beta) {
  const double dx = x.x - c.x, dy = x.y - c.y;
  const double p = std::hypot(dx, dy);
  const double s = std::hypot(v.x, v.y);
  const double cos_t = (v.x * dx + v.y * dy) / (p * s);
  if (cos_t >= 0.0) return 0.0;
  return lambda * std::pow(-cos_t, beta) * s / p;
}

/// Minus the central-difference gradient of `potential` in x.
inline Vec2 neg_fd_gradient(const Vec2& x, const Vec2& v, const Vec2& c, double lambda, double beta, double h) {
  const double gx = (potential({x.x + h, x.y}, v, c, lambda, beta) - potential({x.x - h, x.y}, v, c, lambda, beta)) /
                    (2.0 * h);
  const double gy = (potential({x.x, x.y + h}, v, c, lambda, beta) - potential({x.x, x.y - h}, v, c, lambda, beta)) /
                    (2.0 * h);
  return {-gx, -gy};
}

struct ActiveState {
  Vec2 x;
  Vec2 v;
  double lambda;
  double beta;
};

/// Random state near `obstacle` that approaches it (cos θ <= -0.05) inside `cutoff`.
inline ActiveState random_active_state(std::mt19937_64& rng, const Obstacle& obstacle, double cutoff) {
  std::uniform_real_distribution<double> pos(-0.12, 0.12), vel(-0.5, 0.5), lam(0.001, 0.05), bet(1.2, 6.0);
  while (true) {
    const Vec2 x{pos(rng), pos(rng)};
    const auto sd = oacollab::segment_distance(x, obstacle);
    if (sd.distance < 0.005 || sd.distance >= 0.95 * cutoff) continue;
    const Vec2 v{vel(rng), vel(rng)};
    const double s = oacollab::norm(v);
    if (s < 0.01) continue;
    const double cos_t = oacollab::dot(v, x - sd.closest) / (s * sd.distance);
    if (cos_t > -0.05) continue;
    return {x, v, lam(rng), bet(rng)};
  }
}

/// Closed-form step response of x'' + D x' + K x = K g from rest (under- or critically damped), scalar.
inline double spring_step(double K, double D, double g, double t) {
  const double wn = std::sqrt(K);
  const double zeta = D / (2.0 * wn);
  if (std::abs(zeta - 1.0) < 1e-12) return g * (1.0 - (1.0 + wn * t) * std::exp(-wn * t));
  if (zeta < 1.0) {
    const double wd = wn * std::sqrt(1.0 - zeta * zeta);
    return g * (1.0 - std::exp(-zeta * wn * t) * (std::cos(wd * t) + zeta * wn / wd * std::sin(wd * t)));
  }
  const double r = wn * std::sqrt(zeta * zeta - 1.0);
  const double s1 = -zeta * wn + r, s2 = -zeta * wn - r;
  return g * (1.0 + (s2 * std::exp(s1 * t) - s1 * std::exp(s2 * t)) / (s1 - s2));
}

}  // namespace oracle
