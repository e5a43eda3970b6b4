#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>

namespace oacollab::optim {

template <std::size_t N>
using Point = std::array<double, N>;

template <std::size_t N>
struct NelderMeadOptions {
  int max_evaluations = 2000;
  double f_tolerance = 1e-10;  ///< converged when max f - min f over the simplex is at most this
  Point<N> initial_step{};     ///< per-axis offsets of the initial simplex; zero entries use a 5% rule
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
};

template <std::size_t N>
struct NelderMeadResult {
  Point<N> x{};
  double f = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  int iterations = 0;
  bool converged = false;
};

struct NoIterationHook {
  template <class... Args>
  void operator()(Args&&...) const {}
};

/// Downhill simplex minimisation of `f` from `x0`. NaN objective values are treated as +inf.
/// `on_iteration(iteration, best_f)` is called after each completed iteration.
template <std::size_t N, class F, class Hook = NoIterationHook>
NelderMeadResult<N> nelder_mead(F&& f, const Point<N>& x0, const NelderMeadOptions<N>& opt = {},
                                Hook&& on_iteration = {}) {
  static_assert(N >= 1);
  NelderMeadResult<N> result;

  auto eval = [&](const Point<N>& x) {
    ++result.evaluations;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  std::array<Point<N>, N + 1> xs;
  std::array<double, N + 1> fs;
  xs[0] = x0;
  for (std::size_t i = 0; i < N; ++i) {
    xs[i + 1] = x0;
    double step = opt.initial_step[i];
    if (step == 0.0) step = x0[i] != 0.0 ? 0.05 * x0[i] : 0.00025;
    xs[i + 1][i] += step;
  }
  for (std::size_t i = 0; i <= N; ++i) fs[i] = eval(xs[i]);

  std::array<std::size_t, N + 1> order;
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    std::array<Point<N>, N + 1> xs2;
    std::array<double, N + 1> fs2;
    for (std::size_t i = 0; i <= N; ++i) {
      xs2[i] = xs[order[i]];
      fs2[i] = fs[order[i]];
    }
    xs = xs2;
    fs = fs2;
  };

  auto affine = [](const Point<N>& base, const Point<N>& toward, double t) {
    Point<N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = base[i] + t * (toward[i] - base[i]);
    return out;
  };

  sort_simplex();
  while (true) {
    const bool finite_best = std::isfinite(fs[0]);
    if (finite_best && fs[N] - fs[0] <= opt.f_tolerance) {
      result.converged = true;
      break;
    }
    if (result.evaluations >= opt.max_evaluations) break;

    Point<N> centroid{};
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t c = 0; c < N; ++c) centroid[c] += xs[i][c] / static_cast<double>(N);

    const Point<N> xr = affine(centroid, xs[N], -opt.reflection);
    const double fr = eval(xr);

    if (fr < fs[0]) {
      const Point<N> xe = affine(centroid, xr, opt.expansion);
      const double fe = eval(xe);
      if (fe < fr) {
        xs[N] = xe;
        fs[N] = fe;
      } else {
        xs[N] = xr;
        fs[N] = fr;
      }
    } else if (fr < fs[N - 1]) {
      xs[N] = xr;
      fs[N] = fr;
    } else {
      bool accepted = false;
      if (fr < fs[N]) {
        const Point<N> xc = affine(centroid, xr, opt.contraction);
        const double fc = eval(xc);
        if (fc <= fr) {
          xs[N] = xc;
          fs[N] = fc;
          accepted = true;
        }
      } else {
        const Point<N> xc = affine(centroid, xs[N], opt.contraction);
        const double fc = eval(xc);
        if (fc < fs[N]) {
          xs[N] = xc;
          fs[N] = fc;
          accepted = true;
        }
      }
      if (!accepted) {
        for (std::size_t i = 1; i <= N; ++i) {
          xs[i] = affine(xs[0], xs[i], opt.shrink);
          fs[i] = eval(xs[i]);
        }
      }
    }
    sort_simplex();
    ++result.iterations;
    on_iteration(result.iterations, fs[0]);
  }

  result.x = xs[0];
  result.f = fs[0];
  return result;
}

}  // namespace oacollab::optim
