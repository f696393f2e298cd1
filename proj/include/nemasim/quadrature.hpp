#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "nemasim/errors.hpp"
#include "nemasim/rates.hpp"

namespace nemasim {

/// Composite Simpson rule on a uniform grid over [0, length].
template <typename Scalar = double>
struct QuadratureGrid {
  Vector<Scalar> nodes;
  Vector<Scalar> weights;
  Scalar spacing{};

  Eigen::Index intervals() const { return nodes.size() - 1; }

  template <typename Derived>
  Scalar integrate(const Eigen::MatrixBase<Derived>& values) const {
    return weights.dot(values);
  }
};

template <typename Scalar>
QuadratureGrid<Scalar> simpson_grid(Scalar length, Eigen::Index intervals) {
  if (intervals < 2 || intervals % 2 != 0)
    throw ConfigurationError("Simpson quadrature needs an even number of intervals >= 2");
  QuadratureGrid<Scalar> g;
  g.spacing = length / static_cast<Scalar>(intervals);
  g.nodes = Vector<Scalar>::LinSpaced(intervals + 1, 0, length);
  g.weights.resize(intervals + 1);
  for (Eigen::Index i = 0; i <= intervals; ++i)
    g.weights[i] = (i == 0 || i == intervals) ? 1 : (i % 2 == 1 ? 4 : 2);
  g.weights *= g.spacing / 3;
  return g;
}

namespace detail {

template <typename Scalar, typename F>
Scalar adaptive_simpson_step(F& f, Scalar a, Scalar b, Scalar fa, Scalar fm, Scalar fb, Scalar whole,
                             Scalar tol, int depth) {
  const Scalar m = (a + b) / 2;
  const Scalar lm = (a + m) / 2, rm = (m + b) / 2;
  const Scalar flm = f(lm), frm = f(rm);
  const Scalar left = (m - a) / 6 * (fa + 4 * flm + fm);
  const Scalar right = (b - m) / 6 * (fm + 4 * frm + fb);
  const Scalar delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15 * tol) return left + right + delta / 15;
  return adaptive_simpson_step(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         adaptive_simpson_step(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b]. The absolute tolerance is
/// rel_tol times a coarse estimate of int |f| (floored by abs_tol).
template <typename Scalar, typename F>
Scalar adaptive_simpson(F&& f, Scalar a, Scalar b, Scalar rel_tol = 1e-8, Scalar abs_tol = 1e-300,
                        int max_depth = 50) {
  if (b <= a) return 0;
  // seed with a few panels so narrow features are not missed
  constexpr int panels = 8;
  const Scalar w = (b - a) / panels;
  Scalar fx[2 * panels + 1];
  for (int i = 0; i <= 2 * panels; ++i) fx[i] = f(a + w * i / 2);
  Scalar scale = 0;
  for (int i = 0; i < panels; ++i)
    scale += w / 6 * (std::abs(fx[2 * i]) + 4 * std::abs(fx[2 * i + 1]) + std::abs(fx[2 * i + 2]));
  const Scalar tol = std::max(rel_tol * scale, abs_tol) / panels;
  Scalar total = 0;
  for (int i = 0; i < panels; ++i) {
    const Scalar x0 = a + w * i, x1 = x0 + w;
    const Scalar whole = w / 6 * (fx[2 * i] + 4 * fx[2 * i + 1] + fx[2 * i + 2]);
    total += detail::adaptive_simpson_step(f, x0, x1, fx[2 * i], fx[2 * i + 1], fx[2 * i + 2], whole, tol,
                                           max_depth);
  }
  return total;
}

}  // namespace nemasim
