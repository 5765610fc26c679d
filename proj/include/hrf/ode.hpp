#pragma once

// Dormand-Prince 5(4) single steps on matrix-valued states.  The right-hand
// side may refuse a state (returns nullopt), which the caller treats as
// leaving the domain.

#include "hrf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

namespace hrf {

using MatRhs = std::function<std::optional<Mat>(const Mat&)>;

struct DpStep {
  bool valid = false;  // every stage and the result were admissible
  Mat y;               // fifth-order solution
  Mat dy_end;          // f(y), reusable as the next first stage
  double err = 0.0;    // scaled error norm; accept when <= 1
};

/// One step of size h from y with f(y) = k1 already known.  `admissible`
/// screens the end state (stages are screened by f itself).
inline DpStep dp_step(const MatRhs& f, const Mat& y, const Mat& k1, double h, double rtol,
                      double atol, const std::function<bool(const Mat&)>& admissible) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  DpStep out;
  auto stage = [&](const Mat& ys) -> std::optional<Mat> { return f(ys); };
  const auto k2 = stage(y + h * a21 * k1);
  if (!k2) return out;
  const auto k3 = stage(y + h * (a31 * k1 + a32 * *k2));
  if (!k3) return out;
  const auto k4 = stage(y + h * (a41 * k1 + a42 * *k2 + a43 * *k3));
  if (!k4) return out;
  const auto k5 = stage(y + h * (a51 * k1 + a52 * *k2 + a53 * *k3 + a54 * *k4));
  if (!k5) return out;
  const auto k6 = stage(y + h * (a61 * k1 + a62 * *k2 + a63 * *k3 + a64 * *k4 + a65 * *k5));
  if (!k6) return out;
  Mat y5 = y + h * (b1 * k1 + b3 * *k3 + b4 * *k4 + b5 * *k5 + b6 * *k6);
  y5 = symmetrize(y5);
  if (!admissible(y5)) return out;
  const auto k7 = stage(y5);
  if (!k7) return out;
  const Mat e = h * (e1 * k1 + e3 * *k3 + e4 * *k4 + e5 * *k5 + e6 * *k6 + e7 * *k7);

  double acc = 0.0;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const double sc = atol + rtol * std::max(std::abs(y(i)), std::abs(y5(i)));
    acc += (e(i) / sc) * (e(i) / sc);
  }
  out.err = e.size() ? std::sqrt(acc / static_cast<double>(e.size())) : 0.0;
  out.valid = true;
  out.y = std::move(y5);
  out.dy_end = *k7;
  return out;
}

/// Cubic Hermite interpolation between (t0, y0, d0) and (t1, y1, d1).
inline Mat hermite(double t0, const Mat& y0, const Mat& d0, double t1, const Mat& y1, const Mat& d1,
                   double t) {
  const double h = t1 - t0;
  const double s = (t - t0) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
}

}  // namespace hrf
