#pragma once

// Independent reference computations used only by the tests.

#include "hrf/liealg.hpp"

#include <cmath>
#include <vector>

namespace oracle {

using hrf::Mat;
using hrf::Vec;

// Ricci tensor of a left-invariant metric g(x, y) = x^T P y on the group of
// `a`, via the Koszul formula, the full Riemann tensor and a trace.
inline Mat koszul_ricci(const hrf::LieAlgebra& a, const Mat& P) {
  const int n = a.dim();
  const Mat Pinv = P.inverse();
  auto br = [&](int i, int j) {
    Vec v(n);
    for (int k = 0; k < n; ++k) v(k) = a.c(i, j, k);
    return v;
  };
  auto g = [&](const Vec& x, const Vec& y) { return x.dot(P * y); };
  // nabla[i][j] = nabla_{e_i} e_j as a vector.
  std::vector<std::vector<Vec>> nabla(static_cast<std::size_t>(n), std::vector<Vec>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Vec low(n);  // g(nabla_i e_j, e_k)
      for (int k = 0; k < n; ++k)
        low(k) = 0.5 * (g(br(i, j), Vec::Unit(n, k)) - g(br(j, k), Vec::Unit(n, i)) + g(br(k, i), Vec::Unit(n, j)));
      nabla[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = Pinv * low;
    }
  auto nab = [&](const Vec& x, const Vec& y) {
    Vec out = Vec::Zero(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (x(i) != 0.0 && y(j) != 0.0) out += x(i) * y(j) * nabla[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return out;
  };
  auto bracket = [&](const Vec& x, const Vec& y) {
    Vec out = Vec::Zero(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out += x(i) * y(j) * br(i, j);
    return out;
  };
  Mat ric = Mat::Zero(n, n);
  for (int y = 0; y < n; ++y)
    for (int z = 0; z < n; ++z) {
      const Vec Y = Vec::Unit(n, y), Z = Vec::Unit(n, z);
      double tr = 0.0;
      for (int x = 0; x < n; ++x) {
        const Vec X = Vec::Unit(n, x);
        const Vec R = nab(X, nab(Y, Z)) - nab(Y, nab(X, Z)) - nab(bracket(X, Y), Z);
        tr += R(x);
      }
      ric(y, z) = tr;
    }
  return 0.5 * (ric + ric.transpose());
}

inline double scalar(const Mat& ric, const Mat& P) { return (P.inverse() * ric).trace(); }

}  // namespace oracle
