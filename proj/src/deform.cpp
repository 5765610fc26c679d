#include "hrf/deform.hpp"

#include <cmath>
#include <stdexcept>

namespace hrf {

SubmersionSplit submersion_split(const ReductiveSplit& split, const Mat& P) {
  if (P.rows() != split.dm() || P.cols() != split.dm())
    throw std::invalid_argument("submersion_split: metric has wrong dimension");
  if (split.dm() > 0 && !is_spd(P)) throw std::invalid_argument("submersion_split: metric is not positive definite");
  const int mu = split.dmu();
  const int dv = split.dv;
  SubmersionSplit ss;
  ss.gF = P.bottomRightCorner(dv, dv);
  if (dv > 0) {
    const Eigen::LLT<Mat> llt(ss.gF);
    ss.phi = -llt.solve(P.block(mu, 0, dv, mu));
    ss.gB = symmetrize(P.topLeftCorner(mu, mu) + P.block(0, mu, mu, dv) * ss.phi);
  } else {
    ss.phi = Mat(0, mu);
    ss.gB = P.topLeftCorner(mu, mu);
  }
  return ss;
}

// With X = u + phi u horizontal and V vertical, g(u + phi u, v) = 0 and
// g|horizontal = gB determine the blocks.
Mat assemble(const SubmersionSplit& ss) {
  const Eigen::Index mu = ss.gB.rows();
  const Eigen::Index dv = ss.gF.rows();
  Mat P(mu + dv, mu + dv);
  const Mat cross = -ss.gF * ss.phi;  // P_V,mu
  P.topLeftCorner(mu, mu) = ss.gB + ss.phi.transpose() * ss.gF * ss.phi;
  P.block(mu, 0, dv, mu) = cross;
  P.block(0, mu, mu, dv) = cross.transpose();
  P.bottomRightCorner(dv, dv) = ss.gF;
  return symmetrize(P);
}

double phi_equivariance_residual(const ReductiveSplit& split, const Mat& phi) {
  const int mu = split.dmu();
  const int dv = split.dv;
  double worst = 0.0;
  for (int i = 0; i < split.dh; ++i) {
    const Mat& a = split.adh(i);
    worst = std::max(worst, max_abs(phi * a.topLeftCorner(mu, mu) - a.bottomRightCorner(dv, dv) * phi));
  }
  return worst;
}

Mat retract_horizontal(const SubmersionSplit& ss, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("retract_horizontal: t must lie in [0, 1]");
  return assemble({ss.gB, ss.gF, (1.0 - t) * ss.phi});
}

ScalarDecomposition scalar_decomposition(const ReductiveSplit& split, const Mat& P) {
  if (!split.semidirect_form) throw std::invalid_argument("scalar_decomposition: V must be an abelian ideal");
  const SubmersionSplit ss = submersion_split(split, P);
  const int mu = split.dmu();
  const int dv = split.dv;
  const int m = split.dm();
  ScalarDecomposition out;
  const ReductiveSplit base = split.base_split();
  if (mu > 0) out.base = ricci(base, ss.gB).scal;

  const Mat U = mu > 0 ? orthonormal_frame(ss.gB) : Mat(0, 0);
  const Mat W = dv > 0 ? orthonormal_frame(ss.gF) : Mat(0, 0);
  // Horizontal lifts in m-coordinates.
  Mat X(m, mu);
  X.topRows(mu) = U;
  X.bottomRows(dv) = ss.phi * U;

  std::vector<Mat> theta(static_cast<std::size_t>(mu));
  for (int i = 0; i < mu; ++i) {
    Mat th = Mat::Zero(dv, dv);
    for (int a = 0; a < mu; ++a) th += U(a, i) * split.adm(a).bottomRightCorner(dv, dv);
    theta[static_cast<std::size_t>(i)] = th;
    out.trace += (th * th).trace();
    const Mat tw = W.transpose() * ss.gF * th * W;  // g(theta V_j, V_k)
    out.action += tw.squaredNorm();
  }
  for (int i = 0; i < mu; ++i) {
    Mat adX = Mat::Zero(m, m);
    for (int a = 0; a < m; ++a) adX += X(a, i) * split.adm(a);
    for (int j = 0; j < mu; ++j) {
      const Vec w = adX * X.col(j);
      const Vec vert = w.tail(dv) - ss.phi * w.head(mu);
      out.oneill += vert.dot(ss.gF * vert);
    }
  }
  return out;
}

namespace {

// Vectorized (column-major) basis of Der(n) as columns.
Mat derivation_matrix(const LieAlgebra& n) {
  const std::vector<Mat> der = derivations(n);
  const int d = n.dim();
  Mat out(d * d, static_cast<Eigen::Index>(der.size()));
  for (std::size_t k = 0; k < der.size(); ++k)
    out.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const Vec>(der[k].data(), d * d);
  return out;
}

}  // namespace

NilsolitonFit nilsoliton_fit(const LieAlgebra& n, const Mat& gF) {
  const int d = n.dim();
  if (gF.rows() != d || gF.cols() != d) throw std::invalid_argument("nilsoliton_fit: gF has wrong dimension");
  if (d > 0 && !is_spd(gF)) throw std::invalid_argument("nilsoliton_fit: gF is not positive definite");
  if (!is_nilpotent(n)) throw std::invalid_argument("nilsoliton_fit: algebra is not nilpotent");
  NilsolitonFit fit;
  fit.D = Mat::Zero(d, d);
  if (d == 0) return fit;

  // Work in a gF-orthonormal frame, where symmetric means symmetric.
  const Mat R = spd_sqrt(gF);
  const Mat Ri = spd_inv_sqrt(gF);
  const LieAlgebra on = n.in_basis(Ri);
  const ReductiveSplit sp = adapted_split(on, AdaptedDims{0, 0, 0, 0, {d}});
  const Mat Ric = symmetrize(ricci(sp, Mat::Identity(d, d)).ric);

  // Symmetric derivations: combinations of Der(on) with vanishing skew part.
  const Mat der = derivation_matrix(on);
  Mat sym_basis(d * d, 0);
  if (der.cols() > 0) {
    Mat skew(d * d, der.cols());
    for (Eigen::Index k = 0; k < der.cols(); ++k) {
      const Mat Dk = Eigen::Map<const Mat>(der.col(k).data(), d, d);
      const Mat s = Dk - Dk.transpose();
      skew.col(k) = Eigen::Map<const Vec>(s.data(), d * d);
    }
    const Mat coeff = null_space(skew);
    if (coeff.cols() > 0) sym_basis = column_space(der * coeff);
  }
  fit.symmetric_derivations = static_cast<int>(sym_basis.cols());

  Mat A(d * d, 1 + sym_basis.cols());
  const Mat I = Mat::Identity(d, d);
  A.col(0) = Eigen::Map<const Vec>(I.data(), d * d);
  A.rightCols(sym_basis.cols()) = sym_basis;
  const Vec b = Eigen::Map<const Vec>(Ric.data(), d * d);
  const Vec x = Eigen::CompleteOrthogonalDecomposition<Mat>(A).solve(b);
  fit.c = x(0);
  const Vec dvec = sym_basis * x.tail(sym_basis.cols());
  const Mat Dn = Eigen::Map<const Mat>(dvec.data(), d, d);
  fit.residual = (Ric - fit.c * I - Dn).norm();
  fit.D = Ri * symmetrize(Dn) * R;
  return fit;
}

double transpose_derivation_residual(const std::vector<Mat>& theta, const LieAlgebra& n,
                                     const Mat& gF) {
  const int d = n.dim();
  if (gF.rows() != d || gF.cols() != d) throw std::invalid_argument("transpose_derivation_residual: gF has wrong dimension");
  const double scale = std::max(1.0, n.max_structure_constant());
  for (const Mat& t : theta) {
    if (t.rows() != d || t.cols() != d) throw std::invalid_argument("transpose_derivation_residual: theta_k has wrong dimension");
    if (derivation_residual(n, t) > 1e-8 * scale * std::max(1.0, max_abs(t)))
      throw std::invalid_argument("transpose_derivation_residual: theta_k is not a derivation");
  }
  const Mat basis = column_space(derivation_matrix(n));
  double worst = 0.0;
  const Eigen::LLT<Mat> llt(gF);
  for (const Mat& t : theta) {
    const Mat tt = llt.solve(t.transpose() * gF);
    const Vec v = Eigen::Map<const Vec>(tt.data(), d * d);
    const Vec r = basis.cols() > 0 ? Vec(v - basis * (basis.transpose() * v)) : v;
    worst = std::max(worst, r.norm());
  }
  return worst;
}

LieAlgebra abelian_extension(const LieAlgebra& n, const std::vector<Mat>& theta) {
  const int k = static_cast<int>(theta.size());
  const int d = n.dim();
  const int dim = k + d;
  std::vector<double> c(static_cast<std::size_t>(dim) * dim * dim, 0.0);
  auto at = [&](int i, int j, int l) -> double& {
    return c[(static_cast<std::size_t>(i) * dim + j) * dim + l];
  };
  for (int a = 0; a < k; ++a) {
    const Mat& t = theta[static_cast<std::size_t>(a)];
    if (t.rows() != d || t.cols() != d) throw AlgebraError("abelian_extension: theta_k has wrong dimension");
    for (int j = 0; j < d; ++j)
      for (int l = 0; l < d; ++l) {
        at(a, k + j, k + l) = t(l, j);
        at(k + j, a, k + l) = -t(l, j);
      }
  }
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int l = 0; l < d; ++l) at(k + i, k + j, k + l) = n.c(i, j, l);
  std::vector<std::string> labels;
  for (int a = 0; a < k; ++a) labels.push_back("T" + std::to_string(a + 1));
  for (int i = 0; i < d; ++i)
    labels.push_back(i < static_cast<int>(n.labels().size()) ? n.labels()[static_cast<std::size_t>(i)]
                                                             : "N" + std::to_string(i + 1));
  return LieAlgebra(dim, std::move(c), std::move(labels));
}

InvariantSetReport track_invariant_set(const LieAlgebra& n, const std::vector<Mat>& theta,
                                       const Mat& g0, const FlowControls& c) {
  const int k = static_cast<int>(theta.size());
  const int d = n.dim();
  const LieAlgebra g = abelian_extension(n, theta);
  const ReductiveSplit sp = adapted_split(g, AdaptedDims{0, 0, 0, k, {d}});
  const FlowTrajectory traj = integrate(sp, g0, c);
  InvariantSetReport rep;
  rep.stop_reason = traj.stop_reason;
  for (const FlowSample& s : traj.samples) {
    InvariantSetSample x;
    x.t = s.t;
    x.mixed = max_abs(s.P.block(k, 0, d, k));
    const Mat gF = s.P.bottomRightCorner(d, d);
    x.nilsoliton = nilsoliton_fit(n, gF).residual;
    x.transpose = transpose_derivation_residual(theta, n, gF);
    rep.worst_mixed = std::max(rep.worst_mixed, x.mixed);
    rep.worst_nilsoliton = std::max(rep.worst_nilsoliton, x.nilsoliton);
    rep.worst_transpose = std::max(rep.worst_transpose, x.transpose);
    rep.samples.push_back(x);
  }
  return rep;
}

}  // namespace hrf
