#include "hrf/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hrf {

namespace {

void require_metric(const ReductiveSplit& split, const Mat& P) {
  if (P.rows() != split.dm() || P.cols() != split.dm())
    throw std::invalid_argument("metric has wrong dimension for this split");
  if (split.dm() > 0 && !is_spd(P)) throw std::invalid_argument("metric is not positive definite");
}

void require_adapted(const ReductiveSplit& split, const Mat& P, const char* who) {
  if (!split.semidirect_form)
    throw std::invalid_argument(std::string(who) + ": split is not of semidirect weight form");
  const double r = check_theta_adapted(split, P);
  if (r > kTolBlock * std::max(1.0, max_abs(P))) {
    std::ostringstream os;
    os << who << ": metric is not theta-adapted (residual " << r << ")";
    throw std::invalid_argument(os.str());
  }
}

Mat ad_combination(const ReductiveSplit& split, const Vec& x) {
  const int m = split.dm();
  Mat out = Mat::Zero(m, m);
  for (int a = 0; a < m; ++a)
    if (x(a) != 0.0) out += x(a) * split.adm(a);
  return out;
}

}  // namespace

double equivariance_residual(const ReductiveSplit& split, const Mat& P) {
  double worst = 0.0;
  for (int i = 0; i < split.dh; ++i) {
    const Mat& a = split.adh(i);
    worst = std::max(worst, max_abs(a * P - P * a));
  }
  return worst;
}

InvariantMetric::InvariantMetric(const ReductiveSplit& split, Mat P) : P_(std::move(P)) {
  require_metric(split, P_);
  if (max_abs(P_ - P_.transpose()) > 1e-12 * std::max(1.0, max_abs(P_)))
    throw std::invalid_argument("metric is not symmetric");
  const double eq = equivariance_residual(split, P_);
  if (eq > kTolEquiv * std::max(1.0, max_abs(P_))) {
    std::ostringstream os;
    os << "metric is not ad(h)-equivariant (residual " << eq << ")";
    throw std::invalid_argument(os.str());
  }
}

Vec mean_curvature(const ReductiveSplit& split, const Mat& P) {
  require_metric(split, P);
  if (split.dm() == 0) return Vec(0);
  return P.llt().solve(split.trace_form());
}

double g_norm2(const Mat& P, const Mat& T) {
  if (P.rows() == 0) return 0.0;
  const Mat op = P.llt().solve(T);
  return (op * op).trace();
}

CurvatureReport ricci(const ReductiveSplit& split, const Mat& P, const std::optional<Mat>& frame) {
  require_metric(split, P);
  const int m = split.dm();
  CurvatureReport r;
  r.B = split.killing_m();
  if (m == 0) {
    r.ric = r.ric_star = r.M = r.h_term = Mat(0, 0);
    r.H = Vec(0);
    return r;
  }
  const Mat F = frame ? *frame : orthonormal_frame(P);
  if (F.rows() != m || F.cols() != m) throw std::invalid_argument("ricci: frame has wrong shape");

  // Term -1/2 sum_i g([X, X_i], [Y, X_i]) as a Gram matrix of R ad(e_a) F.
  const Mat R = P.llt().matrixU();  // P = R^T R
  Mat Y(m * m, m);
  for (int a = 0; a < m; ++a) {
    const Mat w = R * split.adm(a) * F;
    Y.col(a) = Eigen::Map<const Vec>(w.data(), m * m);
  }
  // Term 1/4 sum_ij g([X_i, X_j], X) g([X_i, X_j], Y) from columns P C_ij.
  Mat Z(m, m * m);
  double bracket_norm2 = 0.0;
  for (int i = 0; i < m; ++i) {
    const Mat Ci = ad_combination(split, F.col(i)) * F;  // column j = [X_i, X_j]_m
    const Mat PCi = P * Ci;
    Z.middleCols(i * m, m) = PCi;
    bracket_norm2 += (Ci.transpose() * PCi).trace();
  }
  r.M = symmetrize(-0.5 * Y.transpose() * Y + 0.25 * Z * Z.transpose());

  r.H = P.llt().solve(split.trace_form());
  r.h_term = symmetrize(P * ad_combination(split, r.H));
  r.ric_star = symmetrize(-0.5 * r.B + r.M);
  r.ric = symmetrize(r.ric_star - r.h_term);

  const Eigen::LLT<Mat> llt(P);
  const Mat ric_op = llt.solve(r.ric);
  const Mat star_op = llt.solve(r.ric_star);
  r.scal = ric_op.trace();
  r.scal_star = star_op.trace();
  r.ric_norm2 = (ric_op * ric_op).trace();
  r.ric_star_norm2 = (star_op * star_op).trace();
  r.scal_frame_sum = -0.5 * (F.transpose() * r.B * F).trace() - 0.25 * bracket_norm2 - r.H.dot(P * r.H);
  return r;
}

Mat unimodular_ricci(const ReductiveSplit& split, const Mat& P) { return ricci(split, P).ric_star; }

ScalarCurvatures scalar_curvatures(const ReductiveSplit& split, const Mat& P) {
  const CurvatureReport r = ricci(split, P);
  return {r.scal, r.scal_star};
}

BlockFrame block_frame(const Mat& P, const BlockRange& b) {
  const SymEig e = sym_eig(P.block(b.offset, b.offset, b.size, b.size));
  return {e.values, e.vectors};
}

std::vector<VBlockReport> ricci_V_block(const ReductiveSplit& split, const Mat& P) {
  require_metric(split, P);
  require_adapted(split, P, "ricci_V_block");
  const int mu = split.dmu();
  const Mat Fu = mu > 0 ? orthonormal_frame(P.topLeftCorner(mu, mu)) : Mat(0, 0);
  const Mat rs = unimodular_ricci(split, P);

  std::vector<VBlockReport> out;
  for (const BlockRange& b : split.weight_blocks) {
    VBlockReport rep;
    rep.frame = block_frame(P, b);
    const Vec& g = rep.frame.g;
    const Mat& abar = rep.frame.abar;
    const int d = b.size;

    // c_k(i, j) = <[U_k, Abar_i], Abar_j>
    rep.specialized = Vec::Zero(d);
    for (int k = 0; k < mu; ++k) {
      Mat adU = Mat::Zero(d, d);
      for (int a = 0; a < mu; ++a)
        adU += Fu(a, k) * split.adm(a).block(b.offset, b.offset, d, d);
      const Mat c = abar.transpose() * adU * abar;  // c(j, i) = <[U_k, Abar_i], Abar_j>
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          rep.specialized(i) += 0.5 * c(j, i) * c(j, i) * (g(i) / g(j) - g(j) / g(i));
          rep.term_scale += 0.5 * c(j, i) * c(j, i) * (g(i) / g(j) + g(j) / g(i));
        }
    }

    Mat A = Mat::Zero(P.rows(), d);
    A.middleRows(b.offset, d) = abar * g.cwiseSqrt().cwiseInverse().asDiagonal();
    rep.general = symmetrize(A.transpose() * rs * A);
    rep.deviation = (rep.specialized - rep.general.diagonal()).cwiseAbs().maxCoeff();

    rep.fbar = Vec::Zero(d);
    rep.f = Vec::Zero(d);
    double sbar = 0.0, s = 0.0;
    for (int i = d - 1; i >= 0; --i) {
      s += rep.specialized(i);
      sbar += g(i) * rep.specialized(i);
      rep.f(i) = s;
      rep.fbar(i) = sbar;
    }
    out.push_back(std::move(rep));
  }
  return out;
}

double eigen_ratio_error(const ReductiveSplit& split, const Mat& P, const Vec& L) {
  const Mat adL = ad_combination(split, L);
  double e = 0.0;
  for (const BlockRange& b : split.weight_blocks) {
    const BlockFrame fr = block_frame(P, b);
    const Mat c = fr.abar.transpose() * adL.block(b.offset, b.offset, b.size, b.size) * fr.abar;
    for (int i = 0; i < b.size; ++i)
      for (int j = 0; j < b.size; ++j)
        e += c(j, i) * c(j, i) * (fr.g(i) / fr.g(j) + fr.g(j) / fr.g(i) - 2.0);
  }
  return e;
}

Mat eigen_ratio_form(const ReductiveSplit& split, const Mat& P, int k) {
  Mat out = Mat::Zero(k, k);
  for (const BlockRange& b : split.weight_blocks) {
    const BlockFrame fr = block_frame(P, b);
    std::vector<Mat> c(static_cast<std::size_t>(k));
    for (int a = 0; a < k; ++a)
      c[static_cast<std::size_t>(a)] = fr.abar.transpose() * split.adm(a).block(b.offset, b.offset, b.size, b.size) * fr.abar;
    Mat w(b.size, b.size);
    for (int i = 0; i < b.size; ++i)
      for (int j = 0; j < b.size; ++j) w(j, i) = fr.g(i) / fr.g(j) + fr.g(j) / fr.g(i) - 2.0;
    for (int a = 0; a < k; ++a)
      for (int bb = a; bb < k; ++bb) {
        const double v = c[static_cast<std::size_t>(a)].cwiseProduct(c[static_cast<std::size_t>(bb)]).cwiseProduct(w).sum();
        out(a, bb) += v;
        if (bb != a) out(bb, a) += v;
      }
  }
  return out;
}

UBlockReport ricci_U_block(const ReductiveSplit& split, const Mat& P) {
  require_metric(split, P);
  require_adapted(split, P, "ricci_U_block");
  const int mu = split.dmu();
  const int dv = split.dv;
  UBlockReport rep;
  rep.ric_star = unimodular_ricci(split, P).topLeftCorner(mu, mu);
  const ReductiveSplit base = split.base_split();
  rep.ric_base = ricci(base, P.topLeftCorner(mu, mu)).ric;

  const Mat FV = dv > 0 ? orthonormal_frame(P.bottomRightCorner(dv, dv)) : Mat(0, 0);
  const Mat PV = P.bottomRightCorner(dv, dv);
  std::vector<Mat> thetaF(static_cast<std::size_t>(mu));
  for (int a = 0; a < mu; ++a) thetaF[static_cast<std::size_t>(a)] = split.adm(a).block(mu, mu, dv, dv) * FV;
  rep.correction = Mat::Zero(mu, mu);
  for (int a = 0; a < mu; ++a)
    for (int b = a; b < mu; ++b) {
      const double s = (thetaF[static_cast<std::size_t>(a)].transpose() * PV * thetaF[static_cast<std::size_t>(b)]).trace();
      rep.correction(a, b) = rep.correction(b, a) = -0.5 * (s + split.v_trace_form()(a, b));
    }
  rep.deviation = mu > 0 ? max_abs(rep.ric_base + rep.correction - rep.ric_star) : 0.0;

  const int dl = split.dl;
  rep.l_error = eigen_ratio_form(split, P, dl);
  if (dl > 0) {
    const Mat spec46 = rep.ric_base.topLeftCorner(dl, dl) - 0.25 * rep.l_error;
    rep.l_deviation = max_abs(spec46 - rep.ric_star.topLeftCorner(dl, dl));

    const SymEig e = sym_eig(P.topLeftCorner(dl, dl));
    const Vec Lbar = e.vectors.col(dl - 1);
    const LieAlgebra u = split.algebra.leading_subalgebra(split.du);
    const Mat Bk = killing_form(u).block(split.dh, split.dh, dl, dl);
    rep.ric_star_top = Lbar.dot(rep.ric_star.topLeftCorner(dl, dl) * Lbar);
    rep.base_top = Lbar.dot(rep.ric_base.topLeftCorner(dl, dl) * Lbar);
    rep.killing_top = -0.25 * Lbar.dot(Bk * Lbar);
    rep.lower_bound_top = rep.killing_top - 0.25 * Lbar.dot(rep.l_error * Lbar);
  }
  return rep;
}

}  // namespace hrf
