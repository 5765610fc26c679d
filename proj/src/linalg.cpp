#include "hrf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hrf {

SymEig sym_eig(const Mat& s) {
  if (s.rows() == 0) return {Vec(0), Mat(0, 0)};
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(s));
  if (es.info() != Eigen::Success) throw std::runtime_error("sym_eig: eigen-solver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

Mat symmetrize(const Mat& a) { return 0.5 * (a + a.transpose()); }

double min_eigenvalue(const Mat& s) {
  if (s.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(s), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double max_eigenvalue(const Mat& s) {
  if (s.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(s), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(s.rows() - 1);
}

bool is_spd(const Mat& s) {
  if (s.rows() != s.cols()) return false;
  if (s.rows() == 0) return true;
  if (!s.allFinite()) return false;
  Eigen::LLT<Mat> llt(symmetrize(s));
  if (llt.info() != Eigen::Success) return false;
  return min_eigenvalue(s) > 0.0;
}

Mat spd_sqrt(const Mat& s) {
  const SymEig e = sym_eig(s);
  return e.vectors * e.values.cwiseSqrt().asDiagonal() * e.vectors.transpose();
}

Mat spd_inv_sqrt(const Mat& s) {
  const SymEig e = sym_eig(s);
  return e.vectors * e.values.cwiseSqrt().cwiseInverse().asDiagonal() * e.vectors.transpose();
}

Mat orthonormal_frame(const Mat& s) {
  const SymEig e = sym_eig(s);
  return e.vectors * e.values.cwiseSqrt().cwiseInverse().asDiagonal();
}

namespace {

int numerical_rank(const Vec& sigma, double rel_tol) {
  if (sigma.size() == 0) return 0;
  const double smax = sigma(0);
  if (smax == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) > rel_tol * smax) ++r;
  return r;
}

}  // namespace

Mat column_space(const Mat& a, double rel_tol) {
  if (a.rows() == 0 || a.cols() == 0) return Mat(a.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU);
  const int r = numerical_rank(svd.singularValues(), rel_tol);
  return svd.matrixU().leftCols(r);
}

Mat null_space(const Mat& a, double rel_tol) {
  const Eigen::Index n = a.cols();
  if (a.rows() == 0) return Mat::Identity(n, n);
  if (n == 0) return Mat(0, 0);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const int r = numerical_rank(svd.singularValues(), rel_tol);
  return svd.matrixV().rightCols(n - r);
}

Mat complement_in(const Mat& a, const Mat& b) {
  if (a.cols() == 0) return Mat(a.rows(), 0);
  if (b.cols() == 0) return a;
  // Coefficients c with b^T a c = 0.
  const Mat coeffs = null_space(b.transpose() * a);
  return gram_schmidt(a * coeffs, 1e-10);
}

Mat gram_schmidt(const Mat& a, double drop_tol) {
  std::vector<Vec> kept;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    Vec v = a.col(j);
    const double n0 = v.norm();
    if (n0 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& q : kept) v -= q.dot(v) * q;
    if (v.norm() < drop_tol * std::max(1.0, n0)) continue;
    kept.push_back(v.normalized());
  }
  Mat out(a.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = kept[j];
  return out;
}

double max_abs(const Mat& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

Mat block_diag(const std::vector<Mat>& blocks) {
  Eigen::Index r = 0, c = 0;
  for (const Mat& b : blocks) {
    r += b.rows();
    c += b.cols();
  }
  Mat out = Mat::Zero(r, c);
  Eigen::Index i = 0, j = 0;
  for (const Mat& b : blocks) {
    out.block(i, j, b.rows(), b.cols()) = b;
    i += b.rows();
    j += b.cols();
  }
  return out;
}

}  // namespace hrf
