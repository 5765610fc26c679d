#include "hrf/liealg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hrf {

namespace {

std::vector<std::string> default_labels(int dim, std::vector<std::string> labels) {
  if (labels.empty()) {
    labels.reserve(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) labels.push_back("e" + std::to_string(i + 1));
  }
  if (static_cast<int>(labels.size()) != dim)
    throw std::invalid_argument("LieAlgebra: label count does not match dimension");
  return labels;
}

}  // namespace

LieAlgebra::LieAlgebra(int dim, std::vector<double> c, std::vector<std::string> labels, double tol)
    : dim_(dim), c_(std::move(c)), labels_(default_labels(dim, std::move(labels))) {
  if (dim < 0) throw std::invalid_argument("LieAlgebra: negative dimension");
  const std::size_t n = static_cast<std::size_t>(dim);
  if (c_.size() != n * n * n)
    throw std::invalid_argument("LieAlgebra: structure tensor has wrong size");
  build_ad();

  const double s = std::max(1.0, max_structure_constant());
  double anti = 0.0;
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j)
      for (int k = 0; k < dim_; ++k) anti = std::max(anti, std::abs(this->c(i, j, k) + this->c(j, i, k)));
  if (anti > tol * s) {
    std::ostringstream os;
    os << "LieAlgebra: structure constants not antisymmetric (residual " << anti << ")";
    throw AlgebraError(os.str());
  }
  const double jac = jacobi_residual();
  if (jac > tol * s * s) {
    std::ostringstream os;
    os << "LieAlgebra: Jacobi identity fails (residual " << jac << ")";
    throw AlgebraError(os.str());
  }
}

LieAlgebra LieAlgebra::abelian(int dim, std::vector<std::string> labels) {
  const std::size_t n = static_cast<std::size_t>(dim);
  return LieAlgebra(dim, std::vector<double>(n * n * n, 0.0), std::move(labels));
}

LieAlgebra LieAlgebra::from_brackets(int dim, const std::vector<Bracket>& brackets,
                                     std::vector<std::string> labels) {
  const std::size_t n = static_cast<std::size_t>(dim);
  std::vector<double> c(n * n * n, 0.0);
  for (const Bracket& b : brackets) {
    if (b.i < 0 || b.j < 0 || b.i >= dim || b.j >= dim || b.coeffs.size() != dim)
      throw std::invalid_argument("LieAlgebra::from_brackets: bracket out of range");
    for (int k = 0; k < dim; ++k) {
      c[(static_cast<std::size_t>(b.i) * n + b.j) * n + k] = b.coeffs(k);
      c[(static_cast<std::size_t>(b.j) * n + b.i) * n + k] = -b.coeffs(k);
    }
  }
  return LieAlgebra(dim, std::move(c), std::move(labels));
}

void LieAlgebra::build_ad() {
  ad_.assign(static_cast<std::size_t>(dim_), Mat::Zero(dim_, dim_));
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j)
      for (int k = 0; k < dim_; ++k) ad_[static_cast<std::size_t>(i)](k, j) = c(i, j, k);
}

Mat LieAlgebra::ad_of(const Vec& x) const {
  if (x.size() != dim_) throw std::invalid_argument("ad_of: dimension mismatch");
  Mat out = Mat::Zero(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    if (x(i) != 0.0) out += x(i) * ad(i);
  return out;
}

Vec LieAlgebra::bracket(const Vec& x, const Vec& y) const {
  if (x.size() != dim_ || y.size() != dim_)
    throw std::invalid_argument("bracket: dimension mismatch");
  return ad_of(x) * y;
}

double LieAlgebra::jacobi_residual() const {
  double worst = 0.0;
  for (int i = 0; i < dim_; ++i)
    for (int j = i + 1; j < dim_; ++j) {
      const Vec eij = ad(i).col(j);
      const Mat ad_ij = ad_of(eij);
      for (int k = j + 1; k < dim_; ++k) {
        // [[ei,ej],ek] + [[ej,ek],ei] + [[ek,ei],ej]
        const Vec r = ad_ij.col(k) + ad_of(ad(j).col(k)).col(i) + ad_of(ad(k).col(i)).col(j);
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
      }
    }
  return worst;
}

double LieAlgebra::max_structure_constant() const {
  double m = 0.0;
  for (double v : c_) m = std::max(m, std::abs(v));
  return m;
}

LieAlgebra LieAlgebra::in_basis(const Mat& basis, std::vector<std::string> labels) const {
  if (basis.rows() != dim_ || basis.cols() != dim_)
    throw std::invalid_argument("in_basis: basis must be square of size dim");
  Eigen::FullPivLU<Mat> lu(basis);
  if (!lu.isInvertible()) throw std::invalid_argument("in_basis: basis is singular");
  const std::size_t n = static_cast<std::size_t>(dim_);
  std::vector<double> c(n * n * n, 0.0);
  for (int i = 0; i < dim_; ++i) {
    const Mat adi = ad_of(basis.col(i));
    for (int j = 0; j < dim_; ++j) {
      const Vec coords = lu.solve(Vec(adi * basis.col(j)));
      for (int k = 0; k < dim_; ++k) c[(static_cast<std::size_t>(i) * n + j) * n + k] = coords(k);
    }
  }
  // Exact antisymmetry survives the change of basis only up to rounding.
  for (int i = 0; i < dim_; ++i)
    for (int j = i; j < dim_; ++j)
      for (int k = 0; k < dim_; ++k) {
        const std::size_t a = (static_cast<std::size_t>(i) * n + j) * n + k;
        const std::size_t b = (static_cast<std::size_t>(j) * n + i) * n + k;
        const double v = 0.5 * (c[a] - c[b]);
        c[a] = v;
        c[b] = -v;
      }
  return LieAlgebra(dim_, std::move(c), labels.empty() ? labels_ : std::move(labels), 1e-9);
}

LieAlgebra LieAlgebra::leading_subalgebra(int n) const {
  if (n < 0 || n > dim_) throw std::invalid_argument("leading_subalgebra: bad size");
  const std::size_t m = static_cast<std::size_t>(n);
  std::vector<double> c(m * m * m, 0.0);
  double leak = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) c[(static_cast<std::size_t>(i) * m + j) * m + k] = this->c(i, j, k);
      for (int k = n; k < dim_; ++k) leak = std::max(leak, std::abs(this->c(i, j, k)));
    }
  if (leak > 1e-10 * std::max(1.0, max_structure_constant()))
    throw AlgebraError("leading_subalgebra: leading block is not closed under the bracket");
  std::vector<std::string> labels(labels_.begin(), labels_.begin() + n);
  return LieAlgebra(n, std::move(c), std::move(labels));
}

double homomorphism_residual(const SemidirectData& d) {
  const int du = d.u.dim();
  double worst = 0.0;
  for (int i = 0; i < du; ++i)
    for (int j = i + 1; j < du; ++j) {
      Mat lhs = Mat::Zero(d.dimV, d.dimV);
      for (int k = 0; k < du; ++k) lhs += d.u.c(i, j, k) * d.theta[static_cast<std::size_t>(k)];
      const Mat& ti = d.theta[static_cast<std::size_t>(i)];
      const Mat& tj = d.theta[static_cast<std::size_t>(j)];
      worst = std::max(worst, max_abs(lhs - (ti * tj - tj * ti)));
    }
  return worst;
}

Vec bracket(const LieAlgebra& a, const Vec& x, const Vec& y) { return a.bracket(x, y); }

Mat killing_form(const LieAlgebra& a) {
  const int n = a.dim();
  Mat b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      b(i, j) = (a.ad(i) * a.ad(j)).trace();
      b(j, i) = b(i, j);
    }
  return b;
}

LieAlgebra semidirect(const SemidirectData& d) {
  const int du = d.u.dim();
  const int dv = d.dimV;
  if (dv < 0) throw std::invalid_argument("semidirect: negative dimV");
  if (static_cast<int>(d.theta.size()) != du)
    throw std::invalid_argument("semidirect: need one theta matrix per u basis element");
  double scale = 1.0;
  for (const Mat& t : d.theta) {
    if (t.rows() != dv || t.cols() != dv)
      throw std::invalid_argument("semidirect: theta matrices must be dimV x dimV");
    scale = std::max(scale, max_abs(t));
  }
  const double hom = homomorphism_residual(d);
  if (hom > kTolJacobi * scale * std::max(scale, std::max(1.0, d.u.max_structure_constant()))) {
    std::ostringstream os;
    os << "semidirect: theta is not a Lie algebra homomorphism (residual " << hom << ")";
    throw AlgebraError(os.str());
  }
  const int n = du + dv;
  const std::size_t m = static_cast<std::size_t>(n);
  std::vector<double> c(m * m * m, 0.0);
  auto at = [&](int i, int j, int k) -> double& { return c[(static_cast<std::size_t>(i) * m + j) * m + k]; };
  for (int i = 0; i < du; ++i)
    for (int j = 0; j < du; ++j)
      for (int k = 0; k < du; ++k) at(i, j, k) = d.u.c(i, j, k);
  for (int i = 0; i < du; ++i)
    for (int p = 0; p < dv; ++p)
      for (int q = 0; q < dv; ++q) {
        const double v = d.theta[static_cast<std::size_t>(i)](q, p);
        at(i, du + p, du + q) = v;
        at(du + p, i, du + q) = -v;
      }
  std::vector<std::string> labels = d.u.labels();
  for (int p = 0; p < dv; ++p) labels.push_back("A" + std::to_string(p + 1));
  return LieAlgebra(n, std::move(c), std::move(labels));
}

std::vector<Mat> derivations(const LieAlgebra& a) {
  const int n = a.dim();
  if (n == 0) return {};
  const int pairs = n * (n - 1) / 2;
  Mat sys = Mat::Zero(static_cast<Eigen::Index>(pairs) * n, n * n);
  auto var = [n](int row, int col) { return row * n + col; };  // D(row, col)
  int r = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k, ++r) {
        for (int m = 0; m < n; ++m) sys(r, var(k, m)) += a.c(i, j, m);
        for (int p = 0; p < n; ++p) {
          sys(r, var(p, i)) -= a.c(p, j, k);
          sys(r, var(p, j)) -= a.c(i, p, k);
        }
      }
  const Mat ns = null_space(sys, 1e-8);
  std::vector<Mat> out;
  out.reserve(static_cast<std::size_t>(ns.cols()));
  for (Eigen::Index c = 0; c < ns.cols(); ++c) {
    Mat d(n, n);
    for (int row = 0; row < n; ++row)
      for (int col = 0; col < n; ++col) d(row, col) = ns(var(row, col), c);
    out.push_back(d);
  }
  return out;
}

double derivation_residual(const LieAlgebra& a, const Mat& d) {
  const int n = a.dim();
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const Vec lhs = d * a.ad(i).col(j);
      const Vec rhs = a.ad_of(d.col(i)).col(j) + a.ad(i) * d.col(j);
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
  return worst;
}

Vec unimodularity_defect(const LieAlgebra& a) {
  Vec t(a.dim());
  for (int i = 0; i < a.dim(); ++i) t(i) = a.ad(i).trace();
  return t;
}

bool is_nilpotent(const LieAlgebra& a) {
  const int n = a.dim();
  if (n == 0) return true;
  Mat current = Mat::Identity(n, n);  // spans g^1 = g
  for (int step = 0; step <= n; ++step) {
    if (current.cols() == 0) return true;
    Mat next(n, n * current.cols());
    for (int i = 0; i < n; ++i) next.middleCols(i * current.cols(), current.cols()) = a.ad(i) * current;
    const Mat span = column_space(next, 1e-10);
    if (span.cols() == current.cols()) return false;
    current = span;
  }
  return current.cols() == 0;
}

}  // namespace hrf
