#include "hrf/catalog.hpp"

#include <cmath>
#include <stdexcept>

namespace hrf {

Mat cross_generator(int i) {
  Mat l = Mat::Zero(3, 3);
  const int j = (i + 1) % 3, k = (i + 2) % 3;
  l(k, j) = 1.0;
  l(j, k) = -1.0;
  return l;
}

LieAlgebra su2() {
  return LieAlgebra::from_brackets(
      3, {{0, 1, Vec::Unit(3, 2)}, {1, 2, Vec::Unit(3, 0)}, {2, 0, Vec::Unit(3, 1)}}, {"X1", "X2", "X3"});
}

namespace {

LieAlgebra su2_plus_line() {
  return LieAlgebra::from_brackets(
      4, {{0, 1, Vec::Unit(4, 2)}, {1, 2, Vec::Unit(4, 0)}, {2, 0, Vec::Unit(4, 1)}},
      {"X1", "X2", "X3", "Z"});
}

Mat diag(std::initializer_list<double> v) {
  Vec d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d(i++) = x;
  return d.asDiagonal();
}

}  // namespace

std::vector<std::string> catalog_names() {
  return {"E1_su2xR_R3", "E2_su2_biinv", "E3_heisenberg", "E4_preflat_E2", "E5_two_weights"};
}

CatalogEntry catalog(const std::string& name, const CatalogParams& p) {
  CatalogEntry e;
  e.name = name;
  if (name == "E1_su2xR_R3") {
    e.description = "(su(2) + R) x| R^3, su(2) by rotations, Z by lambda*Id";
    e.data.u = su2_plus_line();
    e.data.dimV = 3;
    for (int i = 0; i < 3; ++i) e.data.theta.push_back(cross_generator(i));
    e.data.theta.push_back(p.lambda * Mat::Identity(3, 3));
    e.metrics["background"] = Mat::Identity(7, 7);
    e.metrics["squashed_V"] = diag({1, 1, 1, 1, 1, 1, 4});
  } else if (name == "E2_su2_biinv") {
    e.description = "su(2) with V = 0, bi-invariant metric";
    e.data.u = su2();
    e.data.dimV = 0;
    e.data.theta.assign(3, Mat(0, 0));
    e.metrics["background"] = Mat::Identity(3, 3);
  } else if (name == "E3_heisenberg") {
    e.description = "Heisenberg algebra [X,Y] = Z as a nilpotent group";
    e.data.u = LieAlgebra();
    e.data.dimV = 3;
    e.nilpotent = LieAlgebra::from_brackets(3, {{0, 1, Vec::Unit(3, 2)}}, {"X", "Y", "Z"});
    e.metrics["background"] = Mat::Identity(3, 3);
  } else if (name == "E4_preflat_E2") {
    e.description = "R x| R^2 by the rotation generator (flat metrics exist)";
    e.data.u = LieAlgebra::abelian(1, {"Z"});
    e.data.dimV = 2;
    Mat J(2, 2);
    J << 0, -1, 1, 0;
    e.data.theta.push_back(J);
    e.metrics["background"] = Mat::Identity(3, 3);
    e.metrics["squashed_V"] = diag({1, 1, 4});
  } else if (name == "E5_two_weights") {
    e.description = "(su(2) + R) x| (R^3 + R^3), Z by lambda1*Id and lambda2*Id";
    e.data.u = su2_plus_line();
    e.data.dimV = 6;
    for (int i = 0; i < 3; ++i) e.data.theta.push_back(block_diag({cross_generator(i), cross_generator(i)}));
    e.data.theta.push_back(block_diag({p.lambda1 * Mat::Identity(3, 3), p.lambda2 * Mat::Identity(3, 3)}));
    e.metrics["background"] = Mat::Identity(10, 10);
  } else {
    throw std::invalid_argument("unknown catalog entry '" + name + "'");
  }
  return e;
}

ReductiveSplit build_split(const CatalogEntry& e) {
  if (e.nilpotent) {
    if (!e.h_basis.empty()) throw std::invalid_argument("build_split: isotropy not supported for nilpotent V");
    return adapted_split(*e.nilpotent, AdaptedDims{0, 0, 0, 0, {e.nilpotent->dim()}});
  }
  return split_u(e.data, e.h_basis);
}

Mat invariant_symmetric_forms(const ReductiveSplit& split, bool adapted) {
  const int m = split.dm();
  std::vector<std::pair<int, int>> slots;
  const Mat pattern = adapted ? adapted_part(split, Mat::Ones(m, m)) : Mat::Ones(m, m);
  for (int q = 0; q < m; ++q)
    for (int p = 0; p <= q; ++p)
      if (pattern(p, q) != 0.0) slots.emplace_back(p, q);
  const int ns = static_cast<int>(slots.size());
  Mat basis = Mat::Zero(m * m, ns);
  for (int s = 0; s < ns; ++s) {
    const auto [p, q] = slots[static_cast<std::size_t>(s)];
    const double w = p == q ? 1.0 : 1.0 / std::sqrt(2.0);
    basis(q * m + p, s) = w;
    basis(p * m + q, s) = w;
  }
  if (split.dh == 0) return basis;
  Mat cons = Mat::Zero(static_cast<Eigen::Index>(split.dh) * m * m, ns);
  for (int s = 0; s < ns; ++s) {
    const Mat S = Eigen::Map<const Mat>(basis.col(s).data(), m, m);
    for (int i = 0; i < split.dh; ++i) {
      const Mat c = split.adh(i) * S - S * split.adh(i);
      cons.block(static_cast<Eigen::Index>(i) * m * m, s, m * m, 1) = Eigen::Map<const Vec>(c.data(), m * m);
    }
  }
  return basis * null_space(cons, 1e-10);
}

Mat random_metric(const ReductiveSplit& split, std::mt19937_64& rng, bool adapted, double kappa) {
  const int m = split.dm();
  if (m == 0) return Mat(0, 0);
  const Mat forms = invariant_symmetric_forms(split, adapted);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.2, 1.0);
  Vec coeff(forms.cols());
  for (Eigen::Index i = 0; i < coeff.size(); ++i) coeff(i) = normal(rng);
  const Vec flat = forms * coeff;
  Mat S = symmetrize(Eigen::Map<const Mat>(flat.data(), m, m));
  const double radius = sym_eig(S).values.cwiseAbs().maxCoeff();
  if (radius > 0.0) S *= unit(rng) * std::log(kappa) / radius;
  const SymEig e = sym_eig(S);
  return symmetrize(e.vectors * e.values.array().exp().matrix().asDiagonal() * e.vectors.transpose());
}

}  // namespace hrf
