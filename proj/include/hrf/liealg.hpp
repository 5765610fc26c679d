#pragma once

// Finite-dimensional real Lie algebras given by structure constants,
// [e_i, e_j] = sum_k c(i, j, k) e_k, stored dense.

#include "hrf/linalg.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace hrf {

/// Rejected algebraic input (Jacobi failure, non-homomorphism, ...).
class AlgebraError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kTolJacobi = 1e-10;

class LieAlgebra {
 public:
  /// Zero-dimensional algebra.
  LieAlgebra() = default;

  /// `c` is indexed c[(i * dim + j) * dim + k].  Antisymmetry and the Jacobi
  /// identity are checked against tol * max(1, max|c|^2); throws AlgebraError.
  LieAlgebra(int dim, std::vector<double> c, std::vector<std::string> labels = {},
             double tol = kTolJacobi);

  static LieAlgebra abelian(int dim, std::vector<std::string> labels = {});

  struct Bracket {
    int i;
    int j;
    Vec coeffs;  // [e_i, e_j] in the basis
  };
  /// Build from the nonzero brackets with i < j; the rest follows by antisymmetry.
  static LieAlgebra from_brackets(int dim, const std::vector<Bracket>& brackets,
                                  std::vector<std::string> labels = {});

  int dim() const { return dim_; }
  double c(int i, int j, int k) const { return c_[idx(i, j, k)]; }
  const std::vector<std::string>& labels() const { return labels_; }

  /// Matrix of ad(e_i): column j is [e_i, e_j].
  const Mat& ad(int i) const { return ad_[static_cast<std::size_t>(i)]; }
  Mat ad_of(const Vec& x) const;
  Vec bracket(const Vec& x, const Vec& y) const;

  /// max over triples of |[[e_i,e_j],e_k] + cyclic|.
  double jacobi_residual() const;
  double max_structure_constant() const;

  /// Same algebra in the basis given by the columns of `basis` (invertible).
  LieAlgebra in_basis(const Mat& basis, std::vector<std::string> labels = {}) const;

  /// Restriction to the first `n` basis vectors, which must span a subalgebra.
  LieAlgebra leading_subalgebra(int n) const;

 private:
  std::size_t idx(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * dim_ + j) * dim_ + k;
  }
  void build_ad();

  int dim_ = 0;
  std::vector<double> c_;
  std::vector<std::string> labels_;
  std::vector<Mat> ad_;
};

/// theta: u -> gl(V) as matrices theta_k = theta(e_k) acting on column vectors.
struct SemidirectData {
  LieAlgebra u;
  int dimV = 0;
  std::vector<Mat> theta;
};

/// max |theta([e_i,e_j]) - [theta_i, theta_j]|.
double homomorphism_residual(const SemidirectData& d);

Vec bracket(const LieAlgebra& a, const Vec& x, const Vec& y);

/// B(e_i, e_j) = tr(ad e_i ad e_j).
Mat killing_form(const LieAlgebra& a);

/// u ⋉_theta V with [X, A] = theta(X) A and [V, V] = 0; u occupies the
/// first dim(u) indices.  Throws AlgebraError if theta is not a homomorphism.
LieAlgebra semidirect(const SemidirectData& d);

/// Basis of Der(a) as dim x dim matrices (D e_b = sum_a D(a, b) e_a).
std::vector<Mat> derivations(const LieAlgebra& a);

/// Residual max |D[x,y] - [Dx,y] - [x,Dy]| over basis pairs.
double derivation_residual(const LieAlgebra& a, const Mat& d);

/// Component i is tr(ad e_i); zero iff a is unimodular.
Vec unimodularity_defect(const LieAlgebra& a);

/// Lower central series terminates (checked up to dim steps).
bool is_nilpotent(const LieAlgebra& a);

}  // namespace hrf
