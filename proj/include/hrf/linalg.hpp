#pragma once

// Small dense linear-algebra helpers shared by every module.  All matrices
// here are tiny (dimension <= ~30), so clarity wins over blocking.

#include <Eigen/Dense>

#include <vector>

namespace hrf {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Ascending eigen-decomposition of a symmetric matrix.
struct SymEig {
  Vec values;
  Mat vectors;  // columns, background-orthonormal
};

SymEig sym_eig(const Mat& s);

Mat symmetrize(const Mat& a);

double min_eigenvalue(const Mat& s);
double max_eigenvalue(const Mat& s);

/// True iff `s` is symmetric positive definite (LLT succeeds and min eig > 0).
bool is_spd(const Mat& s);

/// Symmetric square root and inverse square root of an SPD matrix.
Mat spd_sqrt(const Mat& s);
Mat spd_inv_sqrt(const Mat& s);

/// Columns F with F^T s F = I, built from the eigenbasis of s.
Mat orthonormal_frame(const Mat& s);

/// Orthonormal basis of the column space of `a` (rank cut at rel_tol * sigma_max).
Mat column_space(const Mat& a, double rel_tol = 1e-8);

/// Orthonormal basis of the null space of `a` (same cutoff rule).
Mat null_space(const Mat& a, double rel_tol = 1e-8);

/// Orthonormal basis of span(b)^perp inside span(a); both orthonormal.
Mat complement_in(const Mat& a, const Mat& b);

/// Modified Gram-Schmidt over the columns of `a`, in order, dropping columns
/// whose residual norm falls below `drop_tol`.  Keeps coordinate-aligned
/// inputs coordinate-aligned.
Mat gram_schmidt(const Mat& a, double drop_tol = 1e-6);

double max_abs(const Mat& a);

/// Block-diagonal concatenation.
Mat block_diag(const std::vector<Mat>& blocks);

}  // namespace hrf
