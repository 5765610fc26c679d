#pragma once

// Ricci and unimodular Ricci curvature of invariant metrics on G/H, computed
// from structure constants by frame sums.  A metric is a symmetric positive
// definite P on m in the adapted basis of a ReductiveSplit, g(x, y) = x^T P y.

#include "hrf/homspace.hpp"

#include <optional>

namespace hrf {

inline constexpr double kTolEquiv = 1e-9;

class InvariantMetric {
 public:
  /// Validates symmetry, positivity and ad(h)-equivariance; throws
  /// std::invalid_argument otherwise.
  InvariantMetric(const ReductiveSplit& split, Mat P);

  const Mat& P() const { return P_; }

 private:
  Mat P_;
};

/// max_i |[ad(h_i)|_m, P]|.
double equivariance_residual(const ReductiveSplit& split, const Mat& P);

struct CurvatureReport {
  Mat ric;        // (0,2) Ricci tensor on m
  Mat ric_star;   // unimodular part
  Vec H;          // mean curvature vector, g(H, X) = tr ad X
  Mat M;          // the M_g form
  Mat B;          // Killing form of g restricted to m
  Mat h_term;     // symmetrized ad(H) term, ric = ric_star - h_term
  double scal = 0.0;
  double scal_star = 0.0;
  /// -1/2 tr B_g - 1/4 |[.,.]|_g^2 - |H|_g^2 by frame sums, for cross-checks.
  double scal_frame_sum = 0.0;
  double ric_norm2 = 0.0;       // |Ric|_g^2
  double ric_star_norm2 = 0.0;  // |Ric*|_g^2
};

Vec mean_curvature(const ReductiveSplit& split, const Mat& P);

/// Full report.  `frame` (columns g-orthonormal) replaces the eigenframe of P
/// when given; results do not depend on the choice.
CurvatureReport ricci(const ReductiveSplit& split, const Mat& P,
                      const std::optional<Mat>& frame = std::nullopt);

Mat unimodular_ricci(const ReductiveSplit& split, const Mat& P);

struct ScalarCurvatures {
  double scal = 0.0;
  double scal_star = 0.0;
};
ScalarCurvatures scalar_curvatures(const ReductiveSplit& split, const Mat& P);

/// |T|_g^2 for a (0,2) tensor T, i.e. tr((P^-1 T)^2).
double g_norm2(const Mat& P, const Mat& T);

/// Background-orthonormal eigenframe of one weight block of P.
struct BlockFrame {
  Vec g;     // ascending eigenvalues g_1 <= ... <= g_d
  Mat abar;  // columns: eigenvectors, in block coordinates
};
BlockFrame block_frame(const Mat& P, const BlockRange& b);

struct VBlockReport {
  BlockFrame frame;
  Vec specialized;  // closed-form ric*(A_i, A_i)
  Mat general;      // ric*(A_i, A_j) from the general formula
  double deviation = 0.0;  // max |specialized - diag(general)|
  // Partial sums of the closed form, which stays sign-exact near extinction.
  Vec fbar;         // sum_{i >= i0} ric*(Abar_i, Abar_i), indexed by i0
  Vec f;            // sum_{i >= i0} ric*(A_i, A_i)
  double term_scale = 0.0;  // sum of the magnitudes of the terms in `specialized`
};

/// Per weight block evaluation of the closed-form V-block formula.  Requires
/// a theta-adapted P (residual <= kTolBlock) and a semidirect split.
std::vector<VBlockReport> ricci_V_block(const ReductiveSplit& split, const Mat& P);

struct UBlockReport {
  Mat ric_star;      // general formula on m_u
  Mat ric_base;      // Ricci tensor of (U/H, g|m_u)
  Mat correction;    // V-action correction on m_u
  double deviation = 0.0;  // max |ric_base + correction - ric_star|
  Mat l_error;       // polarized eigenvalue-ratio error form on l
  double l_deviation = 0.0;  // l-block specialization vs general formula
  // Lower bound along the top eigenvector Lbar of g|l (background unit).
  double ric_star_top = 0.0;
  double lower_bound_top = 0.0;
  double base_top = 0.0;     // ric_{U/H}(Lbar, Lbar)
  double killing_top = 0.0;  // -1/4 B_k(Lbar, Lbar)
};

UBlockReport ricci_U_block(const ReductiveSplit& split, const Mat& P);

/// Error term sum <[L, Abar_i], Abar_j>^2 (g_i/g_j + g_j/g_i - 2) over all
/// weight blocks, for L in m (background coordinates).
double eigen_ratio_error(const ReductiveSplit& split, const Mat& P, const Vec& L);

/// The same quantity as a polarized quadratic form on the first k m-basis
/// vectors (k <= dim l).
Mat eigen_ratio_form(const ReductiveSplit& split, const Mat& P, int k);

}  // namespace hrf
