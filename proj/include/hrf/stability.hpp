#pragma once

// Stability of a representation theta: u -> gl(V) through the moment map
// sum_k [theta_k, theta_k^t] and its negative gradient flow on metrics of V.

#include "hrf/liealg.hpp"

#include <string>
#include <vector>

namespace hrf {

inline constexpr double kTolNormal = 1e-8;
inline constexpr double kDivergence = 1e12;

class RepMetricState {
 public:
  /// Throws std::invalid_argument on dimension mismatch or non-SPD Q.
  RepMetricState(std::vector<Mat> theta, Mat Q);

  const std::vector<Mat>& theta() const { return theta_; }
  const Mat& Q() const { return Q_; }
  int dim() const { return static_cast<int>(Q_.rows()); }

  /// theta_k^{t_Q} = Q^-1 theta_k^T Q.
  Mat q_transpose(int k) const;
  /// sum_k tr(theta_k^2) at construction.
  double trace_invariant() const { return trace0_; }

 private:
  std::vector<Mat> theta_;
  Mat Q_;
  double trace0_ = 0.0;
};

/// Frobenius norm of sum_k [theta_k, theta_k^{t_Q}] in a Q-orthonormal frame.
double normality_residual(const RepMetricState& s);
double normality_residual(const std::vector<Mat>& theta, const Mat& Q);

/// sum_k |theta_k|_Q^2 = sum_k tr(theta_k theta_k^{t_Q}).
double orbit_norm2(const std::vector<Mat>& theta, const Mat& Q);

/// sum_k tr(T_k^2) for the conjugates T_k = Q^{1/2} theta_k Q^{-1/2}.
double conjugate_trace(const std::vector<Mat>& theta, const Mat& Q);

struct MomentMapPoint {
  double s = 0.0;  // arc length in the invariant metric on SPD matrices
  Mat Q;
  double residual = 0.0;
  double norm2 = 0.0;
  double trace = 0.0;
  double cond = 1.0;
};

struct MomentMapPath {
  std::vector<MomentMapPoint> points;
  std::string verdict;  // "converged", "unstable orbit", "max-length", "stiff-failure"
  double max_trace_drift = 0.0;
  bool norm_nonincreasing = true;
  bool converged() const { return verdict == "converged"; }
};

struct MomentMapOptions {
  double s_max = 1000.0;
  double rtol = 1e-10;
  double atol = 1e-12;
  double converge_tol = kTolNormal;
  double remaining_tol = 1e-3;  // estimated arc length left at convergence
  double divergence = kDivergence;
};

/// Negative gradient flow of orbit_norm2 in Q, theta fixed, parametrized by
/// arc length.  Converges when the residual is below `converge_tol` and the
/// flow is about to stop; reports "unstable orbit" when cond(Q) exceeds
/// `divergence`.
MomentMapPath moment_map_flow(const RepMetricState& s, const MomentMapOptions& o = {});

struct StabilityVerdict {
  bool stable = false;
  std::string verdict;  // "stable" or "not-stable: <reason>"
  Mat witness;          // final Q
  double residual = 0.0;
  double cond = 1.0;
  MomentMapPath path;
};

StabilityVerdict is_stable(const SemidirectData& d, const MomentMapOptions& o = {});

}  // namespace hrf
