#pragma once

// Homogeneous Ricci flow and unimodular Ricci flow on invariant metrics,
// dP/dt = -2 ric(P) (resp. ric*), with monitor channels, extinction
// detection and blowdown experiments.

#include "hrf/curvature.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hrf {

enum class FlowKind { ricci, unimodular };

std::string to_string(FlowKind k);
FlowKind flow_kind_from_string(const std::string& s);

struct FlowControls {
  FlowKind kind = FlowKind::ricci;
  double t_max = 1.0;
  double rtol = 1e-8;
  double atol = 1e-10;
  double h_init = 1e-3;
  double h_min = 1e-14;
  double h_max = 0.0;  // 0 selects t_max / 200
  double extinction_eps = 1e-8;  // relative to the initial minimum eigenvalue
  double bracket_tol = 1e-10;    // width of the extinction bracket

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

struct WeightMonitor {
  Vec g;             // sorted eigenvalues of P on the block
  Vec partial_sums;  // sum_{i >= i0} g_i
  double pinch = 1.0;
  Vec fbar;          // sum_{i >= i0} ric*(Abar_i, Abar_i)
  Vec f;             // sum_{i >= i0} ric*(A_i, A_i)
  Vec fbar_int;      // running integrals
  Vec f_int;
  double noise = 0.0;  // rounding allowance for fbar and f
};

struct FlowSample {
  double t = 0.0;
  Mat P;
  Mat dP;  // right-hand side at P
  double scal = 0.0;
  double scal_star = 0.0;
  double ric_norm2 = 0.0;
  double ric_star_norm2 = 0.0;
  double min_eig = 0.0;
  double adapted_residual = 0.0;
  double equiv_residual = 0.0;
  std::vector<WeightMonitor> weights;  // empty unless theta-adapted
  Vec gL;                // sorted eigenvalues of P on l
  double glm = 0.0;      // largest eigenvalue of P on l_ss
  double error_term = 0.0;      // eigen-ratio error along the g-unit top l_ss vector
  double error_int = 0.0;       // running integral of error_term
  double weighted_error_int = 0.0;  // running integral of glm * error_term / 2
  double base_margin = 0.0;     // ric_{U/H}(Lbar, Lbar) - b0/4 along the top l_ss vector
};

struct Extinction {
  double t_est = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct FlowTrajectory {
  FlowKind kind = FlowKind::ricci;
  bool theta_adapted = false;  // g0 was theta-adapted and block monitors are on
  bool stiff_failure = false;
  std::string stop_reason;     // "t_max", "extinction", "stiff-failure"
  std::vector<FlowSample> samples;
  std::optional<Extinction> extinction;
  double rtol = 0.0;
  int rejected_steps = 0;

  /// Metric at time t by Hermite interpolation of the stored samples.
  Mat metric_at(double t) const;
};

/// Right-hand side -2 ric (or -2 ric*) at P.
Mat flow_rhs(const ReductiveSplit& split, const Mat& P, FlowKind kind);

FlowTrajectory integrate(const ReductiveSplit& split, const Mat& g0, const FlowControls& c);

/// Fill monitor channels for one metric (exposed for tests and tools).
FlowSample make_sample(const ReductiveSplit& split, double t, const Mat& P, const Mat& dP,
                       bool adapted);

struct ScalarEvolutionReport {
  double max_rel_deviation = 0.0;
  int checked = 0;
  int skipped_near_extinction = 0;
};

/// Central finite differences of R (resp. R*) against 2|Ric|^2 (resp.
/// 2|Ric*|^2) at interior samples.  Samples whose stencil spans more than
/// `stencil_fraction` of the remaining time to extinction are skipped.
/// Throws std::invalid_argument with fewer than 3 samples.
ScalarEvolutionReport verify_scalar_evolution(const FlowTrajectory& traj,
                                              double stencil_fraction = 0.02);

struct ChannelVerdict {
  std::string name;
  bool ok = true;
  double worst = 0.0;  // largest violation (0 when ok)
};

struct MonotonicityReport {
  bool applicable = true;
  std::string note;
  std::vector<ChannelVerdict> channels;
  bool ok() const;
};

/// Eigenvalue monitors of the weight blocks.  Applicable to theta-adapted
/// trajectories of the unimodular flow, or of the Ricci flow on a unimodular
/// algebra (where both flows coincide).
MonotonicityReport verify_monotonicity(const FlowTrajectory& traj, const ReductiveSplit& split,
                                       double tol_mono = 1e-8);

struct ExtinctionReport {
  bool hypothesis_ok = false;
  std::string note;
  bool extinct = false;
  double t_ext = 0.0;
  double bracket_width = 0.0;
  double b0 = 0.0;
  double glm0 = 0.0;
  double glm_running_max = 0.0;
  double c_tilde = 0.0;       // running max of glm times the integral of E / 2
  double barrier_root = 0.0;  // (glm0 + c_tilde) / (b0 / 2)
  double worst_barrier_gap = 0.0;  // max over samples of glm - barrier (<= 0 expected)
  bool barrier_holds = false;
  bool extinct_before_root = false;
  double min_base_margin = 0.0;
};

ExtinctionReport extinction_analysis(const FlowTrajectory& traj, const ReductiveSplit& split);

struct BlowdownPoint {
  double s = 0.0;
  Mat P;           // s^-1 g(s t_ref)
  double ric_norm = 0.0;
  double scal = 0.0;
};

struct BlowdownReport {
  std::vector<BlowdownPoint> points;
  std::vector<double> times;         // sample times
  std::vector<double> scal_times_t;  // |Rscal(g(t))| t
  bool ric_norm_decreasing = false;
  bool scal_t_decreasing_final_decade = false;
  double scal_t_final = 0.0;
};

/// Throws std::invalid_argument when s * t_ref leaves the integrated range.
BlowdownReport blowdown(const FlowTrajectory& traj, const ReductiveSplit& split,
                        const std::vector<double>& s_values, double t_ref = 1.0,
                        double noise = 1e-12);

}  // namespace hrf
