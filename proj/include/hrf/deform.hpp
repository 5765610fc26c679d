#pragma once

// Submersion picture of invariant metrics on (U x| V)/H: base metric gB on
// m_u, fiber metric gF on V and the horizontal graph phi: m_u -> V.  Also the
// nilsoliton and transpose-derivation conditions for nilpotent fibers.

#include "hrf/flow.hpp"

namespace hrf {

struct SubmersionSplit {
  Mat gB;   // dmu x dmu
  Mat gF;   // dv x dv
  Mat phi;  // dv x dmu
};

/// gF = P_VV, phi = -P_VV^-1 P_V,mu, gB = Schur complement of P_VV.
SubmersionSplit submersion_split(const ReductiveSplit& split, const Mat& P);

/// Inverse of submersion_split.
Mat assemble(const SubmersionSplit& ss);

/// max_i |phi ad(h_i)|_mu - ad(h_i)|_V phi|.
double phi_equivariance_residual(const ReductiveSplit& split, const Mat& phi);

/// assemble(gB, gF, (1 - t) phi); throws std::invalid_argument unless 0 <= t <= 1.
Mat retract_horizontal(const SubmersionSplit& ss, double t);

/// Terms of R* = base - oneill / 4 - trace / 2 - action / 2 over a horizontal
/// g-orthonormal frame X_i = U_i + phi U_i and a gF-orthonormal frame of V.
struct ScalarDecomposition {
  double base = 0.0;    // scalar curvature of (U/H, gB)
  double oneill = 0.0;  // sum_ij |vertical part of [X_i, X_j]|^2
  double trace = 0.0;   // sum_i tr theta(X_i)^2
  double action = 0.0;  // sum_i |theta(X_i)|_gF^2
  double total() const { return base - 0.25 * oneill - 0.5 * trace - 0.5 * action; }
};

/// Requires abelian V (semidirect form).
ScalarDecomposition scalar_decomposition(const ReductiveSplit& split, const Mat& P);

struct NilsolitonFit {
  double c = 0.0;
  Mat D;                // in the basis of n
  double residual = 0.0;  // |Ric - c Id - D|_F in a gF-orthonormal frame
  int symmetric_derivations = 0;
};

inline constexpr double kTolNilsoliton = 1e-9;

/// Least-squares fit of the Ricci operator of (n, gF) by c Id + D with D a
/// gF-symmetric derivation.  Throws std::invalid_argument unless n is
/// nilpotent.
NilsolitonFit nilsoliton_fit(const LieAlgebra& n, const Mat& gF);

/// max_k distance (Frobenius) of theta_k^{t_gF} = gF^-1 theta_k^T gF to
/// Der(n).  Throws std::invalid_argument when some theta_k is not itself a
/// derivation of n.
double transpose_derivation_residual(const std::vector<Mat>& theta, const LieAlgebra& n,
                                     const Mat& gF);

/// u x| n with u abelian acting by the derivations `theta`; u occupies the
/// first indices.  Throws AlgebraError if theta_k are not commuting
/// derivations.
LieAlgebra abelian_extension(const LieAlgebra& n, const std::vector<Mat>& theta);

/// Residuals of the invariant set {g(m_u, n) = 0, g|n nilsoliton,
/// theta^{t_g} in Der(n)} along a flow on u x| n with u abelian.
struct InvariantSetSample {
  double t = 0.0;
  double mixed = 0.0;
  double nilsoliton = 0.0;
  double transpose = 0.0;
};
struct InvariantSetReport {
  std::vector<InvariantSetSample> samples;
  double worst_mixed = 0.0;
  double worst_nilsoliton = 0.0;
  double worst_transpose = 0.0;
  std::string stop_reason;
};

InvariantSetReport track_invariant_set(const LieAlgebra& n, const std::vector<Mat>& theta,
                                       const Mat& g0, const FlowControls& c);

}  // namespace hrf
