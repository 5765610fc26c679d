#pragma once

// Reductive decompositions g = h + l + z + V for G = U x| V and the
// weight-space splitting of V.
//
// Every split is stored in an adapted basis ordered
//   [ h | l_ss | l_rest | z | V^{a_1} | ... | V^{a_p} ]
// that is orthonormal for the background inner product.  The background is
// therefore the identity in these coordinates and a metric on m is simply a
// symmetric positive-definite matrix P.  Index conventions below are in
// m-coordinates (the h block removed) unless stated otherwise.

#include "hrf/liealg.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hrf {

inline constexpr double kTolWeight = 1e-8;
inline constexpr double kTolSkew = 1e-8;
inline constexpr double kTolBlock = 1e-8;

struct Weight {
  Vec alpha;      // alpha(e_k) for the u basis used to build it
  Mat block;      // columns: background-orthonormal basis of V^alpha (V coordinates)
  int dim = 0;
  std::vector<Mat> J;  // J[k] = theta_k|block - alpha_k I, in block coordinates
};

struct WeightDecomposition {
  std::vector<Weight> weights;
  /// True when every weight vanishes on [u,u] (checked, not assumed).
  bool alpha_vanishes_on_derived = true;
};

/// Returned instead of a decomposition when theta is not normal for metricV.
struct StabilityFailure {
  int operator_index = -1;  // offending theta_k
  double residual = 0.0;
  std::string reason;
};

/// Joint spectral splitting of the symmetric parts of theta_k relative to
/// metricV.  A StabilityFailure is a value, not an exception; only shape
/// errors throw.
std::variant<WeightDecomposition, StabilityFailure> weight_split(const SemidirectData& d,
                                                                const Mat& metricV);

struct BlockRange {
  int offset = 0;  // m-coordinate of the first vector
  int size = 0;
};

class ReductiveSplit {
 public:
  /// The full algebra in the adapted basis.
  LieAlgebra algebra;
  /// dim(u) leading indices form a subalgebra; V follows.
  int du = 0;
  int dh = 0, dlss = 0, dl = 0, dz = 0, dv = 0;
  std::vector<BlockRange> weight_blocks;
  /// Weights as functionals on the adapted u basis (one per weight block).
  std::vector<Vec> weights;
  /// Columns: adapted basis vectors in the source coordinates of g.
  Mat basis;
  double b0 = 0.0;
  bool alpha_vanishes_on_derived = true;
  /// False for splits built directly from a Lie algebra whose V is not an
  /// abelian ideal acted on by weights (block formulas do not apply).
  bool semidirect_form = true;

  int dm() const { return dl + dz + dv; }
  int dmu() const { return dl + dz; }
  int v_offset() const { return dl + dz; }

  /// ad(e_a) restricted and projected to m, for m basis vector a.
  const Mat& adm(int a) const { return adm_[static_cast<std::size_t>(a)]; }
  /// ad(h_i) restricted to m.
  const Mat& adh(int i) const { return adh_[static_cast<std::size_t>(i)]; }
  /// Killing form of g restricted to m.
  const Mat& killing_m() const { return killing_m_; }
  /// tr(ad e_a) for m basis vectors.
  const Vec& trace_form() const { return trace_form_; }
  /// tr(ad X|_V ad Y|_V) on m_u, used by the block formulas.
  const Mat& v_trace_form() const { return v_trace_form_; }

  /// The sub-datum (u, h) with V removed; same adapted basis on u.
  ReductiveSplit base_split() const;

  /// Recompute cached tensors and verify the structural invariants; throws
  /// AlgebraError on violation.  Called by the constructors below.
  void finalize();

  double reductivity_residual() const;
  double background_invariance_residual() const;

 private:
  std::vector<Mat> adm_;
  std::vector<Mat> adh_;
  Mat killing_m_;
  Vec trace_form_;
  Mat v_trace_form_;
};

/// Options for split_u.  Empty matrices select the identity.
struct SplitOptions {
  Mat background_u;
  Mat metric_v;
};

/// Build the adapted split of u x|_theta V with isotropy h (vectors in u
/// coordinates, required to lie in k).  Throws AlgebraError when h is not a
/// subalgebra, theta is not stable for metric_v, or the background fails to
/// be ad(k)-invariant.
ReductiveSplit split_u(const SemidirectData& d, const std::vector<Vec>& h_basis,
                       const SplitOptions& opts = {});

/// Dimensions for a split given directly in adapted order.
struct AdaptedDims {
  int dh = 0, dlss = 0, dl = 0, dz = 0;
  std::vector<int> v_blocks;
};

/// Wrap an algebra that is already written in an adapted, background
/// orthonormal basis.  V need not be abelian; semidirect_form is set from
/// the data.
ReductiveSplit adapted_split(const LieAlgebra& g, const AdaptedDims& dims);

/// Largest |P_ij| coupling m_u to V or distinct weight blocks.
double check_theta_adapted(const ReductiveSplit& split, const Mat& P);

/// Project P onto the theta-adapted block pattern (zeroing couplings).
Mat adapted_part(const ReductiveSplit& split, const Mat& P);

}  // namespace hrf
