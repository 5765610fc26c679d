#include "hrf/stability.hpp"

#include "hrf/ode.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hrf {

namespace {

std::vector<Mat> conjugates(const std::vector<Mat>& theta, const Mat& Q) {
  const SymEig e = sym_eig(Q);
  const Mat R = e.vectors * e.values.cwiseSqrt().asDiagonal() * e.vectors.transpose();
  const Mat Ri = e.vectors * e.values.cwiseSqrt().cwiseInverse().asDiagonal() * e.vectors.transpose();
  std::vector<Mat> out;
  out.reserve(theta.size());
  for (const Mat& t : theta) out.push_back(R * t * Ri);
  return out;
}

// Q^{-1/2} grad Q^{-1/2} = sum_k [T_k, T_k^T].
Mat moment_map(const std::vector<Mat>& T, int n) {
  Mat m = Mat::Zero(n, n);
  for (const Mat& t : T) m += t * t.transpose() - t.transpose() * t;
  return symmetrize(m);
}

double condition(const Mat& Q) {
  const SymEig e = sym_eig(Q);
  return e.values(e.values.size() - 1) / e.values(0);
}

}  // namespace

RepMetricState::RepMetricState(std::vector<Mat> theta, Mat Q) : theta_(std::move(theta)), Q_(std::move(Q)) {
  if (Q_.rows() != Q_.cols()) throw std::invalid_argument("RepMetricState: Q must be square");
  for (const Mat& t : theta_)
    if (t.rows() != Q_.rows() || t.cols() != Q_.cols())
      throw std::invalid_argument("RepMetricState: theta_k and Q differ in dimension");
  if (Q_.rows() > 0 && !is_spd(Q_)) throw std::invalid_argument("RepMetricState: Q is not positive definite");
  trace0_ = 0.0;
  for (const Mat& t : theta_) trace0_ += (t * t).trace();
}

Mat RepMetricState::q_transpose(int k) const {
  return Q_.llt().solve(theta_.at(static_cast<std::size_t>(k)).transpose() * Q_);
}

double normality_residual(const std::vector<Mat>& theta, const Mat& Q) {
  if (Q.rows() == 0) return 0.0;
  return moment_map(conjugates(theta, Q), static_cast<int>(Q.rows())).norm();
}

double normality_residual(const RepMetricState& s) { return normality_residual(s.theta(), s.Q()); }

double orbit_norm2(const std::vector<Mat>& theta, const Mat& Q) {
  double acc = 0.0;
  for (const Mat& t : conjugates(theta, Q)) acc += t.squaredNorm();
  return acc;
}

double conjugate_trace(const std::vector<Mat>& theta, const Mat& Q) {
  double acc = 0.0;
  for (const Mat& t : conjugates(theta, Q)) acc += (t * t).trace();
  return acc;
}

MomentMapPath moment_map_flow(const RepMetricState& s, const MomentMapOptions& o) {
  MomentMapPath path;
  const int n = s.dim();
  const std::vector<Mat>& theta = s.theta();

  auto point = [&](double arc, const Mat& Q) {
    MomentMapPoint p;
    p.s = arc;
    p.Q = Q;
    p.residual = normality_residual(theta, Q);
    p.norm2 = orbit_norm2(theta, Q);
    p.trace = conjugate_trace(theta, Q);
    p.cond = condition(Q);
    return p;
  };
  auto record = [&](MomentMapPoint p) {
    if (!path.points.empty()) {
      const double prev = path.points.back().norm2;
      if (p.norm2 > prev + 1e-12 * std::max(1.0, prev)) path.norm_nonincreasing = false;
    }
    path.max_trace_drift = std::max(path.max_trace_drift, std::abs(p.trace - s.trace_invariant()));
    path.points.push_back(std::move(p));
  };

  if (n == 0) {
    path.verdict = "converged";
    return path;
  }
  // Unit-speed descent: dQ/ds = -Q^{1/2} M Q^{1/2} / |M| with M the moment map
  // in a Q-orthonormal frame.
  const MatRhs rhs = [&](const Mat& Q) -> std::optional<Mat> {
    if (!Q.allFinite() || !is_spd(Q)) return std::nullopt;
    const SymEig e = sym_eig(Q);
    const Mat R = e.vectors * e.values.cwiseSqrt().asDiagonal() * e.vectors.transpose();
    const Mat M = moment_map(conjugates(theta, Q), n);
    const double r = M.norm();
    if (r == 0.0) return Mat(Mat::Zero(n, n));
    return Mat(symmetrize(-(R * M * R) / r));
  };
  const auto admissible = [](const Mat& Q) { return Q.allFinite() && is_spd(Q); };

  Mat Q = symmetrize(s.Q());
  double arc = 0.0;
  record(point(arc, Q));
  double h = 1e-2;
  while (true) {
    const MomentMapPoint& cur = path.points.back();
    if (cur.residual <= o.converge_tol) {
      // Along a non-closed orbit the residual also tends to zero, but only
      // exponentially in arc length; require the distance still to travel,
      // residual / |d residual / ds|, to be small as well.
      if (cur.residual == 0.0 || path.points.size() < 2) {
        path.verdict = "converged";
        break;
      }
      const MomentMapPoint& prev = path.points[path.points.size() - 2];
      const double slope = (prev.residual - cur.residual) / (cur.s - prev.s);
      if (slope > 0.0 && cur.residual / slope <= o.remaining_tol) {
        path.verdict = "converged";
        break;
      }
    }
    if (cur.cond > o.divergence) {
      path.verdict = "unstable orbit";
      break;
    }
    if (arc >= o.s_max) {
      path.verdict = "max-length";
      break;
    }
    const auto k1 = rhs(Q);
    if (!k1) {
      path.verdict = "stiff-failure";
      break;
    }
    h = std::min(h, o.s_max - arc);
    const DpStep st = dp_step(rhs, Q, *k1, h, o.rtol, o.atol, admissible);
    if (st.valid && st.err <= 1.0) {
      arc += h;
      Q = st.y;
      record(point(arc, Q));
      h *= st.err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(st.err, -0.2), 0.2, 5.0);
    } else {
      h *= st.valid ? std::max(0.2, 0.9 * std::pow(st.err, -0.2)) : 0.5;
    }
    if (h < 1e-15 * std::max(1.0, arc)) {
      path.verdict = "stiff-failure";
      break;
    }
  }
  return path;
}

StabilityVerdict is_stable(const SemidirectData& d, const MomentMapOptions& o) {
  StabilityVerdict v;
  const RepMetricState s(d.theta, Mat::Identity(d.dimV, d.dimV));
  v.path = moment_map_flow(s, o);
  const MomentMapPoint* last = v.path.points.empty() ? nullptr : &v.path.points.back();
  v.witness = last ? last->Q : Mat(Mat::Identity(d.dimV, d.dimV));
  v.residual = last ? last->residual : 0.0;
  v.cond = last ? last->cond : 1.0;
  v.stable = v.path.converged();
  v.verdict = v.stable ? "stable" : "not-stable: " + v.path.verdict;
  return v;
}

}  // namespace hrf
