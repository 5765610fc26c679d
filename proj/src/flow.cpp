#include "hrf/flow.hpp"

#include "hrf/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hrf {

std::string to_string(FlowKind k) { return k == FlowKind::ricci ? "ricci" : "unimodular"; }

FlowKind flow_kind_from_string(const std::string& s) {
  if (s == "ricci") return FlowKind::ricci;
  if (s == "unimodular") return FlowKind::unimodular;
  throw std::invalid_argument("unknown flow kind '" + s + "' (expected ricci or unimodular)");
}

void FlowControls::validate() const {
  auto bad = [](const std::string& what) { throw std::invalid_argument("FlowControls: " + what); };
  if (!(t_max > 0.0)) bad("t_max must be positive");
  if (!(rtol > 0.0) || !(atol > 0.0)) bad("rtol and atol must be positive");
  if (!(extinction_eps > 0.0)) bad("extinction_eps must be positive");
  if (!(h_init > 0.0) || !(h_min > 0.0) || !(h_min < h_init)) bad("need 0 < h_min < h_init");
  if (h_max < 0.0) bad("h_max must be nonnegative");
  if (!(bracket_tol > 0.0)) bad("bracket_tol must be positive");
}

Mat flow_rhs(const ReductiveSplit& split, const Mat& P, FlowKind kind) {
  const CurvatureReport r = ricci(split, P);
  return -2.0 * (kind == FlowKind::ricci ? r.ric : r.ric_star);
}

Mat FlowTrajectory::metric_at(double t) const {
  if (samples.empty()) throw std::invalid_argument("metric_at: empty trajectory");
  if (t < samples.front().t || t > samples.back().t)
    throw std::invalid_argument("metric_at: time outside the integrated range");
  auto it = std::lower_bound(samples.begin(), samples.end(), t,
                             [](const FlowSample& s, double x) { return s.t < x; });
  if (it == samples.begin()) return it->P;
  if (it->t == t) return it->P;
  const FlowSample& b = *it;
  const FlowSample& a = *(it - 1);
  return symmetrize(hermite(a.t, a.P, a.dP, b.t, b.P, b.dP, t));
}

namespace {

double default_scale(const Mat& P) { return std::max(1.0, max_abs(P)); }

bool is_unimodular(const ReductiveSplit& split) {
  return split.trace_form().size() == 0 || split.trace_form().cwiseAbs().maxCoeff() < 1e-12;
}

}  // namespace

FlowSample make_sample(const ReductiveSplit& split, double t, const Mat& P, const Mat& dP,
                       bool adapted) {
  FlowSample s;
  s.t = t;
  s.P = P;
  s.dP = dP;
  const CurvatureReport r = ricci(split, P);
  s.scal = r.scal;
  s.scal_star = r.scal_star;
  s.ric_norm2 = r.ric_norm2;
  s.ric_star_norm2 = r.ric_star_norm2;
  s.min_eig = min_eigenvalue(P);
  s.adapted_residual = split.semidirect_form ? check_theta_adapted(split, P) : 0.0;
  s.equiv_residual = equivariance_residual(split, P);

  if (adapted && s.adapted_residual <= kTolBlock * default_scale(P)) {
    for (const VBlockReport& vb : ricci_V_block(split, P)) {
      WeightMonitor w;
      w.g = vb.frame.g;
      const Eigen::Index d = w.g.size();
      w.partial_sums = Vec(d);
      double acc = 0.0;
      for (Eigen::Index i = d - 1; i >= 0; --i) w.partial_sums(i) = (acc += w.g(i));
      w.pinch = w.g(d - 1) / w.g(0);
      w.fbar = vb.fbar;
      w.f = vb.f;
      w.fbar_int = Vec::Zero(d);
      w.f_int = Vec::Zero(d);
      w.noise = 64.0 * std::numeric_limits<double>::epsilon() * vb.term_scale * std::max(1.0, w.g(d - 1));
      s.weights.push_back(std::move(w));
    }
  }

  if (split.dl > 0) s.gL = sym_eig(P.topLeftCorner(split.dl, split.dl)).values;
  if (split.dlss > 0) {
    const int k = split.dlss;
    const SymEig e = sym_eig(P.topLeftCorner(k, k));
    s.glm = e.values(k - 1);
    // The top eigenvalue may be degenerate: its one-sided derivative is
    // governed by the whole top eigenspace, so extremize over it.
    int top = 1;
    while (top < k && e.values(k - 1 - top) >= s.glm * (1.0 - 1e-9)) ++top;
    const Mat C = e.vectors.rightCols(top);
    if (split.semidirect_form && s.adapted_residual <= kTolBlock * default_scale(P)) {
      const Mat Q = eigen_ratio_form(split, P, k);
      s.error_term = max_eigenvalue(C.transpose() * Q * C) / s.glm;
      const ReductiveSplit base = split.base_split();
      const Mat rb = ricci(base, P.topLeftCorner(split.dmu(), split.dmu())).ric.topLeftCorner(k, k);
      s.base_margin = min_eigenvalue(C.transpose() * rb * C) - split.b0 / 4.0;
    }
  }
  return s;
}

namespace {

void accumulate(const FlowSample& prev, FlowSample& cur) {
  const double dt = cur.t - prev.t;
  cur.error_int = prev.error_int + 0.5 * dt * (prev.error_term + cur.error_term);
  cur.weighted_error_int =
      prev.weighted_error_int + 0.25 * dt * (prev.glm * prev.error_term + cur.glm * cur.error_term);
  if (cur.weights.size() == prev.weights.size()) {
    for (std::size_t b = 0; b < cur.weights.size(); ++b) {
      cur.weights[b].fbar_int = prev.weights[b].fbar_int + 0.5 * dt * (prev.weights[b].fbar + cur.weights[b].fbar);
      cur.weights[b].f_int = prev.weights[b].f_int + 0.5 * dt * (prev.weights[b].f + cur.weights[b].f);
    }
  }
}

}  // namespace

FlowTrajectory integrate(const ReductiveSplit& split, const Mat& g0, const FlowControls& c) {
  c.validate();
  const InvariantMetric checked(split, g0);
  FlowTrajectory traj;
  traj.kind = c.kind;
  traj.rtol = c.rtol;
  traj.theta_adapted =
      split.semidirect_form && check_theta_adapted(split, g0) <= kTolBlock * default_scale(g0);

  const MatRhs rhs = [&](const Mat& P) -> std::optional<Mat> {
    if (!P.allFinite() || !is_spd(P)) return std::nullopt;
    try {
      return flow_rhs(split, P, c.kind);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };
  const auto admissible = [](const Mat& P) { return P.allFinite() && is_spd(P); };
  const double h_max = c.h_max > 0.0 ? c.h_max : c.t_max / 200.0;
  const double lam0 = min_eigenvalue(g0);

  Mat P = symmetrize(g0);
  auto k0 = rhs(P);
  if (!k0) throw std::invalid_argument("integrate: right-hand side undefined at g0");
  Mat k1 = *k0;
  traj.samples.push_back(make_sample(split, 0.0, P, k1, traj.theta_adapted));
  double t = 0.0;
  double h = std::min(c.h_init, h_max);

  auto push = [&](double tn, const Mat& Pn, const Mat& kn) {
    FlowSample s = make_sample(split, tn, Pn, kn, traj.theta_adapted);
    accumulate(traj.samples.back(), s);
    traj.samples.push_back(std::move(s));
  };

  // Locate the admissibility boundary of the one-step map on [0, hi].
  auto bisect = [&](double hi) {
    double lo = 0.0;
    while (hi - lo > c.bracket_tol * std::max(1.0, t)) {
      const double mid = 0.5 * (lo + hi);
      if (dp_step(rhs, P, k1, mid, c.rtol, c.atol, admissible).valid)
        lo = mid;
      else
        hi = mid;
    }
    return std::make_pair(lo, hi);
  };

  traj.stop_reason = "t_max";
  while (t < c.t_max) {
    h = std::min({h, h_max, c.t_max - t});
    if (c.t_max - t <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, c.t_max)) break;
    DpStep st = dp_step(rhs, P, k1, h, c.rtol, c.atol, admissible);

    if (!st.valid) {
      const auto [lo, hi] = bisect(h);
      if (lo > 0.0) {
        DpStep last = dp_step(rhs, P, k1, lo, c.rtol, c.atol, admissible);
        if (last.valid && last.err <= 1.0) {
          t += lo;
          P = last.y;
          k1 = last.dy_end;
          push(t, P, k1);
          traj.extinction = Extinction{t + 0.5 * (hi - lo), t, t - lo + hi};
          traj.stop_reason = "extinction";
          break;
        }
      }
      ++traj.rejected_steps;
      h *= 0.5;
      if (h < c.h_min) {
        traj.stiff_failure = true;
        traj.stop_reason = "stiff-failure";
        break;
      }
      continue;
    }

    if (st.err <= 1.0) {
      t += h;
      P = st.y;
      k1 = st.dy_end;
      push(t, P, k1);
      const SymEig e = sym_eig(P);
      if (e.values(0) <= c.extinction_eps * lam0) {
        const Vec v = e.vectors.col(0);
        const double rate = v.dot(k1 * v);
        traj.stop_reason = "extinction";
        if (rate < 0.0) {
          const double probe = 4.0 * e.values(0) / -rate;
          if (!dp_step(rhs, P, k1, probe, c.rtol, c.atol, admissible).valid) {
            const auto [lo, hi] = bisect(probe);
            traj.extinction = Extinction{t + 0.5 * (lo + hi), t + lo, t + hi};
          } else {
            traj.extinction = Extinction{t + e.values(0) / -rate, t, t + probe};
          }
        } else {
          traj.extinction = Extinction{t, t, t};
        }
        break;
      }
      const double fac = st.err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(st.err, -0.2), 0.2, 5.0);
      h *= fac;
    } else {
      ++traj.rejected_steps;
      h *= std::max(0.2, 0.9 * std::pow(st.err, -0.2));
      if (h < c.h_min) {
        traj.stiff_failure = true;
        traj.stop_reason = "stiff-failure";
        break;
      }
    }
  }
  return traj;
}

ScalarEvolutionReport verify_scalar_evolution(const FlowTrajectory& traj, double stencil_fraction) {
  const auto& s = traj.samples;
  if (s.size() < 3) throw std::invalid_argument("verify_scalar_evolution: need at least 3 samples");
  const bool star = traj.kind == FlowKind::unimodular;
  ScalarEvolutionReport rep;
  double scale = 0.0;
  for (const FlowSample& x : s) scale = std::max(scale, 2.0 * (star ? x.ric_star_norm2 : x.ric_norm2));
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (traj.extinction) {
      const double remaining = traj.extinction->lo - s[i + 1].t;
      if (remaining <= 0.0 || s[i + 1].t - s[i - 1].t > stencil_fraction * remaining) {
        ++rep.skipped_near_extinction;
        continue;
      }
    }
    const double h0 = s[i].t - s[i - 1].t;
    const double h1 = s[i + 1].t - s[i].t;
    auto R = [&](std::size_t k) { return star ? s[k].scal_star : s[k].scal; };
    // Second-order derivative on a nonuniform three-point stencil.
    const double d = -h1 / (h0 * (h0 + h1)) * R(i - 1) + (h1 - h0) / (h0 * h1) * R(i) +
                     h0 / (h1 * (h0 + h1)) * R(i + 1);
    const double expected = 2.0 * (star ? s[i].ric_star_norm2 : s[i].ric_norm2);
    const double denom = std::max(std::abs(expected), 1e-12 * std::max(1.0, scale));
    rep.max_rel_deviation = std::max(rep.max_rel_deviation, std::abs(d - expected) / denom);
    ++rep.checked;
  }
  return rep;
}

bool MonotonicityReport::ok() const {
  if (!applicable) return false;
  return std::all_of(channels.begin(), channels.end(), [](const ChannelVerdict& c) { return c.ok; });
}

MonotonicityReport verify_monotonicity(const FlowTrajectory& traj, const ReductiveSplit& split,
                                       double tol_mono) {
  MonotonicityReport rep;
  const auto& s = traj.samples;
  if (!traj.theta_adapted || s.empty() || s.front().weights.empty()) {
    rep.applicable = false;
    rep.note = "trajectory is not theta-adapted";
    return rep;
  }
  if (traj.kind != FlowKind::unimodular && !is_unimodular(split)) {
    rep.applicable = false;
    rep.note = "monitors are stated for the unimodular flow";
    return rep;
  }
  auto channel = [&](const std::string& name) -> ChannelVerdict& {
    rep.channels.push_back({name, true, 0.0});
    return rep.channels.back();
  };
  auto flag = [](ChannelVerdict& ch, double violation) {
    if (violation > 0.0) {
      ch.ok = false;
      ch.worst = std::max(ch.worst, violation);
    }
  };
  const std::size_t nb = s.front().weights.size();
  for (std::size_t b = 0; b < nb; ++b) {
    const std::string tag = "[" + std::to_string(b) + "]";
    const Eigen::Index d = s.front().weights[b].g.size();
    ChannelVerdict& top = channel("gV_max_nonincreasing" + tag);
    ChannelVerdict& bot = channel("gV_min_nondecreasing" + tag);
    ChannelVerdict& pin = channel("pinch_nonincreasing" + tag);
    ChannelVerdict& ps = channel("partial_sums_nonincreasing" + tag);
    ChannelVerdict& fb = channel("fbar_nonnegative" + tag);
    ChannelVerdict& ff = channel("f_nonnegative" + tag);
    ChannelVerdict& fbi = channel("fbar_integral_bound" + tag);
    ChannelVerdict& fi = channel("f_integral_bound" + tag);
    const WeightMonitor& w0 = s.front().weights[b];
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (s[k].weights.size() != nb) {
        flag(top, std::numeric_limits<double>::infinity());
        continue;
      }
      const WeightMonitor& w = s[k].weights[b];
      for (Eigen::Index i = 0; i < d; ++i) {
        flag(fb, -w.fbar(i) - 1e-10 - w.noise);
        flag(ff, -w.f(i) - 1e-10 - w.noise);
        flag(fbi, w.fbar_int(i) - w0.partial_sums(i) / 2.0 - tol_mono * std::max(1.0, w0.partial_sums(i)));
        flag(fi, w.f_int(i) - w0.partial_sums(i) / (2.0 * w0.g(0)) -
                     tol_mono * std::max(1.0, w0.partial_sums(i) / w0.g(0)));
      }
      if (k == 0) continue;
      const WeightMonitor& p = s[k - 1].weights[b];
      auto tol = [&](double x) { return tol_mono * std::max(1.0, std::abs(x)); };
      flag(top, w.g(d - 1) - p.g(d - 1) - tol(p.g(d - 1)));
      flag(bot, p.g(0) - w.g(0) - tol(p.g(0)));
      flag(pin, w.pinch - p.pinch - tol(p.pinch));
      for (Eigen::Index i = 0; i < d; ++i) flag(ps, w.partial_sums(i) - p.partial_sums(i) - tol(p.partial_sums(i)));
    }
  }
  return rep;
}

ExtinctionReport extinction_analysis(const FlowTrajectory& traj, const ReductiveSplit& split) {
  ExtinctionReport rep;
  rep.b0 = split.b0;
  if (split.dlss == 0) {
    rep.note = "l_ss is trivial: extinction hypothesis fails, flow reported as potentially immortal";
    return rep;
  }
  if (!traj.theta_adapted) {
    rep.note = "trajectory is not theta-adapted";
    return rep;
  }
  if (traj.kind != FlowKind::unimodular && !is_unimodular(split)) {
    rep.note = "barrier is stated for the unimodular flow";
    return rep;
  }
  rep.hypothesis_ok = true;
  const auto& s = traj.samples;
  rep.glm0 = s.front().glm;
  rep.extinct = traj.extinction.has_value();
  if (rep.extinct) {
    rep.t_ext = traj.extinction->t_est;
    rep.bracket_width = traj.extinction->hi - traj.extinction->lo;
  }
  double running_max = 0.0;
  rep.worst_barrier_gap = -std::numeric_limits<double>::infinity();
  rep.min_base_margin = std::numeric_limits<double>::infinity();
  for (const FlowSample& x : s) {
    running_max = std::max(running_max, x.glm);
    const double c_tilde = running_max * x.error_int / 2.0;
    const double barrier = rep.glm0 - 0.5 * split.b0 * x.t + c_tilde;
    rep.worst_barrier_gap = std::max(rep.worst_barrier_gap, x.glm - barrier);
    rep.min_base_margin = std::min(rep.min_base_margin, x.base_margin);
    rep.c_tilde = c_tilde;
  }
  rep.glm_running_max = running_max;
  rep.barrier_root = split.b0 > 0.0 ? (rep.glm0 + rep.c_tilde) / (0.5 * split.b0)
                                     : std::numeric_limits<double>::infinity();
  rep.barrier_holds = rep.worst_barrier_gap <= 1e-8 * std::max(1.0, rep.glm0);
  rep.extinct_before_root =
      rep.extinct && traj.extinction->lo <= rep.barrier_root * (1.0 + 1e-8) + 1e-12;
  return rep;
}

BlowdownReport blowdown(const FlowTrajectory& traj, const ReductiveSplit& split,
                        const std::vector<double>& s_values, double t_ref, double noise) {
  if (traj.samples.empty()) throw std::invalid_argument("blowdown: empty trajectory");
  BlowdownReport rep;
  const double t_last = traj.samples.back().t;
  for (double s : s_values) {
    if (!(s > 0.0) || s * t_ref > t_last * (1.0 + 1e-12) || s * t_ref < traj.samples.front().t)
      throw std::invalid_argument("blowdown: s * t_ref outside the integrated range");
    BlowdownPoint p;
    p.s = s;
    p.P = traj.metric_at(std::min(s * t_ref, t_last)) / s;
    const CurvatureReport r = ricci(split, p.P);
    p.ric_norm = std::sqrt(std::max(0.0, r.ric_norm2));
    p.scal = r.scal;
    rep.points.push_back(std::move(p));
  }
  rep.ric_norm_decreasing = true;
  for (std::size_t i = 1; i < rep.points.size(); ++i)
    if (rep.points[i].ric_norm > rep.points[i - 1].ric_norm + noise) rep.ric_norm_decreasing = false;

  for (const FlowSample& x : traj.samples) {
    rep.times.push_back(x.t);
    rep.scal_times_t.push_back(std::abs(x.scal) * x.t);
  }
  rep.scal_t_decreasing_final_decade = true;
  for (std::size_t i = 1; i < rep.times.size(); ++i)
    if (rep.times[i - 1] >= t_last / 10.0 && rep.scal_times_t[i] > rep.scal_times_t[i - 1] + noise)
      rep.scal_t_decreasing_final_decade = false;
  rep.scal_t_final = rep.scal_times_t.back();
  return rep;
}

}  // namespace hrf
