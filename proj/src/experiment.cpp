#include "hrf/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

namespace hrf {

namespace fs = std::filesystem;

namespace {

const char* kConfig = "config-validate";

[[noreturn]] void bad(const std::string& what) { throw StageError(kConfig, what); }

const std::set<std::string> kFlowChecks = {"theta-adapted-invariance", "monotonicity", "extinction",
                                           "scalar-evolution", "blowdown", "equivalence"};

void require_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) bad("unknown key '" + k + "' in " + where);
}

double number(const Json& j, const std::string& what) {
  if (!j.is_number()) bad(what + " must be a number");
  return j.get<double>();
}

Mat matrix(const Json& j, const std::string& what) {
  try {
    return mat_from_json(j);
  } catch (const std::invalid_argument& e) {
    bad(what + ": " + e.what());
  }
}

Vec vector(const Json& j, const std::string& what) {
  try {
    return vec_from_json(j);
  } catch (const std::invalid_argument& e) {
    bad(what + ": " + e.what());
  }
}

LieAlgebra algebra_from_json(const Json& j) {
  if (!j.is_object()) bad("space.u must be an object");
  require_keys(j, {"dim", "brackets", "labels"}, "space.u");
  if (!j.contains("dim") || !j["dim"].is_number_integer() || j["dim"].get<int>() < 0)
    bad("space.u.dim must be a nonnegative integer");
  const int dim = j["dim"].get<int>();
  std::vector<LieAlgebra::Bracket> br;
  if (j.contains("brackets")) {
    if (!j["brackets"].is_array()) bad("space.u.brackets must be an array");
    for (const Json& b : j["brackets"]) {
      if (!b.is_object() || !b.contains("i") || !b.contains("j") || !b.contains("coeffs"))
        bad("each bracket needs i, j and coeffs");
      const int i = b["i"].get<int>();
      const int k = b["j"].get<int>();
      const Vec c = vector(b["coeffs"], "bracket coeffs");
      if (i < 0 || k < 0 || i >= dim || k >= dim || i >= k || c.size() != dim)
        bad("bracket indices must satisfy 0 <= i < j < dim with dim coefficients");
      br.push_back({i, k, c});
    }
  }
  std::vector<std::string> labels;
  if (j.contains("labels")) labels = j["labels"].get<std::vector<std::string>>();
  try {
    return LieAlgebra::from_brackets(dim, br, labels);
  } catch (const std::exception& e) {
    bad(std::string("space.u: ") + e.what());
  }
}

}  // namespace

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names = {
      "curvature-oracle", "theta-adapted-invariance", "monotonicity", "extinction", "scalar-evolution",
      "blowdown",         "stability",                "retraction",   "nilsoliton", "equivalence"};
  return names;
}

ExperimentConfig parse_experiment(const Json& j) {
  try {
    if (!j.is_object()) bad("experiment must be an object");
    require_keys(j, {"name", "space", "params", "metric", "flow", "checks", "blowdown", "expect", "seed", "outputs"},
                 "experiment");
    ExperimentConfig c;
    c.source = j;
    if (j.contains("name")) c.name = j["name"].get<std::string>();
    if (!std::regex_match(c.name, std::regex("[A-Za-z0-9_.-]+")))
      bad("name must be nonempty and use only letters, digits, '_', '.', '-'");

    if (!j.contains("space")) bad("missing 'space'");
    const Json& sp = j["space"];
    if (sp.is_string()) {
      c.catalog_name = sp.get<std::string>();
      const auto names = catalog_names();
      if (std::find(names.begin(), names.end(), c.catalog_name) == names.end())
        bad("unknown catalog entry '" + c.catalog_name + "'");
    } else if (sp.is_object()) {
      require_keys(sp, {"u", "dimV", "theta", "h_basis"}, "space");
      SemidirectData d;
      d.u = algebra_from_json(sp.at("u"));
      d.dimV = sp.contains("dimV") ? sp["dimV"].get<int>() : 0;
      if (d.dimV < 0) bad("space.dimV must be nonnegative");
      if (sp.contains("theta"))
        for (const Json& t : sp["theta"]) d.theta.push_back(matrix(t, "space.theta"));
      else
        d.theta.assign(static_cast<std::size_t>(d.u.dim()), Mat::Zero(d.dimV, d.dimV));
      if (static_cast<int>(d.theta.size()) != d.u.dim()) bad("space.theta needs one matrix per basis vector of u");
      for (const Mat& t : d.theta)
        if (t.rows() != d.dimV || t.cols() != d.dimV) bad("space.theta matrices must be dimV x dimV");
      if (sp.contains("h_basis"))
        for (const Json& v : sp["h_basis"]) {
          c.h_basis.push_back(vector(v, "space.h_basis"));
          if (c.h_basis.back().size() != d.u.dim()) bad("space.h_basis vectors must have dim(u) entries");
        }
      c.data = std::move(d);
    } else {
      bad("'space' must be a catalog name or an object");
    }

    if (j.contains("params")) {
      const Json& p = j["params"];
      require_keys(p, {"lambda", "lambda1", "lambda2"}, "params");
      if (p.contains("lambda")) c.params.lambda = number(p["lambda"], "params.lambda");
      if (p.contains("lambda1")) c.params.lambda1 = number(p["lambda1"], "params.lambda1");
      if (p.contains("lambda2")) c.params.lambda2 = number(p["lambda2"], "params.lambda2");
    }

    if (j.contains("metric")) {
      const Json& m = j["metric"];
      if (m.is_string()) {
        c.metric.name = m.get<std::string>();
      } else if (m.is_object() && m.size() == 1) {
        if (m.contains("named")) {
          c.metric.name = m["named"].get<std::string>();
        } else if (m.contains("diag")) {
          c.metric.kind = "diag";
          c.metric.diag = vector(m["diag"], "metric.diag");
        } else if (m.contains("dense")) {
          c.metric.kind = "dense";
          c.metric.dense = matrix(m["dense"], "metric.dense");
        } else if (m.contains("random")) {
          c.metric.kind = "random";
          const Json& r = m["random"];
          require_keys(r, {"adapted", "kappa"}, "metric.random");
          if (r.contains("adapted")) c.metric.adapted = r["adapted"].get<bool>();
          if (r.contains("kappa")) c.metric.kappa = number(r["kappa"], "metric.random.kappa");
          if (!(c.metric.kappa >= 1.0)) bad("metric.random.kappa must be >= 1");
        } else {
          bad("metric must be one of named, diag, dense, random");
        }
      } else {
        bad("metric must be a name or an object with exactly one of named, diag, dense, random");
      }
    }

    if (j.contains("flow")) {
      const Json& f = j["flow"];
      require_keys(f, {"kind", "t_max", "rtol", "atol", "h_init", "h_min", "h_max", "extinction_eps", "bracket_tol"},
                   "flow");
      c.run_flow = true;
      if (f.contains("kind")) {
        try {
          c.flow.kind = flow_kind_from_string(f["kind"].get<std::string>());
        } catch (const std::invalid_argument& e) {
          bad(e.what());
        }
      }
      auto get = [&](const char* key, double& dst) {
        if (f.contains(key)) dst = number(f[key], std::string("flow.") + key);
      };
      get("t_max", c.flow.t_max);
      get("rtol", c.flow.rtol);
      get("atol", c.flow.atol);
      get("h_init", c.flow.h_init);
      get("h_min", c.flow.h_min);
      get("h_max", c.flow.h_max);
      get("extinction_eps", c.flow.extinction_eps);
      get("bracket_tol", c.flow.bracket_tol);
      try {
        c.flow.validate();
      } catch (const std::invalid_argument& e) {
        bad(e.what());
      }
    }

    if (j.contains("checks")) {
      for (const Json& x : j["checks"]) {
        const std::string name = x.get<std::string>();
        const auto& known = known_checks();
        if (std::find(known.begin(), known.end(), name) == known.end()) bad("unknown check '" + name + "'");
        c.checks.push_back(name);
        if (kFlowChecks.count(name) && !c.run_flow) bad("check '" + name + "' needs a 'flow' section");
      }
    }

    if (j.contains("blowdown")) {
      const Json& b = j["blowdown"];
      require_keys(b, {"s", "t_ref"}, "blowdown");
      if (b.contains("s")) c.blowdown_s = b["s"].get<std::vector<double>>();
      if (b.contains("t_ref")) c.blowdown_t_ref = number(b["t_ref"], "blowdown.t_ref");
    }
    if (j.contains("expect")) {
      const Json& e = j["expect"];
      require_keys(e, {"extinction_time", "extinction_tol", "stable"}, "expect");
      if (e.contains("extinction_time")) c.expect.extinction_time = number(e["extinction_time"], "expect.extinction_time");
      if (e.contains("extinction_tol")) c.expect.extinction_tol = number(e["extinction_tol"], "expect.extinction_tol");
      if (e.contains("stable")) c.expect.stable = e["stable"].get<bool>();
    }
    if (j.contains("seed")) {
      if (!j["seed"].is_number_unsigned()) bad("seed must be a nonnegative integer");
      c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("outputs")) {
      require_keys(j["outputs"], {"gnuplot"}, "outputs");
      if (j["outputs"].contains("gnuplot")) c.gnuplot = j["outputs"]["gnuplot"].get<bool>();
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    bad(std::string("malformed config: ") + e.what());
  }
}

std::vector<ExperimentConfig> load_configs(const fs::path& file) {
  std::ifstream in(file);
  if (!in) bad("cannot open config file '" + file.string() + "'");
  Json j;
  try {
    j = Json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    bad(std::string("config is not valid JSON: ") + e.what());
  }
  std::vector<ExperimentConfig> out;
  if (j.is_object() && j.contains("experiments")) {
    if (j.size() != 1 || !j["experiments"].is_array()) bad("a sweep file holds only an 'experiments' array");
    for (const Json& e : j["experiments"]) out.push_back(parse_experiment(e));
  } else {
    out.push_back(parse_experiment(j));
  }
  std::set<std::string> names;
  for (const ExperimentConfig& c : out)
    if (!names.insert(c.name).second) bad("duplicate experiment name '" + c.name + "'");
  return out;
}

ResolvedExperiment resolve(const ExperimentConfig& c) {
  ResolvedExperiment r;
  if (!c.catalog_name.empty()) {
    try {
      r.entry = catalog(c.catalog_name, c.params);
    } catch (const std::exception& e) {
      throw StageError(kConfig, e.what());
    }
  } else {
    r.entry.name = "inline";
    r.entry.data = *c.data;
    r.entry.h_basis = c.h_basis;
  }
  if (!r.entry.nilpotent) {
    try {
      if (homomorphism_residual(r.entry.data) > 1e-9 * std::max(1.0, r.entry.data.u.max_structure_constant()))
        throw StageError("split", "theta is not a Lie algebra homomorphism");
      const auto ws = weight_split(r.entry.data, Mat::Identity(r.entry.data.dimV, r.entry.data.dimV));
      if (const auto* f = std::get_if<StabilityFailure>(&ws)) {
        std::ostringstream os;
        os << "theta is not normal for the background on V (operator " << f->operator_index << ", residual "
           << f->residual << "): " << f->reason;
        throw StageError("weight-split", os.str());
      }
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError("weight-split", e.what());
    }
  }
  try {
    r.split = build_split(r.entry);
  } catch (const std::exception& e) {
    throw StageError("split", e.what());
  }

  const int m = r.split.dm();
  const MetricSpec& ms = c.metric;
  if (ms.kind == "named") {
    if (ms.name == "background") {
      r.g0 = Mat::Identity(m, m);
    } else {
      const auto it = r.entry.metrics.find(ms.name);
      if (it == r.entry.metrics.end()) bad("unknown metric '" + ms.name + "' for " + r.entry.name);
      r.g0 = it->second;
    }
  } else if (ms.kind == "diag") {
    if (ms.diag.size() != m)
      bad("metric.diag has " + std::to_string(ms.diag.size()) + " entries, dim m = " + std::to_string(m));
    r.g0 = ms.diag.asDiagonal();
  } else if (ms.kind == "dense") {
    if (ms.dense.rows() != m || ms.dense.cols() != m)
      bad("metric.dense must be " + std::to_string(m) + " x " + std::to_string(m));
    r.g0 = ms.dense;
  } else {
    std::mt19937_64 rng(c.seed);
    r.g0 = random_metric(r.split, rng, ms.adapted, ms.kappa);
  }
  if (r.g0.rows() != m) bad("initial metric does not match dim m = " + std::to_string(m));
  try {
    const InvariantMetric check(r.split, r.g0);
  } catch (const std::exception& e) {
    bad(std::string("initial metric rejected: ") + e.what());
  }
  return r;
}

namespace {

struct Context {
  const ExperimentConfig& config;
  const ResolvedExperiment& res;
  const FlowTrajectory* traj = nullptr;
  std::optional<BlowdownReport> blowdown;
};

CheckResult not_applicable(const std::string& name, const std::string& why) {
  return {name, "not applicable", why, Json::object()};
}

CheckResult verdict(const std::string& name, bool ok, Json details, std::string note = {}) {
  return {name, ok ? "pass" : "fail", std::move(note), std::move(details)};
}

double scale_of(const Mat& m) { return std::max(1.0, max_abs(m)); }

CheckResult check_curvature_oracle(const Context& cx) {
  const ReductiveSplit& sp = cx.res.split;
  if (!sp.semidirect_form) return not_applicable("curvature-oracle", "V is not an abelian ideal with weights");
  std::vector<Mat> metrics;
  if (check_theta_adapted(sp, cx.res.g0) <= kTolBlock * scale_of(cx.res.g0)) metrics.push_back(cx.res.g0);
  if (cx.traj && cx.traj->theta_adapted) {
    const auto& s = cx.traj->samples;
    const std::size_t stride = std::max<std::size_t>(1, s.size() / 20);
    for (std::size_t i = stride; i < s.size(); i += stride) metrics.push_back(s[i].P);
  }
  if (metrics.empty()) return not_applicable("curvature-oracle", "initial metric is not theta-adapted");
  double v_dev = 0.0, u_dev = 0.0, l_dev = 0.0, frame = 0.0, bound_gap = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (const Mat& P : metrics) {
    const CurvatureReport r = ricci(sp, P);
    const double tol = 1e-9 * scale_of(r.ric_star);
    double vd = 0.0;
    for (const VBlockReport& b : ricci_V_block(sp, P)) vd = std::max(vd, b.deviation / std::max(1.0, b.term_scale));
    const UBlockReport u = ricci_U_block(sp, P);
    const double fd = std::abs(r.scal - r.scal_frame_sum) / std::max({1.0, std::abs(r.scal), std::abs(r.scal_frame_sum)});
    ok = ok && vd <= 1e-9 && u.deviation <= tol && u.l_deviation <= tol && fd <= 1e-9;
    v_dev = std::max(v_dev, vd);
    u_dev = std::max(u_dev, u.deviation);
    l_dev = std::max(l_dev, u.l_deviation);
    frame = std::max(frame, fd);
    if (sp.dl > 0) bound_gap = std::min(bound_gap, u.ric_star_top - u.lower_bound_top);
  }
  Json d = {{"metrics", metrics.size()},
            {"v_block_rel_deviation", v_dev},
            {"u_block_deviation", u_dev},
            {"l_block_deviation", l_dev},
            {"scalar_frame_rel_deviation", frame}};
  if (sp.dl > 0) d["top_l_lower_bound_gap"] = bound_gap;
  return verdict("curvature-oracle", ok, d);
}

CheckResult check_invariance(const Context& cx) {
  if (!cx.traj->theta_adapted) return not_applicable("theta-adapted-invariance", "initial metric is not theta-adapted");
  double worst = 0.0;
  for (const FlowSample& s : cx.traj->samples) worst = std::max(worst, s.adapted_residual);
  return verdict("theta-adapted-invariance", worst <= 1e-8, {{"max_off_block", worst}});
}

CheckResult check_monotonicity(const Context& cx) {
  const MonotonicityReport r = verify_monotonicity(*cx.traj, cx.res.split);
  if (!r.applicable) return not_applicable("monotonicity", r.note);
  return verdict("monotonicity", r.ok(), to_json(r));
}

CheckResult check_extinction(const Context& cx) {
  const ExtinctionReport r = extinction_analysis(*cx.traj, cx.res.split);
  Json d = to_json(r);
  const auto& exp = cx.config.expect;
  bool ok = true;
  bool any = false;
  if (exp.extinction_time) {
    any = true;
    const bool hit = cx.traj->extinction && std::abs(cx.traj->extinction->t_est - *exp.extinction_time) <= exp.extinction_tol;
    d["expected_extinction_time"] = *exp.extinction_time;
    d["expected_within_tol"] = hit;
    ok = ok && hit;
  }
  if (r.hypothesis_ok) {
    any = true;
    ok = ok && r.extinct && r.barrier_holds && r.extinct_before_root && r.bracket_width <= 1e-6;
  }
  if (!any) return not_applicable("extinction", r.note);
  return verdict("extinction", ok, d, r.note);
}

CheckResult check_scalar_evolution(const Context& cx) {
  if (cx.traj->samples.size() < 3) return verdict("scalar-evolution", false, {}, "fewer than 3 samples");
  const ScalarEvolutionReport r = verify_scalar_evolution(*cx.traj, 0.05);
  return verdict("scalar-evolution", r.max_rel_deviation <= 1e-3 && r.checked >= 3, to_json(r));
}

CheckResult check_blowdown(const Context& cx) {
  if (!cx.blowdown) return verdict("blowdown", false, {}, "blowdown could not be evaluated");
  const BlowdownReport& b = *cx.blowdown;
  const bool ok = b.ric_norm_decreasing && b.scal_t_decreasing_final_decade && b.scal_t_final < 0.05;
  return verdict("blowdown", ok, to_json(b));
}

CheckResult check_stability(const Context& cx) {
  const CatalogEntry& e = cx.res.entry;
  if (e.nilpotent) return not_applicable("stability", "V is not abelian");
  const StabilityVerdict v = is_stable(e.data);
  Json d = to_json(v);
  bool ok = v.stable == cx.config.expect.stable.value_or(true);
  if (v.stable && e.data.dimV > 0) {
    const bool splits = std::holds_alternative<WeightDecomposition>(weight_split(e.data, v.witness));
    d["weight_split_with_witness"] = splits;
    ok = ok && splits;
  }
  ok = ok && v.path.norm_nonincreasing && v.path.max_trace_drift <= 1e-10 * std::max(1.0, std::abs(v.path.points.empty() ? 0.0 : v.path.points.front().trace));
  return verdict("stability", ok, d);
}

CheckResult check_retraction(const Context& cx) {
  const ReductiveSplit& sp = cx.res.split;
  if (!sp.semidirect_form || sp.dv == 0 || sp.dmu() == 0)
    return not_applicable("retraction", "needs abelian V and a nontrivial base");
  const SubmersionSplit ss = submersion_split(sp, cx.res.g0);
  const double sc = scale_of(cx.res.g0);
  const double roundtrip = max_abs(assemble(ss) - cx.res.g0);
  const double equiv = phi_equivariance_residual(sp, ss.phi);
  std::vector<ScalarDecomposition> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(scalar_decomposition(sp, retract_horizontal(ss, i / 10.0)));
  const ScalarDecomposition& d0 = grid.front();
  double mono = 0.0, quad = 0.0, stable_terms = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = static_cast<double>(i) / 10.0;
    if (i > 0) mono = std::max(mono, grid[i - 1].total() - grid[i].total());
    quad = std::max(quad, std::abs(grid[i].oneill - (1 - t) * (1 - t) * d0.oneill));
    stable_terms = std::max({stable_terms, std::abs(grid[i].base - d0.base), std::abs(grid[i].trace - d0.trace),
                             std::abs(grid[i].action - d0.action)});
  }
  const double tscale = std::max({1.0, std::abs(d0.base), std::abs(d0.trace), std::abs(d0.action), d0.oneill});
  const bool ok = roundtrip <= 1e-12 * sc && equiv <= 1e-10 * sc && mono <= 1e-12 * tscale &&
                  quad <= 1e-10 * std::max(1.0, d0.oneill) && stable_terms <= 1e-12 * tscale;
  Json d = {{"phi_norm", ss.phi.norm()},          {"roundtrip", roundtrip},
            {"phi_equivariance", equiv},          {"scal_star_decrease", mono},
            {"oneill_quadratic_deviation", quad}, {"other_terms_drift", stable_terms},
            {"t0", to_json(d0)},                  {"t1", to_json(grid.back())}};
  return verdict("retraction", ok, d, ss.phi.norm() == 0.0 ? "phi = 0: the retraction is constant" : "");
}

CheckResult check_nilsoliton(const Context& cx) {
  const CatalogEntry& e = cx.res.entry;
  if (!e.nilpotent) return not_applicable("nilsoliton", "V carries no nilpotent bracket");
  const int dv = cx.res.split.dv;
  const NilsolitonFit f = nilsoliton_fit(*e.nilpotent, cx.res.g0.bottomRightCorner(dv, dv));
  return verdict("nilsoliton", f.residual <= kTolNilsoliton, to_json(f));
}

CheckResult check_equivalence(const Context& cx) {
  const ReductiveSplit& sp = cx.res.split;
  if (sp.trace_form().size() > 0 && sp.trace_form().cwiseAbs().maxCoeff() >= 1e-12)
    return not_applicable("equivalence", "algebra is not unimodular");
  FlowControls other = cx.config.flow;
  other.kind = cx.traj->kind == FlowKind::ricci ? FlowKind::unimodular : FlowKind::ricci;
  const FlowTrajectory t2 = integrate(sp, cx.res.g0, other);
  const double t_end = std::min(cx.traj->samples.back().t, t2.samples.back().t);
  double worst = 0.0;
  for (const FlowSample& s : cx.traj->samples) {
    if (s.t > t_end) break;
    worst = std::max(worst, max_abs(s.P - t2.metric_at(s.t)) / scale_of(s.P));
  }
  return verdict("equivalence", worst <= 10.0 * cx.config.flow.rtol,
                 {{"max_rel_deviation", worst}, {"compared_until", t_end}});
}

CheckResult run_check(const std::string& name, const Context& cx) {
  if (name == "curvature-oracle") return check_curvature_oracle(cx);
  if (name == "theta-adapted-invariance") return check_invariance(cx);
  if (name == "monotonicity") return check_monotonicity(cx);
  if (name == "extinction") return check_extinction(cx);
  if (name == "scalar-evolution") return check_scalar_evolution(cx);
  if (name == "blowdown") return check_blowdown(cx);
  if (name == "stability") return check_stability(cx);
  if (name == "retraction") return check_retraction(cx);
  if (name == "nilsoliton") return check_nilsoliton(cx);
  return check_equivalence(cx);
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw StageError("write-output", "cannot write " + p.string());
  out << s;
}

class Csv {
 public:
  explicit Csv(const fs::path& p) : out_(p, std::ios::binary) {
    if (!out_) throw StageError("write-output", "cannot write " + p.string());
  }
  void header(const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
    out_ << '\n';
  }
  void row(const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) out_ << (i ? "," : "") << fmt(v[i]);
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

std::vector<std::string> write_trajectory(const fs::path& dir, const ReductiveSplit& sp, const FlowTrajectory& tr) {
  std::vector<std::string> files;
  const int m = sp.dm();
  {
    Csv csv(dir / "trajectory.csv");
    std::vector<std::string> cols = {"t", "scal", "scal_star", "ric_norm2", "ric_star_norm2", "min_eig",
                                     "adapted_residual", "equiv_residual", "glm", "error_term", "error_int",
                                     "base_margin"};
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) cols.push_back("P_" + std::to_string(i) + "_" + std::to_string(j));
    csv.header(cols);
    for (const FlowSample& s : tr.samples) {
      std::vector<double> v = {s.t, s.scal, s.scal_star, s.ric_norm2, s.ric_star_norm2, s.min_eig,
                               s.adapted_residual, s.equiv_residual, s.glm, s.error_term, s.error_int,
                               s.base_margin};
      for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) v.push_back(s.P(i, j));
      csv.row(v);
    }
    files.push_back("trajectory.csv");
  }
  fs::create_directories(dir / "channels");
  {
    Csv csv(dir / "channels" / "curvature.csv");
    csv.header({"t", "scal", "scal_star", "ric_norm2", "ric_star_norm2", "min_eig", "abs_scal_times_t"});
    for (const FlowSample& s : tr.samples)
      csv.row({s.t, s.scal, s.scal_star, s.ric_norm2, s.ric_star_norm2, s.min_eig, std::abs(s.scal) * s.t});
    files.push_back("channels/curvature.csv");
  }
  if (!tr.samples.empty() && !tr.samples.front().weights.empty()) {
    const std::size_t nb = tr.samples.front().weights.size();
    for (std::size_t b = 0; b < nb; ++b) {
      const std::string name = "channels/weights_" + std::to_string(b) + ".csv";
      Csv csv(dir / name);
      const Eigen::Index d = tr.samples.front().weights[b].g.size();
      std::vector<std::string> cols = {"t"};
      for (const char* pre : {"g", "fbar", "f", "fbar_int", "f_int"})
        for (Eigen::Index i = 0; i < d; ++i) cols.push_back(std::string(pre) + "_" + std::to_string(i + 1));
      cols.push_back("pinch");
      csv.header(cols);
      for (const FlowSample& s : tr.samples) {
        if (s.weights.size() != nb) continue;
        const WeightMonitor& w = s.weights[b];
        std::vector<double> v = {s.t};
        for (const Vec* x : {&w.g, &w.fbar, &w.f, &w.fbar_int, &w.f_int})
          for (Eigen::Index i = 0; i < d; ++i) v.push_back((*x)(i));
        v.push_back(w.pinch);
        csv.row(v);
      }
      files.push_back(name);
    }
  }
  if (sp.dlss > 0) {
    Csv csv(dir / "channels" / "l_top.csv");
    csv.header({"t", "glm", "barrier", "error_term", "base_margin"});
    const double g0 = tr.samples.front().glm;
    double running = 0.0;
    for (const FlowSample& s : tr.samples) {
      running = std::max(running, s.glm);
      csv.row({s.t, s.glm, g0 - 0.5 * sp.b0 * s.t + running * s.error_int / 2.0, s.error_term, s.base_margin});
    }
    files.push_back("channels/l_top.csv");
  }
  return files;
}

std::string gnuplot_script(const std::vector<std::string>& files) {
  std::ostringstream g;
  g << "set datafile separator ','\nset key autotitle columnhead\nset xlabel 't'\n";
  g << "set terminal pngcairo size 900,600\n";
  auto has = [&](const std::string& f) { return std::find(files.begin(), files.end(), f) != files.end(); };
  if (has("channels/curvature.csv")) {
    g << "set output 'scal.png'\nplot 'channels/curvature.csv' using 1:2 with lines, '' using 1:3 with lines\n";
    g << "set output 'scal_times_t.png'\nset logscale y\nplot 'channels/curvature.csv' using 1:7 with lines\nunset logscale y\n";
  }
  for (const std::string& f : files)
    if (f.rfind("channels/weights_", 0) == 0) {
      const std::string stem = f.substr(9, f.size() - 13);
      g << "set output '" << stem << ".png'\nplot for [c=2:*] '" << f << "' using 1:c with lines\n";
    }
  if (has("channels/l_top.csv"))
    g << "set output 'l_top.png'\nplot 'channels/l_top.csv' using 1:2 with lines, '' using 1:3 with lines\n";
  if (has("channels/blowdown.csv"))
    g << "set output 'blowdown.png'\nset logscale xy\nplot 'channels/blowdown.csv' using 1:2 with linespoints\n";
  return g.str();
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& c, const fs::path& dir) {
  RunResult r;
  Json summary;
  summary["name"] = c.name;
  summary["space"] = c.catalog_name.empty() ? "inline" : c.catalog_name;
  summary["seed"] = c.seed;
  std::string stage = kConfig;
  std::vector<std::string> files;
  std::optional<FlowTrajectory> traj;
  try {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw StageError("write-output", "cannot create " + dir.string() + ": " + ec.message());
    fs::remove(dir / "FAILED", ec);
    write_text(dir / "config.json", c.source.dump(2) + "\n");
    files.push_back("config.json");

    const ResolvedExperiment res = resolve(c);
    summary["dims"] = to_json(res.split)["dims"];
    write_text(dir / "split.json", to_json(res.split).dump(2) + "\n");
    files.push_back("split.json");

    Context cx{c, res, nullptr, std::nullopt};
    if (c.run_flow) {
      stage = "integrate";
      traj = integrate(res.split, res.g0, c.flow);
      cx.traj = &*traj;
      Json fl = to_json(c.flow);
      fl["stop_reason"] = traj->stop_reason;
      fl["samples"] = traj->samples.size();
      fl["rejected_steps"] = traj->rejected_steps;
      fl["theta_adapted"] = traj->theta_adapted;
      fl["t_final"] = traj->samples.back().t;
      if (traj->extinction) {
        fl["extinction_time"] = traj->extinction->t_est;
        fl["extinction_bracket"] = {traj->extinction->lo, traj->extinction->hi};
      } else {
        fl["extinction_time"] = nullptr;
      }
      summary["flow"] = fl;
      if (traj->extinction) summary["extinction_time"] = traj->extinction->t_est;
      stage = "write-output";
      for (const std::string& f : write_trajectory(dir, res.split, *traj)) files.push_back(f);

      if (std::find(c.checks.begin(), c.checks.end(), "blowdown") != c.checks.end()) {
        stage = "blowdown";
        try {
          cx.blowdown = blowdown(*traj, res.split, c.blowdown_s, c.blowdown_t_ref);
        } catch (const std::invalid_argument& e) {
          throw StageError("blowdown", e.what());
        }
        Csv csv(dir / "channels" / "blowdown.csv");
        csv.header({"s", "ric_norm", "scal"});
        for (const BlowdownPoint& p : cx.blowdown->points) csv.row({p.s, p.ric_norm, p.scal});
        files.push_back("channels/blowdown.csv");
      }
    }

    for (const std::string& name : c.checks) {
      stage = "check:" + name;
      r.checks.push_back(run_check(name, cx));
    }
    if (c.gnuplot && c.run_flow) {
      stage = "write-output";
      write_text(dir / "plot.gp", gnuplot_script(files));
      files.push_back("plot.gp");
    }
  } catch (const StageError& e) {
    r.failed_stage = e.stage();
    r.message = e.what();
  } catch (const std::exception& e) {
    r.failed_stage = stage;
    r.message = e.what();
  }

  Json checks = Json::array();
  bool checks_ok = true;
  for (const CheckResult& ch : r.checks) {
    checks.push_back({{"name", ch.name}, {"status", ch.status}, {"note", ch.note}, {"details", ch.details}});
    checks_ok = checks_ok && ch.status != "fail";
  }
  summary["checks"] = checks;
  r.ok = r.failed_stage.empty() && checks_ok;
  summary["status"] = !r.failed_stage.empty() ? "failed" : (checks_ok ? "ok" : "checks-failed");
  summary["failed_stage"] = r.failed_stage.empty() ? Json(nullptr) : Json(r.failed_stage);
  summary["message"] = r.message;
  files.push_back("summary.json");
  summary["files"] = files;
  r.summary = summary;
  try {
    write_text(dir / "summary.json", summary.dump(2) + "\n");
    if (!r.failed_stage.empty()) write_text(dir / "FAILED", "stage: " + r.failed_stage + "\n" + r.message + "\n");
  } catch (const std::exception&) {
    if (r.failed_stage.empty()) {
      r.failed_stage = "write-output";
      r.message = "cannot write summary";
      r.ok = false;
    }
  }
  return r;
}

std::vector<RunResult> run_sweep(const std::vector<ExperimentConfig>& configs, const fs::path& out, int jobs) {
  std::vector<RunResult> results(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++)
      results[i] = run_experiment(configs[i], out / configs[i].name);
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(configs.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  return results;
}

}  // namespace hrf
