#include "hrf/serialize.hpp"

#include <cstdio>
#include <stdexcept>

namespace hrf {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json to_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Mat mat_from_json(const Json& j) {
  if (!j.is_array()) throw std::invalid_argument("matrix must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Mat(0, 0);
  if (!j[0].is_array()) throw std::invalid_argument("matrix must be an array of rows");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& r = j[static_cast<std::size_t>(i)];
    if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != cols)
      throw std::invalid_argument("matrix rows have unequal length");
    for (Eigen::Index k = 0; k < cols; ++k) {
      const Json& x = r[static_cast<std::size_t>(k)];
      if (!x.is_number()) throw std::invalid_argument("matrix entry is not a number");
      m(i, k) = x.get<double>();
    }
  }
  return m;
}

Vec vec_from_json(const Json& j) {
  if (!j.is_array()) throw std::invalid_argument("vector must be an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw std::invalid_argument("vector entry is not a number");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Json to_json(const LieAlgebra& a) {
  Json brackets = Json::array();
  for (int i = 0; i < a.dim(); ++i)
    for (int j = i + 1; j < a.dim(); ++j) {
      Vec c(a.dim());
      for (int k = 0; k < a.dim(); ++k) c(k) = a.c(i, j, k);
      if (c.cwiseAbs().maxCoeff() != 0.0) brackets.push_back({{"i", i}, {"j", j}, {"coeffs", to_json(c)}});
    }
  return {{"dim", a.dim()}, {"labels", a.labels()}, {"brackets", brackets}};
}

namespace {

Json range(int offset, int size) {
  Json out = Json::array();
  for (int i = offset; i < offset + size; ++i) out.push_back(i);
  return out;
}

}  // namespace

Json to_json(const ReductiveSplit& s) {
  Json j;
  j["dims"] = {{"u", s.du}, {"h", s.dh}, {"l_ss", s.dlss}, {"l", s.dl}, {"z_hat", s.dz}, {"V", s.dv}};
  // Index sets in m-coordinates.
  j["index_sets"] = {{"l_ss", range(0, s.dlss)},
                     {"l", range(0, s.dl)},
                     {"z_hat", range(s.dl, s.dz)},
                     {"V", range(s.v_offset(), s.dv)}};
  Json blocks = Json::array();
  for (std::size_t b = 0; b < s.weight_blocks.size(); ++b)
    blocks.push_back({{"indices", range(s.weight_blocks[b].offset, s.weight_blocks[b].size)},
                      {"alpha", b < s.weights.size() ? to_json(s.weights[b]) : Json::array()}});
  j["weight_blocks"] = blocks;
  j["b0"] = s.b0;
  j["alpha_vanishes_on_derived"] = s.alpha_vanishes_on_derived;
  j["semidirect_form"] = s.semidirect_form;
  j["labels"] = s.algebra.labels();
  j["basis"] = to_json(s.basis);
  return j;
}

Json to_json(const WeightDecomposition& w) {
  Json ws = Json::array();
  for (const Weight& x : w.weights) {
    Json js = Json::array();
    for (const Mat& J : x.J) js.push_back(to_json(J));
    ws.push_back({{"alpha", to_json(x.alpha)}, {"dim", x.dim}, {"block", to_json(x.block)}, {"J", js}});
  }
  return {{"weights", ws}, {"alpha_vanishes_on_derived", w.alpha_vanishes_on_derived}};
}

Json to_json(const StabilityFailure& f) {
  return {{"operator_index", f.operator_index}, {"residual", f.residual}, {"reason", f.reason}};
}

Json to_json(const CurvatureReport& r) {
  return {{"ric", to_json(r.ric)},
          {"ric_star", to_json(r.ric_star)},
          {"H", to_json(r.H)},
          {"M", to_json(r.M)},
          {"B", to_json(r.B)},
          {"h_term", to_json(r.h_term)},
          {"scal", r.scal},
          {"scal_star", r.scal_star},
          {"scal_frame_sum", r.scal_frame_sum},
          {"ric_norm2", r.ric_norm2},
          {"ric_star_norm2", r.ric_star_norm2}};
}

Json to_json(const FlowControls& c) {
  return {{"kind", to_string(c.kind)}, {"t_max", c.t_max},         {"rtol", c.rtol},
          {"atol", c.atol},            {"h_init", c.h_init},       {"h_min", c.h_min},
          {"h_max", c.h_max},          {"extinction_eps", c.extinction_eps},
          {"bracket_tol", c.bracket_tol}};
}

Json to_json(const MonotonicityReport& r) {
  Json ch = Json::array();
  for (const ChannelVerdict& c : r.channels) ch.push_back({{"name", c.name}, {"ok", c.ok}, {"worst", c.worst}});
  return {{"applicable", r.applicable}, {"note", r.note}, {"ok", r.ok()}, {"channels", ch}};
}

Json to_json(const ScalarEvolutionReport& r) {
  return {{"max_rel_deviation", r.max_rel_deviation},
          {"checked", r.checked},
          {"skipped_near_extinction", r.skipped_near_extinction}};
}

Json to_json(const ExtinctionReport& r) {
  return {{"hypothesis_ok", r.hypothesis_ok},
          {"note", r.note},
          {"extinct", r.extinct},
          {"t_ext", r.t_ext},
          {"bracket_width", r.bracket_width},
          {"b0", r.b0},
          {"glm0", r.glm0},
          {"glm_running_max", r.glm_running_max},
          {"c_tilde", r.c_tilde},
          {"barrier_root", r.barrier_root},
          {"worst_barrier_gap", r.worst_barrier_gap},
          {"barrier_holds", r.barrier_holds},
          {"extinct_before_root", r.extinct_before_root},
          {"min_base_margin", r.min_base_margin}};
}

Json to_json(const BlowdownReport& r) {
  Json pts = Json::array();
  for (const BlowdownPoint& p : r.points)
    pts.push_back({{"s", p.s}, {"ric_norm", p.ric_norm}, {"scal", p.scal}, {"P", to_json(p.P)}});
  return {{"points", pts},
          {"ric_norm_decreasing", r.ric_norm_decreasing},
          {"scal_t_decreasing_final_decade", r.scal_t_decreasing_final_decade},
          {"scal_t_final", r.scal_t_final}};
}

Json to_json(const StabilityVerdict& v) {
  return {{"stable", v.stable},
          {"verdict", v.verdict},
          {"residual", v.residual},
          {"cond", v.cond},
          {"witness", to_json(v.witness)},
          {"path_points", v.path.points.size()},
          {"arc_length", v.path.points.empty() ? 0.0 : v.path.points.back().s},
          {"max_trace_drift", v.path.max_trace_drift},
          {"norm_nonincreasing", v.path.norm_nonincreasing}};
}

Json to_json(const SubmersionSplit& s) {
  return {{"gB", to_json(s.gB)}, {"gF", to_json(s.gF)}, {"phi", to_json(s.phi)}};
}

Json to_json(const ScalarDecomposition& d) {
  return {{"base", d.base}, {"oneill", d.oneill}, {"trace", d.trace}, {"action", d.action}, {"total", d.total()}};
}

Json to_json(const NilsolitonFit& f) {
  return {{"c", f.c}, {"D", to_json(f.D)}, {"residual", f.residual},
          {"symmetric_derivations", f.symmetric_derivations}};
}

}  // namespace hrf
