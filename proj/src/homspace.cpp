#include "hrf/homspace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hrf {

namespace {

// Orthonormal basis of span(s) built from its projector columns, so that a
// subspace spanned by coordinate vectors gets exactly those vectors back.
Mat canonical_basis(const Mat& s) {
  if (s.cols() == 0) return s;
  const Mat g = gram_schmidt(s * s.transpose(), 1e-6);
  if (g.cols() == s.cols()) return g;
  return gram_schmidt(s, 1e-10);
}

// Coefficient columns c with (I - D D^T) a c = 0, i.e. span(a) ∩ span(d).
Mat intersect(const Mat& a, const Mat& d) {
  if (a.cols() == 0 || d.cols() == 0) return Mat(a.rows(), 0);
  const Mat proj_out = Mat::Identity(a.rows(), a.rows()) - d * d.transpose();
  const Mat c = null_space(proj_out * a, 1e-8);
  return gram_schmidt(a * c, 1e-10);
}

Mat derived_span(const LieAlgebra& a) {
  const int n = a.dim();
  if (n == 0) return Mat(0, 0);
  Mat cols(n, n * n);
  for (int i = 0; i < n; ++i) cols.middleCols(i * n, n) = a.ad(i);
  return column_space(cols, 1e-10);
}

Mat center_span(const LieAlgebra& a) {
  const int n = a.dim();
  if (n == 0) return Mat(0, 0);
  Mat rows(n * n, n);
  for (int i = 0; i < n; ++i) rows.middleRows(i * n, n) = a.ad(i);
  return null_space(rows, 1e-10);
}

std::vector<std::string> adapted_labels(const Mat& e, const std::vector<std::string>& src, int du) {
  std::vector<std::string> out;
  for (Eigen::Index j = 0; j < e.cols(); ++j) {
    int hit = -1, count = 0;
    for (Eigen::Index i = 0; i < e.rows(); ++i)
      if (std::abs(e(i, j)) > 1e-12) {
        hit = static_cast<int>(i);
        ++count;
      }
    if (count == 1 && std::abs(std::abs(e(hit, j)) - 1.0) < 1e-12) {
      out.push_back((e(hit, j) < 0 ? "-" : "") + src[static_cast<std::size_t>(hit)]);
    } else {
      out.push_back(j < du ? "U" + std::to_string(j + 1) : "A" + std::to_string(j - du + 1));
    }
  }
  return out;
}

Mat cholesky_lower(const Mat& s, const char* what) {
  Eigen::LLT<Mat> llt(symmetrize(s));
  if (llt.info() != Eigen::Success || !is_spd(s))
    throw std::invalid_argument(std::string(what) + " must be symmetric positive definite");
  return llt.matrixL();
}

}  // namespace

std::variant<WeightDecomposition, StabilityFailure> weight_split(const SemidirectData& d,
                                                                const Mat& metricV) {
  const int du = d.u.dim();
  const int dv = d.dimV;
  if (static_cast<int>(d.theta.size()) != du)
    throw std::invalid_argument("weight_split: need one theta matrix per u basis element");
  for (const Mat& t : d.theta)
    if (t.rows() != dv || t.cols() != dv)
      throw std::invalid_argument("weight_split: theta matrices must be dimV x dimV");
  const Mat mv = metricV.size() == 0 ? Mat::Identity(dv, dv) : metricV;
  if (mv.rows() != dv || mv.cols() != dv)
    throw std::invalid_argument("weight_split: metricV has wrong shape");

  WeightDecomposition wd;
  if (dv == 0) return wd;

  const Mat L = cholesky_lower(mv, "weight_split: metricV");
  const Mat Lt = L.transpose();
  const Mat Lt_inv = Lt.inverse();
  std::vector<Mat> T(static_cast<std::size_t>(du));
  double scale = 1.0;
  for (int k = 0; k < du; ++k) {
    T[static_cast<std::size_t>(k)] = Lt * d.theta[static_cast<std::size_t>(k)] * Lt_inv;
    scale = std::max(scale, max_abs(T[static_cast<std::size_t>(k)]));
  }

  std::vector<Mat> blocks{Mat::Identity(dv, dv)};
  for (int k = 0; k < du; ++k) {
    const Mat S = symmetrize(T[static_cast<std::size_t>(k)]);
    const Vec spectrum = sym_eig(S).values;
    const double radius = spectrum.cwiseAbs().maxCoeff();
    if (radius == 0.0) continue;
    std::vector<Mat> refined;
    for (const Mat& B : blocks) {
      const SymEig e = sym_eig(B.transpose() * S * B / radius);
      Eigen::Index start = 0;
      while (start < e.values.size()) {
        Eigen::Index stop = start + 1;
        while (stop < e.values.size() && e.values(stop) - e.values(stop - 1) <= kTolWeight) ++stop;
        const Mat Y = B * e.vectors.middleCols(start, stop - start);
        Mat G = canonical_basis(Y);
        if (G.cols() != Y.cols()) G = Y;
        refined.push_back(G);
        start = stop;
      }
    }
    blocks = std::move(refined);
  }

  for (const Mat& B : blocks) {
    Weight w;
    w.dim = static_cast<int>(B.cols());
    w.alpha = Vec::Zero(du);
    for (int k = 0; k < du; ++k) {
      const Mat& Tk = T[static_cast<std::size_t>(k)];
      const Mat R = B.transpose() * Tk * B;
      const double invariance = max_abs(Tk * B - B * R);
      if (invariance > kTolSkew * scale) {
        return StabilityFailure{k, invariance,
                                "weight block not invariant under theta_" + std::to_string(k + 1)};
      }
      const double a = R.trace() / w.dim;
      const double sym_res = max_abs(symmetrize(R) - a * Mat::Identity(w.dim, w.dim));
      if (sym_res > kTolSkew * scale) {
        return StabilityFailure{k, sym_res,
                                "theta_" + std::to_string(k + 1) +
                                    " is not alpha*Id + skew on a weight block (not normal)"};
      }
      w.alpha(k) = a;
      w.J.push_back(R - a * Mat::Identity(w.dim, w.dim));
    }
    w.block = Lt_inv * B;
    wd.weights.push_back(std::move(w));
  }

  const Mat derived = derived_span(d.u);
  for (const Weight& w : wd.weights)
    for (Eigen::Index c = 0; c < derived.cols(); ++c)
      if (std::abs(w.alpha.dot(derived.col(c))) > 1e-8 * scale) wd.alpha_vanishes_on_derived = false;
  return wd;
}

void ReductiveSplit::finalize() {
  const int n = algebra.dim();
  if (dh + dl + dz + dv != n || du != dh + dl + dz)
    throw std::invalid_argument("ReductiveSplit: block dimensions do not add up");
  int covered = 0;
  for (const BlockRange& b : weight_blocks) {
    if (b.offset != dmu() + covered) throw std::invalid_argument("ReductiveSplit: weight blocks not contiguous");
    covered += b.size;
  }
  if (covered != dv) throw std::invalid_argument("ReductiveSplit: weight blocks do not cover V");

  const int m = dm();
  adm_.clear();
  adh_.clear();
  for (int a = 0; a < m; ++a) adm_.push_back(algebra.ad(dh + a).block(dh, dh, m, m));
  for (int i = 0; i < dh; ++i) adh_.push_back(algebra.ad(i).block(dh, dh, m, m));
  killing_m_ = killing_form(algebra).block(dh, dh, m, m);
  trace_form_ = Vec(m);
  for (int a = 0; a < m; ++a) trace_form_(a) = algebra.ad(dh + a).trace();
  const int mu = dmu();
  v_trace_form_ = Mat::Zero(mu, mu);
  for (int a = 0; a < mu; ++a)
    for (int b = 0; b < mu; ++b)
      v_trace_form_(a, b) =
          (algebra.ad(dh + a).block(dh + mu, dh + mu, dv, dv) * algebra.ad(dh + b).block(dh + mu, dh + mu, dv, dv))
              .trace();

  const double scale = std::max(1.0, algebra.max_structure_constant());
  const double red = reductivity_residual();
  if (red > 1e-9 * scale) {
    std::ostringstream os;
    os << "ReductiveSplit: [h, m] is not contained in m (residual " << red << ")";
    throw AlgebraError(os.str());
  }
  const double inv = background_invariance_residual();
  if (inv > 1e-9 * scale) {
    std::ostringstream os;
    os << "ReductiveSplit: background is not ad(k)-invariant on m (residual " << inv << ")";
    throw AlgebraError(os.str());
  }

  b0 = 0.0;
  if (dlss > 0) {
    const LieAlgebra u = algebra.leading_subalgebra(du);
    const Mat bk = killing_form(u).block(dh, dh, dlss, dlss);
    b0 = min_eigenvalue(-bk);
  }
}

double ReductiveSplit::reductivity_residual() const {
  double worst = 0.0;
  const int m = dm();
  for (int i = 0; i < dh; ++i) {
    const Mat& a = algebra.ad(i);
    worst = std::max(worst, max_abs(a.block(0, dh, dh, m)));   // [h, m] has no h part
    worst = std::max(worst, max_abs(a.block(dh, 0, m, dh)));   // [h, h] stays in h
  }
  return worst;
}

double ReductiveSplit::background_invariance_residual() const {
  double worst = 0.0;
  const int m = dm();
  for (int i = 0; i < dh + dl; ++i) {
    const Mat a = algebra.ad(i).block(dh, dh, m, m);
    worst = std::max(worst, max_abs(a + a.transpose()));
  }
  return worst;
}

ReductiveSplit ReductiveSplit::base_split() const {
  ReductiveSplit s;
  s.algebra = algebra.leading_subalgebra(du);
  s.du = du;
  s.dh = dh;
  s.dlss = dlss;
  s.dl = dl;
  s.dz = dz;
  s.dv = 0;
  s.basis = basis.topLeftCorner(du, du);
  s.semidirect_form = true;
  s.finalize();
  return s;
}

ReductiveSplit split_u(const SemidirectData& d, const std::vector<Vec>& h_basis,
                       const SplitOptions& opts) {
  const int du = d.u.dim();
  const int dv = d.dimV;
  const Mat bu = opts.background_u.size() == 0 ? Mat::Identity(du, du) : opts.background_u;
  const Mat mv = opts.metric_v.size() == 0 ? Mat::Identity(dv, dv) : opts.metric_v;
  if (bu.rows() != du || bu.cols() != du)
    throw std::invalid_argument("split_u: background_u has wrong shape");

  const auto ws = weight_split(d, mv);
  if (const auto* f = std::get_if<StabilityFailure>(&ws)) {
    std::ostringstream os;
    os << "split_u: theta is not stable for the given metric on V: " << f->reason << " (residual "
       << f->residual << ")";
    throw AlgebraError(os.str());
  }
  const WeightDecomposition& wd = std::get<WeightDecomposition>(ws);

  // Work in background-orthonormal coordinates on u.
  const Mat Fu = du == 0 ? Mat(0, 0) : Mat(cholesky_lower(bu, "split_u: background_u").transpose().inverse());
  const LieAlgebra uw = du == 0 ? d.u : d.u.in_basis(Fu);
  const Mat derived = canonical_basis(derived_span(uw));
  const Mat center = canonical_basis(center_span(uw));

  Mat z0 = center;
  if (!wd.weights.empty() && center.cols() > 0) {
    Mat A(static_cast<Eigen::Index>(wd.weights.size()), du);
    for (std::size_t w = 0; w < wd.weights.size(); ++w) A.row(static_cast<Eigen::Index>(w)) = (wd.weights[w].alpha.transpose() * Fu);
    z0 = canonical_basis(center * null_space(A * center, 1e-8));
  }
  const Mat zhat = canonical_basis(complement_in(center, z0));
  Mat kspan(du, derived.cols() + z0.cols());
  kspan << derived, z0;
  const Mat k = canonical_basis(column_space(kspan, 1e-10));

  Mat h_src(du, static_cast<Eigen::Index>(h_basis.size()));
  for (std::size_t i = 0; i < h_basis.size(); ++i) {
    if (h_basis[i].size() != du) throw std::invalid_argument("split_u: h basis vector has wrong length");
    h_src.col(static_cast<Eigen::Index>(i)) = h_basis[i];
  }
  const Mat Lu_t = du == 0 ? Mat(0, 0) : Mat(Fu.inverse());
  const Mat h = canonical_basis(column_space(Lu_t * h_src, 1e-10));
  if (h.cols() != static_cast<Eigen::Index>(h_basis.size()))
    throw AlgebraError("split_u: h basis vectors are linearly dependent");
  if (h.cols() > 0) {
    if (max_abs(h - k * (k.transpose() * h)) > 1e-9)
      throw AlgebraError("split_u: h must lie in k = [u,u] + (center annihilated by all weights)");
    for (Eigen::Index i = 0; i < h.cols(); ++i)
      for (Eigen::Index j = i + 1; j < h.cols(); ++j) {
        const Vec br = uw.bracket(h.col(i), h.col(j));
        if ((br - h * (h.transpose() * br)).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, uw.max_structure_constant()))
          throw AlgebraError("split_u: h is not a subalgebra");
      }
  }

  const Mat l = canonical_basis(complement_in(k, h));
  const Mat lss = canonical_basis(intersect(l, derived));
  const Mat lrest = canonical_basis(complement_in(l, lss));
  if (h.cols() + l.cols() + zhat.cols() != du)
    throw AlgebraError("split_u: u is not the orthogonal sum k + z for this background (u not compact?)");

  Mat wu(du, du);
  wu << h, lss, lrest, zhat;
  const Mat Eu = du == 0 ? Mat(0, 0) : Mat(Fu * wu);
  Mat Ev(dv, dv);
  {
    Eigen::Index c = 0;
    for (const Weight& w : wd.weights) {
      Ev.middleCols(c, w.dim) = w.block;
      c += w.dim;
    }
  }
  const Mat E = block_diag({Eu, Ev});

  const LieAlgebra g = semidirect(d);
  ReductiveSplit s;
  s.algebra = g.dim() == 0 ? g : g.in_basis(E, adapted_labels(E, g.labels(), du));
  s.du = du;
  s.dh = static_cast<int>(h.cols());
  s.dlss = static_cast<int>(lss.cols());
  s.dl = static_cast<int>(l.cols());
  s.dz = static_cast<int>(zhat.cols());
  s.dv = dv;
  s.basis = E;
  int off = s.dmu();
  for (const Weight& w : wd.weights) {
    s.weight_blocks.push_back({off, w.dim});
    s.weights.push_back(du == 0 ? Vec(0) : Vec(Eu.transpose() * w.alpha));
    off += w.dim;
  }
  s.alpha_vanishes_on_derived = wd.alpha_vanishes_on_derived;
  s.semidirect_form = true;
  s.finalize();
  return s;
}

ReductiveSplit adapted_split(const LieAlgebra& g, const AdaptedDims& dims) {
  ReductiveSplit s;
  s.algebra = g;
  s.dh = dims.dh;
  s.dlss = dims.dlss;
  s.dl = dims.dl;
  s.dz = dims.dz;
  s.du = dims.dh + dims.dl + dims.dz;
  s.dv = 0;
  for (int b : dims.v_blocks) {
    if (b <= 0) throw std::invalid_argument("adapted_split: weight blocks must be nonempty");
    s.weight_blocks.push_back({s.dmu() + s.dv, b});
    s.dv += b;
  }
  if (s.du + s.dv != g.dim()) throw std::invalid_argument("adapted_split: dimensions do not match the algebra");
  if (dims.dlss > dims.dl) throw std::invalid_argument("adapted_split: l_ss larger than l");
  s.basis = Mat::Identity(g.dim(), g.dim());

  // Semidirect form: u closed, V an abelian ideal, weights act as alpha*Id + skew.
  const double scale = std::max(1.0, g.max_structure_constant());
  bool ok = true;
  const int du = s.du, n = g.dim();
  for (int i = 0; i < n && ok; ++i)
    for (int j = 0; j < n && ok; ++j) {
      const Vec br = g.ad(i).col(j);
      if (i < du && j < du && br.tail(n - du).cwiseAbs().maxCoeff() > 1e-10 * scale) ok = false;
      if ((i >= du || j >= du) && n > du && du > 0 && br.head(du).cwiseAbs().maxCoeff() > 1e-10 * scale) ok = false;
      if (i >= du && j >= du && br.cwiseAbs().maxCoeff() > 1e-10 * scale) ok = false;
    }
  if (ok) {
    const Mat derived = du > 0 ? derived_span(g.leading_subalgebra(du)) : Mat(0, 0);
    for (const BlockRange& b : s.weight_blocks) {
      Vec alpha = Vec::Zero(du);
      for (int k = 0; k < du && ok; ++k) {
        const Mat t = g.ad(k).block(s.dh + b.offset, s.dh + b.offset, b.size, b.size);
        Mat leak = g.ad(k).block(du, s.dh + b.offset, s.dv, b.size);
        leak.middleRows(b.offset - s.dmu(), b.size).setZero();
        alpha(k) = t.trace() / b.size;
        if (max_abs(leak) > 1e-10 * scale ||
            max_abs(symmetrize(t) - alpha(k) * Mat::Identity(b.size, b.size)) > kTolSkew * scale)
          ok = false;
      }
      s.weights.push_back(alpha);
      for (Eigen::Index c = 0; c < derived.cols(); ++c)
        if (std::abs(alpha.dot(derived.col(c))) > 1e-8 * scale) s.alpha_vanishes_on_derived = false;
    }
  }
  s.semidirect_form = ok;
  if (!ok) s.weights.clear();
  s.finalize();
  return s;
}

double check_theta_adapted(const ReductiveSplit& split, const Mat& P) {
  const int mu = split.dmu();
  double worst = 0.0;
  if (split.dv > 0 && mu > 0) worst = max_abs(P.block(0, mu, mu, split.dv));
  for (std::size_t a = 0; a < split.weight_blocks.size(); ++a)
    for (std::size_t b = a + 1; b < split.weight_blocks.size(); ++b) {
      const BlockRange& x = split.weight_blocks[a];
      const BlockRange& y = split.weight_blocks[b];
      worst = std::max(worst, max_abs(P.block(x.offset, y.offset, x.size, y.size)));
    }
  return worst;
}

Mat adapted_part(const ReductiveSplit& split, const Mat& P) {
  const int mu = split.dmu();
  Mat out = Mat::Zero(P.rows(), P.cols());
  out.topLeftCorner(mu, mu) = P.topLeftCorner(mu, mu);
  for (const BlockRange& b : split.weight_blocks)
    out.block(b.offset, b.offset, b.size, b.size) = P.block(b.offset, b.offset, b.size, b.size);
  return out;
}

}  // namespace hrf
