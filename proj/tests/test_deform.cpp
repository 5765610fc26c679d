#include <doctest.h>

#include "hrf/catalog.hpp"
#include "hrf/curvature.hpp"
#include "hrf/deform.hpp"

#include <random>

using namespace hrf;

namespace {

LieAlgebra heisenberg() { return LieAlgebra::from_brackets(3, {{0, 1, Vec::Unit(3, 2)}}); }

}  // namespace

TEST_CASE("submersion split round trips") {
  std::mt19937_64 rng(4);
  const ReductiveSplit s = build_split(catalog("E5_two_weights"));
  for (int rep = 0; rep < 5; ++rep) {
    const Mat P = random_metric(s, rng, false, 6.0);
    const SubmersionSplit ss = submersion_split(s, P);
    CHECK(ss.gB.rows() == s.dmu());
    CHECK(ss.gF.rows() == s.dv);
    CHECK(max_abs(assemble(ss) - P) < 1e-12 * max_abs(P));
    CHECK(max_abs(retract_horizontal(ss, 0.0) - P) < 1e-12 * max_abs(P));
    const Mat r1 = retract_horizontal(ss, 1.0);
    CHECK(max_abs(r1.topRightCorner(s.dmu(), s.dv)) < 1e-12);
    CHECK(phi_equivariance_residual(s, ss.phi) < 1e-12);
  }
  const SubmersionSplit ss = submersion_split(s, Mat::Identity(10, 10));
  CHECK_THROWS_AS(retract_horizontal(ss, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(retract_horizontal(ss, -0.1), std::invalid_argument);
}

TEST_CASE("scalar decomposition reproduces the unimodular scalar curvature") {
  std::mt19937_64 rng(8);
  for (const std::string& name : {"E1_su2xR_R3", "E4_preflat_E2", "E5_two_weights"}) {
    CAPTURE(name);
    const ReductiveSplit s = build_split(catalog(name));
    for (int rep = 0; rep < 5; ++rep) {
      const Mat P = random_metric(s, rng, false, 6.0);
      const ScalarDecomposition d = scalar_decomposition(s, P);
      const double ref = ricci(s, P).scal_star;
      CHECK(d.total() == doctest::Approx(ref).epsilon(1e-10));
      CHECK(d.oneill >= 0.0);
      CHECK(d.action >= 0.0);
    }
  }
}

TEST_CASE("horizontal retraction: O'Neill term is quadratic and R* increases") {
  std::mt19937_64 rng(12);
  const ReductiveSplit s = build_split(catalog("E1_su2xR_R3"));
  for (int rep = 0; rep < 5; ++rep) {
    const SubmersionSplit ss = submersion_split(s, random_metric(s, rng, false, 4.0));
    REQUIRE(max_abs(ss.phi) > 1e-3);
    const double on0 = scalar_decomposition(s, retract_horizontal(ss, 0.0)).oneill;
    const double on1 = scalar_decomposition(s, retract_horizontal(ss, 1.0)).oneill;
    double prev = -1e300;
    for (int k = 0; k <= 10; ++k) {
      const double t = 0.1 * k;
      const ScalarDecomposition d = scalar_decomposition(s, retract_horizontal(ss, t));
      const double quad = on1 + (on0 - on1) * (1 - t) * (1 - t);
      CHECK(std::abs(d.oneill - quad) < 1e-10 * std::max(1.0, on0));
      CHECK(d.total() >= prev - 1e-12);
      prev = d.total();
    }
  }
}

TEST_CASE("heisenberg nilsoliton") {
  const NilsolitonFit f = nilsoliton_fit(heisenberg(), Mat::Identity(3, 3));
  CHECK(f.c == doctest::Approx(-1.5));
  Mat D = Mat::Zero(3, 3);
  D.diagonal() << 1, 1, 2;
  CHECK(max_abs(f.D - D) < 1e-10);
  CHECK(f.residual < 1e-10);

  Mat g = Mat::Identity(3, 3);
  g(0, 0) = 2.0;
  g(2, 2) = 0.3;
  CHECK(nilsoliton_fit(heisenberg(), g).residual < 1e-10);  // every metric on h3 is a nilsoliton

  const NilsolitonFit a = nilsoliton_fit(LieAlgebra::abelian(2), Mat::Identity(2, 2));
  CHECK(std::abs(a.c) < 1e-12);
  CHECK(a.residual < 1e-12);
  CHECK_THROWS_AS(nilsoliton_fit(su2(), Mat::Identity(3, 3)), std::invalid_argument);
}

TEST_CASE("transpose derivation condition") {
  Mat d = Mat::Zero(3, 3);
  d.diagonal() << 1, 1, 2;
  CHECK(transpose_derivation_residual({d}, heisenberg(), Mat::Identity(3, 3)) < 1e-12);
  Mat e31 = Mat::Zero(3, 3);
  e31(2, 0) = 1.0;  // X -> Z is a derivation; its transpose Z -> X is not
  CHECK(transpose_derivation_residual({e31}, heisenberg(), Mat::Identity(3, 3)) > 0.5);
  Mat bad = Mat::Zero(3, 3);
  bad(0, 0) = 1.0;
  CHECK_THROWS_AS(transpose_derivation_residual({bad}, heisenberg(), Mat::Identity(3, 3)), std::invalid_argument);
}

TEST_CASE("flow on the invariant set keeps it invariant") {
  Mat d = Mat::Zero(3, 3);
  d.diagonal() << 1, 1, 2;
  const LieAlgebra ext = abelian_extension(heisenberg(), {d});
  CHECK(ext.dim() == 4);
  CHECK(ext.jacobi_residual() < 1e-14);
  Mat g0 = Mat::Identity(4, 4);
  g0(0, 0) = 3.0;
  g0(3, 3) = 0.5;
  FlowControls c;
  c.t_max = 1.0;
  const InvariantSetReport r = track_invariant_set(heisenberg(), {d}, g0, c);
  CHECK(r.samples.size() > 5);
  CHECK(r.worst_mixed < 1e-10);
  CHECK(r.worst_nilsoliton < 1e-9);
  CHECK(r.worst_transpose < 1e-9);
}
