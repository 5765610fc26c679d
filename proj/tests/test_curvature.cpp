#include <doctest.h>

#include "hrf/catalog.hpp"
#include "hrf/curvature.hpp"
#include "oracles.hpp"

#include <random>

using namespace hrf;

namespace {

Mat random_orthogonal(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  return Eigen::HouseholderQR<Mat>(a).householderQ();
}

}  // namespace

TEST_CASE("ricci matches the Koszul oracle on every catalog entry") {
  std::mt19937_64 rng(11);
  for (const std::string& name : catalog_names()) {
    CAPTURE(name);
    const ReductiveSplit s = build_split(catalog(name));
    for (bool adapted : {true, false})
      for (int rep = 0; rep < 5; ++rep) {
        const Mat P = random_metric(s, rng, adapted, 5.0);
        const CurvatureReport r = ricci(s, P);
        const Mat ref = oracle::koszul_ricci(s.algebra, P);
        CHECK(max_abs(r.ric - ref) < 1e-9 * std::max(1.0, max_abs(ref)));
        CHECK(r.scal == doctest::Approx(oracle::scalar(ref, P)).epsilon(1e-9));
        CHECK(r.scal == doctest::Approx(r.scal_frame_sum).epsilon(1e-10));
        CHECK(r.scal_star == doctest::Approx(r.scal + r.H.dot(P * r.H)).epsilon(1e-10));
        CHECK(max_abs(r.ric_star - r.ric - r.h_term) < 1e-10 * std::max(1.0, max_abs(r.ric)));
      }
  }
}

TEST_CASE("heisenberg ricci at the standard metric") {
  const ReductiveSplit s = build_split(catalog("E3_heisenberg"));
  const CurvatureReport r = ricci(s, Mat::Identity(3, 3));
  Mat expect = Mat::Zero(3, 3);
  expect.diagonal() << -0.5, -0.5, 0.5;
  CHECK(max_abs(r.ric - expect) < 1e-14);
  CHECK(r.scal == doctest::Approx(-0.5));
  CHECK(r.H.norm() < 1e-14);
}

TEST_CASE("round sphere is Einstein with constant one") {
  SemidirectData d;
  d.u = su2();
  d.theta.assign(3, Mat(0, 0));
  const ReductiveSplit s = split_u(d, {Vec::Unit(3, 2)});
  CHECK(max_abs(ricci(s, Mat::Identity(2, 2)).ric - Mat::Identity(2, 2)) < 1e-14);
  CHECK(max_abs(ricci(s, 3.0 * Mat::Identity(2, 2)).ric - Mat::Identity(2, 2)) < 1e-14);
}

TEST_CASE("bi-invariant su(2) has ric = b0/4 g") {
  const ReductiveSplit s = build_split(catalog("E2_su2_biinv"));
  CHECK(max_abs(ricci(s, Mat::Identity(3, 3)).ric - 0.5 * Mat::Identity(3, 3)) < 1e-14);
}

TEST_CASE("ricci is scale invariant and frame independent") {
  std::mt19937_64 rng(5);
  for (const std::string& name : {"E1_su2xR_R3", "E4_preflat_E2", "E5_two_weights"}) {
    CAPTURE(name);
    const ReductiveSplit s = build_split(catalog(name));
    const Mat P = random_metric(s, rng, false, 8.0);
    const CurvatureReport r = ricci(s, P);
    const CurvatureReport r2 = ricci(s, 7.5 * P);
    CHECK(max_abs(r.ric - r2.ric) < 1e-11 * std::max(1.0, max_abs(r.ric)));
    CHECK(r2.scal == doctest::Approx(r.scal / 7.5).epsilon(1e-11));
    const Mat F = orthonormal_frame(P) * random_orthogonal(s.dm(), rng);
    const CurvatureReport r3 = ricci(s, P, F);
    CHECK(max_abs(r.ric - r3.ric) < 1e-11 * std::max(1.0, max_abs(r.ric)));
    CHECK(r3.scal_frame_sum == doctest::Approx(r.scal_frame_sum).epsilon(1e-11));
    CHECK(g_norm2(P, r.ric) == doctest::Approx(r.ric_norm2).epsilon(1e-12));
  }
}

TEST_CASE("block formulas agree with the general evaluation") {
  std::mt19937_64 rng(3);
  for (const std::string& name : {"E1_su2xR_R3", "E4_preflat_E2", "E5_two_weights", "E2_su2_biinv"}) {
    CAPTURE(name);
    const ReductiveSplit s = build_split(catalog(name));
    for (int rep = 0; rep < 10; ++rep) {
      const Mat P = random_metric(s, rng, true, 10.0);
      for (const VBlockReport& b : ricci_V_block(s, P)) {
        CHECK(b.deviation < 1e-10 * std::max(1.0, b.term_scale));
        CHECK(b.f(0) == doctest::Approx(b.general.trace()).epsilon(1e-10));
      }
      const UBlockReport u = ricci_U_block(s, P);
      CHECK(u.deviation < 1e-10);
      CHECK(u.l_deviation < 1e-10);
      if (s.dl > 0) CHECK(u.ric_star_top >= u.lower_bound_top - 1e-10);
    }
  }
}

TEST_CASE("eigen ratio error vanishes on V-isotropic metrics") {
  const ReductiveSplit s = build_split(catalog("E1_su2xR_R3"));
  Mat P = Mat::Identity(7, 7);
  P.bottomRightCorner(3, 3) *= 2.5;
  CHECK(eigen_ratio_error(s, P, Vec::Unit(7, 0)) < 1e-14);
  P(6, 6) = 4.0;
  const double e = eigen_ratio_error(s, P, Vec::Unit(7, 0));
  CHECK(e > 0.0);
  const Mat form = eigen_ratio_form(s, P, s.dl);
  CHECK(form(0, 0) == doctest::Approx(e));
}

TEST_CASE("invariant metrics are validated") {
  const ReductiveSplit e1 = build_split(catalog("E1_su2xR_R3"));
  CHECK_NOTHROW(InvariantMetric(e1, Mat::Identity(7, 7)));
  CHECK_THROWS_AS(InvariantMetric(e1, -Mat::Identity(7, 7)), std::invalid_argument);
  Mat asym = Mat::Identity(7, 7);
  asym(0, 1) = 0.3;
  CHECK_THROWS_AS(InvariantMetric(e1, asym), std::invalid_argument);
  CHECK_THROWS_AS(InvariantMetric(e1, Mat::Identity(6, 6)), std::invalid_argument);

  SemidirectData d;
  d.u = su2();
  d.theta.assign(3, Mat(0, 0));
  const ReductiveSplit sphere = split_u(d, {Vec::Unit(3, 2)});
  Mat squashed = Mat::Identity(2, 2);
  squashed(1, 1) = 2.0;
  CHECK(equivariance_residual(sphere, squashed) > 0.5);
  CHECK_THROWS_AS(InvariantMetric(sphere, squashed), std::invalid_argument);
}
