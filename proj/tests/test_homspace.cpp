#include <doctest.h>

#include "hrf/catalog.hpp"
#include "hrf/homspace.hpp"

using namespace hrf;

TEST_CASE("E1 has a single weight with alpha(Z) = lambda") {
  const double lambda = 1.5;
  const CatalogEntry e = catalog("E1_su2xR_R3", {lambda, 1.0, 2.0});
  const auto w = weight_split(e.data, Mat::Identity(3, 3));
  REQUIRE(std::holds_alternative<WeightDecomposition>(w));
  const auto& wd = std::get<WeightDecomposition>(w);
  REQUIRE(wd.weights.size() == 1);
  CHECK(wd.weights[0].dim == 3);
  CHECK(wd.weights[0].alpha(3) == doctest::Approx(lambda));
  CHECK(wd.weights[0].alpha.head(3).norm() < 1e-12);
  CHECK(wd.alpha_vanishes_on_derived);
  for (const Mat& J : wd.weights[0].J) CHECK(max_abs(J + J.transpose()) < 1e-12);

  const ReductiveSplit s = build_split(e);
  CHECK(s.dh == 0);
  CHECK(s.dlss == 3);
  CHECK(s.dl == 3);
  CHECK(s.dz == 1);
  CHECK(s.dv == 3);
  CHECK(s.b0 == doctest::Approx(2.0));
  CHECK(s.semidirect_form);
  CHECK(s.reductivity_residual() < 1e-12);
  CHECK(s.background_invariance_residual() < 1e-12);
}

TEST_CASE("a Jordan block is not stable") {
  SemidirectData d;
  d.u = LieAlgebra::abelian(1);
  d.dimV = 2;
  Mat j(2, 2);
  j << 1, 1, 0, 1;
  d.theta = {j};
  const auto w = weight_split(d, Mat::Identity(2, 2));
  REQUIRE(std::holds_alternative<StabilityFailure>(w));
  CHECK(std::get<StabilityFailure>(w).operator_index == 0);
  CHECK(std::get<StabilityFailure>(w).residual > 0.1);
  CHECK_THROWS_AS(split_u(d, {}), AlgebraError);
}

TEST_CASE("E5 splits into two weight blocks") {
  const ReductiveSplit s = build_split(catalog("E5_two_weights"));
  REQUIRE(s.weight_blocks.size() == 2);
  CHECK(s.weight_blocks[0].size == 3);
  CHECK(s.weight_blocks[1].size == 3);
  CHECK(s.weight_blocks[0].offset == s.v_offset());
  std::vector<double> zs;
  for (const Vec& a : s.weights) zs.push_back(std::abs(a(3)));
  std::sort(zs.begin(), zs.end());
  CHECK(zs[0] == doctest::Approx(1.0));
  CHECK(zs[1] == doctest::Approx(2.0));
}

TEST_CASE("round sphere as SU(2)/U(1)") {
  SemidirectData d;
  d.u = su2();
  d.theta.assign(3, Mat(0, 0));
  const ReductiveSplit s = split_u(d, {Vec::Unit(3, 2)});
  CHECK(s.dh == 1);
  CHECK(s.dm() == 2);
  CHECK(s.dl == 2);
  CHECK(s.reductivity_residual() < 1e-12);
  CHECK(max_abs(s.adh(0) + s.adh(0).transpose()) < 1e-12);
}

TEST_CASE("isotropy outside k is rejected") {
  const CatalogEntry e = catalog("E1_su2xR_R3");
  CHECK_THROWS_AS(split_u(e.data, {Vec::Unit(4, 3)}), AlgebraError);
  // Not a subalgebra.
  SemidirectData d;
  d.u = su2();
  d.theta.assign(3, Mat(0, 0));
  CHECK_THROWS_AS(split_u(d, {Vec::Unit(3, 0), Vec::Unit(3, 1)}), AlgebraError);
}

TEST_CASE("adapted part zeroes the couplings") {
  const ReductiveSplit s = build_split(catalog("E5_two_weights"));
  const Mat ones = Mat::Ones(s.dm(), s.dm());
  CHECK(check_theta_adapted(s, ones) == doctest::Approx(1.0));
  const Mat a = adapted_part(s, ones);
  CHECK(check_theta_adapted(s, a) == 0.0);
  CHECK(a.topLeftCorner(s.dmu(), s.dmu()) == ones.topLeftCorner(s.dmu(), s.dmu()));
  CHECK(a.block(4, 7, 3, 3).isZero());
  CHECK(a.block(4, 4, 3, 3) == Mat::Ones(3, 3));
}
