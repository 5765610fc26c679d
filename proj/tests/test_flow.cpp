#include <doctest.h>

#include "hrf/catalog.hpp"
#include "hrf/flow.hpp"

#include <random>

using namespace hrf;

TEST_CASE("bi-invariant su(2) shrinks linearly to extinction at t = 1") {
  const ReductiveSplit s = build_split(catalog("E2_su2_biinv"));
  FlowControls c;
  c.t_max = 2.0;
  c.rtol = 1e-8;
  const FlowTrajectory tr = integrate(s, Mat::Identity(3, 3), c);
  REQUIRE(tr.extinction.has_value());
  CHECK(tr.stop_reason == "extinction");
  CHECK(tr.extinction->t_est == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(tr.extinction->hi - tr.extinction->lo <= c.bracket_tol * 1.0001);
  for (const FlowSample& smp : tr.samples)
    CHECK(max_abs(smp.P - (1.0 - smp.t) * Mat::Identity(3, 3)) < 1e-7);
  for (double t : {0.1, 0.37, 0.8}) CHECK(max_abs(tr.metric_at(t) - (1.0 - t) * Mat::Identity(3, 3)) < 1e-7);
}

TEST_CASE("round sphere becomes extinct at t = 1/2") {
  SemidirectData d;
  d.u = su2();
  d.theta.assign(3, Mat(0, 0));
  const ReductiveSplit s = split_u(d, {Vec::Unit(3, 2)});
  FlowControls c;
  c.t_max = 1.0;
  const FlowTrajectory tr = integrate(s, Mat::Identity(2, 2), c);
  REQUIRE(tr.extinction.has_value());
  CHECK(tr.extinction->t_est == doctest::Approx(0.5).epsilon(1e-6));
  for (const FlowSample& smp : tr.samples) CHECK(smp.equiv_residual < 1e-12);
}

TEST_CASE("flat metric on E4 is stationary") {
  const ReductiveSplit s = build_split(catalog("E4_preflat_E2"));
  CHECK(max_abs(flow_rhs(s, Mat::Identity(3, 3), FlowKind::ricci)) < 1e-14);
  FlowControls c;
  c.t_max = 10.0;
  const FlowTrajectory tr = integrate(s, Mat::Identity(3, 3), c);
  CHECK(tr.stop_reason == "t_max");
  CHECK(max_abs(tr.samples.back().P - Mat::Identity(3, 3)) < 1e-12);
}

TEST_CASE("theta-adapted metrics stay adapted without projection") {
  std::mt19937_64 rng(21);
  for (const std::string& name : {"E1_su2xR_R3", "E5_two_weights"})
    for (FlowKind k : {FlowKind::ricci, FlowKind::unimodular}) {
      CAPTURE(name);
      const ReductiveSplit s = build_split(catalog(name));
      FlowControls c;
      c.kind = k;
      c.t_max = 0.5;
      const FlowTrajectory tr = integrate(s, random_metric(s, rng, true, 3.0), c);
      CHECK(tr.theta_adapted);
      for (const FlowSample& smp : tr.samples) CHECK(smp.adapted_residual <= 1e-8);
    }
}

TEST_CASE("scalar curvature evolves by 2|Ric|^2") {
  const ReductiveSplit s = build_split(catalog("E1_su2xR_R3"));
  FlowControls c;
  c.t_max = 0.4;
  c.rtol = 1e-10;
  c.h_max = 2e-3;
  for (FlowKind k : {FlowKind::ricci, FlowKind::unimodular}) {
    c.kind = k;
    const FlowTrajectory tr = integrate(s, catalog("E1_su2xR_R3").metrics.at("squashed_V"), c);
    const ScalarEvolutionReport r = verify_scalar_evolution(tr, 0.05);
    CHECK(r.checked > 20);
    CHECK(r.max_rel_deviation < 1e-3);
  }
}

TEST_CASE("ricci and unimodular flows coincide on unimodular algebras") {
  const ReductiveSplit s = build_split(catalog("E4_preflat_E2"));
  const Mat g0 = catalog("E4_preflat_E2").metrics.at("squashed_V");
  CHECK(max_abs(flow_rhs(s, g0, FlowKind::ricci) - flow_rhs(s, g0, FlowKind::unimodular)) < 1e-14);
  const ReductiveSplit e1 = build_split(catalog("E1_su2xR_R3"));
  const Mat p = Mat::Identity(7, 7);
  CHECK(max_abs(flow_rhs(e1, p, FlowKind::ricci) - flow_rhs(e1, p, FlowKind::unimodular)) > 0.1);
}

TEST_CASE("flow controls are validated") {
  FlowControls c;
  CHECK_NOTHROW(c.validate());
  c.t_max = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.rtol = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.h_min = 1.0;
  c.h_max = 0.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK_THROWS_AS(flow_kind_from_string("mean"), std::invalid_argument);
  CHECK(flow_kind_from_string(to_string(FlowKind::unimodular)) == FlowKind::unimodular);
}

TEST_CASE("monitor channels on E1 unimodular flow") {
  const CatalogEntry e = catalog("E1_su2xR_R3");
  const ReductiveSplit s = build_split(e);
  FlowControls c;
  c.kind = FlowKind::unimodular;
  c.t_max = 5.0;
  c.rtol = 1e-9;
  c.h_max = 0.01;
  const FlowTrajectory tr = integrate(s, e.metrics.at("squashed_V"), c);
  const MonotonicityReport m = verify_monotonicity(tr, s);
  CHECK(m.applicable);
  for (const ChannelVerdict& ch : m.channels) {
    CAPTURE(ch.name);
    CHECK(ch.ok);
  }
  const ExtinctionReport x = extinction_analysis(tr, s);
  CHECK(x.hypothesis_ok);
  CHECK(x.extinct);
  CHECK(x.barrier_holds);
  CHECK(x.extinct_before_root);
  CHECK(x.b0 == doctest::Approx(2.0));

  c.kind = FlowKind::ricci;
  c.t_max = 0.5;
  const MonotonicityReport r = verify_monotonicity(integrate(s, e.metrics.at("squashed_V"), c), s);
  CHECK_FALSE(r.applicable);
}

TEST_CASE("blowdown rejects out of range scales") {
  const CatalogEntry e = catalog("E4_preflat_E2");
  const ReductiveSplit s = build_split(e);
  FlowControls c;
  c.t_max = 4.0;
  const FlowTrajectory tr = integrate(s, e.metrics.at("squashed_V"), c);
  CHECK_THROWS_AS(blowdown(tr, s, {1, 2, 8}), std::invalid_argument);
  const BlowdownReport b = blowdown(tr, s, {1, 2, 4});
  CHECK(b.points.size() == 3);
  CHECK(b.ric_norm_decreasing);
}

TEST_CASE("integrator refuses non-SPD initial data") {
  const ReductiveSplit s = build_split(catalog("E2_su2_biinv"));
  CHECK_THROWS(integrate(s, -Mat::Identity(3, 3), FlowControls{}));
}
