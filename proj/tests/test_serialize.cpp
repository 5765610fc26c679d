#include <doctest.h>

#include "hrf/catalog.hpp"
#include "hrf/serialize.hpp"

#include <cstdlib>

using namespace hrf;

TEST_CASE("matrices round trip bit for bit") {
  Mat m(2, 3);
  m << 1.0 / 3.0, -2.5e-300, 7.0, 0.1, 1e308, -0.0;
  const Mat back = mat_from_json(Json::parse(to_json(m).dump()));
  CHECK(back == m);
  Vec v(3);
  v << 0.1, 0.2, 0.3;
  CHECK(vec_from_json(Json::parse(to_json(v).dump())) == v);
  CHECK(std::strtod(fmt(0.1).c_str(), nullptr) == 0.1);
  CHECK(std::strtod(fmt(1.0 / 3.0).c_str(), nullptr) == 1.0 / 3.0);
}

TEST_CASE("malformed matrices are rejected") {
  CHECK_THROWS_AS(mat_from_json(Json::parse("[[1,2],[3]]")), std::invalid_argument);
  CHECK_THROWS_AS(mat_from_json(Json::parse("[[1,\"x\"]]")), std::invalid_argument);
  CHECK_THROWS_AS(mat_from_json(Json::parse("{\"a\":1}")), std::invalid_argument);
  CHECK_THROWS_AS(vec_from_json(Json::parse("[1,null]")), std::invalid_argument);
}

TEST_CASE("split json lists dimensions and index sets") {
  const Json j = to_json(build_split(catalog("E5_two_weights")));
  CHECK(j["dims"]["l_ss"] == 3);
  CHECK(j["dims"]["V"] == 6);
  CHECK(j["index_sets"]["z_hat"] == Json::array({3}));
  CHECK(j["weight_blocks"].size() == 2);
  CHECK(j["weight_blocks"][1]["indices"] == Json::array({7, 8, 9}));
  CHECK(j["b0"].get<double>() == doctest::Approx(2.0));
}

TEST_CASE("algebra json lists only nonzero brackets") {
  const Json j = to_json(su2());
  CHECK(j["dim"] == 3);
  CHECK(j["brackets"].size() == 3);
  CHECK(to_json(LieAlgebra::abelian(4))["brackets"].empty());
}
