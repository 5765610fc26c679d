#pragma once

// JSON forms of the main data types.  Matrices are arrays of rows; doubles
// are written with round-trip precision (17 significant digits).

#include "hrf/deform.hpp"
#include "hrf/stability.hpp"

#include <json.hpp>

#include <string>

namespace hrf {

using Json = nlohmann::ordered_json;

Json to_json(const Mat& m);
Json to_json(const Vec& v);
/// Accepts an array of rows (or a flat array for vectors); throws
/// std::invalid_argument on ragged or non-numeric input.
Mat mat_from_json(const Json& j);
Vec vec_from_json(const Json& j);

Json to_json(const LieAlgebra& a);
Json to_json(const ReductiveSplit& s);
Json to_json(const WeightDecomposition& w);
Json to_json(const StabilityFailure& f);
Json to_json(const CurvatureReport& r);
Json to_json(const FlowControls& c);
Json to_json(const MonotonicityReport& r);
Json to_json(const ScalarEvolutionReport& r);
Json to_json(const ExtinctionReport& r);
Json to_json(const BlowdownReport& r);
Json to_json(const StabilityVerdict& v);
Json to_json(const SubmersionSplit& s);
Json to_json(const ScalarDecomposition& d);
Json to_json(const NilsolitonFit& f);

/// Fixed "%.17g" formatting used by every CSV writer.
std::string fmt(double x);

}  // namespace hrf
