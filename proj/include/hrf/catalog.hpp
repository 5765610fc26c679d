#pragma once

// Built-in example spaces and seeded random metrics.

#include "hrf/homspace.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace hrf {

struct CatalogParams {
  double lambda = 1.0;   // E1: theta(Z) = lambda Id
  double lambda1 = 1.0;  // E5: first block
  double lambda2 = 2.0;  // E5: second block
};

struct CatalogEntry {
  std::string name;
  std::string description;
  SemidirectData data;
  std::vector<Vec> h_basis;
  /// Set when V carries a nonabelian nilpotent bracket (outside the
  /// semidirect family); the split is then built with adapted_split.
  std::optional<LieAlgebra> nilpotent;
  /// Named initial metrics in adapted coordinates.
  std::map<std::string, Mat> metrics;
};

std::vector<std::string> catalog_names();

/// Throws std::invalid_argument for an unknown name.
CatalogEntry catalog(const std::string& name, const CatalogParams& params = {});

ReductiveSplit build_split(const CatalogEntry& e);

/// so(3) generators acting by cross product: L_i v = e_i x v.
Mat cross_generator(int i);
LieAlgebra su2();

/// Symmetric forms on m commuting with ad(h), optionally restricted to the
/// theta-adapted block pattern.  Columns are vectorized (column-major) m x m
/// matrices, orthonormal.
Mat invariant_symmetric_forms(const ReductiveSplit& split, bool adapted);

/// P = exp(S) with S a random invariant symmetric form scaled to spectral
/// radius at most log(kappa); condition number at most kappa^2.
Mat random_metric(const ReductiveSplit& split, std::mt19937_64& rng, bool adapted,
                  double kappa = 10.0);

}  // namespace hrf
