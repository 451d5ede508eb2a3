#pragma once

// KMS structure of the gauge action, assembled from the catalog, the
// entropy and the simplicity criterion.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "circlekms/entropy.hpp"
#include "circlekms/orbits.hpp"

namespace circlekms {

struct SimplicityResult {
  enum class Status { simple, non_simple, undetermined };
  Status status = Status::undetermined;
  /// Non-critical fixed point x with phi^{-1}(x) \ {x} critical.
  std::optional<CirclePoint> witness;
  std::string reason;
};

std::string to_string(SimplicityResult::Status s);

/// Simple iff exact and not (degree +-1 with a non-critical fixed point whose
/// other preimages are all critical). Undetermined when exactness is neither
/// assumed nor confirmed by the probe.
SimplicityResult simplicity_check(const CircleMapPL& map, std::size_t depth);

/// #[c] over classes of final critical points, sorted. Empty: no ground states.
std::vector<std::size_t> ground_state_algebra(const CriticalCatalog& catalog);
std::vector<std::size_t> ground_state_algebra(const CircleMapPL& map, std::size_t depth);

struct Regimes {
  std::string below;
  std::string at_h;
  std::string above;
};

struct FactorLabels {
  std::string above_h = "type I_∞";
  std::string at_h = "type III_{e^{−h}}";
};

struct KmsReport {
  EntropyResult entropy;
  CriticalCatalog catalog;
  std::size_t N = 0;
  Regimes regimes;
  /// One line, e.g. "unique KMS state at beta = log(24) only".
  std::string summary;
  std::vector<std::size_t> ground_state_dims;
  SimplicityResult simplicity;
  /// "none", "all-Borel-probability-measures" or "undetermined".
  std::string zero_kms;
  FactorLabels factor_labels;
  ExactnessVerdict exactness = ExactnessVerdict::inconclusive;
  std::size_t certificates_depth = 0;
  bool assume_exact_echo = false;
  std::uint64_t seed = kDefaultSeed;
};

/// Throws ValidationError for locally injective maps.
KmsReport classify(const CircleMapPL& map, std::size_t depth, std::size_t n_max = 6,
                   std::uint64_t seed = kDefaultSeed, const Limits& limits = {});

}  // namespace circlekms
