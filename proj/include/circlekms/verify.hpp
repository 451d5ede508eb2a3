#pragma once

// Exact verification runs over the atomic measures of every class: KMS
// identity on random rational pairs, conformality on sampled bisections,
// branch scaling, and perturbed-weight controls that must fail.

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "circlekms/groupoid.hpp"

namespace circlekms {

/// Random element with `entries` arrows; half of them start among the first
/// 64 atoms, where the weights are largest.
AlgebraElement<Rational> random_element(const GroupoidTruncation& t, std::mt19937_64& rng, std::size_t entries);

/// Pair (f, g) where g also carries random values on some transposed arrows
/// of f, so omega(f g) is usually nonzero.
std::pair<AlgebraElement<Rational>, AlgebraElement<Rational>> random_pair(const GroupoidTruncation& t,
                                                                          std::mt19937_64& rng);

/// Copy of the measure with one atom's weight doubled.
AtomicMeasure perturb_weight(const AtomicMeasure& m, std::size_t atom);

struct ClassVerification {
  std::size_t class_index = 0;
  std::size_t atoms = 0;

  std::size_t kms_pairs = 0;
  std::size_t kms_nonzero = 0;
  std::size_t kms_trivial = 0;  // pairs with omega(f g) = 0
  Rational kms_max_residual;

  std::size_t bisections = 0;
  std::size_t bisection_arrows = 0;
  std::size_t skipped = 0;
  std::size_t conformal_nonzero = 0;
  Rational conformal_max_residual;

  AtomicScalingReport scaling;

  Rational control_kms_residual;
  Rational control_conformal_residual;

  bool kms_exact_zero() const { return kms_nonzero == 0; }
  bool conformal_exact_zero() const { return conformal_nonzero == 0; }
  bool scaling_exact_zero() const { return scaling.max_residual == 0; }
  bool control_detected() const { return control_kms_residual != 0 && control_conformal_residual != 0; }
};

struct VerificationReport {
  Rational q;
  std::size_t depth = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::vector<ClassVerification> classes;

  bool all_exact_zero() const;
};

/// One class at a time: `samples` KMS pairs, `samples` bisections and
/// `samples` scaling sets on the depth-`depth` measure at q.
ClassVerification verify_class(const CircleMapPL& map, const CriticalCatalog& catalog, std::size_t class_index,
                               const Rational& q, std::size_t depth, const EntropyResult& entropy,
                               std::size_t samples, std::uint64_t seed, const Limits& limits = {});

VerificationReport verify_all(const CircleMapPL& map, const CriticalCatalog& catalog, const Rational& q,
                              std::size_t depth, const EntropyResult& entropy, std::size_t samples,
                              std::uint64_t seed, const Limits& limits = {});

}  // namespace circlekms
