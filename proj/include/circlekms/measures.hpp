#pragma once

// Conformal measures. Atomic measures on a restricted orbit are exact in the
// parameter q = e^{-beta}; the non-atomic measure at beta = h is a CDF
// approximation unless the map is uniformly piecewise linear.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "circlekms/entropy.hpp"
#include "circlekms/orbits.hpp"

namespace circlekms {

struct InverseTemperature {
  Rational q;
  double beta_decimal = 0.0;

  /// Throws ValidationError unless 0 < q < 1.
  static InverseTemperature from_q(const Rational& q);
};

struct PartitionFunction {
  CirclePoint base;
  /// n_k = #phi^{-k}(base), k = 0..K.
  std::vector<Integer> counts;
  /// sum n_k q^k over k <= K.
  Rational value;
  /// Rigorous bound on sum_{k > K} n_k q^k; absent when no available bound
  /// converges at this q.
  std::optional<Rational> tail_bound;
  /// "anchored", "recursion" or "none".
  std::string tail_method = "none";
};

/// Upper bound on sum_{k > K} n_k(y) q^k for any y, given exact n_0..n_K.
/// Minimum of an anchored bound n_{k+j} <= n_k P_j and a lap/variation
/// recursion; nullopt when neither converges.
struct TailEstimate {
  std::optional<Rational> bound;
  std::string method = "none";
};
TailEstimate preimage_tail_bound(const CircleMapPL& map, const std::vector<Integer>& counts, const Rational& q,
                                 const Limits& limits = {});

/// Requires catalog.critical[index] to be terminal. Throws DivergentError
/// when q >= e^{-h} is certified and UndeterminedError when the entropy
/// information cannot place q.
PartitionFunction partition_function(const CircleMapPL& map, const CriticalCatalog& catalog, std::size_t index,
                                     const InverseTemperature& beta, std::size_t K, const EntropyResult& entropy,
                                     const Limits& limits = {});

struct WeightedAtom {
  OrbitAtom atom;
  Rational weight;
};

struct ClassWeight {
  std::size_t terminal = 0;
  CirclePoint point;
  /// m - n for the witness phi^n(base) = phi^m(c'), i.e. the level of c'.
  long t_exponent = 0;
  /// Share of the truncated mass carried by the preimage tree of c'.
  Rational alpha_weight;
  PartitionFunction partition;
};

struct AtomicMeasure {
  std::size_t class_index = 0;
  Rational q;
  std::size_t depth = 0;
  std::vector<WeightedAtom> atoms;
  /// sum over terminal c' of q^{t(c')} Z_{c'}(K).
  Rational normalization;
  /// Bound on the mass the truncation misses; absent if unbounded.
  std::optional<Rational> tail_bound;
  std::vector<ClassWeight> class_weights;

  /// Weight of an atom, or nullopt when the point is not in the truncation.
  std::optional<Rational> weight_of(const CirclePoint& p) const;
  std::optional<std::size_t> index_of(const CirclePoint& p) const;
  Rational total_weight() const;

  std::unordered_map<CirclePoint, std::size_t, CirclePointHash> lookup;
};

/// mu(v) = q^{level(v)} / normalization over the atoms of the class up to
/// preimage depth K.
AtomicMeasure class_measure(const CircleMapPL& map, const CriticalCatalog& catalog, std::size_t class_index,
                            const InverseTemperature& beta, std::size_t K, const EntropyResult& entropy,
                            const Limits& limits = {});

/// Same weights with a different q and no entropy check; used to build
/// deliberately inconsistent controls and for q-sweeps in tests.
AtomicMeasure reweight(const AtomicMeasure& m, const Rational& q);

struct DistributionApprox {
  /// grid[i] = i / resolution.
  std::vector<double> grid;
  std::vector<double> cdf;
  double scale_factor = 1.0;
  double max_scaling_residual = 0.0;
  std::size_t iterations = 0;
  bool certified = false;
  /// Set when the measure is Lebesgue measure exactly (uniform slope).
  bool exact_lebesgue = false;
  std::string method;

  /// Piecewise-linear interpolation of the CDF on [0,1].
  double cdf_at(double t) const;
  /// nu of the lift interval [u, v], u <= v, counting whole turns.
  double measure_of(double u, double v) const;
};

DistributionApprox maximal_measure(const CircleMapPL& map, const EntropyResult& entropy, std::size_t resolution,
                                   double tolerance, std::uint64_t seed = kDefaultSeed);

struct AtomicScalingReport {
  Rational max_residual;
  std::size_t sets = 0;
  std::size_t atoms_checked = 0;
  /// atoms of sampled sets whose image is not in the truncation
  std::size_t excluded = 0;
};

/// Sets E are atoms of depth >= 1 inside a random interval on which the map
/// is injective; residual |mu(phi(E)) - q^{-1} mu(E)|, exact.
AtomicScalingReport verify_scaling(const CircleMapPL& map, const AtomicMeasure& measure, std::size_t samples,
                                   std::uint64_t seed = kDefaultSeed);

/// max |nu(phi(E)) - a nu(E)| over random injectivity intervals E.
double verify_scaling(const CircleMapPL& map, const DistributionApprox& nu, std::size_t samples,
                      std::uint64_t seed = kDefaultSeed);

/// Exact residual max | |phi(E)| - a |E| | for Lebesgue measure over random
/// rational injectivity intervals; zero for uniform slope a.
Rational lebesgue_scaling_residual(const CircleMapPL& map, const Rational& a, std::size_t samples,
                                   std::uint64_t seed = kDefaultSeed);

/// sup_t |F_mu(t) - F_nu(t)| for an atomic measure against a CDF.
double cdf_distance(const AtomicMeasure& mu, const DistributionApprox& nu);

}  // namespace circlekms
