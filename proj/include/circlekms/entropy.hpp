#pragma once

// Topological entropy of a piecewise-linear circle map: exact for uniform
// slopes, a Perron root enclosure for Markov maps, and otherwise a bracket of
// certified upper bounds with a heuristic lower estimate.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "circlekms/circle_map.hpp"

namespace circlekms {

enum class EntropyMethod { uniform_slope, markov, lap_bracket };

std::string to_string(EntropyMethod m);

struct MarkovData {
  /// Points 0 = p_0 < ... < p_{r-1} < 1; arc i is [p_i, p_{i+1}] with p_r = 1.
  std::vector<Rational> partition;
  /// Entry (i, j): number of times the image of arc i covers arc j.
  std::vector<std::vector<std::size_t>> transition_matrix;
  /// Rigorous enclosure of the Perron root.
  Rational radius_lo;
  Rational radius_hi;
};

struct EntropyResult {
  EntropyMethod method = EntropyMethod::lap_bracket;
  /// "log(p/q)" when h is the log of a known rational.
  std::optional<std::string> exact_form;
  /// e^h when exact_form is set.
  std::optional<Rational> exp_entropy;
  double decimal = 0.0;
  /// (n, (1/n) log P_n) where P_n counts the monotone continuous pieces of
  /// the n-th iterate; each is an upper bound for h.
  std::vector<std::pair<std::size_t, double>> upper_bounds;
  /// The exact P_n behind upper_bounds.
  std::vector<std::pair<std::size_t, std::size_t>> piece_counts;
  /// (n, (1/n) log #phi^{-n}(y)) at a sample point. Heuristic.
  std::optional<std::pair<std::size_t, double>> lower_estimate;
  std::optional<Rational> lower_sample;
  bool certified = false;
  std::optional<MarkovData> markov;
};

/// Certified log a when every slope has absolute value a > 1.
std::optional<EntropyResult> entropy_uniform(const CircleMapPL& map);

/// Requires every breakpoint to be pre-periodic within orbit_depth; the
/// partition is the union of their forward orbits.
std::optional<EntropyResult> markov_entropy(const CircleMapPL& map, std::size_t orbit_depth,
                                            const Limits& limits = {});

/// The bracket stops early once P_{n-1} P_1 exceeds this.
inline constexpr std::size_t kBracketPieceBudget = std::size_t{1} << 20;
/// Largest preimage level kept for the lower estimate.
inline constexpr std::size_t kSampleBudget = std::size_t{1} << 17;

/// Upper bounds for n <= n_max and a preimage-growth estimate at a seeded
/// random point. n_max >= 2.
EntropyResult entropy_bracket(const CircleMapPL& map, std::size_t n_max, std::uint64_t seed = kDefaultSeed,
                              const Limits& limits = {});

/// First method that applies, in the order uniform, Markov, bracket.
EntropyResult compute_entropy(const CircleMapPL& map, std::size_t n_max = 6, std::size_t orbit_depth = 64,
                              std::uint64_t seed = kDefaultSeed, const Limits& limits = {});

/// Where q = e^{-beta} sits relative to the boundary e^{-h}.
enum class Regime { above_entropy, at_or_below_entropy, undetermined };

/// above_entropy iff q < e^{-h} is certified; at_or_below_entropy iff
/// q >= e^{-h} is certified.
Regime locate(const EntropyResult& h, const Rational& q);

/// e^{-h} when it is an exact rational.
std::optional<Rational> exact_boundary(const EntropyResult& h);

}  // namespace circlekms
