#pragma once

// Continuous piecewise-linear circle maps with rational data, and the exact
// branch engine built on them: evaluation, iterate decompositions, one-sided
// monotonicity signatures, preimages, fixed points and an exactness probe.

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "circlekms/errors.hpp"
#include "circlekms/rational.hpp"

namespace circlekms {

/// A point e^{2 pi i t} of the circle, stored as t reduced to [0,1).
class CirclePoint {
 public:
  CirclePoint() = default;
  explicit CirclePoint(const Rational& t) : position_(frac(t)) {}

  const Rational& position() const noexcept { return position_; }

  friend bool operator==(const CirclePoint& a, const CirclePoint& b) { return a.position_ == b.position_; }
  friend bool operator<(const CirclePoint& a, const CirclePoint& b) { return a.position_ < b.position_; }

 private:
  Rational position_{0};
};

struct CirclePointHash {
  std::size_t operator()(const CirclePoint& p) const noexcept { return RationalHash{}(p.position()); }
};

enum class Sign : int { minus = -1, plus = 1 };

inline Sign flip(Sign s) { return s == Sign::plus ? Sign::minus : Sign::plus; }
inline Sign operator*(Sign a, Sign b) { return a == b ? Sign::plus : Sign::minus; }

/// One-sided monotonicity signature of a map at a point: the sign on small
/// intervals to the left and to the right.
struct Valency {
  Sign left = Sign::plus;
  Sign right = Sign::plus;

  bool turning() const { return left != right; }

  friend bool operator==(const Valency&, const Valency&) = default;
};

/// Signature of outer∘inner at x, where `inner` is the valency of the inner
/// map at x and `outer` that of the outer map at inner(x).
Valency compose(const Valency& inner, const Valency& outer);

std::string to_string(const Valency& v);

/// Identity valency, the signature of the zeroth iterate.
inline constexpr Valency kIdentityValency{Sign::plus, Sign::plus};

/// Lift of a continuous piecewise-linear circle map.
///
/// The lift f : [0,1] -> R interpolates `values` at `breakpoints`; the circle
/// map is t -> f(t) mod 1. Every piece is strictly monotone, f(0) lies in
/// [0,1) and f(1) - f(0) is the (integer) degree.
class CircleMapPL {
 public:
  /// Validates and builds. Throws ValidationError.
  static CircleMapPL make(std::vector<Rational> breakpoints, std::vector<Rational> values, bool assume_exact = false);

  const std::vector<Rational>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<Rational>& values() const noexcept { return values_; }
  const Integer& degree() const noexcept { return degree_; }
  bool assume_exact() const noexcept { return assume_exact_; }

  std::size_t piece_count() const noexcept { return slopes_.size(); }
  const Rational& slope(std::size_t piece) const { return slopes_[piece]; }
  Sign piece_sign(std::size_t piece) const { return sgn(slopes_[piece]) > 0 ? Sign::plus : Sign::minus; }

  /// Index of the piece whose half-open interval [c_i, c_{i+1}) contains t.
  std::size_t piece_at(const Rational& t) const;

  /// The lift on [0,1].
  Rational lift(const Rational& t) const;

  /// The lift extended to R by f(t + 1) = f(t) + degree.
  Rational lift_extended(const Rational& x) const;

  /// Valency of the map itself at x.
  Valency valency_at(const CirclePoint& x) const;

  /// Whether any point has turning valency.
  bool has_turning_point() const;

  friend bool operator==(const CircleMapPL&, const CircleMapPL&) = default;

 private:
  CircleMapPL() = default;

  std::vector<Rational> breakpoints_;
  std::vector<Rational> values_;
  std::vector<Rational> slopes_;
  Integer degree_;
  bool assume_exact_ = false;
};

/// Parses the `cmap v1` text format. Errors carry the line number and the
/// offending token.
CircleMapPL parse_map(std::string_view text);

/// Serializes to the `cmap v1` format with reduced rationals.
std::string format_map(const CircleMapPL& map);

CirclePoint eval_circle(const CircleMapPL& map, const CirclePoint& x);

/// Iterates eval_circle n times, checking the denominator guard.
CirclePoint iterate_point(const CircleMapPL& map, const CirclePoint& x, std::size_t n, const Limits& limits = {});

/// Affine piece t -> slope * t + intercept of the lift of an iterate,
/// valid on [lo, hi].
struct AffinePiece {
  Rational lo;
  Rational hi;
  Rational slope;
  Rational intercept;

  Rational operator()(const Rational& t) const { return slope * t + intercept; }
  Sign sign() const { return sgn(slope) > 0 ? Sign::plus : Sign::minus; }
};

/// A maximal monotone arc (lap) of an iterate. When `wraps` is set the arc
/// runs from `start` through 0 to `end`.
struct Branch {
  Rational start;
  Rational end;
  bool wraps = false;
  Sign sign = Sign::plus;
  std::vector<AffinePiece> pieces;
};

struct BranchSet {
  std::size_t iterate = 1;
  Integer degree;
  /// Affine pieces of the lift of the iterate, in order over [0,1].
  std::vector<AffinePiece> pieces;
  /// Laps on the circle, ordered by start position.
  std::vector<Branch> branches;

  std::size_t lap_count() const { return branches.size(); }

  /// Number of maximal intervals of [0,1) on which t -> lift(t) mod 1 is
  /// monotone and continuous. Submultiplicative in the iterate, and an upper
  /// bound on the number of preimages of any point.
  std::size_t monotone_piece_count() const;

  /// Valency of the iterate at x read directly from the pieces.
  Valency valency_at(const CirclePoint& x) const;
};

BranchSet iterate_branches(const CircleMapPL& map, std::size_t n, const Limits& limits = {});

/// Valency of the n-th iterate at x via the one-sided sign chain rule along
/// the orbit. n = 0 gives the identity valency.
Valency valency(const CircleMapPL& map, const CirclePoint& x, std::size_t n, const Limits& limits = {});

/// One-step preimages of y, sorted by position.
std::vector<CirclePoint> preimages_once(const CircleMapPL& map, const CirclePoint& y);

struct Preimage {
  CirclePoint point;
  Valency valency;
};

/// All x with phi^k(x) = y together with val(phi^k, x), sorted by position.
std::vector<Preimage> preimages(const CircleMapPL& map, const CirclePoint& y, std::size_t k, const Limits& limits = {});

struct FixedPoint {
  CirclePoint point;
  bool is_critical = false;
};

/// Throws ValidationError on a continuum of fixed points.
std::vector<FixedPoint> fixed_points(const CircleMapPL& map);

enum class ExactnessVerdict { confirmed, inconclusive, refuted_by_local_injectivity };

std::string to_string(ExactnessVerdict v);

/// Bounded certificate for topological exactness: confirmed when every lap of
/// phi^depth is carried onto the whole circle within `horizon` further steps.
ExactnessVerdict exactness_probe(const CircleMapPL& map, std::size_t depth, std::size_t horizon,
                                 const Limits& limits = {});

/// Closed arcs [lo, hi] of [0,1], sorted and merged. Used by the probe.
using ArcSet = std::vector<std::pair<Rational, Rational>>;

/// Image of a set of arcs under the map, merged.
ArcSet image_of_arcs(const CircleMapPL& map, const ArcSet& arcs);

bool covers_circle(const ArcSet& arcs);

}  // namespace circlekms
