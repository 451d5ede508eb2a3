#pragma once

// Restricted orbits: pre-periodicity certificates, valency-matched orbit
// meetings, the critical point catalog, and the atoms of a restricted orbit.
//
// Every certificate here is relative to a finite depth. "No repeat up to
// depth d" is what rational data can honestly offer in place of "not
// pre-periodic".

#include <cstddef>
#include <optional>
#include <vector>

#include "circlekms/circle_map.hpp"

namespace circlekms {

/// Forward orbit x, phi(x), ..., phi^depth(x) together with val(phi^n, x).
struct ForwardOrbit {
  std::vector<CirclePoint> points;
  std::vector<Valency> valencies;
};

ForwardOrbit forward_orbit(const CircleMapPL& map, const CirclePoint& x, std::size_t depth, const Limits& limits = {});

struct PreperiodicityCertificate {
  enum class Status { preperiodic, no_repeat };

  Status status = Status::no_repeat;
  /// For preperiodic: phi^first(x) = phi^second(x), first < second, and
  /// `second` is the least index at which a repeat occurs.
  std::size_t first = 0;
  std::size_t second = 0;
  std::size_t depth = 0;
  std::vector<CirclePoint> orbit_prefix;

  bool preperiodic() const { return status == Status::preperiodic; }
};

PreperiodicityCertificate preperiodicity(const CircleMapPL& map, const CirclePoint& x, std::size_t depth,
                                         const Limits& limits = {});

/// phi^n(x) = phi^m(y) = common_point with val(phi^n, x) = val(phi^m, y),
/// i.e. (x, n - m, y) is an arrow of the oriented transformation groupoid.
struct ROWitness {
  std::size_t n = 0;
  std::size_t m = 0;
  CirclePoint common_point;
  Valency valency;

  long shift() const { return static_cast<long>(n) - static_cast<long>(m); }
};

/// Least witness in the order (n + m, n) with n, m <= depth, if any.
std::optional<ROWitness> ro_witness(const CircleMapPL& map, const CirclePoint& x, const CirclePoint& y,
                                    std::size_t depth, const Limits& limits = {});

/// Same search over precomputed orbits.
std::optional<ROWitness> ro_witness(const ForwardOrbit& x, const ForwardOrbit& y);

/// Witness for (x, ., z) from witnesses for (x, ., y) and (y, ., z).
ROWitness compose_witness(const CircleMapPL& map, const CirclePoint& x, const ROWitness& xy, const ROWitness& yz);

struct CriticalPointInfo {
  CirclePoint point;
  Valency valency;
  PreperiodicityCertificate preperiodicity;
  /// Set for non-pre-periodic points: whether phi^k(c), 1 <= k <= depth,
  /// avoids every critical point.
  bool terminal = false;
  /// First k >= 1 with phi^k(c) critical, when the orbit is not terminal.
  std::optional<std::size_t> first_critical_hit;
  bool final = false;
  /// For a terminal point that is not final: index of a terminal c' and a
  /// witness phi^n(c) = phi^m(c') with m < n.
  std::optional<std::size_t> finality_violator;
  std::optional<ROWitness> finality_violation;
};

/// One equivalence class of non-pre-periodic critical points.
struct ROClass {
  /// Indices into CriticalCatalog::critical, ascending by position.
  std::vector<std::size_t> members;
  /// Least-position final member (the normalization point for levels).
  std::size_t base = 0;
  /// For each member, a witness phi^n(base) = phi^m(member).
  std::vector<ROWitness> from_base;
  /// Direct witnesses found between members (i < j in `members` order).
  struct Edge {
    std::size_t a;
    std::size_t b;
    ROWitness witness;
  };
  std::vector<Edge> edges;

  /// level(member) = m - n of its base witness: (member, level, base) is an arrow.
  long level_of(std::size_t member_slot) const { return -from_base[member_slot].shift(); }
};

struct CriticalCatalog {
  std::size_t depth = 0;
  std::vector<CriticalPointInfo> critical;
  std::vector<ROClass> classes;

  std::vector<std::size_t> preperiodic() const;
  std::vector<std::size_t> non_preperiodic() const;
  std::vector<std::size_t> terminal() const;
  std::vector<std::size_t> final_points() const;

  /// Class containing critical point `index`, if it is non-pre-periodic.
  std::optional<std::size_t> class_of(std::size_t index) const;
};

/// Throws ValidationError("locally injective map ...") when there are no
/// turning points.
CriticalCatalog critical_catalog(const CircleMapPL& map, std::size_t depth, const Limits& limits = {});

/// A point of a restricted orbit with its level relative to the class base:
/// (point, level, base) is an arrow, so the atom carries weight q^level.
struct OrbitAtom {
  CirclePoint point;
  long level = 0;
  /// Index (into the catalog) of the terminal critical point c' with
  /// phi^preimage_depth(point) = c'.
  std::size_t via_terminal = 0;
  std::size_t preimage_depth = 0;
};

/// All phi^{-k}(c') for terminal c' in the class and k <= depth, sorted by
/// level then position. Throws std::logic_error on a duplicate point.
std::vector<OrbitAtom> enumerate_orbit_atoms(const CircleMapPL& map, const CriticalCatalog& catalog,
                                             std::size_t class_index, std::size_t depth, const Limits& limits = {});

}  // namespace circlekms
