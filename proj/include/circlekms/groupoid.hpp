#pragma once

// Finite truncation of the oriented transformation groupoid over one
// restricted orbit. Every pair of atoms is an arrow, with cocycle the level
// difference, so functions on the truncation are graded matrices.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "circlekms/measures.hpp"

namespace circlekms {

class GroupoidTruncation {
 public:
  GroupoidTruncation() = default;
  explicit GroupoidTruncation(std::vector<OrbitAtom> atoms);

  const std::vector<OrbitAtom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  /// c_g(v, w) = level(v) - level(w), the k of the arrow (v, k, w).
  long cocycle(std::size_t v, std::size_t w) const { return atoms_[v].level - atoms_[w].level; }
  std::optional<std::size_t> find(const CirclePoint& p) const;

 private:
  std::vector<OrbitAtom> atoms_;
  std::unordered_map<CirclePoint, std::size_t, CirclePointHash> index_;
};

GroupoidTruncation build_truncation(const CircleMapPL& map, const CriticalCatalog& catalog, std::size_t class_index,
                                    std::size_t depth, const Limits& limits = {});

/// Truncation over exactly the atoms of a measure, in the measure's order.
GroupoidTruncation truncation_of(const AtomicMeasure& measure);

inline void canonicalize(Rational& x) { x.canonicalize(); }
inline void canonicalize(std::complex<double>&) {}

inline Rational conjugate(const Rational& x) { return x; }
inline std::complex<double> conjugate(const std::complex<double>& x) { return std::conj(x); }

inline Rational scalar_power(const Rational& q, long k, const Rational*) { return pow(q, k); }
inline std::complex<double> scalar_power(const Rational& q, long k, const std::complex<double>*) {
  return {std::pow(q.get_d(), static_cast<double>(k)), 0.0};
}

/// Finitely supported function on the truncated groupoid: entry (v, w) is
/// the value on the arrow (v, c_g(v, w), w).
template <class Scalar>
class AlgebraElement {
 public:
  using Key = std::pair<std::size_t, std::size_t>;

  explicit AlgebraElement(const GroupoidTruncation& t) : truncation_(&t) {}

  static AlgebraElement arrow(const GroupoidTruncation& t, std::size_t v, std::size_t w, Scalar x = Scalar(1)) {
    AlgebraElement f(t);
    f.set(v, w, x);
    return f;
  }
  static AlgebraElement identity(const GroupoidTruncation& t) {
    AlgebraElement f(t);
    for (std::size_t v = 0; v < t.size(); ++v) f.set(v, v, Scalar(1));
    return f;
  }

  const GroupoidTruncation& truncation() const { return *truncation_; }
  const std::map<Key, Scalar>& entries() const { return entries_; }

  void set(std::size_t v, std::size_t w, Scalar x) {
    canonicalize(x);
    if (v >= truncation_->size() || w >= truncation_->size()) throw ValidationError("entry outside the truncation");
    if (x == Scalar(0)) {
      entries_.erase({v, w});
    } else {
      entries_[{v, w}] = x;
    }
  }
  Scalar get(std::size_t v, std::size_t w) const {
    auto it = entries_.find({v, w});
    return it == entries_.end() ? Scalar(0) : it->second;
  }

  friend bool operator==(const AlgebraElement& a, const AlgebraElement& b) {
    return a.truncation_ == b.truncation_ && a.entries_ == b.entries_;
  }

 private:
  const GroupoidTruncation* truncation_;
  std::map<Key, Scalar> entries_;
};

template <class Scalar>
void require_same(const AlgebraElement<Scalar>& f, const AlgebraElement<Scalar>& g) {
  if (&f.truncation() != &g.truncation()) throw ValidationError("truncation mismatch");
}

/// (f g)(v, u) = sum_w f(v, w) g(w, u).
template <class Scalar>
AlgebraElement<Scalar> convolve(const AlgebraElement<Scalar>& f, const AlgebraElement<Scalar>& g) {
  require_same(f, g);
  std::unordered_map<std::size_t, std::vector<std::pair<std::size_t, Scalar>>> rows;
  for (const auto& [key, x] : g.entries()) rows[key.first].emplace_back(key.second, x);
  std::map<std::pair<std::size_t, std::size_t>, Scalar> acc;
  for (const auto& [key, x] : f.entries()) {
    auto it = rows.find(key.second);
    if (it == rows.end()) continue;
    for (const auto& [u, y] : it->second) {
      auto [slot, inserted] = acc.try_emplace({key.first, u}, x * y);
      if (!inserted) slot->second += x * y;
    }
  }
  AlgebraElement<Scalar> out(f.truncation());
  for (const auto& [key, x] : acc) out.set(key.first, key.second, x);
  return out;
}

/// f*(v, w) = conj f(w, v).
template <class Scalar>
AlgebraElement<Scalar> adjoint(const AlgebraElement<Scalar>& f) {
  AlgebraElement<Scalar> out(f.truncation());
  for (const auto& [key, x] : f.entries()) out.set(key.second, key.first, conjugate(x));
  return out;
}

/// alpha_{i beta}: entry (v, w) scaled by q^{c_g(v, w)}.
template <class Scalar>
AlgebraElement<Scalar> gauge_twist(const AlgebraElement<Scalar>& f, const Rational& q) {
  AlgebraElement<Scalar> out(f.truncation());
  for (const auto& [key, x] : f.entries()) {
    const long c = f.truncation().cocycle(key.first, key.second);
    out.set(key.first, key.second, x * scalar_power(q, c, static_cast<const Scalar*>(nullptr)));
  }
  return out;
}

/// Weight of each truncation atom under the measure.
std::vector<Rational> aligned_weights(const AtomicMeasure& measure, const GroupoidTruncation& t);

inline Rational to_scalar(const Rational& w, const Rational*) { return w; }
inline std::complex<double> to_scalar(const Rational& w, const std::complex<double>*) { return {w.get_d(), 0.0}; }

/// omega(f) = sum_v f(v, v) mu({v}).
template <class Scalar>
Scalar omega_state(const AtomicMeasure& measure, const AlgebraElement<Scalar>& f) {
  const auto w = aligned_weights(measure, f.truncation());
  Scalar s(0);
  for (const auto& [key, x] : f.entries()) {
    if (key.first == key.second) s += x * to_scalar(w[key.first], static_cast<const Scalar*>(nullptr));
  }
  return s;
}

/// omega(f g) - omega(g alpha_{i beta}(f)).
template <class Scalar>
Scalar kms_residual(const AlgebraElement<Scalar>& f, const AlgebraElement<Scalar>& g, const Rational& q,
                    const AtomicMeasure& measure) {
  if (q != measure.q) throw ValidationError("q mismatch between measure and twist");
  return omega_state(measure, convolve(f, g)) - omega_state(measure, convolve(g, gauge_twist(f, q)));
}

/// Arrow (range, cocycle, source) of a bisection.
struct BisectionArrow {
  std::size_t range = 0;
  std::size_t source = 0;
  long cocycle = 0;
};

struct Bisection {
  std::vector<BisectionArrow> pairs;

  /// Sources distinct and ranges distinct.
  bool injective() const;
};

struct BisectionSample {
  std::vector<Bisection> bisections;
  /// proposed arrows whose source fell outside the truncation
  std::size_t skipped = 0;
  std::uint64_t seed = 0;
};

/// Random bisections of up to max_size arrows. Half the arrows are (v, phi^j(v))
/// with j in {1, 2}, the rest join random atoms; arrows leaving the
/// truncation are skipped and counted.
BisectionSample sample_bisections(const CircleMapPL& map, const GroupoidTruncation& t, std::size_t count,
                                  std::uint64_t seed = kDefaultSeed, std::size_t max_size = 4);

/// mu(s(W)) - sum over arrows of q^{-c_g} mu({range}).
Rational conformal_residual(const AtomicMeasure& measure, const GroupoidTruncation& t, const Bisection& w,
                            const Rational& q);

}  // namespace circlekms
