#include "circlekms/groupoid.hpp"

#include <random>
#include <set>

namespace circlekms {

GroupoidTruncation::GroupoidTruncation(std::vector<OrbitAtom> atoms) : atoms_(std::move(atoms)) {
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (!index_.emplace(atoms_[i].point, i).second) throw std::logic_error("duplicate atom in truncation");
  }
}

std::optional<std::size_t> GroupoidTruncation::find(const CirclePoint& p) const {
  auto it = index_.find(p);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

GroupoidTruncation build_truncation(const CircleMapPL& map, const CriticalCatalog& catalog, std::size_t class_index,
                                    std::size_t depth, const Limits& limits) {
  if (class_index >= catalog.classes.size()) throw ValidationError("no class " + std::to_string(class_index));
  return GroupoidTruncation(enumerate_orbit_atoms(map, catalog, class_index, depth, limits));
}

GroupoidTruncation truncation_of(const AtomicMeasure& measure) {
  std::vector<OrbitAtom> atoms;
  atoms.reserve(measure.atoms.size());
  for (const auto& a : measure.atoms) atoms.push_back(a.atom);
  return GroupoidTruncation(std::move(atoms));
}

std::vector<Rational> aligned_weights(const AtomicMeasure& measure, const GroupoidTruncation& t) {
  std::vector<Rational> w(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    auto x = measure.weight_of(t.atoms()[i].point);
    if (!x) throw ValidationError("truncation mismatch: atom " + to_string(t.atoms()[i].point.position()) +
                                  " carries no weight");
    w[i] = *x;
  }
  return w;
}

bool Bisection::injective() const {
  std::set<std::size_t> src, rng;
  for (const auto& p : pairs) {
    if (!src.insert(p.source).second || !rng.insert(p.range).second) return false;
  }
  return true;
}

BisectionSample sample_bisections(const CircleMapPL& map, const GroupoidTruncation& t, std::size_t count,
                                  std::uint64_t seed, std::size_t max_size) {
  BisectionSample out;
  out.seed = seed;
  if (t.size() == 0 || max_size == 0) return out;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_atom(0, t.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_size(1, max_size);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<std::size_t> pick_step(1, 2);
  for (std::size_t b = 0; b < count; ++b) {
    Bisection w;
    std::set<std::size_t> sources, ranges;
    const std::size_t want = pick_size(rng);
    for (std::size_t tries = 0; w.pairs.size() < want && tries < 8 * want; ++tries) {
      const std::size_t r = pick_atom(rng);
      std::size_t s = 0;
      if (coin(rng) == 0) {
        const auto image = iterate_point(map, t.atoms()[r].point, pick_step(rng));
        const auto found = t.find(image);
        if (!found) {
          ++out.skipped;
          continue;
        }
        s = *found;
      } else {
        s = pick_atom(rng);
      }
      if (sources.count(s) != 0 || ranges.count(r) != 0) continue;
      sources.insert(s);
      ranges.insert(r);
      w.pairs.push_back({r, s, t.cocycle(r, s)});
    }
    out.bisections.push_back(std::move(w));
  }
  return out;
}

Rational conformal_residual(const AtomicMeasure& measure, const GroupoidTruncation& t, const Bisection& w,
                            const Rational& q) {
  if (q != measure.q) throw ValidationError("q mismatch between measure and bisection check");
  if (!w.injective()) throw ValidationError("not a bisection: source or range repeats");
  const auto weights = aligned_weights(measure, t);
  Rational source_mass = 0;
  Rational pulled = 0;
  for (const auto& p : w.pairs) {
    source_mass += weights[p.source];
    pulled += pow(q, -p.cocycle) * weights[p.range];
  }
  return source_mass - pulled;
}

}  // namespace circlekms
