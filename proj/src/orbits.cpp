#include "circlekms/orbits.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace circlekms {

ForwardOrbit forward_orbit(const CircleMapPL& map, const CirclePoint& x, std::size_t depth, const Limits& limits) {
  if (depth > limits.max_depth) {
    throw ResourceError(ResourceError::Kind::depth,
                        "orbit depth " + std::to_string(depth) + " exceeds limit " + std::to_string(limits.max_depth));
  }
  ForwardOrbit orbit;
  orbit.points.reserve(depth + 1);
  orbit.valencies.reserve(depth + 1);
  orbit.points.push_back(x);
  orbit.valencies.push_back(kIdentityValency);
  for (std::size_t n = 0; n < depth; ++n) {
    const CirclePoint& p = orbit.points.back();
    orbit.valencies.push_back(compose(orbit.valencies.back(), map.valency_at(p)));
    orbit.points.push_back(eval_circle(map, p));
    if (denominator_bits(orbit.points.back().position()) > limits.max_denominator_bits) {
      throw ResourceError(ResourceError::Kind::denominator_bits,
                          "orbit denominator exceeds " + std::to_string(limits.max_denominator_bits) + " bits at step " +
                              std::to_string(n + 1));
    }
  }
  return orbit;
}

PreperiodicityCertificate preperiodicity(const CircleMapPL& map, const CirclePoint& x, std::size_t depth,
                                         const Limits& limits) {
  PreperiodicityCertificate cert;
  cert.depth = depth;
  std::unordered_map<CirclePoint, std::size_t, CirclePointHash> seen;
  CirclePoint p = x;
  for (std::size_t j = 0; j <= depth; ++j) {
    if (j > 0) {
      p = eval_circle(map, p);
      if (denominator_bits(p.position()) > limits.max_denominator_bits) {
        throw ResourceError(ResourceError::Kind::denominator_bits,
                            "orbit denominator exceeds " + std::to_string(limits.max_denominator_bits) + " bits");
      }
    }
    cert.orbit_prefix.push_back(p);
    auto [it, inserted] = seen.emplace(p, j);
    if (!inserted) {
      cert.status = PreperiodicityCertificate::Status::preperiodic;
      cert.first = it->second;
      cert.second = j;
      return cert;
    }
    if (j == limits.max_depth) {
      throw ResourceError(ResourceError::Kind::depth,
                          "orbit depth exceeds limit " + std::to_string(limits.max_depth));
    }
  }
  return cert;
}

std::optional<ROWitness> ro_witness(const ForwardOrbit& x, const ForwardOrbit& y) {
  std::unordered_map<CirclePoint, std::vector<std::size_t>, CirclePointHash> index;
  for (std::size_t m = 0; m < y.points.size(); ++m) index[y.points[m]].push_back(m);

  std::optional<ROWitness> best;
  for (std::size_t n = 0; n < x.points.size(); ++n) {
    auto it = index.find(x.points[n]);
    if (it == index.end()) continue;
    for (std::size_t m : it->second) {
      if (x.valencies[n] != y.valencies[m]) continue;
      const bool better = !best || n + m < best->n + best->m || (n + m == best->n + best->m && n < best->n);
      if (better) best = ROWitness{n, m, x.points[n], x.valencies[n]};
    }
  }
  return best;
}

std::optional<ROWitness> ro_witness(const CircleMapPL& map, const CirclePoint& x, const CirclePoint& y,
                                    std::size_t depth, const Limits& limits) {
  return ro_witness(forward_orbit(map, x, depth, limits), forward_orbit(map, y, depth, limits));
}

ROWitness compose_witness(const CircleMapPL& map, const CirclePoint& x, const ROWitness& xy, const ROWitness& yz) {
  // phi^{n1}(x) = phi^{m1}(y) and phi^{n2}(y) = phi^{m2}(z) give
  // phi^{n1+n2}(x) = phi^{m1+n2}(y) = phi^{m1+m2}(z); valencies match because
  // a witness stays a witness after applying phi on both sides.
  ROWitness out;
  out.n = xy.n + yz.n;
  out.m = xy.m + yz.m;
  out.common_point = iterate_point(map, x, out.n);
  out.valency = valency(map, x, out.n);
  return out;
}

namespace {

ROWitness inverse(const ROWitness& w) { return ROWitness{w.m, w.n, w.common_point, w.valency}; }

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

std::vector<std::size_t> CriticalCatalog::preperiodic() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < critical.size(); ++i) {
    if (critical[i].preperiodicity.preperiodic()) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> CriticalCatalog::non_preperiodic() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < critical.size(); ++i) {
    if (!critical[i].preperiodicity.preperiodic()) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> CriticalCatalog::terminal() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < critical.size(); ++i) {
    if (critical[i].terminal) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> CriticalCatalog::final_points() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < critical.size(); ++i) {
    if (critical[i].final) out.push_back(i);
  }
  return out;
}

std::optional<std::size_t> CriticalCatalog::class_of(std::size_t index) const {
  for (std::size_t k = 0; k < classes.size(); ++k) {
    const auto& members = classes[k].members;
    if (std::find(members.begin(), members.end(), index) != members.end()) return k;
  }
  return std::nullopt;
}

CriticalCatalog critical_catalog(const CircleMapPL& map, std::size_t depth, const Limits& limits) {
  if (!map.has_turning_point()) {
    throw ValidationError("locally injective map: no turning points, outside the scope of the classification");
  }
  CriticalCatalog cat;
  cat.depth = depth;

  const auto& bp = map.breakpoints();
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    const CirclePoint c(bp[i]);
    const Valency v = map.valency_at(c);
    if (v.turning()) cat.critical.push_back({c, v, {}, false, std::nullopt, false, std::nullopt, std::nullopt});
  }

  std::unordered_set<CirclePoint, CirclePointHash> critical_set;
  for (const auto& c : cat.critical) critical_set.insert(c.point);

  std::vector<ForwardOrbit> orbits;
  for (auto& info : cat.critical) {
    info.preperiodicity = preperiodicity(map, info.point, depth, limits);
    orbits.push_back(forward_orbit(map, info.point, depth, limits));
    if (info.preperiodicity.preperiodic()) continue;
    info.terminal = true;
    for (std::size_t k = 1; k < orbits.back().points.size(); ++k) {
      if (critical_set.count(orbits.back().points[k]) != 0) {
        info.terminal = false;
        info.first_critical_hit = k;
        break;
      }
    }
  }

  // Class partition: pairwise witnesses closed under transitivity.
  const auto free_points = cat.non_preperiodic();
  UnionFind uf(cat.critical.size());
  std::vector<std::vector<std::pair<std::size_t, ROWitness>>> adjacency(cat.critical.size());
  std::vector<std::tuple<std::size_t, std::size_t, ROWitness>> direct;
  for (std::size_t a = 0; a < free_points.size(); ++a) {
    for (std::size_t b = a + 1; b < free_points.size(); ++b) {
      const std::size_t i = free_points[a];
      const std::size_t j = free_points[b];
      if (auto w = ro_witness(orbits[i], orbits[j])) {
        uf.unite(i, j);
        adjacency[i].emplace_back(j, *w);
        adjacency[j].emplace_back(i, inverse(*w));
        direct.emplace_back(i, j, *w);
      }
    }
  }

  std::vector<std::size_t> roots;
  for (std::size_t i : free_points) {
    if (std::find(roots.begin(), roots.end(), uf.find(i)) == roots.end()) roots.push_back(uf.find(i));
  }

  for (std::size_t root : roots) {
    ROClass cls;
    for (std::size_t i : free_points) {
      if (uf.find(i) == root) cls.members.push_back(i);
    }
    const std::size_t ref = cls.members.front();

    // Witness from the reference member to every other member, by BFS over
    // direct witnesses.
    std::unordered_map<std::size_t, ROWitness> from_ref;
    from_ref.emplace(ref, ROWitness{0, 0, cat.critical[ref].point, kIdentityValency});
    std::vector<std::size_t> queue{ref};
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t u = queue[head];
      for (const auto& [v, w] : adjacency[u]) {
        if (from_ref.count(v) != 0) continue;
        from_ref.emplace(v, compose_witness(map, cat.critical[ref].point, from_ref.at(u), w));
        queue.push_back(v);
      }
    }
    auto ref_level = [&](std::size_t i) { return -from_ref.at(i).shift(); };

    // Final points: terminal members of least level.
    std::optional<long> min_level;
    std::optional<std::size_t> min_member;
    for (std::size_t i : cls.members) {
      if (!cat.critical[i].terminal) continue;
      if (!min_level || ref_level(i) < *min_level) {
        min_level = ref_level(i);
        min_member = i;
      }
    }
    std::optional<std::size_t> base;
    for (std::size_t i : cls.members) {
      if (!cat.critical[i].terminal) continue;
      auto& info = cat.critical[i];
      if (ref_level(i) == *min_level) {
        info.final = true;
        if (!base) base = i;
      } else {
        info.finality_violator = *min_member;
        info.finality_violation =
            compose_witness(map, info.point, inverse(from_ref.at(i)), from_ref.at(*min_member));
      }
    }
    cls.base = base.value_or(ref);

    const auto& base_orbit = orbits[cls.base];
    for (std::size_t i : cls.members) {
      if (auto w = ro_witness(base_orbit, orbits[i])) {
        cls.from_base.push_back(*w);
      } else {
        cls.from_base.push_back(
            compose_witness(map, cat.critical[cls.base].point, inverse(from_ref.at(cls.base)), from_ref.at(i)));
      }
    }
    for (const auto& [i, j, w] : direct) {
      if (uf.find(i) == root) cls.edges.push_back({i, j, w});
    }
    cat.classes.push_back(std::move(cls));
  }
  return cat;
}

std::vector<OrbitAtom> enumerate_orbit_atoms(const CircleMapPL& map, const CriticalCatalog& catalog,
                                             std::size_t class_index, std::size_t depth, const Limits& limits) {
  if (class_index >= catalog.classes.size()) {
    throw ValidationError("class index " + std::to_string(class_index) + " out of range (" +
                          std::to_string(catalog.classes.size()) + " classes)");
  }
  if (depth > limits.max_depth) {
    throw ResourceError(ResourceError::Kind::depth,
                        "atom depth " + std::to_string(depth) + " exceeds limit " + std::to_string(limits.max_depth));
  }
  const ROClass& cls = catalog.classes[class_index];
  std::vector<OrbitAtom> atoms;
  std::unordered_set<CirclePoint, CirclePointHash> seen;

  for (std::size_t slot = 0; slot < cls.members.size(); ++slot) {
    const std::size_t member = cls.members[slot];
    if (!catalog.critical[member].terminal) continue;
    const long offset = cls.level_of(slot);

    std::vector<CirclePoint> layer{catalog.critical[member].point};
    for (std::size_t k = 0; k <= depth; ++k) {
      for (const auto& p : layer) {
        if (!seen.insert(p).second) {
          throw std::logic_error("restricted orbit atom " + to_string(p.position()) + " reached twice");
        }
        atoms.push_back({p, static_cast<long>(k) + offset, member, k});
        if (atoms.size() > limits.max_branches) {
          throw ResourceError(ResourceError::Kind::branches,
                              "atom count exceeds cap " + std::to_string(limits.max_branches));
        }
      }
      if (k == depth) break;
      std::vector<CirclePoint> next;
      for (const auto& p : layer) {
        auto pre = preimages_once(map, p);
        next.insert(next.end(), pre.begin(), pre.end());
      }
      layer = std::move(next);
    }
  }
  std::sort(atoms.begin(), atoms.end(), [](const OrbitAtom& a, const OrbitAtom& b) {
    if (a.level != b.level) return a.level < b.level;
    return a.point < b.point;
  });
  return atoms;
}

}  // namespace circlekms
