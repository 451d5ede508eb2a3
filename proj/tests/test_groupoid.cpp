#include <doctest.h>

#include <random>
#include <set>

#include "circlekms/builtins.hpp"
#include "circlekms/groupoid.hpp"

using namespace circlekms;

namespace {

using Element = AlgebraElement<Rational>;
using ComplexElement = AlgebraElement<std::complex<double>>;

std::size_t index_of(const CriticalCatalog& cat, const Rational& x) {
  for (std::size_t i = 0; i < cat.critical.size(); ++i) {
    if (cat.critical[i].point.position() == x) return i;
  }
  FAIL("not critical");
  return 0;
}

struct Setup {
  CircleMapPL map = builtins::example5(Rational(121, 10));
  CriticalCatalog cat = critical_catalog(map, 50);
  EntropyResult h = compute_entropy(map);
  std::size_t big = *cat.class_of(index_of(cat, Rational(7, 12)));
  std::size_t small = *cat.class_of(index_of(cat, Rational(1, 8)));
  Rational q{1, 13};

  AtomicMeasure measure(std::size_t cls, std::size_t depth) const {
    return class_measure(map, cat, cls, InverseTemperature::from_q(q), depth, h);
  }
};

Rational random_entry(std::mt19937_64& rng) {
  std::uniform_int_distribution<long> num(-9, 9);
  std::uniform_int_distribution<long> den(1, 7);
  long n = 0;
  while (n == 0) n = num(rng);
  return ratio(n, den(rng));
}

// Random element with `entries` arrows; about half of them start at atoms
// in `hub` so products have diagonal mass.
Element random_element(const GroupoidTruncation& t, std::mt19937_64& rng, std::size_t entries,
                       const std::vector<std::size_t>& hub) {
  Element f(t);
  std::uniform_int_distribution<std::size_t> any(0, t.size() - 1);
  std::uniform_int_distribution<std::size_t> in_hub(0, hub.size() - 1);
  for (std::size_t i = 0; i < entries; ++i) {
    const std::size_t v = i % 2 == 0 ? hub[in_hub(rng)] : any(rng);
    const std::size_t w = i % 3 == 0 ? hub[in_hub(rng)] : any(rng);
    f.set(v, w, random_entry(rng));
  }
  return f;
}

}  // namespace

TEST_CASE("truncation structure") {
  Setup s;
  SUBCASE("depth 0") {
    const auto t = build_truncation(s.map, s.cat, s.big, 0);
    REQUIRE(t.size() == 3);
    for (std::size_t v = 0; v < 3; ++v) {
      for (std::size_t w = 0; w < 3; ++w) CHECK(t.cocycle(v, w) == 0);
    }
  }
  SUBCASE("depth 1") {
    const auto t = build_truncation(s.map, s.cat, s.small, 1);
    std::set<long> values;
    for (std::size_t v = 0; v < t.size(); ++v) {
      for (std::size_t w = 0; w < t.size(); ++w) values.insert(t.cocycle(v, w));
    }
    CHECK(values == std::set<long>{-1, 0, 1});
  }
  SUBCASE("singleton") {
    const GroupoidTruncation t({OrbitAtom{CirclePoint(Rational(1, 8)), 0, 0, 0}});
    CHECK(t.size() == 1);
    CHECK(t.cocycle(0, 0) == 0);
  }
  SUBCASE("same atoms as the measure") {
    const auto t = build_truncation(s.map, s.cat, s.big, 2);
    const auto m = s.measure(s.big, 2);
    const auto u = truncation_of(m);
    REQUIRE(t.size() == u.size());
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(t.atoms()[i].point == u.atoms()[i].point);
  }
}

TEST_CASE("property: cocycle is additive with trivial isotropy") {
  Setup s;
  const auto t = build_truncation(s.map, s.cat, s.small, 2);
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> any(0, t.size() - 1);
  for (int i = 0; i < 200; ++i) {
    const auto u = any(rng), v = any(rng), w = any(rng);
    CHECK(t.cocycle(u, w) == t.cocycle(u, v) + t.cocycle(v, w));
    CHECK(t.cocycle(u, u) == 0);
  }
}

TEST_CASE("algebra operations") {
  Setup s;
  const auto t = build_truncation(s.map, s.cat, s.small, 1);
  SUBCASE("arrows compose") {
    CHECK(convolve(Element::arrow(t, 0, 5), Element::arrow(t, 5, 9)) == Element::arrow(t, 0, 9));
    CHECK(convolve(Element::arrow(t, 0, 5), Element::arrow(t, 6, 9)).entries().empty());
  }
  SUBCASE("adjoint reverses arrows") { CHECK(adjoint(Element::arrow(t, 2, 7, 3)) == Element::arrow(t, 7, 2, 3)); }
  SUBCASE("twist fixes the diagonal") {
    Element d(t);
    d.set(0, 0, 5);
    d.set(4, 4, Rational(-1, 2));
    CHECK(gauge_twist(d, s.q) == d);
  }
  SUBCASE("twist scales by the cocycle") {
    std::size_t hi = 0;
    while (t.atoms()[hi].level != 1) ++hi;
    const auto f = gauge_twist(Element::arrow(t, hi, 0), s.q);
    CHECK(f.get(hi, 0) == s.q);
    CHECK(gauge_twist(Element::arrow(t, 0, hi), s.q).get(0, hi) == 13);
  }
  SUBCASE("mismatched truncations are rejected") {
    const auto other = build_truncation(s.map, s.cat, s.small, 1);
    CHECK_THROWS_AS(convolve(Element::arrow(t, 0, 1), Element::arrow(other, 1, 0)), ValidationError);
  }
  SUBCASE("entries outside the truncation are rejected") {
    Element f(t);
    CHECK_THROWS_AS(f.set(t.size(), 0, 1), ValidationError);
  }
}

TEST_CASE("property: *-algebra identities") {
  Setup s;
  const auto t = build_truncation(s.map, s.cat, s.small, 2);
  std::vector<std::size_t> hub(t.size());
  for (std::size_t i = 0; i < hub.size(); ++i) hub[i] = i;
  hub.resize(12);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 30; ++i) {
    const auto f = random_element(t, rng, 15, hub);
    const auto g = random_element(t, rng, 15, hub);
    const auto h = random_element(t, rng, 15, hub);
    CHECK(convolve(convolve(f, g), h) == convolve(f, convolve(g, h)));
    CHECK(adjoint(convolve(f, g)) == convolve(adjoint(g), adjoint(f)));
    CHECK(adjoint(adjoint(f)) == f);
    CHECK(gauge_twist(convolve(f, g), s.q) == convolve(gauge_twist(f, s.q), gauge_twist(g, s.q)));
  }
}

TEST_CASE("omega state") {
  Setup s;
  const auto m = s.measure(s.big, 1);
  const auto t = truncation_of(m);
  CHECK(omega_state(m, Element::arrow(t, 4, 4)) == m.atoms[4].weight);
  CHECK(omega_state(m, Element::arrow(t, 4, 5)) == 0);
  CHECK(omega_state(m, Element::identity(t)) == m.total_weight());

  const auto m0 = s.measure(s.big, 0);
  const auto t0 = truncation_of(m0);
  CHECK(omega_state(m0, Element::identity(t0)) == 1);

  SUBCASE("positivity") {
    std::mt19937_64 rng(3);
    std::vector<std::size_t> hub{0, 1, 2, 3, 4, 5};
    for (int i = 0; i < 30; ++i) {
      const auto f = random_element(t, rng, 10, hub);
      CHECK(omega_state(m, convolve(adjoint(f), f)) >= 0);
    }
  }
  SUBCASE("foreign atoms are a mismatch") {
    const auto other = build_truncation(s.map, s.cat, s.small, 0);
    CHECK_THROWS_AS(omega_state(m, Element::identity(other)), ValidationError);
  }
}

TEST_CASE("KMS identity") {
  Setup s;
  const auto m = s.measure(s.small, 3);
  const auto t = truncation_of(m);
  std::size_t v = 0;
  while (t.atoms()[v].level != 1) ++v;
  const std::size_t w = 0;  // level 0

  SUBCASE("single arrow") {
    const auto f = Element::arrow(t, v, w);
    CHECK(t.cocycle(v, w) == 1);
    CHECK(kms_residual(f, adjoint(f), s.q, m) == 0);
    CHECK(m.atoms[v].weight == s.q * m.atoms[w].weight);
  }
  SUBCASE("random pairs") {
    std::mt19937_64 rng(4);
    std::vector<std::size_t> hub;
    for (std::size_t i = 0; i < t.size(); i += t.size() / 20) hub.push_back(i);
    for (int i = 0; i < 50; ++i) {
      const auto f = random_element(t, rng, 25, hub);
      auto g = random_element(t, rng, 10, hub);
      for (const auto& [key, x] : f.entries()) {
        if (rng() % 2 == 0) g.set(key.second, key.first, random_entry(rng));
      }
      CHECK(omega_state(m, convolve(f, g)) != 0);
      CHECK(kms_residual(f, g, s.q, m) == 0);
    }
  }
  SUBCASE("perturbed weight is detected") {
    auto bad = m;
    bad.atoms[v].weight *= 2;
    bad.lookup.clear();
    for (std::size_t i = 0; i < bad.atoms.size(); ++i) bad.lookup.emplace(bad.atoms[i].atom.point, i);
    const auto f = Element::arrow(t, v, w);
    CHECK(kms_residual(f, adjoint(f), s.q, bad) != 0);
  }
  SUBCASE("q mismatch") {
    const auto f = Element::arrow(t, v, w);
    CHECK_THROWS_AS(kms_residual(f, adjoint(f), Rational(1, 14), m), ValidationError);
  }
  SUBCASE("complex exploratory mode") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss;
    std::uniform_int_distribution<std::size_t> any(0, 40);
    for (int i = 0; i < 20; ++i) {
      ComplexElement f(t), g(t);
      for (int k = 0; k < 12; ++k) {
        const auto a = any(rng), b = any(rng);
        f.set(a, b, {gauss(rng), gauss(rng)});
        g.set(b, a, {gauss(rng), gauss(rng)});
      }
      CHECK(std::abs(kms_residual(f, g, s.q, m)) < 1e-12);
    }
  }
}

TEST_CASE("conformal residual on bisections") {
  Setup s;
  const auto m = s.measure(s.big, 2);
  const auto t = truncation_of(m);

  SUBCASE("single arrow to the image") {
    std::size_t v = 0;
    while (t.atoms()[v].preimage_depth != 1) ++v;
    const auto image = *t.find(eval_circle(s.map, t.atoms()[v].point));
    Bisection w{{{v, image, t.cocycle(v, image)}}};
    CHECK(w.pairs[0].cocycle == 1);
    CHECK(conformal_residual(m, t, w, s.q) == 0);
  }
  SUBCASE("mixed cocycles over four atoms") {
    std::vector<std::size_t> lvl0, lvl1;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t.atoms()[i].level == 0) lvl0.push_back(i);
      if (t.atoms()[i].level == 1) lvl1.push_back(i);
    }
    Bisection w{{{lvl1[0], lvl0[0], 1}, {lvl0[1], lvl0[2], 0}, {lvl1[1], lvl0[1], 1}, {lvl1[2], lvl1[3], 0}}};
    CHECK(w.injective());
    std::set<long> c;
    for (const auto& p : w.pairs) {
      CHECK(p.cocycle == t.cocycle(p.range, p.source));
      c.insert(p.cocycle);
    }
    CHECK(c == std::set<long>{0, 1});
    CHECK(conformal_residual(m, t, w, s.q) == 0);
  }
  SUBCASE("sampled bisections") {
    const auto sample = sample_bisections(s.map, t, 100, 9);
    CHECK(sample.bisections.size() == 100);
    for (const auto& w : sample.bisections) {
      CHECK(w.injective());
      CHECK(conformal_residual(m, t, w, s.q) == 0);
    }
    CHECK(sample.skipped > 0);  // phi^j of a depth-0 atom leaves the truncation
    const auto again = sample_bisections(s.map, t, 100, 9);
    CHECK(again.skipped == sample.skipped);
  }
  SUBCASE("perturbed measure") {
    auto bad = m;
    bad.atoms[5].weight *= 2;
    bad.lookup.clear();
    for (std::size_t i = 0; i < bad.atoms.size(); ++i) bad.lookup.emplace(bad.atoms[i].atom.point, i);
    Bisection w{{{5, 0, t.cocycle(5, 0)}}};
    CHECK(conformal_residual(bad, t, w, s.q) != 0);
  }
  SUBCASE("non-injective families are rejected") {
    Bisection w{{{1, 0, 0}, {2, 0, 0}}};
    CHECK_THROWS_AS(conformal_residual(m, t, w, s.q), ValidationError);
  }
}
