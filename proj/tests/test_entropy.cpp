#include <doctest.h>

#include <cmath>

#include "circlekms/builtins.hpp"
#include "circlekms/entropy.hpp"
#include "oracles.hpp"

using namespace circlekms;

namespace {

CircleMapPL mixed_slopes() { return CircleMapPL::make({0, Rational(3, 5), 1}, {0, 1, 0}); }

// uniform slope 3, degree 0, one turn
CircleMapPL slope_three() { return CircleMapPL::make({0, Rational(1, 2), 1}, {0, Rational(3, 2), 0}); }

// Monotone continuous pieces of t -> F_n(t) mod 1 on [0,1), by brute force.
std::size_t oracle_pieces(const oracle::Table& t, std::size_t n) {
  const auto pts = oracle::refinement(t, n);
  std::size_t count = 0;
  int prev_sign = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Rational a = oracle::lift_iterate(t, n, pts[i]);
    const Rational b = oracle::lift_iterate(t, n, pts[i + 1]);
    const int s = b > a ? 1 : -1;
    const bool cut = i == 0 || s != prev_sign || a.get_den() == 1;
    if (cut) ++count;
    // integers strictly between the end values split the piece again
    const Rational lo = std::min(a, b);
    const Rational hi = std::max(a, b);
    for (Rational z = oracle::floor_q(lo) + 1; z < hi; z += 1) ++count;
    prev_sign = s;
  }
  return count;
}

}  // namespace

TEST_CASE("uniform slope entropy") {
  const auto tent = entropy_uniform(builtins::tent());
  REQUIRE(tent);
  CHECK(*tent->exact_form == "log(2)");
  CHECK(tent->certified);
  CHECK(tent->method == EntropyMethod::uniform_slope);
  CHECK(std::abs(tent->decimal - std::log(2.0)) < 1e-12);

  const auto e5 = entropy_uniform(builtins::example5(Rational(121, 10)));
  REQUIRE(e5);
  CHECK(*e5->exact_form == "log(121/10)");
  CHECK(*e5->exp_entropy == Rational(121, 10));
  CHECK(std::abs(e5->decimal - std::log(12.1)) < 1e-12);

  CHECK_FALSE(entropy_uniform(mixed_slopes()));
}

TEST_CASE("markov entropy") {
  SUBCASE("tent") {
    const auto r = markov_entropy(builtins::tent(), 20);
    REQUIRE(r);
    REQUIRE(r->markov);
    CHECK(r->markov->partition == std::vector<Rational>{0, Rational(1, 2)});
    CHECK(r->markov->transition_matrix == std::vector<std::vector<std::size_t>>{{1, 1}, {1, 1}});
    CHECK(*r->exact_form == "log(2)");
  }
  SUBCASE("doubling") {
    const auto r = markov_entropy(builtins::doubling(), 20);
    REQUIRE(r);
    CHECK(r->markov->transition_matrix == std::vector<std::vector<std::size_t>>{{1, 1}, {1, 1}});
    CHECK(std::abs(r->decimal - std::log(2.0)) < 1e-12);
  }
  SUBCASE("Example 5 breakpoint orbits do not close") {
    CHECK_FALSE(markov_entropy(builtins::example5(Rational(121, 10)), 50));
  }
  SUBCASE("alpha 24 is Markov") {
    const auto r = markov_entropy(builtins::example5(Rational(24)), 20);
    REQUIRE(r);
    CHECK(r->markov->radius_lo <= 24);
    CHECK(r->markov->radius_hi >= 24);
    CHECK(std::abs(r->decimal - std::log(24.0)) < 1e-9);
  }
  SUBCASE("non-uniform slopes") {
    const auto r = markov_entropy(mixed_slopes(), 20);
    REQUIRE(r);
    CHECK(r->markov->partition == std::vector<Rational>{0, Rational(3, 5)});
    CHECK(std::abs(r->decimal - std::log(2.0)) < 1e-9);
  }
  SUBCASE("irrational Perron root is enclosed") {
    // Perron root 1 + sqrt 2
    const auto m = CircleMapPL::make({0, Rational(1, 3), Rational(2, 3), 1}, {0, Rational(1, 3), Rational(5, 3), 1});
    const auto r = markov_entropy(m, 20);
    REQUIRE(r);
    CHECK(r->markov->radius_lo < r->markov->radius_hi);
    CHECK(r->markov->radius_hi - r->markov->radius_lo < Rational(1, 1000000000));
    CHECK(r->markov->radius_lo < 1 + std::sqrt(2.0) + 1e-12);
    CHECK(r->markov->radius_hi > 1 + std::sqrt(2.0) - 1e-12);
    CHECK_FALSE(r->exact_form);
    for (const auto& row : r->markov->transition_matrix) {
      std::size_t s = 0;
      for (auto x : row) s += x;
      CHECK(s >= 1);
    }
    const auto b = entropy_bracket(m, 6);
    for (const auto& [n, ub] : b.upper_bounds) CHECK(ub >= r->decimal - 1e-12);
  }
}

TEST_CASE("markov transition counts match the image arcs") {
  // row i must cover exactly the arcs making up the image of arc i
  const auto m = builtins::example5(Rational(24));
  const auto r = markov_entropy(m, 20);
  REQUIRE(r);
  const auto& p = r->markov->partition;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Rational b = i + 1 < p.size() ? p[i + 1] : Rational(1);
    const Rational image_len = abs(m.lift(b) - m.lift(p[i]));
    Rational covered = 0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      const Rational bj = j + 1 < p.size() ? p[j + 1] : Rational(1);
      covered += Rational(static_cast<unsigned long>(r->markov->transition_matrix[i][j])) * (bj - p[j]);
    }
    CHECK(covered == image_len);
  }
}

TEST_CASE("entropy bracket") {
  SUBCASE("tent: every bound is log 2") {
    const auto r = entropy_bracket(builtins::tent(), 10);
    CHECK_FALSE(r.certified);
    REQUIRE(r.upper_bounds.size() == 10);
    for (const auto& [n, b] : r.upper_bounds) CHECK(std::abs(b - std::log(2.0)) < 1e-12);
  }
  SUBCASE("Example 5 bounds decrease toward log 12.1") {
    const auto m = builtins::example5(Rational(121, 10));
    const auto r = entropy_bracket(m, 4);
    const oracle::Table t{m.breakpoints(), m.values()};
    for (std::size_t n = 1; n <= 3; ++n) CHECK(r.piece_counts[n - 1].second == oracle_pieces(t, n));
    const double h = std::log(12.1);
    for (std::size_t i = 0; i < r.upper_bounds.size(); ++i) {
      CHECK(r.upper_bounds[i].second >= h);
      if (i > 0) CHECK(r.upper_bounds[i].second < r.upper_bounds[i - 1].second);
    }
    // finite-n gap (1/n) log(P_n / 12.1^n) is still about 0.12 at n = 4
    CHECK(r.upper_bounds.back().second - h < 0.13);
    REQUIRE(r.lower_estimate);
    CHECK(std::abs(r.lower_estimate->second - h) < 0.1);
  }
  SUBCASE("slope three") {
    const auto m = slope_three();
    const auto r = entropy_bracket(m, 8);
    const auto u = entropy_uniform(m);
    REQUIRE(u);
    for (const auto& [n, b] : r.upper_bounds) CHECK(b >= u->decimal - 1e-12);
    REQUIRE(r.lower_estimate);
    CHECK(std::abs(r.lower_estimate->second - u->decimal) < 0.1);
  }
  SUBCASE("n_max below 2 is rejected") { CHECK_THROWS_AS(entropy_bracket(builtins::tent(), 1), ValidationError); }
  SUBCASE("branch cap") {
    Limits tight;
    tight.max_branches = 1000;
    CHECK_THROWS_AS(entropy_bracket(builtins::example5(Rational(121, 10)), 4, kDefaultSeed, tight), ResourceError);
  }
  SUBCASE("seeded and deterministic") {
    const auto m = builtins::example5(Rational(121, 10));
    const auto a = entropy_bracket(m, 3, 5);
    const auto b = entropy_bracket(m, 3, 5);
    CHECK(a.lower_sample == b.lower_sample);
    CHECK(a.decimal == b.decimal);
  }
}

TEST_CASE("methods agree") {
  const auto t = builtins::tent();
  const auto u = entropy_uniform(t);
  const auto m = markov_entropy(t, 20);
  REQUIRE(u);
  REQUIRE(m);
  CHECK(std::abs(u->decimal - m->decimal) <= 1e-9);
  CHECK(compute_entropy(t).method == EntropyMethod::uniform_slope);
  CHECK(compute_entropy(mixed_slopes()).method == EntropyMethod::markov);
  const auto e5_24 = builtins::example5(Rational(24));
  CHECK(std::abs(entropy_uniform(e5_24)->decimal - markov_entropy(e5_24, 20)->decimal) <= 1e-9);
}

TEST_CASE("property: upper bounds refine under doubling") {
  // P_{2k} <= P_k^2, so the bound at 2k never exceeds the bound at k
  const std::vector<CircleMapPL> maps{builtins::tent(), mixed_slopes(), slope_three(),
                                      builtins::example5(Rational(121, 10)),
                                      CircleMapPL::make({0, Rational(1, 3), Rational(2, 3), 1}, {0, 1, Rational(1, 3), 1})};
  for (const auto& m : maps) {
    const std::size_t n_max = m.piece_count() > 4 ? 4 : 8;
    const auto r = entropy_bracket(m, n_max);
    for (std::size_t k = 1; 2 * k <= n_max; ++k) {
      CHECK(r.upper_bounds[2 * k - 1].second <= r.upper_bounds[k - 1].second + 1e-12);
    }
  }
}

TEST_CASE("locating q against the entropy") {
  const auto e5 = compute_entropy(builtins::example5(Rational(121, 10)));
  CHECK(locate(e5, Rational(1, 13)) == Regime::above_entropy);
  CHECK(locate(e5, Rational(1, 12)) == Regime::at_or_below_entropy);
  CHECK(locate(e5, Rational(10, 121)) == Regime::at_or_below_entropy);
  CHECK(*exact_boundary(e5) == Rational(10, 121));

  const auto br = entropy_bracket(builtins::example5(Rational(121, 10)), 3);
  CHECK(locate(br, Rational(1, 20)) == Regime::above_entropy);
  CHECK(locate(br, Rational(1, 12)) == Regime::undetermined);
  CHECK_FALSE(exact_boundary(br));
}
