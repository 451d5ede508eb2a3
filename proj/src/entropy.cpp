#include "circlekms/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <unordered_set>

namespace circlekms {

namespace {

double log_of(const Rational& r) {
  // log(p/q) = log p - log q keeps precision for large p and q
  return std::log(r.get_num().get_d()) - std::log(r.get_den().get_d());
}

EntropyResult exact_result(EntropyMethod method, const Rational& lambda) {
  EntropyResult out;
  out.method = method;
  out.exact_form = "log(" + to_string(lambda) + ")";
  out.exp_entropy = lambda;
  out.decimal = log_of(lambda);
  out.certified = true;
  return out;
}

constexpr std::size_t kMaxMarkovArcs = 2048;

struct Enclosure {
  Rational lo;
  Rational hi;
};

using Matrix = std::vector<std::vector<std::size_t>>;

// Strongly connected components (Tarjan, iterative).
std::vector<std::vector<std::size_t>> components(const Matrix& a) {
  const std::size_t r = a.size();
  std::vector<long> index(r, -1), low(r, 0);
  std::vector<bool> on_stack(r, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> out;
  long counter = 0;
  for (std::size_t root = 0; root < r; ++root) {
    if (index[root] >= 0) continue;
    std::vector<std::pair<std::size_t, std::size_t>> work{{root, 0}};
    while (!work.empty()) {
      auto& [v, next] = work.back();
      if (next == 0 && index[v] < 0) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
      }
      bool descended = false;
      while (next < r) {
        const std::size_t w = next++;
        if (a[v][w] == 0) continue;
        if (index[w] < 0) {
          work.emplace_back(w, 0);
          descended = true;
          break;
        }
        if (on_stack[w]) low[v] = std::min(low[v], index[w]);
      }
      if (descended) continue;
      if (low[v] == index[v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
      const std::size_t done = v;
      work.pop_back();
      if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[done]);
    }
  }
  return out;
}

// Best rational approximation with denominator at most max_den.
Rational approximate(double x, long max_den) {
  Integer h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double y = x;
  for (int i = 0; i < 40; ++i) {
    const double fl = std::floor(y);
    const Integer a(fl);
    const Integer h2 = a * h1 + h0;
    const Integer k2 = a * k1 + k0;
    if (k2 > max_den) break;
    h0 = h1, h1 = h2, k0 = k1, k1 = k2;
    if (y - fl < 1e-12) break;
    y = 1.0 / (y - fl);
  }
  Rational r(h1, k1);
  r.canonicalize();
  return r;
}

// Kernel vector of (A - c I) when the kernel is one-dimensional.
std::optional<std::vector<Rational>> kernel_vector(const Matrix& a, const Rational& c) {
  const std::size_t r = a.size();
  std::vector<std::vector<Rational>> m(r, std::vector<Rational>(r));
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) m[i][j] = Rational(static_cast<unsigned long>(a[i][j])) - (i == j ? c : 0);
  }
  std::vector<long> pivot_col;
  std::size_t row = 0;
  for (std::size_t col = 0; col < r && row < r; ++col) {
    std::size_t p = row;
    while (p < r && m[p][col] == 0) ++p;
    if (p == r) continue;
    std::swap(m[p], m[row]);
    const Rational inv = 1 / m[row][col];
    for (auto& x : m[row]) x *= inv;
    for (std::size_t i = 0; i < r; ++i) {
      if (i == row || m[i][col] == 0) continue;
      const Rational f = m[i][col];
      for (std::size_t j = col; j < r; ++j) m[i][j] -= f * m[row][j];
    }
    pivot_col.push_back(static_cast<long>(col));
    ++row;
  }
  if (row + 1 != r) return std::nullopt;
  std::size_t free_col = 0;
  for (std::size_t i = 0; i < pivot_col.size() && static_cast<std::size_t>(pivot_col[i]) == free_col; ++i) ++free_col;
  std::vector<Rational> x(r, 0);
  x[free_col] = 1;
  for (std::size_t i = 0; i < pivot_col.size(); ++i) x[pivot_col[i]] = -m[i][free_col];
  return x;
}

// Collatz-Wielandt: for x > 0, min (Ax)_i / x_i <= rho(A) <= max (Ax)_i / x_i.
Enclosure collatz_wielandt(const Matrix& a, const std::vector<Rational>& x) {
  Enclosure e;
  for (std::size_t i = 0; i < a.size(); ++i) {
    Rational ax = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (a[i][j] != 0) ax += Rational(static_cast<unsigned long>(a[i][j])) * x[j];
    }
    const Rational ratio = ax / x[i];
    if (i == 0 || ratio < e.lo) e.lo = ratio;
    if (i == 0 || ratio > e.hi) e.hi = ratio;
  }
  return e;
}

// Irreducible block: float power iteration for a test vector, then an exact
// attempt at a rational Perron pair, then exact ratios.
Enclosure irreducible_enclosure(const Matrix& a) {
  const std::size_t r = a.size();
  std::vector<double> v(r, 1.0);
  std::vector<double> w(r);
  double estimate = 0;
  for (int it = 0; it < 20000; ++it) {
    double norm = 0;
    for (std::size_t i = 0; i < r; ++i) {
      double s = v[i];  // A + I: same Perron vector, aperiodic
      for (std::size_t j = 0; j < r; ++j) s += static_cast<double>(a[i][j]) * v[j];
      w[i] = s;
      norm = std::max(norm, s);
    }
    double change = 0;
    for (std::size_t i = 0; i < r; ++i) {
      const double nv = w[i] / norm;
      change = std::max(change, std::abs(nv - v[i]));
      v[i] = nv;
    }
    estimate = norm - 1.0;
    if (change < 1e-15) break;
  }
  if (r <= 200) {
    const Rational c = approximate(estimate, 10000);
    if (auto x = kernel_vector(a, c)) {
      if (sgn((*x)[0]) < 0) {
        for (auto& xi : *x) xi = -xi;
      }
      if (std::all_of(x->begin(), x->end(), [](const Rational& xi) { return sgn(xi) > 0; })) {
        return collatz_wielandt(a, *x);
      }
    }
  }
  std::vector<Rational> x(r);
  for (std::size_t i = 0; i < r; ++i) {
    x[i] = Rational(std::max(v[i], 1e-300));
    x[i].canonicalize();
  }
  return collatz_wielandt(a, x);
}

// rho(A) is the largest rho over the irreducible diagonal blocks.
Enclosure perron_enclosure(const Matrix& a) {
  Enclosure e{0, 0};
  for (const auto& comp : components(a)) {
    Matrix block(comp.size(), std::vector<std::size_t>(comp.size()));
    for (std::size_t i = 0; i < comp.size(); ++i) {
      for (std::size_t j = 0; j < comp.size(); ++j) block[i][j] = a[comp[i]][comp[j]];
    }
    if (comp.size() == 1 && block[0][0] == 0) continue;
    const auto b = irreducible_enclosure(block);
    e.lo = std::max(e.lo, b.lo);
    e.hi = std::max(e.hi, b.hi);
  }
  std::size_t min_row = SIZE_MAX;
  std::size_t max_row = 0;
  for (const auto& row : a) {
    std::size_t s = 0;
    for (auto x : row) s += x;
    min_row = std::min(min_row, s);
    max_row = std::max(max_row, s);
  }
  e.lo = std::max(e.lo, Rational(static_cast<unsigned long>(min_row)));
  e.hi = std::min(e.hi, Rational(static_cast<unsigned long>(max_row)));
  return e;
}

std::unordered_set<CirclePoint, CirclePointHash> breakpoint_orbits(const CircleMapPL& map, std::size_t depth) {
  std::unordered_set<CirclePoint, CirclePointHash> pts;
  for (std::size_t i = 0; i + 1 < map.breakpoints().size(); ++i) {
    CirclePoint x(map.breakpoints()[i]);
    for (std::size_t k = 0; k <= depth && pts.insert(x).second; ++k) x = eval_circle(map, x);
  }
  return pts;
}

}  // namespace

std::string to_string(EntropyMethod m) {
  switch (m) {
    case EntropyMethod::uniform_slope:
      return "uniform-slope";
    case EntropyMethod::markov:
      return "markov";
    case EntropyMethod::lap_bracket:
      return "lap-bracket";
  }
  return "?";
}

std::optional<EntropyResult> entropy_uniform(const CircleMapPL& map) {
  const Rational a = abs(map.slope(0));
  for (std::size_t i = 1; i < map.piece_count(); ++i) {
    if (abs(map.slope(i)) != a) return std::nullopt;
  }
  if (a <= 1) return std::nullopt;
  return exact_result(EntropyMethod::uniform_slope, a);
}

std::optional<EntropyResult> markov_entropy(const CircleMapPL& map, std::size_t orbit_depth, const Limits& limits) {
  if (orbit_depth > limits.max_depth) {
    throw ResourceError(ResourceError::Kind::depth, "orbit depth exceeds cap " + std::to_string(limits.max_depth));
  }
  std::set<Rational> points;
  for (std::size_t i = 0; i + 1 < map.breakpoints().size(); ++i) {
    std::unordered_set<CirclePoint, CirclePointHash> seen;
    CirclePoint x(map.breakpoints()[i]);
    bool closed = false;
    for (std::size_t k = 0; k <= orbit_depth; ++k) {
      if (!seen.insert(x).second) {
        closed = true;
        break;
      }
      points.insert(x.position());
      if (points.size() > kMaxMarkovArcs) return std::nullopt;
      x = eval_circle(map, x);
    }
    if (!closed) return std::nullopt;
  }

  MarkovData data;
  data.partition.assign(points.begin(), points.end());
  const std::size_t r = data.partition.size();
  auto right_end = [&](std::size_t i) { return i + 1 < r ? data.partition[i + 1] : Rational(1); };
  data.transition_matrix.assign(r, std::vector<std::size_t>(r, 0));
  for (std::size_t i = 0; i < r; ++i) {
    // breakpoints are partition points, so the lift is affine on each arc
    const Rational fa = map.lift(data.partition[i]);
    const Rational fb = map.lift(right_end(i));
    const Rational lo = std::min(fa, fb);
    const Rational hi = std::max(fa, fb);
    for (std::size_t j = 0; j < r; ++j) {
      const Integer first = ceil(lo - data.partition[j]);
      const Integer last = floor(hi - right_end(j));
      if (last >= first) data.transition_matrix[i][j] = Integer(last - first + 1).get_ui();
    }
  }
  const auto enc = perron_enclosure(data.transition_matrix);
  data.radius_lo = enc.lo;
  data.radius_hi = enc.hi;

  EntropyResult out;
  if (enc.lo == enc.hi) {
    out = exact_result(EntropyMethod::markov, enc.lo);
  } else {
    out.method = EntropyMethod::markov;
    out.decimal = 0.5 * (log_of(enc.lo) + log_of(enc.hi));
    out.certified = true;
  }
  out.markov = std::move(data);
  return out;
}

EntropyResult entropy_bracket(const CircleMapPL& map, std::size_t n_max, std::uint64_t seed, const Limits& limits) {
  if (n_max < 2) throw ValidationError("entropy bracket needs n_max >= 2");
  EntropyResult out;
  out.method = EntropyMethod::lap_bracket;
  for (std::size_t n = 1; n <= n_max; ++n) {
    if (n > 2 && out.piece_counts.back().second * out.piece_counts.front().second > kBracketPieceBudget) break;
    const auto bs = iterate_branches(map, n, limits);
    const std::size_t p = bs.monotone_piece_count();
    out.piece_counts.emplace_back(n, p);
    out.upper_bounds.emplace_back(n, std::log(static_cast<double>(p)) / static_cast<double>(n));
  }

  // sample point away from breakpoint orbits (those can have fewer preimages)
  const auto exceptional = breakpoint_orbits(map, 2 * n_max);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> den(50, 1000);
  CirclePoint y;
  do {
    const long d = den(rng);
    std::uniform_int_distribution<long> num(1, d - 1);
    y = CirclePoint(ratio(num(rng), d));
  } while (exceptional.count(y) != 0);
  out.lower_sample = y.position();

  std::vector<CirclePoint> level{y};
  for (std::size_t n = 1; n <= n_max; ++n) {
    std::vector<CirclePoint> next;
    for (const auto& z : level) {
      auto pre = preimages_once(map, z);
      next.insert(next.end(), pre.begin(), pre.end());
    }
    if (next.empty() || next.size() > std::min(limits.max_branches, kSampleBudget)) break;
    level = std::move(next);
    out.lower_estimate = std::make_pair(n, std::log(static_cast<double>(level.size())) / static_cast<double>(n));
  }

  double upper = out.upper_bounds.front().second;
  for (const auto& [n, b] : out.upper_bounds) upper = std::min(upper, b);
  const double lower = out.lower_estimate ? std::min(out.lower_estimate->second, upper) : 0.0;
  out.decimal = 0.5 * (lower + upper);
  out.certified = false;
  return out;
}

EntropyResult compute_entropy(const CircleMapPL& map, std::size_t n_max, std::size_t orbit_depth, std::uint64_t seed,
                              const Limits& limits) {
  if (auto u = entropy_uniform(map)) return *u;
  if (auto m = markov_entropy(map, orbit_depth, limits)) return *m;
  return entropy_bracket(map, n_max, seed, limits);
}

Regime locate(const EntropyResult& h, const Rational& q) {
  if (h.exp_entropy) {
    // q < 1/lambda  <=>  q * lambda < 1
    return q * *h.exp_entropy < 1 ? Regime::above_entropy : Regime::at_or_below_entropy;
  }
  if (h.markov) {
    if (q * h.markov->radius_hi < 1) return Regime::above_entropy;
    if (q * h.markov->radius_lo >= 1) return Regime::at_or_below_entropy;
    return Regime::undetermined;
  }
  // q^n P_n < 1 gives q < P_n^{-1/n} <= e^{-h}
  for (const auto& [n, p] : h.piece_counts) {
    if (pow(q, static_cast<long>(n)) * Rational(static_cast<unsigned long>(p)) < 1) return Regime::above_entropy;
  }
  return Regime::undetermined;
}

std::optional<Rational> exact_boundary(const EntropyResult& h) {
  if (!h.exp_entropy) return std::nullopt;
  return Rational(1) / *h.exp_entropy;
}

}  // namespace circlekms
