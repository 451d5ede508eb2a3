#include "circlekms/measures.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace circlekms {

namespace {

// Piece counts beyond this are not worth computing for a tail bound.
constexpr std::size_t kTailPieceBudget = 200000;
constexpr std::size_t kAnchorMax = 6;

struct TailData {
  /// P_j for j = 1..size
  std::vector<std::size_t> pieces;
  std::size_t J = 0;
  /// interval laps and total variation of the lift of the J-th iterate
  Rational laps_J = 1;
  Rational variation_J = 1;
  Rational max_slope;
  std::size_t turning = 0;
};

TailData tail_data(const CircleMapPL& map, std::size_t K, const Limits& limits) {
  TailData d;
  for (std::size_t i = 0; i < map.piece_count(); ++i) d.max_slope = std::max(d.max_slope, Rational(abs(map.slope(i))));
  for (std::size_t i = 0; i + 1 < map.breakpoints().size(); ++i) {
    if (map.valency_at(CirclePoint(map.breakpoints()[i])).turning()) ++d.turning;
  }
  const std::size_t j_max = std::min(K + 1, kAnchorMax);
  for (std::size_t j = 1; j <= j_max; ++j) {
    if (!d.pieces.empty() && d.pieces.back() * d.pieces.front() > kTailPieceBudget) break;
    BranchSet bs;
    try {
      bs = iterate_branches(map, j, limits);
    } catch (const ResourceError&) {
      break;
    }
    d.pieces.push_back(bs.monotone_piece_count());
    if (j <= K) {
      d.J = j;
      std::size_t runs = 0;
      Rational var = 0;
      for (std::size_t p = 0; p < bs.pieces.size(); ++p) {
        if (p == 0 || bs.pieces[p].sign() != bs.pieces[p - 1].sign()) ++runs;
        var += abs(bs.pieces[p].slope) * (bs.pieces[p].hi - bs.pieces[p].lo);
      }
      d.laps_J = Rational(static_cast<unsigned long>(runs));
      d.variation_J = var;
    }
  }
  return d;
}

TailEstimate apply_tail(const TailData& d, const std::vector<Integer>& counts, const Rational& q) {
  TailEstimate best;
  const std::size_t K = counts.size() - 1;
  auto offer = [&](const Rational& b, const char* method) {
    if (!best.bound || b < *best.bound) {
      best.bound = b;
      best.method = method;
    }
  };

  // anchored: every k > K is k0 + a j with K - j < k0 <= K, a >= 1, and
  // n_{k0 + a j} <= n_{k0} P_j^a since a point has at most P_j preimages
  for (std::size_t j = 1; j <= d.pieces.size(); ++j) {
    const Rational rho = pow(q, static_cast<long>(j)) * Rational(static_cast<unsigned long>(d.pieces[j - 1]));
    if (rho >= 1) continue;
    Rational head = 0;
    for (std::size_t k0 = K + 1 - j; k0 <= K; ++k0) head += Rational(counts[k0]) * pow(q, static_cast<long>(k0));
    offer(head * rho / (1 - rho), "anchored");
  }

  // recursion: with V_k the variation and L_k the laps of the lift of the
  // k-th iterate on [0,1], n_k <= V_k + L_k, V_k <= v V_{k-1} and
  // L_k <= (1 + C) L_{k-1} + C V_{k-1}, C the number of turning points
  const Rational v = d.max_slope;
  const Rational C(static_cast<unsigned long>(d.turning));
  if (v * q < 1 && q * (1 + C) < 1) {
    Rational V = d.variation_J;
    Rational L = d.laps_J;
    for (std::size_t k = d.J + 1; k <= K + 1; ++k) {
      L = (1 + C) * L + C * V;
      V = v * V;
    }
    const Rational xk = pow(q, static_cast<long>(K + 1));
    const Rational sum_v = V * xk / (1 - v * q);
    const Rational sum_l = (xk * L + q * C * sum_v) / (1 - q * (1 + C));
    offer(sum_v + sum_l, "recursion");
  }
  return best;
}

std::vector<Integer> preimage_counts(const CircleMapPL& map, const CirclePoint& y, std::size_t K,
                                     const Limits& limits) {
  if (K > limits.max_depth) {
    throw ResourceError(ResourceError::Kind::depth, "depth exceeds cap " + std::to_string(limits.max_depth));
  }
  std::vector<Integer> counts{1};
  std::vector<CirclePoint> level{y};
  for (std::size_t k = 1; k <= K; ++k) {
    std::vector<CirclePoint> next;
    for (const auto& z : level) {
      auto pre = preimages_once(map, z);
      next.insert(next.end(), pre.begin(), pre.end());
      if (next.size() > limits.max_branches) {
        throw ResourceError(ResourceError::Kind::branches,
                            "preimage count exceeds cap " + std::to_string(limits.max_branches));
      }
    }
    level = std::move(next);
    counts.emplace_back(static_cast<unsigned long>(level.size()));
  }
  return counts;
}

void check_regime(const EntropyResult& entropy, const Rational& q) {
  switch (locate(entropy, q)) {
    case Regime::above_entropy:
      return;
    case Regime::at_or_below_entropy: {
      std::string msg = "divergent partition function: q = " + to_string(q) + " is not below e^{-h}";
      if (auto b = exact_boundary(entropy)) msg += " = " + to_string(*b);
      throw DivergentError(msg);
    }
    case Regime::undetermined:
      throw UndeterminedError("undetermined: q = " + to_string(q) +
                              " cannot be compared with e^{-h} using the available entropy bounds");
  }
}

Rational random_unit(std::mt19937_64& rng) {
  std::uniform_int_distribution<long> d(0, 1000);
  return ratio(d(rng), 1000);
}

// Half-width (in the domain) that keeps the image of an interval under one
// piece strictly shorter than a full turn.
Rational injective_halfwidth(const CircleMapPL& map, std::size_t piece) {
  return Rational(49, 100) / abs(map.slope(piece));
}

void add_lookup(AtomicMeasure& m) {
  m.lookup.clear();
  for (std::size_t i = 0; i < m.atoms.size(); ++i) m.lookup.emplace(m.atoms[i].atom.point, i);
}

}  // namespace

InverseTemperature InverseTemperature::from_q(const Rational& q) {
  if (q <= 0 || q >= 1) throw ValidationError("q must lie in (0,1), got " + to_string(q));
  InverseTemperature t;
  t.q = q;
  t.beta_decimal = std::log(q.get_den().get_d()) - std::log(q.get_num().get_d());
  return t;
}

TailEstimate preimage_tail_bound(const CircleMapPL& map, const std::vector<Integer>& counts, const Rational& q,
                                 const Limits& limits) {
  if (counts.empty()) throw std::invalid_argument("counts must hold n_0");
  return apply_tail(tail_data(map, counts.size() - 1, limits), counts, q);
}

PartitionFunction partition_function(const CircleMapPL& map, const CriticalCatalog& catalog, std::size_t index,
                                     const InverseTemperature& beta, std::size_t K, const EntropyResult& entropy,
                                     const Limits& limits) {
  if (index >= catalog.critical.size() || !catalog.critical[index].terminal) {
    throw ValidationError("partition function needs a terminal critical point");
  }
  check_regime(entropy, beta.q);
  PartitionFunction z;
  z.base = catalog.critical[index].point;
  z.counts = preimage_counts(map, z.base, K, limits);
  z.value = 0;
  for (std::size_t k = 0; k <= K; ++k) z.value += Rational(z.counts[k]) * pow(beta.q, static_cast<long>(k));
  const auto tail = preimage_tail_bound(map, z.counts, beta.q, limits);
  z.tail_bound = tail.bound;
  z.tail_method = tail.method;
  return z;
}

std::optional<std::size_t> AtomicMeasure::index_of(const CirclePoint& p) const {
  auto it = lookup.find(p);
  if (it == lookup.end()) return std::nullopt;
  return it->second;
}

std::optional<Rational> AtomicMeasure::weight_of(const CirclePoint& p) const {
  if (auto i = index_of(p)) return atoms[*i].weight;
  return std::nullopt;
}

Rational AtomicMeasure::total_weight() const {
  Rational s = 0;
  for (const auto& a : atoms) s += a.weight;
  return s;
}

AtomicMeasure class_measure(const CircleMapPL& map, const CriticalCatalog& catalog, std::size_t class_index,
                            const InverseTemperature& beta, std::size_t K, const EntropyResult& entropy,
                            const Limits& limits) {
  if (class_index >= catalog.classes.size()) throw ValidationError("no class " + std::to_string(class_index));
  check_regime(entropy, beta.q);
  const auto& cls = catalog.classes[class_index];
  const Rational& q = beta.q;

  AtomicMeasure m;
  m.class_index = class_index;
  m.q = q;
  m.depth = K;

  auto atoms = enumerate_orbit_atoms(map, catalog, class_index, K, limits);
  const TailData td = tail_data(map, K, limits);

  std::unordered_map<std::size_t, long> t_of;
  for (std::size_t s = 0; s < cls.members.size(); ++s) {
    const std::size_t idx = cls.members[s];
    if (!catalog.critical[idx].terminal) continue;
    ClassWeight cw;
    cw.terminal = idx;
    cw.point = catalog.critical[idx].point;
    cw.t_exponent = cls.level_of(s);
    cw.partition.base = cw.point;
    cw.partition.counts.assign(K + 1, 0);
    t_of[idx] = cw.t_exponent;
    m.class_weights.push_back(std::move(cw));
  }
  auto weight_slot = [&](std::size_t terminal) -> ClassWeight& {
    for (auto& cw : m.class_weights) {
      if (cw.terminal == terminal) return cw;
    }
    throw std::logic_error("atom attached to a point that is not a terminal class member");
  };
  for (const auto& a : atoms) {
    auto& cw = weight_slot(a.via_terminal);
    if (a.level != cw.t_exponent + static_cast<long>(a.preimage_depth)) {
      throw std::logic_error("inconsistent witnesses: level of atom does not match its terminal");
    }
    cw.partition.counts[a.preimage_depth] += 1;
  }

  m.normalization = 0;
  Rational tail_total = 0;
  bool tails_bounded = true;
  for (auto& cw : m.class_weights) {
    auto& z = cw.partition;
    z.value = 0;
    for (std::size_t k = 0; k <= K; ++k) z.value += Rational(z.counts[k]) * pow(q, static_cast<long>(k));
    const auto tail = apply_tail(td, z.counts, q);
    z.tail_bound = tail.bound;
    z.tail_method = tail.method;
    const Rational qt = pow(q, cw.t_exponent);
    m.normalization += qt * z.value;
    if (tail.bound) {
      tail_total += qt * *tail.bound;
    } else {
      tails_bounded = false;
    }
  }
  for (auto& cw : m.class_weights) {
    cw.alpha_weight = pow(q, cw.t_exponent) * cw.partition.value / m.normalization;
  }
  if (tails_bounded) m.tail_bound = tail_total / m.normalization;

  // levels are small integers; cache the powers
  std::unordered_map<long, Rational> powers;
  m.atoms.reserve(atoms.size());
  for (auto& a : atoms) {
    auto it = powers.find(a.level);
    if (it == powers.end()) it = powers.emplace(a.level, pow(q, a.level) / m.normalization).first;
    m.atoms.push_back({std::move(a), it->second});
  }
  add_lookup(m);
  return m;
}

AtomicMeasure reweight(const AtomicMeasure& m, const Rational& q) {
  AtomicMeasure out = m;
  out.q = q;
  out.normalization = 0;
  for (auto& cw : out.class_weights) {
    cw.partition.value = 0;
    for (std::size_t k = 0; k < cw.partition.counts.size(); ++k) {
      cw.partition.value += Rational(cw.partition.counts[k]) * pow(q, static_cast<long>(k));
    }
    cw.partition.tail_bound.reset();
    cw.partition.tail_method = "none";
    out.normalization += pow(q, cw.t_exponent) * cw.partition.value;
  }
  for (auto& cw : out.class_weights) cw.alpha_weight = pow(q, cw.t_exponent) * cw.partition.value / out.normalization;
  out.tail_bound.reset();
  for (auto& a : out.atoms) a.weight = pow(q, a.atom.level) / out.normalization;
  return out;
}

double DistributionApprox::cdf_at(double t) const {
  if (t <= 0) return 0.0;
  if (t >= 1) return 1.0;
  const double x = t * static_cast<double>(grid.size() - 1);
  const std::size_t i = std::min(static_cast<std::size_t>(x), grid.size() - 2);
  const double f = x - static_cast<double>(i);
  return cdf[i] + f * (cdf[i + 1] - cdf[i]);
}

double DistributionApprox::measure_of(double u, double v) const {
  auto lifted = [&](double x) {
    const double fl = std::floor(x);
    return fl + cdf_at(x - fl);
  };
  return lifted(v) - lifted(u);
}

namespace {

std::vector<double> perron_vector(const std::vector<std::vector<std::size_t>>& a) {
  const std::size_t r = a.size();
  std::vector<double> v(r, 1.0), w(r);
  for (int it = 0; it < 20000; ++it) {
    double norm = 0;
    for (std::size_t i = 0; i < r; ++i) {
      double s = v[i];
      for (std::size_t j = 0; j < r; ++j) s += static_cast<double>(a[i][j]) * v[j];
      w[i] = s;
      norm += s;
    }
    double change = 0;
    for (std::size_t i = 0; i < r; ++i) {
      change = std::max(change, std::abs(w[i] / norm - v[i]));
      v[i] = w[i] / norm;
    }
    if (change < 1e-16) break;
  }
  return v;
}

}  // namespace

DistributionApprox maximal_measure(const CircleMapPL& map, const EntropyResult& entropy, std::size_t resolution,
                                   double tolerance, std::uint64_t seed) {
  if (resolution < 2) throw ValidationError("resolution must be at least 2");
  DistributionApprox nu;
  nu.grid.resize(resolution + 1);
  nu.cdf.resize(resolution + 1);
  for (std::size_t i = 0; i <= resolution; ++i) {
    nu.grid[i] = static_cast<double>(i) / static_cast<double>(resolution);
    nu.cdf[i] = nu.grid[i];
  }

  if (auto u = entropy_uniform(map)) {
    // Lebesgue measure scales by the slope on every injectivity interval
    nu.scale_factor = u->exp_entropy->get_d();
    nu.exact_lebesgue = true;
    nu.method = "uniform-slope";
    nu.max_scaling_residual = lebesgue_scaling_residual(map, *u->exp_entropy, 100, seed).get_d();
    nu.certified = nu.max_scaling_residual == 0.0;
    return nu;
  }

  if (entropy.markov) {
    const auto& md = *entropy.markov;
    nu.scale_factor = Rational((md.radius_lo + md.radius_hi) / 2).get_d();
    nu.method = "markov";
    // arc masses from the Perron vector: nu(arc i) = lambda^{-1} sum_j M_ij nu(arc j)
    const auto mass = perron_vector(md.transition_matrix);
    std::vector<double> knots(md.partition.size() + 1), at(md.partition.size() + 1, 0.0);
    for (std::size_t i = 0; i < md.partition.size(); ++i) knots[i] = md.partition[i].get_d();
    knots.back() = 1.0;
    for (std::size_t i = 0; i < mass.size(); ++i) at[i + 1] = at[i] + mass[i];
    for (std::size_t g = 0; g <= resolution; ++g) {
      const double t = nu.grid[g];
      std::size_t i = 0;
      while (i + 2 < knots.size() && knots[i + 1] <= t) ++i;
      nu.cdf[g] = at[i] + (at[i + 1] - at[i]) * (t - knots[i]) / (knots[i + 1] - knots[i]);
    }
  } else {
    nu.scale_factor = std::exp(entropy.decimal);
    nu.method = "pullback";
  }

  // normalized pullback: nu([0,t]) = a^{-1} sum over pieces of nu(f(piece cut at t))
  const auto& bp = map.breakpoints();
  std::vector<double> b(bp.size()), fv(bp.size()), s(map.piece_count());
  for (std::size_t i = 0; i < bp.size(); ++i) {
    b[i] = bp[i].get_d();
    fv[i] = map.values()[i].get_d();
  }
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = map.slope(i).get_d();
  std::vector<double> next(resolution + 1);
  for (std::size_t it = 0; it < 5000; ++it) {
    for (std::size_t g = 0; g <= resolution; ++g) {
      const double t = nu.grid[g];
      double acc = 0;
      for (std::size_t i = 0; i < s.size() && b[i] < t; ++i) {
        const double end = std::min(t, b[i + 1]);
        const double y0 = fv[i];
        const double y1 = fv[i] + s[i] * (end - b[i]);
        acc += y1 >= y0 ? nu.measure_of(y0, y1) : nu.measure_of(y1, y0);
      }
      next[g] = acc;
    }
    const double total = next.back();
    double change = 0;
    for (std::size_t g = 0; g <= resolution; ++g) {
      const double val = next[g] / total;
      change = std::max(change, std::abs(val - nu.cdf[g]));
      nu.cdf[g] = val;
    }
    nu.iterations = it + 1;
    if (change < tolerance * 1e-3) break;
  }
  nu.max_scaling_residual = verify_scaling(map, nu, 200, seed);
  nu.certified = nu.max_scaling_residual <= tolerance;
  return nu;
}

AtomicScalingReport verify_scaling(const CircleMapPL& map, const AtomicMeasure& measure, std::size_t samples,
                                   std::uint64_t seed) {
  AtomicScalingReport rep;
  rep.max_residual = 0;
  std::vector<std::size_t> movable;
  for (std::size_t i = 0; i < measure.atoms.size(); ++i) {
    if (measure.atoms[i].atom.preimage_depth >= 1) movable.push_back(i);
  }
  if (movable.empty()) return rep;
  std::vector<std::size_t> by_position(measure.atoms.size());
  for (std::size_t i = 0; i < by_position.size(); ++i) by_position[i] = i;
  std::sort(by_position.begin(), by_position.end(), [&](std::size_t x, std::size_t y) {
    return measure.atoms[x].atom.point < measure.atoms[y].atom.point;
  });

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, movable.size() - 1);
  const Rational q_inv = 1 / measure.q;
  for (std::size_t s = 0; s < samples; ++s) {
    const Rational& v = measure.atoms[movable[pick(rng)]].atom.point.position();
    const std::size_t piece = map.piece_at(v);
    const Rational w = injective_halfwidth(map, piece);
    const Rational lo_limit = std::max(map.breakpoints()[piece], Rational(v - w));
    const Rational hi_limit = std::min(map.breakpoints()[piece + 1], Rational(v + w));
    const Rational lo = v - (v - lo_limit) * random_unit(rng);
    Rational hi = v + (hi_limit - v) * random_unit(rng);
    if (hi >= 1) hi = v;  // stay inside [0,1)

    auto first = std::lower_bound(by_position.begin(), by_position.end(), lo, [&](std::size_t i, const Rational& x) {
      return measure.atoms[i].atom.point.position() < x;
    });
    Rational image_mass = 0;
    Rational mass = 0;
    for (auto it = first; it != by_position.end() && measure.atoms[*it].atom.point.position() <= hi; ++it) {
      const auto& a = measure.atoms[*it];
      const auto image = measure.weight_of(eval_circle(map, a.atom.point));
      if (!image) {
        ++rep.excluded;
        continue;
      }
      image_mass += *image;
      mass += a.weight;
      ++rep.atoms_checked;
    }
    const Rational r = abs(image_mass - q_inv * mass);
    if (r > rep.max_residual) rep.max_residual = r;
    ++rep.sets;
  }
  return rep;
}

double verify_scaling(const CircleMapPL& map, const DistributionApprox& nu, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_piece(0, map.piece_count() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t i = pick_piece(rng);
    const double b0 = map.breakpoints()[i].get_d();
    const double b1 = map.breakpoints()[i + 1].get_d();
    const double slope = map.slope(i).get_d();
    const double width = std::min(b1 - b0, 0.98 / std::abs(slope));
    const double lo = b0 + (b1 - b0 - width) * unit(rng);
    const double hi = lo + width * unit(rng);
    const double f0 = map.values()[i].get_d() + slope * (lo - b0);
    const double f1 = map.values()[i].get_d() + slope * (hi - b0);
    const double image = f1 >= f0 ? nu.measure_of(f0, f1) : nu.measure_of(f1, f0);
    worst = std::max(worst, std::abs(image - nu.scale_factor * nu.measure_of(lo, hi)));
  }
  return worst;
}

Rational lebesgue_scaling_residual(const CircleMapPL& map, const Rational& a, std::size_t samples,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_piece(0, map.piece_count() - 1);
  Rational worst = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t i = pick_piece(rng);
    const Rational& b0 = map.breakpoints()[i];
    const Rational& b1 = map.breakpoints()[i + 1];
    const Rational width = std::min(Rational(b1 - b0), Rational(2 * injective_halfwidth(map, i)));
    const Rational lo = b0 + (b1 - b0 - width) * random_unit(rng);
    const Rational hi = lo + width * random_unit(rng);
    // the image of [lo, hi] is an arc of length |f(hi) - f(lo)| < 1
    const Rational image = abs(map.lift(hi) - map.lift(lo));
    const Rational r = abs(image - a * (hi - lo));
    if (r > worst) worst = r;
  }
  return worst;
}

double cdf_distance(const AtomicMeasure& mu, const DistributionApprox& nu) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(mu.atoms.size());
  for (const auto& a : mu.atoms) pts.emplace_back(a.atom.point.position().get_d(), a.weight.get_d());
  std::sort(pts.begin(), pts.end());
  double acc = 0;
  double worst = 0;
  for (const auto& [x, w] : pts) {
    const double f = nu.cdf_at(x);
    worst = std::max(worst, std::abs(acc - f));
    acc += w;
    worst = std::max(worst, std::abs(acc - f));
  }
  return std::max(worst, std::abs(acc - 1.0));
}

}  // namespace circlekms
