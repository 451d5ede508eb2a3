#include "circlekms/verify.hpp"

#include <algorithm>

namespace circlekms {

namespace {

Rational random_entry(std::mt19937_64& rng) {
  std::uniform_int_distribution<long> num(-9, 9);
  std::uniform_int_distribution<long> den(1, 7);
  long n = 0;
  while (n == 0) n = num(rng);
  return ratio(n, den(rng));
}

}  // namespace

AlgebraElement<Rational> random_element(const GroupoidTruncation& t, std::mt19937_64& rng, std::size_t entries) {
  AlgebraElement<Rational> f(t);
  if (t.size() == 0) return f;
  std::uniform_int_distribution<std::size_t> any(0, t.size() - 1);
  std::uniform_int_distribution<std::size_t> heavy(0, std::min<std::size_t>(t.size(), 64) - 1);
  for (std::size_t i = 0; i < entries; ++i) {
    const std::size_t v = i % 2 == 0 ? heavy(rng) : any(rng);
    const std::size_t w = i % 3 == 0 ? heavy(rng) : any(rng);
    f.set(v, w, random_entry(rng));
  }
  return f;
}

std::pair<AlgebraElement<Rational>, AlgebraElement<Rational>> random_pair(const GroupoidTruncation& t,
                                                                          std::mt19937_64& rng) {
  auto f = random_element(t, rng, 12);
  auto g = random_element(t, rng, 6);
  for (const auto& [key, x] : f.entries()) {
    if (rng() % 2 == 0) g.set(key.second, key.first, random_entry(rng));
  }
  return {std::move(f), std::move(g)};
}

AtomicMeasure perturb_weight(const AtomicMeasure& m, std::size_t atom) {
  if (atom >= m.atoms.size()) throw ValidationError("no atom " + std::to_string(atom));
  auto bad = m;
  bad.atoms[atom].weight *= 2;
  return bad;
}

bool VerificationReport::all_exact_zero() const {
  return std::all_of(classes.begin(), classes.end(), [](const ClassVerification& c) {
    return c.kms_exact_zero() && c.conformal_exact_zero() && c.scaling_exact_zero() && c.control_detected();
  });
}

ClassVerification verify_class(const CircleMapPL& map, const CriticalCatalog& catalog, std::size_t class_index,
                               const Rational& q, std::size_t depth, const EntropyResult& entropy,
                               std::size_t samples, std::uint64_t seed, const Limits& limits) {
  ClassVerification out;
  out.class_index = class_index;
  const auto mu = class_measure(map, catalog, class_index, InverseTemperature::from_q(q), depth, entropy, limits);
  const auto t = truncation_of(mu);
  out.atoms = t.size();

  std::mt19937_64 rng(seed + class_index);
  for (std::size_t i = 0; i < samples; ++i) {
    const auto [f, g] = random_pair(t, rng);
    if (omega_state(mu, convolve(f, g)) == 0) ++out.kms_trivial;
    const Rational r = abs(kms_residual(f, g, q, mu));
    ++out.kms_pairs;
    if (r != 0) ++out.kms_nonzero;
    out.kms_max_residual = std::max(out.kms_max_residual, r);
  }

  const auto sample = sample_bisections(map, t, samples, seed + class_index);
  out.skipped = sample.skipped;
  for (const auto& w : sample.bisections) {
    const Rational r = abs(conformal_residual(mu, t, w, q));
    ++out.bisections;
    out.bisection_arrows += w.pairs.size();
    if (r != 0) ++out.conformal_nonzero;
    out.conformal_max_residual = std::max(out.conformal_max_residual, r);
  }

  out.scaling = verify_scaling(map, mu, samples, seed + class_index);

  // controls: double the weight of the last atom and test it against atom 0
  if (t.size() >= 2) {
    const std::size_t v = t.size() - 1;
    const auto bad = perturb_weight(mu, v);
    const auto f = AlgebraElement<Rational>::arrow(t, v, 0);
    out.control_kms_residual = kms_residual(f, adjoint(f), q, bad);
    Bisection w;
    w.pairs.push_back({v, 0, t.cocycle(v, 0)});
    out.control_conformal_residual = conformal_residual(bad, t, w, q);
  }
  return out;
}

VerificationReport verify_all(const CircleMapPL& map, const CriticalCatalog& catalog, const Rational& q,
                              std::size_t depth, const EntropyResult& entropy, std::size_t samples,
                              std::uint64_t seed, const Limits& limits) {
  VerificationReport r;
  r.q = q;
  r.depth = depth;
  r.samples = samples;
  r.seed = seed;
  for (std::size_t c = 0; c < catalog.classes.size(); ++c) {
    r.classes.push_back(verify_class(map, catalog, c, q, depth, entropy, samples, seed, limits));
  }
  return r;
}

}  // namespace circlekms
