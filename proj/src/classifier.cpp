#include "circlekms/classifier.hpp"

#include <algorithm>
#include <cstdio>

namespace circlekms {

namespace {

constexpr std::size_t kProbeHorizon = 16;

bool exact_enough(const CircleMapPL& map, ExactnessVerdict v) {
  return map.assume_exact() || v == ExactnessVerdict::confirmed;
}

std::string beta_label(const EntropyResult& h) {
  if (h.exact_form) return *h.exact_form;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", h.decimal);
  return buf;
}

}  // namespace

std::string to_string(SimplicityResult::Status s) {
  switch (s) {
    case SimplicityResult::Status::simple:
      return "simple";
    case SimplicityResult::Status::non_simple:
      return "non-simple";
    case SimplicityResult::Status::undetermined:
      break;
  }
  return "undetermined";
}

SimplicityResult simplicity_check(const CircleMapPL& map, std::size_t depth) {
  SimplicityResult r;
  const auto verdict = exactness_probe(map, 1, std::max<std::size_t>(depth, kProbeHorizon));
  if (verdict == ExactnessVerdict::refuted_by_local_injectivity) {
    r.reason = "locally injective";
    return r;
  }
  if (!exact_enough(map, verdict)) {
    r.reason = "exactness not confirmed";
    return r;
  }
  if (abs(map.degree()) != 1) {
    r.status = SimplicityResult::Status::simple;
    r.reason = "degree " + map.degree().get_str();
    return r;
  }
  std::vector<FixedPoint> fixed;
  try {
    fixed = fixed_points(map);
  } catch (const ValidationError&) {
    r.reason = "continuum of fixed points";
    return r;
  }
  for (const auto& f : fixed) {
    if (f.is_critical) continue;
    bool all_critical = true;
    for (const auto& p : preimages_once(map, f.point)) {
      if (p == f.point) continue;
      if (!map.valency_at(p).turning()) {
        all_critical = false;
        break;
      }
    }
    if (all_critical) {
      r.status = SimplicityResult::Status::non_simple;
      r.witness = f.point;
      r.reason = "fixed point " + to_string(f.point.position()) + " has only critical other preimages";
      return r;
    }
  }
  r.status = SimplicityResult::Status::simple;
  r.reason = "degree " + map.degree().get_str() + ", no special fixed point";
  return r;
}

std::vector<std::size_t> ground_state_algebra(const CriticalCatalog& catalog) {
  std::vector<std::size_t> dims;
  for (const auto& c : catalog.classes) {
    const auto n = static_cast<std::size_t>(
        std::count_if(c.members.begin(), c.members.end(), [&](std::size_t i) { return catalog.critical[i].final; }));
    if (n > 0) dims.push_back(n);
  }
  std::sort(dims.begin(), dims.end());
  return dims;
}

std::vector<std::size_t> ground_state_algebra(const CircleMapPL& map, std::size_t depth) {
  return ground_state_algebra(critical_catalog(map, depth));
}

KmsReport classify(const CircleMapPL& map, std::size_t depth, std::size_t n_max, std::uint64_t seed,
                   const Limits& limits) {
  if (!map.has_turning_point()) {
    const std::string d = Integer(abs(map.degree())).get_str();
    throw ValidationError("locally injective map - outside scope; unique KMS at beta = log|d| (or 2 log|d|) per the "
                          "algebraic case, here |d| = " + d);
  }
  KmsReport r;
  r.seed = seed;
  r.certificates_depth = depth;
  r.assume_exact_echo = map.assume_exact();
  r.exactness = exactness_probe(map, 1, kProbeHorizon, limits);
  r.catalog = critical_catalog(map, depth, limits);
  r.entropy = compute_entropy(map, n_max, 64, seed, limits);
  r.N = r.catalog.classes.size();
  r.ground_state_dims = ground_state_algebra(r.catalog);
  r.simplicity = simplicity_check(map, depth);
  switch (r.simplicity.status) {
    case SimplicityResult::Status::simple:
      r.zero_kms = "none";
      break;
    case SimplicityResult::Status::non_simple:
      r.zero_kms = "all-Borel-probability-measures";
      break;
    case SimplicityResult::Status::undetermined:
      r.zero_kms = "undetermined";
      break;
  }
  r.regimes.below = "none";
  r.regimes.at_h = "unique, non-atomic";
  r.regimes.above = r.N == 0 ? "none" : std::to_string(r.N) + " extremal, purely atomic";
  const std::string beta = beta_label(r.entropy);
  if (r.N == 0) {
    r.summary = "unique KMS state at beta = " + beta + " only";
  } else {
    r.summary = std::to_string(r.N) + " extremal KMS states for each beta > " + beta + ", unique at beta = " + beta;
  }
  return r;
}

}  // namespace circlekms
