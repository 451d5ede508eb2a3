#include "circlekms/circle_map.hpp"

#include <algorithm>
#include <sstream>

namespace circlekms {

Valency compose(const Valency& inner, const Valency& outer) {
  Valency out;
  out.left = inner.left == Sign::plus ? outer.left : flip(outer.right);
  out.right = inner.right == Sign::plus ? outer.right : flip(outer.left);
  return out;
}

std::string to_string(const Valency& v) {
  std::string s = "(";
  s += v.left == Sign::plus ? '+' : '-';
  s += ',';
  s += v.right == Sign::plus ? '+' : '-';
  s += ')';
  return s;
}

// ---------------------------------------------------------------------------
// CircleMapPL

CircleMapPL CircleMapPL::make(std::vector<Rational> breakpoints, std::vector<Rational> values, bool assume_exact) {
  if (breakpoints.size() < 2) throw ValidationError("at least two breakpoints are required");
  if (breakpoints.front() != 0) throw ValidationError("first breakpoint must be 0, got " + to_string(breakpoints.front()));
  if (breakpoints.back() != 1) throw ValidationError("last breakpoint must be 1, got " + to_string(breakpoints.back()));
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    if (breakpoints[i] <= breakpoints[i - 1]) {
      throw ValidationError("breakpoints not strictly increasing at '" + to_string(breakpoints[i]) + "'");
    }
  }
  if (values.size() != breakpoints.size()) {
    throw ValidationError("expected " + std::to_string(breakpoints.size()) + " values, got " +
                          std::to_string(values.size()));
  }
  if (values.front() < 0 || values.front() >= 1) {
    throw ValidationError("first value must lie in [0,1), got '" + to_string(values.front()) + "'");
  }
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] == values[i - 1]) {
      throw ValidationError("non-strict piece: equal adjacent values '" + to_string(values[i]) + "' at positions " +
                            std::to_string(i - 1) + " and " + std::to_string(i));
    }
  }
  const Rational span = values.back() - values.front();
  if (span.get_den() != 1) {
    throw ValidationError("values[last] - values[0] = '" + to_string(span) + "' is not an integer");
  }

  CircleMapPL map;
  map.breakpoints_ = std::move(breakpoints);
  map.values_ = std::move(values);
  map.degree_ = span.get_num();
  map.assume_exact_ = assume_exact;
  map.slopes_.reserve(map.breakpoints_.size() - 1);
  for (std::size_t i = 0; i + 1 < map.breakpoints_.size(); ++i) {
    map.slopes_.push_back(Rational((map.values_[i + 1] - map.values_[i]) / (map.breakpoints_[i + 1] - map.breakpoints_[i])));
  }
  return map;
}

std::size_t CircleMapPL::piece_at(const Rational& t) const {
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  auto idx = static_cast<std::size_t>(std::distance(breakpoints_.begin(), it));
  if (idx == 0) return 0;
  return std::min(idx - 1, piece_count() - 1);
}

Rational CircleMapPL::lift(const Rational& t) const {
  const std::size_t i = piece_at(t);
  return values_[i] + slopes_[i] * (t - breakpoints_[i]);
}

Rational CircleMapPL::lift_extended(const Rational& x) const {
  const Integer k = floor(x);
  return lift(x - Rational(k)) + Rational(degree_ * k);
}

Valency CircleMapPL::valency_at(const CirclePoint& x) const {
  const Rational& t = x.position();
  const std::size_t i = piece_at(t);
  if (t == breakpoints_[i]) {
    const std::size_t left_piece = i == 0 ? piece_count() - 1 : i - 1;
    return {piece_sign(left_piece), piece_sign(i)};
  }
  return {piece_sign(i), piece_sign(i)};
}

bool CircleMapPL::has_turning_point() const {
  for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i) {
    if (valency_at(CirclePoint(breakpoints_[i])).turning()) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Text format

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] void fail_at(std::size_t line, const std::string& msg) {
  throw ValidationError("line " + std::to_string(line) + ": " + msg);
}

std::vector<Rational> parse_row(const std::vector<std::string>& tokens, std::size_t line) {
  std::vector<Rational> out;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    auto r = parse_rational(tokens[i]);
    if (!r) fail_at(line, "malformed rational '" + tokens[i] + "'");
    out.push_back(*r);
  }
  return out;
}

}  // namespace

CircleMapPL parse_map(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<Rational> breakpoints;
  std::vector<Rational> values;
  std::size_t bp_line = 0;
  std::size_t val_line = 0;
  bool assume_exact = false;
  bool exact_seen = false;

  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const auto tokens = tokenize(raw);
    if (tokens.empty()) continue;

    if (!header_seen) {
      if (tokens.size() != 2 || tokens[0] != "cmap" || tokens[1] != "v1") {
        fail_at(line_no, "expected header 'cmap v1', got '" + tokens[0] + "'");
      }
      header_seen = true;
      continue;
    }

    const std::string& key = tokens[0];
    if (key == "breakpoints") {
      if (bp_line != 0) fail_at(line_no, "duplicate 'breakpoints' line");
      bp_line = line_no;
      breakpoints = parse_row(tokens, line_no);
    } else if (key == "values") {
      if (val_line != 0) fail_at(line_no, "duplicate 'values' line");
      val_line = line_no;
      values = parse_row(tokens, line_no);
    } else if (key == "assume-exact") {
      if (exact_seen) fail_at(line_no, "duplicate 'assume-exact' line");
      exact_seen = true;
      if (tokens.size() != 2 || (tokens[1] != "true" && tokens[1] != "false")) {
        fail_at(line_no, "assume-exact expects 'true' or 'false', got '" + (tokens.size() > 1 ? tokens[1] : "") + "'");
      }
      assume_exact = tokens[1] == "true";
    } else {
      fail_at(line_no, "unknown keyword '" + key + "'");
    }
  }
  if (!header_seen) throw ValidationError("line 1: missing header 'cmap v1'");
  if (bp_line == 0) throw ValidationError("missing 'breakpoints' line");
  if (val_line == 0) throw ValidationError("missing 'values' line");

  if (breakpoints.size() < 2) fail_at(bp_line, "at least two breakpoints are required");
  if (breakpoints.front() != 0) fail_at(bp_line, "first breakpoint must be 0, got '" + to_string(breakpoints.front()) + "'");
  if (breakpoints.back() != 1) fail_at(bp_line, "last breakpoint must be 1, got '" + to_string(breakpoints.back()) + "'");
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    if (breakpoints[i] <= breakpoints[i - 1]) {
      fail_at(bp_line, "breakpoints not strictly increasing at '" + to_string(breakpoints[i]) + "'");
    }
  }
  try {
    return CircleMapPL::make(std::move(breakpoints), std::move(values), assume_exact);
  } catch (const ValidationError& e) {
    fail_at(val_line, e.what());
  }
}

std::string format_map(const CircleMapPL& map) {
  std::string out = "cmap v1\nbreakpoints";
  for (const auto& b : map.breakpoints()) out += " " + to_string(b);
  out += "\nvalues";
  for (const auto& v : map.values()) out += " " + to_string(v);
  out += "\nassume-exact ";
  out += map.assume_exact() ? "true" : "false";
  out += "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Points

CirclePoint eval_circle(const CircleMapPL& map, const CirclePoint& x) { return CirclePoint(map.lift(x.position())); }

CirclePoint iterate_point(const CircleMapPL& map, const CirclePoint& x, std::size_t n, const Limits& limits) {
  if (n > limits.max_depth) {
    throw ResourceError(ResourceError::Kind::depth, "iteration depth " + std::to_string(n) + " exceeds limit " +
                                                        std::to_string(limits.max_depth));
  }
  CirclePoint p = x;
  for (std::size_t i = 0; i < n; ++i) {
    p = eval_circle(map, p);
    if (denominator_bits(p.position()) > limits.max_denominator_bits) {
      throw ResourceError(ResourceError::Kind::denominator_bits,
                          "orbit denominator exceeds " + std::to_string(limits.max_denominator_bits) + " bits");
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Branches

namespace {

void check_depth(std::size_t n, const Limits& limits) {
  if (n > limits.max_depth) {
    throw ResourceError(ResourceError::Kind::depth,
                        "depth " + std::to_string(n) + " exceeds limit " + std::to_string(limits.max_depth));
  }
}

// Composes the extended lift of `map` after one affine piece of an iterate and
// appends the resulting pieces in t-order.
void compose_piece(const CircleMapPL& map, const AffinePiece& piece, std::vector<AffinePiece>& out) {
  Rational a = piece(piece.lo);
  Rational b = piece(piece.hi);
  const bool increasing = a < b;
  if (!increasing) std::swap(a, b);

  const auto& bp = map.breakpoints();
  const auto& vals = map.values();
  const Rational deg(map.degree());
  const std::size_t first = out.size();

  for (Integer j = floor(a); Rational(j) < b; ++j) {
    const Rational shift(j);
    for (std::size_t i = 0; i < map.piece_count(); ++i) {
      const Rational seg_lo = std::max(Rational(shift + bp[i]), a);
      const Rational seg_hi = std::min(Rational(shift + bp[i + 1]), b);
      if (seg_lo >= seg_hi) continue;
      const Rational& s = map.slope(i);
      const Rational outer_intercept = vals[i] - s * (shift + bp[i]) + deg * shift;
      AffinePiece p;
      p.slope = s * piece.slope;
      p.intercept = s * piece.intercept + outer_intercept;
      Rational t0 = (seg_lo - piece.intercept) / piece.slope;
      Rational t1 = (seg_hi - piece.intercept) / piece.slope;
      if (t0 > t1) std::swap(t0, t1);
      p.lo = std::move(t0);
      p.hi = std::move(t1);
      out.push_back(std::move(p));
    }
  }
  if (!increasing) std::reverse(out.begin() + static_cast<std::ptrdiff_t>(first), out.end());
}

}  // namespace

BranchSet iterate_branches(const CircleMapPL& map, std::size_t n, const Limits& limits) {
  if (n == 0) throw ValidationError("iterate_branches requires n >= 1");
  check_depth(n, limits);

  std::vector<AffinePiece> pieces;
  const auto& bp = map.breakpoints();
  for (std::size_t i = 0; i < map.piece_count(); ++i) {
    pieces.push_back({bp[i], bp[i + 1], map.slope(i), map.values()[i] - map.slope(i) * bp[i]});
  }

  for (std::size_t step = 2; step <= n; ++step) {
    std::vector<AffinePiece> next;
    next.reserve(pieces.size() * map.piece_count());
    for (const auto& p : pieces) {
      compose_piece(map, p, next);
      if (next.size() > limits.max_branches) {
        throw ResourceError(ResourceError::Kind::branches, "branch count of iterate " + std::to_string(step) +
                                                               " exceeds cap " + std::to_string(limits.max_branches));
      }
    }
    const Rational shift(floor(next.front()(next.front().lo)));
    for (auto& p : next) p.intercept -= shift;
    pieces = std::move(next);
  }

  BranchSet set;
  set.iterate = n;
  set.degree = Rational(pieces.back()(pieces.back().hi) - pieces.front()(pieces.front().lo)).get_num();

  // Group runs of equal sign into laps over [0,1].
  std::vector<Branch> laps;
  for (const auto& p : pieces) {
    if (laps.empty() || laps.back().sign != p.sign()) {
      Branch b;
      b.start = p.lo;
      b.sign = p.sign();
      laps.push_back(std::move(b));
    }
    laps.back().end = p.hi;
    laps.back().pieces.push_back(p);
  }
  // Close up across 0 when 0 is not a turning point.
  if (laps.size() > 1 && laps.front().sign == laps.back().sign) {
    Branch merged = std::move(laps.back());
    laps.pop_back();
    merged.wraps = true;
    merged.end = laps.front().end;
    merged.pieces.insert(merged.pieces.end(), laps.front().pieces.begin(), laps.front().pieces.end());
    laps.erase(laps.begin());
    laps.push_back(std::move(merged));
  }
  std::stable_sort(laps.begin(), laps.end(), [](const Branch& x, const Branch& y) { return x.start < y.start; });

  set.pieces = std::move(pieces);
  set.branches = std::move(laps);
  return set;
}

std::size_t BranchSet::monotone_piece_count() const {
  std::size_t count = 1;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& p = pieces[i];
    Rational a = p(p.lo);
    Rational b = p(p.hi);
    if (a > b) std::swap(a, b);
    // integers strictly inside (a, b)
    const Integer inside = ceil(b) - floor(a) - 1;
    if (inside > 0) count += inside.get_ui();
    if (i + 1 < pieces.size()) {
      const Rational junction = p(p.hi);
      if (pieces[i + 1].sign() != p.sign() || junction.get_den() == 1) ++count;
    }
  }
  return count;
}

Valency BranchSet::valency_at(const CirclePoint& x) const {
  const Rational& t = x.position();
  auto it = std::upper_bound(pieces.begin(), pieces.end(), t,
                             [](const Rational& value, const AffinePiece& p) { return value < p.lo; });
  std::size_t i = it == pieces.begin() ? 0 : static_cast<std::size_t>(std::distance(pieces.begin(), it)) - 1;
  if (t == pieces[i].lo) {
    const std::size_t left = i == 0 ? pieces.size() - 1 : i - 1;
    return {pieces[left].sign(), pieces[i].sign()};
  }
  return {pieces[i].sign(), pieces[i].sign()};
}

// ---------------------------------------------------------------------------
// Valency and preimages

Valency valency(const CircleMapPL& map, const CirclePoint& x, std::size_t n, const Limits& limits) {
  check_depth(n, limits);
  std::vector<Valency> local;
  local.reserve(n);
  CirclePoint p = x;
  for (std::size_t i = 0; i < n; ++i) {
    local.push_back(map.valency_at(p));
    if (i + 1 < n) p = eval_circle(map, p);
  }
  Valency v = kIdentityValency;
  for (std::size_t i = n; i-- > 0;) v = compose(local[i], v);
  return v;
}

std::vector<CirclePoint> preimages_once(const CircleMapPL& map, const CirclePoint& y) {
  std::vector<CirclePoint> out;
  const auto& bp = map.breakpoints();
  const auto& vals = map.values();
  const Rational& target = y.position();
  for (std::size_t i = 0; i < map.piece_count(); ++i) {
    const Rational lo = std::min(vals[i], vals[i + 1]);
    const Rational hi = std::max(vals[i], vals[i + 1]);
    for (Integer j = ceil(lo - target); Rational(j) <= hi - target; ++j) {
      const Rational level = target + Rational(j);
      out.emplace_back(Rational(bp[i] + (level - vals[i]) / map.slope(i)));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Preimage> preimages(const CircleMapPL& map, const CirclePoint& y, std::size_t k, const Limits& limits) {
  check_depth(k, limits);
  std::vector<CirclePoint> level{y};
  for (std::size_t step = 0; step < k; ++step) {
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
  }
  std::sort(level.begin(), level.end());
  level.erase(std::unique(level.begin(), level.end()), level.end());

  std::vector<Preimage> out;
  out.reserve(level.size());
  for (auto& x : level) out.push_back({x, valency(map, x, k, limits)});
  return out;
}

std::vector<FixedPoint> fixed_points(const CircleMapPL& map) {
  std::vector<CirclePoint> found;
  const auto& bp = map.breakpoints();
  const auto& vals = map.values();
  for (std::size_t i = 0; i < map.piece_count(); ++i) {
    const Rational& s = map.slope(i);
    const Rational intercept = vals[i] - s * bp[i];
    if (s == 1) {
      if (intercept.get_den() == 1) {
        throw ValidationError("piece " + std::to_string(i) + " has slope 1 and integer offset: continuum of fixed points");
      }
      continue;
    }
    // f(t) - t = (s - 1) t + intercept takes the value j at t = (j - intercept) / (s - 1).
    Rational g0 = vals[i] - bp[i];
    Rational g1 = vals[i + 1] - bp[i + 1];
    if (g0 > g1) std::swap(g0, g1);
    for (Integer j = ceil(g0); Rational(j) <= g1; ++j) {
      found.emplace_back(Rational((Rational(j) - intercept) / (s - 1)));
    }
  }
  std::sort(found.begin(), found.end());
  found.erase(std::unique(found.begin(), found.end()), found.end());
  std::vector<FixedPoint> out;
  for (auto& p : found) out.push_back({p, map.valency_at(p).turning()});
  return out;
}

// ---------------------------------------------------------------------------
// Exactness probe

std::string to_string(ExactnessVerdict v) {
  switch (v) {
    case ExactnessVerdict::confirmed:
      return "confirmed";
    case ExactnessVerdict::inconclusive:
      return "inconclusive";
    case ExactnessVerdict::refuted_by_local_injectivity:
      return "refuted-by-local-injectivity";
  }
  return "inconclusive";
}

namespace {

ArcSet merge_arcs(ArcSet arcs) {
  std::sort(arcs.begin(), arcs.end());
  ArcSet out;
  for (auto& a : arcs) {
    if (!out.empty() && a.first <= out.back().second) {
      if (a.second > out.back().second) out.back().second = a.second;
    } else {
      out.push_back(std::move(a));
    }
  }
  return out;
}

const ArcSet& full_circle() {
  static const ArcSet full{{Rational(0), Rational(1)}};
  return full;
}

}  // namespace

bool covers_circle(const ArcSet& arcs) {
  return arcs.size() == 1 && arcs.front().first == 0 && arcs.front().second == 1;
}

ArcSet image_of_arcs(const CircleMapPL& map, const ArcSet& arcs) {
  ArcSet out;
  const auto& bp = map.breakpoints();
  for (const auto& [a, b] : arcs) {
    for (std::size_t i = 0; i < map.piece_count(); ++i) {
      const Rational lo = std::max(a, bp[i]);
      const Rational hi = std::min(b, bp[i + 1]);
      if (lo > hi) continue;
      Rational fa = map.values()[i] + map.slope(i) * (lo - bp[i]);
      Rational fb = map.values()[i] + map.slope(i) * (hi - bp[i]);
      if (fa > fb) std::swap(fa, fb);
      const Rational length = fb - fa;
      if (length >= 1) return full_circle();
      const Rational start = frac(fa);
      const Rational stop = start + length;
      if (stop <= 1) {
        out.emplace_back(start, stop);
      } else {
        out.emplace_back(start, Rational(1));
        out.emplace_back(Rational(0), Rational(stop - 1));
      }
    }
  }
  return merge_arcs(std::move(out));
}

ExactnessVerdict exactness_probe(const CircleMapPL& map, std::size_t depth, std::size_t horizon, const Limits& limits) {
  if (!map.has_turning_point()) return ExactnessVerdict::refuted_by_local_injectivity;

  std::vector<ArcSet> laps;
  if (depth == 0) {
    laps.push_back(full_circle());
  } else {
    const BranchSet set = iterate_branches(map, depth, limits);
    for (const auto& b : set.branches) {
      if (b.wraps) {
        laps.push_back(merge_arcs({{b.start, Rational(1)}, {Rational(0), b.end}}));
      } else {
        laps.push_back({{b.start, b.end}});
      }
    }
  }

  for (const auto& lap : laps) {
    ArcSet current = lap;
    bool covered = covers_circle(current);
    for (std::size_t n = 1; n <= horizon && !covered; ++n) {
      current = image_of_arcs(map, current);
      covered = covers_circle(current);
    }
    if (!covered) return ExactnessVerdict::inconclusive;
  }
  return ExactnessVerdict::confirmed;
}

}  // namespace circlekms
