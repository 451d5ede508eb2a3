#include "circlekms/builtins.hpp"

namespace circlekms::builtins {

CircleMapPL example5(const Rational& alpha, bool assume_exact) {
  if (alpha <= 0) throw ValidationError("example5 requires alpha > 0, got '" + to_string(alpha) + "'");
  const Rational peak_wide = alpha / 8;
  const Rational peak_narrow = alpha / 12;
  std::vector<Rational> bp{Rational(0),     Rational(1, 8), Rational(1, 4), Rational(3, 8), Rational(1, 2), Rational(7, 12),
                           Rational(2, 3),  Rational(3, 4), Rational(5, 6), Rational(11, 12), Rational(1)};
  std::vector<Rational> vals{Rational(0), peak_wide,   Rational(0), peak_wide,   Rational(0), peak_narrow,
                             Rational(0), peak_narrow, Rational(0), peak_narrow, Rational(0)};
  for (auto& v : vals) v.canonicalize();
  return CircleMapPL::make(std::move(bp), std::move(vals), assume_exact);
}

CircleMapPL tent(bool assume_exact) {
  return CircleMapPL::make({Rational(0), Rational(1, 2), Rational(1)}, {Rational(0), Rational(1), Rational(0)},
                           assume_exact);
}

CircleMapPL doubling(bool assume_exact) {
  return CircleMapPL::make({Rational(0), Rational(1, 2), Rational(1)}, {Rational(0), Rational(1), Rational(2)},
                           assume_exact);
}

std::vector<std::string> names() { return {"example5", "tent", "doubling"}; }

CircleMapPL by_name(const std::string& name, const std::optional<Rational>& alpha, bool assume_exact) {
  if (name == "example5") return example5(alpha.value_or(Rational(121, 10)), assume_exact);
  if (alpha) throw ValidationError("--alpha only applies to example5");
  if (name == "tent") return tent(assume_exact);
  if (name == "doubling") return doubling(assume_exact);
  throw ValidationError("unknown builtin '" + name + "' (known: example5, tent, doubling)");
}

}  // namespace circlekms::builtins
