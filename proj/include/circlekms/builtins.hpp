#pragma once

// Built-in example maps.

#include <optional>
#include <string>
#include <vector>

#include "circlekms/circle_map.hpp"

namespace circlekms::builtins {

/// Uniformly piecewise linear degree-0 map with slope alpha, zero at
/// 0, 1/4, 1/2, 2/3, 5/6 and increasing on [0, 1/8]. Requires alpha > 0.
CircleMapPL example5(const Rational& alpha, bool assume_exact = false);

/// Full tent: 0 -> 0, 1/2 -> 1, 1 -> 0.
CircleMapPL tent(bool assume_exact = false);

/// t -> 2t, written with a (non-turning) breakpoint at 1/2.
CircleMapPL doubling(bool assume_exact = false);

std::vector<std::string> names();

/// Built-in by name; alpha applies to example5 only (default 121/10).
CircleMapPL by_name(const std::string& name, const std::optional<Rational>& alpha = std::nullopt,
                    bool assume_exact = false);

}  // namespace circlekms::builtins
