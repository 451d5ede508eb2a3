#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace circlekms {

/// Bad input: malformed map spec, invalid parameter, out-of-scope map.
/// The CLI maps this to exit status 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configured resource guard tripped. The CLI maps this to exit status 3.
class ResourceError : public std::runtime_error {
 public:
  enum class Kind { depth, branches, denominator_bits };

  ResourceError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Raised when a partition function is asked for at q >= exp(-h), i.e. at an
/// inverse temperature not above the entropy.
class DivergentError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Raised when q cannot be placed on either side of exp(-h) with the
/// available entropy information.
class UndeterminedError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Seed used whenever the caller does not pick one.
inline constexpr std::uint64_t kDefaultSeed = 20231107;

/// Resource limits shared by every enumeration in the library.
struct Limits {
  std::size_t max_depth = 100000;
  std::size_t max_branches = std::size_t{1} << 20;
  std::size_t max_denominator_bits = std::size_t{1} << 16;
};

}  // namespace circlekms
