#pragma once

#include <stdexcept>
#include <string>

namespace cgp {

/// Invalid input: a parameter violates a type invariant or an operation's
/// precondition.
class domain_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation could not produce a trustworthy number.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
class convergence_error : public numeric_error {
 public:
  using numeric_error::numeric_error;
};

/// Parameters fall outside the regime where the closed-form solution holds
/// (for instance Re(D) <= 0).
class validity_error : public numeric_error {
 public:
  using numeric_error::numeric_error;
};

/// The grid solver detected probability reaching the outer boundary.
class boundary_contamination_error : public numeric_error {
 public:
  using numeric_error::numeric_error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw domain_error(what);
}

}  // namespace detail
}  // namespace cgp
