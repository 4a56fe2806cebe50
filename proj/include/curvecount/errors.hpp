#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace curvecount {

// Base class for every error thrown by this library.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The chosen prime cannot support the requested structure (wrong splitting
// behaviour, or repeated sampling failed in a way that indicates a bad prime).
struct unsupported_prime_error : error {
  using error::error;
};

// The configuration has no integral twist multiplicity k = 2/(c-n).
struct nonintegral_k_error : error {
  using error::error;
};

// Exact arithmetic failed: non-exact division, overflow guard tripped, ...
struct arithmetic_error : error {
  using error::error;
};

// Input violates a documented precondition.
struct invalid_argument_error : error {
  using error::error;
};

// A computation exceeded its explicit budget.  `snapshot` carries a
// serialized resumable state when the computation supports checkpointing.
struct budget_exhausted_error : error {
  std::string snapshot;
  explicit budget_exhausted_error(const std::string& what, std::string snap = {})
      : error(what), snapshot(std::move(snap)) {}
};

// The ideal is not zero-dimensional, so no finite standard-monomial count exists.
struct not_zero_dimensional_error : error {
  using error::error;
};

// Repeated resampling failed to produce an admissible input tuple.
struct degenerate_input_error : error {
  using error::error;
};

// Operands belong to different ring contexts.
struct context_error : error {
  using error::error;
};

// Operation requires state (e.g. a computed basis) that is not present.
struct state_error : error {
  using error::error;
};

// Divisor vector has no unit coordinate to solve for.
struct unsupported_divisor_error : error {
  using error::error;
};

}  // namespace curvecount
