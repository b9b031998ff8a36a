#pragma once

#include <stdexcept>
#include <string>

namespace fourbar {

// Base for all toolkit errors so callers can catch the whole family at once.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Argument of an inverse trig call left its mathematical domain.
struct DomainError : Error {
  using Error::Error;
};

// A finite-difference probe landed on (or beyond) a fold configuration,
// where dtheta/dpsi is unreliable.
struct NearSingularError : Error {
  using Error::Error;
};

// Consecutive kinematic samples jumped between assembly branches.
struct BranchJumpError : Error {
  using Error::Error;
};

// Hankel matrix rank-deficient below the requested exponential order.
struct RankError : Error {
  using Error::Error;
};

// The chosen pair of line characteristics is linearly dependent for this
// sampling direction.
struct DegeneratePairError : Error {
  using Error::Error;
};

// Anchor points sit in a degenerate position for the requested basis.
struct CollocationSingularError : Error {
  using Error::Error;
};

// No grid node passed the feasibility + hull filters.
struct EmptyRegionError : Error {
  using Error::Error;
};

// Configuration file invalid or inconsistent.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace fourbar
