#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>

namespace fsl {

// Base class for everything thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad sizes, nonpositive step sizes, malformed schedules, and similar
// caller mistakes.
struct InvalidArgument : Error {
  using Error::Error;
};

// A runtime check of one of the structural assumptions failed (shared
// eigenbasis ratio, degenerate prior mode, perturbation exceeding its
// declared bound, ...).
struct AssumptionViolation : Error {
  using Error::Error;
};

struct SampleStore;

// The chain iterate left the configured ceiling or became non-finite.
// Carries the samples retained before the divergence so callers can flush
// partial outputs.
struct ChainDivergence : Error {
  std::size_t iteration;
  std::shared_ptr<SampleStore> partial;
  ChainDivergence(std::size_t k, const std::string& msg,
                  std::shared_ptr<SampleStore> partial_store = nullptr)
      : Error(msg), iteration(k), partial(std::move(partial_store)) {}
};

// Asked a closed-form oracle for a problem it does not cover.
struct UnsupportedOracle : Error {
  using Error::Error;
};

// Quadrature grid leaves too much mass on its boundary.
struct DomainTooSmall : Error {
  using Error::Error;
};

}  // namespace fsl
