#pragma once

#include <stdexcept>
#include <string>

namespace robsens {

/// Base class for all recoverable engine errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Data ingestion / design construction
struct MissingColumnError : Error {
  explicit MissingColumnError(const std::string& col)
      : Error("missing column: " + col) {}
};
struct NonBinaryTreatmentError : Error {
  explicit NonBinaryTreatmentError(const std::string& msg) : Error(msg) {}
};
struct NonNumericValueError : Error {
  explicit NonNumericValueError(const std::string& msg) : Error(msg) {}
};
struct AllTreatedOrAllControlError : Error {
  AllTreatedOrAllControlError()
      : Error("dataset needs at least one treated and one control unit") {}
};
struct RankDeficientDesignError : Error {
  explicit RankDeficientDesignError(const std::string& msg) : Error(msg) {}
};

// Propensity model
struct SeparationError : Error {
  explicit SeparationError(const std::string& msg) : Error(msg) {}
};
struct NoConvergenceError : Error {
  explicit NoConvergenceError(const std::string& msg) : Error(msg) {}
};
struct DimensionMismatchError : Error {
  explicit DimensionMismatchError(const std::string& msg) : Error(msg) {}
};

// Bound construction
struct BoundaryInputError : Error {
  explicit BoundaryInputError(const std::string& msg) : Error(msg) {}
};
struct ZeroMassError : Error {
  explicit ZeroMassError(const std::string& msg) : Error(msg) {}
};

// Simulation / aggregation
struct DegenerateArmError : Error {
  explicit DegenerateArmError(const std::string& msg) : Error(msg) {}
};
struct EmptyGridError : Error {
  explicit EmptyGridError(const std::string& msg) : Error(msg) {}
};

// Configuration (CLI / config file)
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Aggregate failure of a bootstrap run (too many bad replicates).
struct BootstrapFailureError : Error {
  explicit BootstrapFailureError(const std::string& msg) : Error(msg) {}
};

}  // namespace robsens
