#pragma once

#include <stdexcept>
#include <string>

namespace loopforge {

struct GraphError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DisconnectedGraph : GraphError {
  DisconnectedGraph() : GraphError("graph is not connected") {}
};

struct NoKillingNoBoundary : GraphError {
  NoKillingNoBoundary()
      : GraphError("graph needs a boundary vertex or a positive killing rate") {}
};

struct NonpositiveResistance : GraphError {
  explicit NonpositiveResistance(const std::string& what) : GraphError(what) {}
};

struct SameVertex : GraphError {
  SameVertex() : GraphError("marked vertices must be distinct") {}
};

struct SingularLaplacian : GraphError {
  SingularLaplacian() : GraphError("interior Laplacian is singular") {}
};

struct ZeroMass : std::runtime_error {
  ZeroMass() : std::runtime_error("excursion mass is zero (marked vertices are Dirichlet-separated)") {}
};

struct OddWithZeroMean : std::invalid_argument {
  OddWithZeroMean() : std::invalid_argument("odd-conditioned Poisson requires a positive mean") {}
};

struct InvalidProbability : std::invalid_argument {
  explicit InvalidProbability(const std::string& what) : std::invalid_argument(what) {}
};

struct CycleLeavesOpenSet : std::invalid_argument {
  CycleLeavesOpenSet() : std::invalid_argument("switch cycle contains a closed edge") {}
};

struct TooFewSamples : std::invalid_argument {
  explicit TooFewSamples(const std::string& what) : std::invalid_argument(what) {}
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace loopforge
