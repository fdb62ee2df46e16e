#pragma once

#include <stdexcept>
#include <string>

namespace qpcs {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape violations: m > N, s > N, mismatched vector lengths.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Out-of-range scalar parameter (alpha < 1, d < 3, u below the admissible range, ...).
class ParamError : public Error {
 public:
  using Error::Error;
};

// Input too large for an exponential-time routine.
class SizeError : public Error {
 public:
  using Error::Error;
};

// Requested absolute moment is infinite for the law.
class MomentDiverges : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

class EmptyCell : public Error {
 public:
  using Error::Error;
};

class ExperimentAborted : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace qpcs
