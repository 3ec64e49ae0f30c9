#pragma once

#include <stdexcept>
#include <string>

namespace idpr {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad configuration: unusable parameter combinations, mode/weights mismatch.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Bad input data: malformed files, missing fields, inconsistent datasets.
class DataError : public Error {
public:
  using Error::Error;
};

// Pose location or lattice index outside the map grid.
class BoundsError : public Error {
public:
  using Error::Error;
};

// Relation type index out of range for its directed edge.
class InvalidTypeError : public Error {
public:
  using Error::Error;
};

// Quadratic coefficient not strictly negative where the distance
// transform requires concavity.
class ConcavityError : public Error {
public:
  using Error::Error;
};

// Brute-force instance exceeds its size guard.
class GuardError : public Error {
public:
  using Error::Error;
};

// Requested cluster count exceeds the number of distinct points.
class DegenerateClusterError : public Error {
public:
  using Error::Error;
};

// Part graph invariant violations, one kind per named failure mode.
class GraphError : public Error {
public:
  enum class Kind {
    kIndexOutOfRange,
    kSelfLoop,
    kDuplicateEdge,
    kCycle,
    kDisconnected,
  };

  GraphError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

// Score-map file problems, one kind per named failure mode.
class ScoreMapIoError : public Error {
public:
  enum class Kind {
    kBadMagic,
    kVersionMismatch,
    kTruncated,
    kInconsistent,
  };

  ScoreMapIoError(Kind kind, const std::string& what)
      : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

}  // namespace idpr
