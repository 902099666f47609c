#pragma once

#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>

namespace rigidkit {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGraph : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// All vertices of a framework coincide; the requested operation is undefined.
class DegenerateFramework : public Error {
 public:
  using Error::Error;
};

class GraphMismatch : public Error {
 public:
  using Error::Error;
};

class ZeroPerimeter : public Error {
 public:
  using Error::Error;
};

class DegenerateAxis : public Error {
 public:
  using Error::Error;
};

class NotLaman : public Error {
 public:
  using Error::Error;
};

class NotVertexAddConstructible : public Error {
 public:
  using Error::Error;
};

class InfeasibleLengths : public Error {
 public:
  using Error::Error;
};

class NotLeaderless : public Error {
 public:
  using Error::Error;
};

/// A Henneberg step refers to a vertex or edge that does not exist at that
/// point of the construction.
class InvalidStep : public Error {
 public:
  InvalidStep(int step, const std::string& what)
      : Error("step " + std::to_string(step) + ": " + what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// Circle intersection failed during realization: target lengths cannot be
/// met at the given step.
class CirclesDisjoint : public Error {
 public:
  explicit CirclesDisjoint(int step)
      : Error("circles disjoint at construction step " + std::to_string(step)),
        step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// Circles touch within tolerance: the realization sits on the boundary of
/// the feasible length set.
class CirclesTangent : public Error {
 public:
  explicit CirclesTangent(int step)
      : Error("circles tangent at construction step " + std::to_string(step)),
        step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// Input exceeds a documented scope limit (e.g. exhaustive connectivity).
class TooLarge : public Error {
 public:
  using Error::Error;
};

/// Two independent computations of the same quantity disagree. Signals an
/// implementation bug, never a data problem.
class Inconsistency : public Error {
 public:
  using Error::Error;
};

class NonFiniteState : public Error {
 public:
  using Error::Error;
};

class IncompatibleLaw : public Error {
 public:
  using Error::Error;
};

class NotAtEquilibrium : public Error {
 public:
  using Error::Error;
};

/// The analytic Jacobian deviates from the finite-difference oracle beyond
/// tolerance. Hard failure by design: a convention error, not noise.
class OracleMismatch : public Error {
 public:
  using Error::Error;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic random source. Doubles are produced from the top 53 bits of
/// mt19937_64 output, so every stream is bit-reproducible across platforms
/// (std::uniform_real_distribution is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Independent substream: same (seed, stream) always gives the same Rng.
  static Rng derive(std::uint64_t seed, std::uint64_t stream) {
    return Rng(splitmix64(splitmix64(seed) ^ splitmix64(stream)));
  }

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi], inclusive.
  int uniform_int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t v = gen_();
    while (v >= limit) v = gen_();
    return lo + static_cast<int>(v % span);
  }

 private:
  std::mt19937_64 gen_;
};

/// Shortest-exact decimal formatting used for all numeric file output:
/// 17 significant digits round-trip any double.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string format_bool(bool b) { return b ? "true" : "false"; }

}  // namespace rigidkit
