#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace eit {

inline constexpr double pi = 3.14159265358979323846;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }

/// Angle of a point in [0, 2*pi).
inline double angle_of(Vec2 p) {
  double a = std::atan2(p.y, p.x);
  if (a < 0.0) a += 2.0 * pi;
  return a;
}

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& what, int line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line(line) {}
  int line;
};

struct SolverError : std::runtime_error {
  SolverError(const std::string& what, int iterations, double residual)
      : std::runtime_error(what + " after " + std::to_string(iterations) +
                           " iterations, residual " + std::to_string(residual)),
        iterations(iterations),
        residual(residual) {}
  int iterations;
  double residual;
};

/// splitmix64: the portable PRNG used for all stochastic pieces (noise draws,
/// test direction sampling). Identified as "splitmix64" in dataset metadata.
struct SplitMix64 {
  uint64_t state;

  explicit SplitMix64(uint64_t seed) : state(seed) {}

  uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in [-1, 1).
  double uniform_pm1() { return 2.0 * uniform01() - 1.0; }
};

/// Decorrelated substream seed for (seed, index) pairs.
inline uint64_t substream_seed(uint64_t seed, uint64_t index) {
  uint64_t z = seed ^ (index * 0xBF58476D1CE4E5B9ULL + 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Fixed 17-significant-digit decimal formatting used by every text format.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace eit
