#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace ecoc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IntVector = Eigen::VectorXi;
using IntMatrix = Eigen::MatrixXi;

using Rng = std::mt19937_64;

// Deterministic sub-stream derivation: one user-facing seed fans out into
// named component streams (design/train/attack/...) so each component can be
// reproduced independently of the others.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over the combined state
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t stream_id(const char* name) {
  // FNV-1a on the stream name
  std::uint64_t h = 1469598103934665603ULL;
  for (const char* p = name; *p; ++p) h = (h ^ static_cast<unsigned char>(*p)) * 1099511628211ULL;
  return h;
}

inline Rng make_rng(std::uint64_t seed, const char* stream) {
  return Rng(derive_seed(seed, stream_id(stream)));
}

}  // namespace ecoc
