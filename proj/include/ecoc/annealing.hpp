#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ecoc/code_matrix.hpp"
#include "ecoc/types.hpp"

namespace ecoc {

struct AnnealSchedule {
  double initial_temperature = 1.0;
  double cooling_factor = 0.95;
  int steps_per_temperature = 500;
  int num_temperatures = 200;
  std::uint64_t seed = 0;

  void validate() const {
    if (initial_temperature <= 0) throw std::invalid_argument("initial temperature must be positive");
    if (cooling_factor <= 0 || cooling_factor >= 1)
      throw std::invalid_argument("cooling factor must lie in (0,1)");
    if (steps_per_temperature < 1 || num_temperatures < 1)
      throw std::invalid_argument("schedule step counts must be positive");
  }
};

struct DesignResult {
  CodeMatrix matrix;
  double final_energy = 0.0;       // energy(matrix, eta_used)
  int min_hamming = 0;
  double min_vi = 0.0;
  double eta_used = 0.0;
  // Best-so-far working objective per temperature level, non-increasing. In
  // the degenerate regime (fewer distinct partitions than columns) the working
  // objective is the Hamming term alone and final_energy is +infinity.
  std::vector<double> energy_trace;
};

// Raised when no valid single-entry mutation exists after bounded resampling.
struct SearchStuckError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// eta = (sum of pairwise H^-2) / (sum of pairwise VI^-2) so both sums start
// equally weighted on the given matrix. nullopt when a VI term is zero
// (duplicate partitions) — the caller should resample the matrix.
std::optional<double> calibrate_eta(const CodeMatrix& m);

inline double eta_from_sums(double hamming_sum, double vi_sum) { return hamming_sum / vi_sum; }

// Copy of m with exactly one uniformly chosen entry replaced by a different
// uniformly chosen symbol, resampled until the CodeMatrix invariants hold.
// Throws SearchStuckError after max_resamples failures.
CodeMatrix propose_neighbor(const CodeMatrix& m, Rng& rng, int max_resamples = 1000);

// Uniform random valid matrix; throws after max_resamples invalid draws.
CodeMatrix random_matrix(int num_classes, int code_length, int alphabet, Rng& rng,
                         int max_resamples = 1000);

// Number of distinct partitions of num_classes labeled classes into 2..alphabet
// non-empty unlabeled clusters (the count of distinct non-constant columns up
// to relabeling). Saturates at the given cap.
std::int64_t distinct_partition_count(int num_classes, int alphabet, std::int64_t cap = 1 << 30);

// Simulated annealing on the row/column energy with Metropolis acceptance;
// returns the best-seen matrix. Deterministic given schedule.seed.
DesignResult design_matrix(int num_classes, int code_length, int alphabet,
                           const AnnealSchedule& schedule);

}  // namespace ecoc
