#include "ecoc/annealing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ecoc {

namespace {

bool rows_distinct(const IntMatrix& e) {
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = i + 1; j < e.rows(); ++j)
      if (e.row(i) == e.row(j)) return false;
  return true;
}

bool columns_non_constant(const IntMatrix& e) {
  for (Eigen::Index n = 0; n < e.cols(); ++n) {
    const int first = e(0, n);
    bool varied = false;
    for (Eigen::Index i = 1; i < e.rows(); ++i)
      if (e(i, n) != first) { varied = true; break; }
    if (!varied) return false;
  }
  return true;
}

bool is_valid(const IntMatrix& e) { return rows_distinct(e) && columns_non_constant(e); }

}  // namespace

std::optional<double> calibrate_eta(const CodeMatrix& m) {
  const double vi_sum = vi_penalty_sum(m);
  if (std::isinf(vi_sum)) return std::nullopt;
  return eta_from_sums(hamming_penalty_sum(m), vi_sum);
}

CodeMatrix propose_neighbor(const CodeMatrix& m, Rng& rng, int max_resamples) {
  const int rows = m.num_classes();
  const int cols = m.code_length();
  const int q = m.alphabet();
  std::uniform_int_distribution<int> row_dist(0, rows - 1);
  std::uniform_int_distribution<int> col_dist(0, cols - 1);
  std::uniform_int_distribution<int> sym_dist(0, q - 2);
  for (int attempt = 0; attempt < max_resamples; ++attempt) {
    const int i = row_dist(rng);
    const int n = col_dist(rng);
    int s = sym_dist(rng);
    if (s >= m(i, n)) ++s;  // uniform over symbols != current
    IntMatrix e = m.entries();
    e(i, n) = s;
    if (is_valid(e)) return CodeMatrix::unchecked(std::move(e), q);
  }
  throw SearchStuckError("no valid single-entry mutation found");
}

CodeMatrix random_matrix(int num_classes, int code_length, int alphabet, Rng& rng, int max_resamples) {
  if (num_classes < 2 || code_length < 1 || alphabet < 2)
    throw std::invalid_argument("random_matrix: infeasible dimensions");
  std::uniform_int_distribution<int> sym_dist(0, alphabet - 1);
  for (int attempt = 0; attempt < max_resamples; ++attempt) {
    IntMatrix e(num_classes, code_length);
    for (int i = 0; i < num_classes; ++i)
      for (int n = 0; n < code_length; ++n) e(i, n) = sym_dist(rng);
    if (is_valid(e)) return CodeMatrix::unchecked(std::move(e), alphabet);
  }
  throw std::runtime_error("random_matrix: no valid matrix found after bounded resampling");
}

std::int64_t distinct_partition_count(int num_classes, int alphabet, std::int64_t cap) {
  // Stirling numbers of the second kind, saturating at cap.
  const int jmax = std::min(alphabet, num_classes);
  std::vector<std::int64_t> prev(jmax + 1, 0), cur(jmax + 1, 0);
  prev[0] = 1;  // S(0,0)
  for (int n = 1; n <= num_classes; ++n) {
    cur[0] = 0;
    for (int j = 1; j <= jmax; ++j) {
      // S(n,j) = j*S(n-1,j) + S(n-1,j-1)
      const std::int64_t a = prev[j] > cap / std::max(j, 1) ? cap : j * prev[j];
      cur[j] = std::min(cap, a + prev[j - 1]);
    }
    std::swap(prev, cur);
  }
  std::int64_t total = 0;
  for (int j = 2; j <= jmax; ++j) total = std::min(cap, total + prev[j]);
  return total;
}

DesignResult design_matrix(int num_classes, int code_length, int alphabet,
                           const AnnealSchedule& schedule) {
  schedule.validate();
  if (num_classes < 2 || code_length < 1 || alphabet < 2)
    throw std::invalid_argument("design_matrix: infeasible dimensions");
  // distinct rows require alphabet^code_length >= num_classes
  double capacity = 1.0;
  for (int n = 0; n < code_length && capacity < num_classes; ++n) capacity *= alphabet;
  if (capacity < num_classes)
    throw std::invalid_argument("design_matrix: code too short to give classes distinct rows");

  // When the class/alphabet combinatorics cannot supply code_length distinct
  // column partitions, duplicate partitions (VI = 0) are unavoidable and the
  // column term is structurally +infinity; anneal on the row term alone.
  const bool vi_active =
      code_length >= 2 && distinct_partition_count(num_classes, alphabet) >= code_length;

  Rng rng(schedule.seed);
  CodeMatrix current = random_matrix(num_classes, code_length, alphabet, rng);
  double eta = 0.0;
  if (vi_active) {
    std::optional<double> calibrated = calibrate_eta(current);
    for (int attempt = 0; attempt < 1000 && !calibrated; ++attempt) {
      current = random_matrix(num_classes, code_length, alphabet, rng);
      calibrated = calibrate_eta(current);
    }
    if (!calibrated)
      throw std::runtime_error("design_matrix: could not sample an initial matrix with distinct column partitions");
    eta = *calibrated;
  }

  const auto objective = [&](const CodeMatrix& m) {
    double e = hamming_penalty_sum(m);
    if (vi_active) {
      const double vi_sum = vi_penalty_sum(m);
      e = std::isinf(vi_sum) ? std::numeric_limits<double>::infinity() : e + eta * vi_sum;
    }
    return e;
  };

  double cur_e = objective(current);
  CodeMatrix best = current;
  double best_e = cur_e;
  std::vector<double> trace;
  trace.reserve(schedule.num_temperatures);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  bool stuck = false;
  for (int t = 0; t < schedule.num_temperatures && !stuck; ++t) {
    const double temperature = schedule.initial_temperature * std::pow(schedule.cooling_factor, t);
    for (int s = 0; s < schedule.steps_per_temperature; ++s) {
      try {
        CodeMatrix neighbor = propose_neighbor(current, rng);
        const double e = objective(neighbor);
        const double delta = e - cur_e;
        if (delta <= 0 || unit(rng) < std::exp(-delta / temperature)) {
          current = std::move(neighbor);
          cur_e = e;
          if (cur_e < best_e) {
            best = current;
            best_e = cur_e;
          }
        }
      } catch (const SearchStuckError&) {
        stuck = true;  // frozen move set (e.g. M=2 binary); keep best-so-far
        break;
      }
    }
    trace.push_back(best_e);
  }

  DesignResult result{best, energy(best, eta), min_hamming(best),
                      best.code_length() >= 2 ? min_vi(best) : 0.0, eta, std::move(trace)};
  return result;
}

}  // namespace ecoc
