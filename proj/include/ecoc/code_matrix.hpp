#pragma once

#include <string>
#include <vector>

#include "ecoc/types.hpp"

namespace ecoc {

// M x N code matrix over the alphabet {0,...,q-1}. Row i is the codeword of
// class i; column n defines a q-way meta-classification task. Immutable after
// construction; construction validates:
//   - all rows pairwise distinct
//   - every column contains at least two distinct symbols
//   - every entry in [0, q)
class CodeMatrix {
 public:
  CodeMatrix(IntMatrix entries, int alphabet);

  int num_classes() const { return static_cast<int>(entries_.rows()); }
  int code_length() const { return static_cast<int>(entries_.cols()); }
  int alphabet() const { return alphabet_; }
  const IntMatrix& entries() const { return entries_; }
  int operator()(int row, int col) const { return entries_(row, col); }

  IntVector row(int i) const { return entries_.row(i).transpose(); }
  IntVector column(int n) const { return entries_.col(n); }

  // One-hot expansion used by q-ary decoding without re-validating column
  // non-constancy (an unused symbol expands to an all-zero column).
  static CodeMatrix unchecked(IntMatrix entries, int alphabet);

 private:
  CodeMatrix() = default;
  IntMatrix entries_;
  int alphabet_ = 2;
};

// A column viewed as a partition of the classes: cluster k holds the classes
// assigned symbol k. Constant columns are legal here (the CodeMatrix invariant
// forbids them, but information measures are defined for any partition).
class ColumnPartition {
 public:
  ColumnPartition(IntVector assignment, int alphabet);
  static ColumnPartition from_column(const CodeMatrix& m, int col);

  int num_classes() const { return static_cast<int>(assignment_.size()); }
  int alphabet() const { return alphabet_; }
  int symbol(int cls) const { return assignment_(cls); }
  int cluster_size(int k) const { return cluster_sizes_[k]; }
  const std::vector<std::vector<int>>& cluster_sets() const { return clusters_; }

  // True when the two partitions coincide up to symbol relabeling.
  bool same_partition(const ColumnPartition& other) const;

 private:
  IntVector assignment_;
  int alphabet_;
  std::vector<int> cluster_sizes_;
  std::vector<std::vector<int>> clusters_;
};

// Number of positions where two codewords differ.
int hamming_distance(const IntVector& a, const IntVector& b);

// Minimum pairwise row distance of the matrix; requires at least two rows.
int min_hamming(const CodeMatrix& m);

// Variation-of-information distance between two partitions, in nats.
// Exactly 0 when the partitions coincide up to relabeling.
double vi_distance(const ColumnPartition& a, const ColumnPartition& b);

// Minimum pairwise column VI distance; requires at least two columns.
double min_vi(const CodeMatrix& m);

// I(y, c) = sum_k (|C^k|/M) log(M/|C^k|), in nats.
double mutual_information(const ColumnPartition& c);

// Sum over unordered row pairs of H^-2 plus eta times the sum over unordered
// column pairs of VI^-2. Any duplicate column partition makes this +infinity.
double energy(const CodeMatrix& m, double eta);

// The two energy terms separately (row term, column term). The column term is
// +infinity when two columns share a partition.
double hamming_penalty_sum(const CodeMatrix& m);
double vi_penalty_sum(const CodeMatrix& m);

// Each q-ary entry becomes its one-hot block of length q; result is M x (qN)
// over {0,1}. Preserves row distinctness; expanded pairwise Hamming distances
// are exactly twice the originals.
CodeMatrix binary_expansion(const CodeMatrix& m);

// JSON text form: {"num_classes":M,"code_length":N,"alphabet":q,"entries":[[...],...]}
std::string serialize(const CodeMatrix& m);
CodeMatrix parse_code_matrix(const std::string& text);

}  // namespace ecoc
