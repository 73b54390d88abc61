#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecoc/types.hpp"

namespace ecoc {

enum class SyntheticKind { Blobs, Rings, Grid };
SyntheticKind synthetic_kind_from_name(const std::string& name);

// Labeled feature vectors with per-feature bounds (used for attack clipping).
struct Dataset {
  Matrix features;  // D x K, one column per sample
  IntVector labels;
  int num_classes = 0;
  Vector lower;  // per-feature bounds
  Vector upper;

  int size() const { return static_cast<int>(features.cols()); }
  int dim() const { return static_cast<int>(features.rows()); }
  Vector sample(int k) const { return features.col(k); }
  int label(int k) const { return labels(k); }
  void validate() const;
};

// Seeded 2-D toy datasets with exactly samples_per_class samples per class.
//   blobs — Gaussian clusters around class centers on a circle (identical
//           samples when noise_sigma = 0)
//   rings — evenly spaced points on concentric circles with radial noise
//   grid  — classes tile a checkerboard of cells; sigma scales in-cell jitter
Dataset make_synthetic(SyntheticKind kind, int num_classes, int samples_per_class,
                       double noise_sigma, std::uint64_t seed);

// Numeric CSV with a header row; label_column names the integer label column.
// Errors cite the 1-based row number.
Dataset load_csv(const std::string& path, const std::string& label_column);
void save_csv(const Dataset& data, const std::string& path, const std::string& label_column);

// Min-max scale every feature to [0,1] (constant features map to 0). Required
// before the L2 tanh-space attack.
Dataset minmax_scaled(const Dataset& data);

}  // namespace ecoc
