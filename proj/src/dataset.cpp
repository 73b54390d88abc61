#include "ecoc/dataset.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace ecoc {

SyntheticKind synthetic_kind_from_name(const std::string& name) {
  if (name == "blobs") return SyntheticKind::Blobs;
  if (name == "rings") return SyntheticKind::Rings;
  if (name == "grid") return SyntheticKind::Grid;
  throw std::invalid_argument("unknown synthetic dataset kind: " + name);
}

void Dataset::validate() const {
  if (features.cols() != labels.size()) throw std::invalid_argument("dataset: label count mismatch");
  if (num_classes < 1) throw std::invalid_argument("dataset: needs at least one class");
  for (Eigen::Index k = 0; k < labels.size(); ++k)
    if (labels(k) < 0 || labels(k) >= num_classes)
      throw std::invalid_argument("dataset: label out of range");
  if (lower.size() != features.rows() || upper.size() != features.rows())
    throw std::invalid_argument("dataset: bounds dimension mismatch");
  for (Eigen::Index d = 0; d < features.rows(); ++d)
    for (Eigen::Index k = 0; k < features.cols(); ++k)
      if (features(d, k) < lower(d) - 1e-12 || features(d, k) > upper(d) + 1e-12)
        throw std::invalid_argument("dataset: feature outside declared bounds");
}

namespace {

void finalize_bounds(Dataset& data) {
  data.lower = data.features.rowwise().minCoeff();
  data.upper = data.features.rowwise().maxCoeff();
}

}  // namespace

Dataset make_synthetic(SyntheticKind kind, int num_classes, int samples_per_class,
                       double noise_sigma, std::uint64_t seed) {
  if (num_classes < 1 || samples_per_class < 1)
    throw std::invalid_argument("make_synthetic: counts must be positive");
  if (noise_sigma < 0) throw std::invalid_argument("make_synthetic: noise must be nonnegative");
  Rng rng = make_rng(seed, "synthetic-data");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  const int total = num_classes * samples_per_class;
  Dataset data;
  data.features.resize(2, total);
  data.labels.resize(total);
  data.num_classes = num_classes;

  int k = 0;
  const double two_pi = 2.0 * std::numbers::pi;
  switch (kind) {
    case SyntheticKind::Blobs: {
      for (int c = 0; c < num_classes; ++c) {
        const double angle = two_pi * c / num_classes;
        const Eigen::Vector2d center(std::cos(angle), std::sin(angle));
        for (int s = 0; s < samples_per_class; ++s, ++k) {
          data.features.col(k) = center + noise_sigma * Eigen::Vector2d(gauss(rng), gauss(rng));
          data.labels(k) = c;
        }
      }
      break;
    }
    case SyntheticKind::Rings: {
      for (int c = 0; c < num_classes; ++c) {
        const double radius = static_cast<double>(c + 1) / num_classes;
        for (int s = 0; s < samples_per_class; ++s, ++k) {
          const double angle = two_pi * s / samples_per_class;
          const double r = radius + noise_sigma * gauss(rng);
          data.features.col(k) = Eigen::Vector2d(r * std::cos(angle), r * std::sin(angle));
          data.labels(k) = c;
        }
      }
      break;
    }
    case SyntheticKind::Grid: {
      const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(num_classes))));
      for (int c = 0; c < num_classes; ++c) {
        const double cx = (c % side + 0.5) / side;
        const double cy = (c / side + 0.5) / side;
        const double half = 0.5 / side;
        for (int s = 0; s < samples_per_class; ++s, ++k) {
          data.features.col(k) =
              Eigen::Vector2d(cx + noise_sigma * half * unit(rng), cy + noise_sigma * half * unit(rng));
          data.labels(k) = c;
        }
      }
      break;
    }
  }
  finalize_bounds(data);
  return data;
}

Dataset load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty file");

  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.push_back("");
    return cells;
  };

  const std::vector<std::string> header = split(line);
  int label_idx = -1;
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == label_column) label_idx = static_cast<int>(i);
  if (label_idx < 0) throw std::invalid_argument(path + ": unknown label column '" + label_column + "'");
  const int dim = static_cast<int>(header.size()) - 1;
  if (dim < 1) throw std::invalid_argument(path + ": no feature columns");

  std::vector<Vector> rows;
  std::vector<int> labels;
  int row_number = 1;  // header row is 1
  while (std::getline(in, line)) {
    ++row_number;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != header.size())
      throw std::invalid_argument(path + ": row " + std::to_string(row_number) + " has wrong field count");
    Vector x(dim);
    int d = 0;
    for (size_t i = 0; i < cells.size(); ++i) {
      size_t consumed = 0;
      double value = 0;
      try {
        value = std::stod(cells[i], &consumed);
      } catch (const std::exception&) {
        throw std::invalid_argument(path + ": row " + std::to_string(row_number) +
                                    " has non-numeric cell '" + cells[i] + "'");
      }
      if (consumed != cells[i].size())
        throw std::invalid_argument(path + ": row " + std::to_string(row_number) +
                                    " has non-numeric cell '" + cells[i] + "'");
      if (static_cast<int>(i) == label_idx) {
        if (value != std::floor(value))
          throw std::invalid_argument(path + ": row " + std::to_string(row_number) +
                                      " has non-integer label");
        labels.push_back(static_cast<int>(value));
      } else {
        x(d++) = value;
      }
    }
    rows.push_back(std::move(x));
  }
  if (rows.empty()) throw std::invalid_argument(path + ": no data rows");

  Dataset data;
  data.features.resize(dim, static_cast<int>(rows.size()));
  data.labels.resize(static_cast<int>(rows.size()));
  int max_label = 0;
  for (size_t k = 0; k < rows.size(); ++k) {
    data.features.col(static_cast<int>(k)) = rows[k];
    if (labels[k] < 0)
      throw std::invalid_argument(path + ": negative label at data row " + std::to_string(k + 2));
    data.labels(static_cast<int>(k)) = labels[k];
    max_label = std::max(max_label, labels[k]);
  }
  data.num_classes = max_label + 1;
  finalize_bounds(data);
  return data;
}

void save_csv(const Dataset& data, const std::string& path, const std::string& label_column) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv file: " + path);
  for (int d = 0; d < data.dim(); ++d) out << "f" << d << ",";
  out << label_column << "\n";
  out.precision(17);
  for (int k = 0; k < data.size(); ++k) {
    for (int d = 0; d < data.dim(); ++d) out << data.features(d, k) << ",";
    out << data.label(k) << "\n";
  }
}

Dataset minmax_scaled(const Dataset& data) {
  Dataset scaled = data;
  for (int d = 0; d < data.dim(); ++d) {
    const double lo = data.features.row(d).minCoeff();
    const double hi = data.features.row(d).maxCoeff();
    const double span = hi - lo;
    if (span > 0)
      scaled.features.row(d) = (data.features.row(d).array() - lo) / span;
    else
      scaled.features.row(d).setZero();
  }
  scaled.lower = Vector::Zero(data.dim());
  scaled.upper = Vector::Ones(data.dim());
  return scaled;
}

}  // namespace ecoc
