#include "ecoc/code_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ecoc {

namespace {

void validate_entries(const IntMatrix& e, int q) {
  if (e.rows() < 1 || e.cols() < 1) throw std::invalid_argument("code matrix must be non-empty");
  if (q < 2) throw std::invalid_argument("alphabet must be at least 2");
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = 0; j < e.cols(); ++j)
      if (e(i, j) < 0 || e(i, j) >= q)
        throw std::invalid_argument("code matrix entry out of range [0, alphabet)");
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = i + 1; j < e.rows(); ++j)
      if (e.row(i) == e.row(j)) throw std::invalid_argument("code matrix rows must be distinct");
  for (Eigen::Index n = 0; n < e.cols(); ++n) {
    const int first = e(0, n);
    bool varied = false;
    for (Eigen::Index i = 1; i < e.rows(); ++i)
      if (e(i, n) != first) { varied = true; break; }
    if (!varied) throw std::invalid_argument("code matrix column is constant");
  }
}

}  // namespace

CodeMatrix::CodeMatrix(IntMatrix entries, int alphabet) : entries_(std::move(entries)), alphabet_(alphabet) {
  validate_entries(entries_, alphabet_);
}

CodeMatrix CodeMatrix::unchecked(IntMatrix entries, int alphabet) {
  CodeMatrix m;
  m.entries_ = std::move(entries);
  m.alphabet_ = alphabet;
  if (alphabet < 2) throw std::invalid_argument("alphabet must be at least 2");
  return m;
}

ColumnPartition::ColumnPartition(IntVector assignment, int alphabet)
    : assignment_(std::move(assignment)), alphabet_(alphabet) {
  if (assignment_.size() == 0) throw std::invalid_argument("partition must cover at least one class");
  if (alphabet_ < 1) throw std::invalid_argument("partition alphabet must be positive");
  clusters_.resize(alphabet_);
  cluster_sizes_.assign(alphabet_, 0);
  for (Eigen::Index i = 0; i < assignment_.size(); ++i) {
    const int k = assignment_(i);
    if (k < 0 || k >= alphabet_) throw std::invalid_argument("partition symbol out of range");
    clusters_[k].push_back(static_cast<int>(i));
    ++cluster_sizes_[k];
  }
}

ColumnPartition ColumnPartition::from_column(const CodeMatrix& m, int col) {
  return ColumnPartition(m.column(col), m.alphabet());
}

bool ColumnPartition::same_partition(const ColumnPartition& other) const {
  if (num_classes() != other.num_classes()) return false;
  auto canon = [](const ColumnPartition& p) {
    std::vector<std::vector<int>> sets;
    for (const auto& s : p.clusters_)
      if (!s.empty()) sets.push_back(s);  // members already sorted by construction
    std::sort(sets.begin(), sets.end());
    return sets;
  };
  return canon(*this) == canon(other);
}

int hamming_distance(const IntVector& a, const IntVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("codeword lengths differ");
  int d = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) d += (a(i) != b(i));
  return d;
}

int min_hamming(const CodeMatrix& m) {
  if (m.num_classes() < 2) throw std::invalid_argument("min_hamming needs at least two rows");
  int best = m.code_length() + 1;
  for (int i = 0; i < m.num_classes(); ++i)
    for (int j = i + 1; j < m.num_classes(); ++j)
      best = std::min(best, hamming_distance(m.row(i), m.row(j)));
  return best;
}

double vi_distance(const ColumnPartition& a, const ColumnPartition& b) {
  if (a.num_classes() != b.num_classes())
    throw std::invalid_argument("vi_distance: partitions cover different class counts");
  if (a.same_partition(b)) return 0.0;

  const double m = static_cast<double>(a.num_classes());
  double h_a = 0.0, h_b = 0.0, mi2 = 0.0;
  for (int k = 0; k < a.alphabet(); ++k) {
    const double s = a.cluster_size(k) / m;
    if (s > 0) h_a -= s * std::log(s);
  }
  for (int k = 0; k < b.alphabet(); ++k) {
    const double s = b.cluster_size(k) / m;
    if (s > 0) h_b -= s * std::log(s);
  }
  // joint masses via the class assignments; 0 log 0 := 0
  std::vector<int> joint(static_cast<size_t>(a.alphabet()) * b.alphabet(), 0);
  for (int c = 0; c < a.num_classes(); ++c) ++joint[a.symbol(c) * b.alphabet() + b.symbol(c)];
  for (int k = 0; k < a.alphabet(); ++k) {
    for (int kp = 0; kp < b.alphabet(); ++kp) {
      const int cnt = joint[k * b.alphabet() + kp];
      if (cnt == 0) continue;
      const double s = cnt / m;
      const double sa = a.cluster_size(k) / m;
      const double sb = b.cluster_size(kp) / m;
      mi2 += 2.0 * s * std::log(s / (sa * sb));
    }
  }
  return h_a + h_b - mi2;
}

double min_vi(const CodeMatrix& m) {
  if (m.code_length() < 2) throw std::invalid_argument("min_vi needs at least two columns");
  std::vector<ColumnPartition> cols;
  cols.reserve(m.code_length());
  for (int n = 0; n < m.code_length(); ++n) cols.push_back(ColumnPartition::from_column(m, n));
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < cols.size(); ++i)
    for (size_t j = i + 1; j < cols.size(); ++j) best = std::min(best, vi_distance(cols[i], cols[j]));
  return best;
}

double mutual_information(const ColumnPartition& c) {
  const double m = static_cast<double>(c.num_classes());
  double info = 0.0;
  for (int k = 0; k < c.alphabet(); ++k) {
    const int sz = c.cluster_size(k);
    if (sz == 0) continue;
    info += (sz / m) * std::log(m / sz);
  }
  return info;
}

double hamming_penalty_sum(const CodeMatrix& m) {
  double sum = 0.0;
  for (int i = 0; i < m.num_classes(); ++i)
    for (int j = i + 1; j < m.num_classes(); ++j) {
      const double d = hamming_distance(m.row(i), m.row(j));
      sum += 1.0 / (d * d);
    }
  return sum;
}

double vi_penalty_sum(const CodeMatrix& m) {
  std::vector<ColumnPartition> cols;
  cols.reserve(m.code_length());
  for (int n = 0; n < m.code_length(); ++n) cols.push_back(ColumnPartition::from_column(m, n));
  double sum = 0.0;
  for (size_t i = 0; i < cols.size(); ++i)
    for (size_t j = i + 1; j < cols.size(); ++j) {
      const double v = vi_distance(cols[i], cols[j]);
      if (v == 0.0) return std::numeric_limits<double>::infinity();
      sum += 1.0 / (v * v);
    }
  return sum;
}

double energy(const CodeMatrix& m, double eta) {
  const double row_term = hamming_penalty_sum(m);
  if (m.code_length() < 2) return row_term;
  const double col_term = vi_penalty_sum(m);
  if (std::isinf(col_term)) return std::numeric_limits<double>::infinity();
  return row_term + eta * col_term;
}

CodeMatrix binary_expansion(const CodeMatrix& m) {
  const int q = m.alphabet();
  IntMatrix out = IntMatrix::Zero(m.num_classes(), m.code_length() * q);
  for (int i = 0; i < m.num_classes(); ++i)
    for (int n = 0; n < m.code_length(); ++n) out(i, n * q + m(i, n)) = 1;
  return CodeMatrix::unchecked(std::move(out), 2);
}

std::string serialize(const CodeMatrix& m) {
  nlohmann::json j;
  j["num_classes"] = m.num_classes();
  j["code_length"] = m.code_length();
  j["alphabet"] = m.alphabet();
  auto rows = nlohmann::json::array();
  for (int i = 0; i < m.num_classes(); ++i) {
    auto row = nlohmann::json::array();
    for (int n = 0; n < m.code_length(); ++n) row.push_back(m(i, n));
    rows.push_back(std::move(row));
  }
  j["entries"] = std::move(rows);
  return j.dump();
}

CodeMatrix parse_code_matrix(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);  // rejects trailing garbage
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("code matrix parse error: ") + e.what());
  }
  if (!j.is_object() || !j.contains("num_classes") || !j.contains("code_length") ||
      !j.contains("alphabet") || !j.contains("entries"))
    throw std::invalid_argument("code matrix parse error: missing required field");
  const int m_rows = j.at("num_classes").get<int>();
  const int n_cols = j.at("code_length").get<int>();
  const int q = j.at("alphabet").get<int>();
  const auto& rows = j.at("entries");
  if (!rows.is_array() || static_cast<int>(rows.size()) != m_rows)
    throw std::invalid_argument("code matrix parse error: entries row count mismatch");
  IntMatrix e(m_rows, n_cols);
  for (int i = 0; i < m_rows; ++i) {
    const auto& row = rows.at(i);
    if (!row.is_array() || static_cast<int>(row.size()) != n_cols)
      throw std::invalid_argument("code matrix parse error: entries column count mismatch");
    for (int n = 0; n < n_cols; ++n) {
      if (!row.at(n).is_number_integer())
        throw std::invalid_argument("code matrix parse error: non-integer entry");
      e(i, n) = row.at(n).get<int>();
    }
  }
  return CodeMatrix(std::move(e), q);
}

}  // namespace ecoc
