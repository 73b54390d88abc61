#include "ecoc/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ecoc {

namespace {

double softplus(double a) {
  // log(1 + e^a) without overflow
  if (a > 0) return a + std::log1p(std::exp(-a));
  return std::log1p(std::exp(a));
}

double entropy(const Vector& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p(i) > 0) h -= p(i) * std::log(p(i));
  return h;
}

}  // namespace

const char* loss_kind_name(LossKind k) {
  switch (k) {
    case LossKind::Hinge: return "hinge";
    case LossKind::CrossEntropy: return "cross_entropy";
    case LossKind::MulticlassHinge: return "multiclass_hinge";
  }
  return "cross_entropy";
}

LossKind loss_kind_from_name(const std::string& name) {
  if (name == "hinge") return LossKind::Hinge;
  if (name == "cross_entropy") return LossKind::CrossEntropy;
  if (name == "multiclass_hinge") return LossKind::MulticlassHinge;
  throw std::invalid_argument("unknown loss kind: " + name);
}

void LossConfig::validate() const {
  if (gamma < 0) throw std::invalid_argument("gamma must be nonnegative");
  if (kappa < 0) throw std::invalid_argument("kappa must be nonnegative");
}

Model::Model(DenseNet front, std::vector<DenseNet> branches, Matrix head, CodeMatrix code)
    : front_(std::move(front)),
      branches_(std::move(branches)),
      head_(std::move(head)),
      code_(std::move(code)),
      expanded_(binary_expansion(code_).entries()) {
  if (branches_.empty()) throw std::invalid_argument("model needs at least one branch");
  if (static_cast<int>(branches_.size()) != code_.code_length())
    throw std::invalid_argument("branch count must equal code length");
  const int front_out = front_.output_dim();
  const int feat = branches_.front().output_dim();
  for (const auto& b : branches_) {
    if (b.input_dim() != front_out) throw std::invalid_argument("branch input does not match front output");
    if (b.output_dim() != feat) throw std::invalid_argument("branches must share output dimension");
  }
  if (head_.cols() != feat) throw std::invalid_argument("head width must match feature dimension");
  const int rows = static_cast<int>(head_.rows());
  if (rows != 1 && rows != code_.alphabet())
    throw std::invalid_argument("head must emit one logit or alphabet-many logits per branch");
  if (rows == 1 && code_.alphabet() != 2)
    throw std::invalid_argument("single-logit heads require a binary code matrix");
}

Model Model::random(int input_dim, const CodeMatrix& code, bool qary, std::uint64_t seed,
                    int hidden_dim, int feature_dim) {
  Rng rng = make_rng(seed, "model-init");
  DenseNet front = DenseNet::random({input_dim, hidden_dim, hidden_dim},
                                    {Activation::Relu, Activation::Relu}, rng);
  std::vector<DenseNet> branches;
  branches.reserve(code.code_length());
  for (int n = 0; n < code.code_length(); ++n)
    branches.push_back(DenseNet::random({hidden_dim, feature_dim}, {Activation::Relu}, rng));
  const int out = qary ? code.alphabet() : 1;
  const double scale = std::sqrt(6.0 / (feature_dim + out));
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix head = Matrix::NullaryExpr(out, feature_dim, [&]() { return u(rng); });
  return Model(std::move(front), std::move(branches), std::move(head), code);
}

std::size_t Model::parameter_count() const {
  std::size_t n = front_.parameter_count() + static_cast<std::size_t>(head_.size());
  for (const auto& b : branches_) n += b.parameter_count();
  return n;
}

EncodeCache Model::encode_with_cache(const Vector& x) const {
  EncodeCache cache;
  cache.front = front_.forward(x);
  const int n_branches = code_length();
  cache.branches.reserve(n_branches);
  cache.out.features.resize(feature_dim(), n_branches);
  cache.out.logits.resize(logits_per_branch(), n_branches);
  for (int n = 0; n < n_branches; ++n) {
    cache.branches.push_back(branches_[n].forward(cache.front.output()));
    cache.out.features.col(n) = cache.branches.back().output();
    cache.out.logits.col(n) = head_ * cache.out.features.col(n);
  }
  return cache;
}

ModelGrad Model::backprop_logits(const EncodeCache& cache, const Matrix& dlogits) const {
  if (dlogits.rows() != logits_per_branch() || dlogits.cols() != code_length())
    throw std::invalid_argument("backprop: logit gradient shape mismatch");
  ModelGrad g;
  g.head = Matrix::Zero(head_.rows(), head_.cols());
  g.branches.reserve(branches_.size());
  Vector front_upstream = Vector::Zero(front_.output_dim());
  for (int n = 0; n < code_length(); ++n) {
    const Vector dz = dlogits.col(n);
    g.head += dz * cache.out.features.col(n).transpose();
    const Vector dfeat = head_.transpose() * dz;
    g.branches.push_back(branches_[n].backward(cache.branches[n], dfeat));
    front_upstream += g.branches.back().input_grad;
  }
  g.front = front_.backward(cache.front, front_upstream);
  g.input = g.front.input_grad;
  return g;
}

ModelGrad Model::backprop_scores(const EncodeCache& cache, const Vector& dscores) const {
  Matrix dlogits(logits_per_branch(), code_length());
  if (!qary()) {
    const Vector z = cache.out.logits.row(0).transpose();
    const Vector r = (2 * code_.entries().cast<double>().array() - 1.0).matrix().transpose() * dscores;
    dlogits.row(0) = (r.array() * (1.0 - z.array().tanh().square())).matrix().transpose();
  } else {
    const int q = code_.alphabet();
    const Vector dprob = expanded_.cast<double>().transpose() * dscores;  // qN
    for (int n = 0; n < code_length(); ++n) {
      const Vector p = softmax(cache.out.logits.col(n));
      const Vector dp = dprob.segment(n * q, q);
      dlogits.col(n) = p.cwiseProduct(dp - Vector::Constant(q, p.dot(dp)));
    }
  }
  return backprop_logits(cache, dlogits);
}

void Model::apply_update(const ModelGrad& grad, double scale) {
  for (size_t l = 0; l < front_.layers().size(); ++l) {
    front_.layers()[l].weight -= scale * grad.front.layers[l].weight;
    front_.layers()[l].bias -= scale * grad.front.layers[l].bias;
  }
  for (size_t n = 0; n < branches_.size(); ++n)
    for (size_t l = 0; l < branches_[n].layers().size(); ++l) {
      branches_[n].layers()[l].weight -= scale * grad.branches[n].layers[l].weight;
      branches_[n].layers()[l].bias -= scale * grad.branches[n].layers[l].bias;
    }
  head_ -= scale * grad.head;
}

ModelGrad zero_grad(const Model& m) {
  ModelGrad g;
  g.front = zero_like(m.front());
  g.branches.reserve(m.branches().size());
  for (const auto& b : m.branches()) g.branches.push_back(zero_like(b));
  g.head = Matrix::Zero(m.head().rows(), m.head().cols());
  g.input = Vector::Zero(m.input_dim());
  return g;
}

void accumulate(ModelGrad& acc, const ModelGrad& g, double scale) {
  accumulate(acc.front, g.front, scale);
  for (size_t n = 0; n < acc.branches.size(); ++n) accumulate(acc.branches[n], g.branches[n], scale);
  acc.head += scale * g.head;
  acc.input += scale * g.input;
}

IntVector meta_labels(const CodeMatrix& m, int y) {
  if (y < 0 || y >= m.num_classes()) throw std::invalid_argument("meta_labels: class index out of range");
  return m.row(y);
}

Vector branch_distribution(const Vector& branch_logits) {
  if (branch_logits.size() == 1) {
    const double p = logistic(branch_logits(0));
    Vector zeta(2);
    zeta << 1.0 - p, p;
    return zeta;
  }
  return softmax(branch_logits);
}

double encoder_loss(const EncoderOutput& out, const IntVector& labels, const LossConfig& cfg) {
  cfg.validate();
  const int n_branches = static_cast<int>(out.logits.cols());
  if (labels.size() != n_branches) throw std::invalid_argument("encoder_loss: label count mismatch");
  const bool single = out.logits.rows() == 1;
  double total = 0.0;
  for (int n = 0; n < n_branches; ++n) {
    const int y = labels(n);
    switch (cfg.kind) {
      case LossKind::Hinge: {
        if (!single) throw std::invalid_argument("hinge loss needs single-logit branches");
        if (y != 0 && y != 1) throw std::invalid_argument("meta label outside alphabet");
        total += std::max(0.0, 1.0 - out.logits(0, n) * (2 * y - 1));
        break;
      }
      case LossKind::CrossEntropy: {
        if (!single) throw std::invalid_argument("cross entropy needs single-logit branches");
        if (y != 0 && y != 1) throw std::invalid_argument("meta label outside alphabet");
        const double z = out.logits(0, n);
        total += y == 1 ? softplus(-z) : softplus(z);
        break;
      }
      case LossKind::MulticlassHinge: {
        if (y < 0 || y >= out.logits.rows()) throw std::invalid_argument("meta label outside alphabet");
        double rival = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < out.logits.rows(); ++i)
          if (i != y) rival = std::max(rival, out.logits(i, n));
        total += std::max(rival - out.logits(y, n) + cfg.kappa, 0.0);
        break;
      }
    }
  }
  return total / n_branches;
}

double diversity_term(const EncoderOutput& out) {
  const int n_branches = static_cast<int>(out.logits.cols());
  double total = 0.0;
  for (int n = 0; n < n_branches; ++n) total += entropy(branch_distribution(out.logits.col(n)));
  return total / n_branches;
}

double joint_loss(const EncoderOutput& out, const IntVector& labels, const LossConfig& cfg) {
  return encoder_loss(out, labels, cfg) - cfg.gamma * diversity_term(out);
}

Matrix joint_loss_grad(const EncoderOutput& out, const IntVector& labels, const LossConfig& cfg) {
  cfg.validate();
  const int n_branches = static_cast<int>(out.logits.cols());
  if (labels.size() != n_branches) throw std::invalid_argument("joint_loss_grad: label count mismatch");
  Matrix dz = Matrix::Zero(out.logits.rows(), out.logits.cols());
  const double w = 1.0 / n_branches;
  for (int n = 0; n < n_branches; ++n) {
    const int y = labels(n);
    switch (cfg.kind) {
      case LossKind::Hinge: {
        const double t = 2 * y - 1;
        if (1.0 - out.logits(0, n) * t > 0) dz(0, n) -= w * t;
        break;
      }
      case LossKind::CrossEntropy: {
        dz(0, n) += w * (logistic(out.logits(0, n)) - y);
        break;
      }
      case LossKind::MulticlassHinge: {
        int rival = -1;
        for (int i = 0; i < out.logits.rows(); ++i)
          if (i != y && (rival < 0 || out.logits(i, n) > out.logits(rival, n))) rival = i;
        if (out.logits(rival, n) - out.logits(y, n) + cfg.kappa > 0) {
          dz(rival, n) += w;
          dz(y, n) -= w;
        }
        break;
      }
    }
    if (cfg.gamma > 0) {
      if (out.logits.rows() == 1) {
        const double z = out.logits(0, n);
        const double p = logistic(z);
        dz(0, n) -= cfg.gamma * w * (-z * p * (1.0 - p));
      } else {
        const Vector p = softmax(out.logits.col(n));
        const double h = entropy(p);
        for (int i = 0; i < p.size(); ++i) {
          const double logp = p(i) > 0 ? std::log(p(i)) : 0.0;
          dz(i, n) -= cfg.gamma * w * (-p(i) * (logp + h));
        }
      }
    }
  }
  return dz;
}

Vector decode_scores(const Vector& z, const CodeMatrix& m) {
  const int n_cols = m.code_length();
  const int q = m.alphabet();
  if (z.size() == n_cols && q == 2) {
    const Matrix relabeled = 2.0 * m.entries().cast<double>().array() - 1.0;
    return relabeled * z.array().tanh().matrix();
  }
  if (z.size() == static_cast<Eigen::Index>(n_cols) * q) {
    const IntMatrix expanded = binary_expansion(m).entries();
    Vector probs(z.size());
    for (int n = 0; n < n_cols; ++n) probs.segment(n * q, q) = softmax(z.segment(n * q, q));
    return expanded.cast<double>() * probs;
  }
  throw std::invalid_argument("decode: logit length matches neither N nor q*N");
}

Vector decode(const Vector& z, const CodeMatrix& m) { return softmax(decode_scores(z, m)); }

Vector flatten_logits(const Matrix& logits) {
  return Eigen::Map<const Vector>(logits.data(), logits.size());
}

int predict_from_scores(const Vector& scores) {
  int best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i)
    if (scores(i) > scores(best)) best = static_cast<int>(i);
  return best;
}

int predict(const Model& model, const Vector& x) {
  const EncoderOutput out = model.encode(x);
  return predict_from_scores(decode_scores(flatten_logits(out.logits), model.code()));
}

ValueAndGrad ce_loss_input_grad(const Model& model, const Vector& x, int y) {
  if (y < 0 || y >= model.num_classes()) throw std::invalid_argument("class index out of range");
  const EncodeCache cache = model.encode_with_cache(x);
  const Vector scores = decode_scores(flatten_logits(cache.out.logits), model.code());
  const Vector p = softmax(scores);
  Vector ds = p;
  ds(y) -= 1.0;  // d(-log p_y)/ds
  const ModelGrad g = model.backprop_scores(cache, ds);
  const double loss = -std::log(std::max(p(y), 1e-300));
  return {loss, g.input};
}

double decoder_hinge(const Vector& scores, int y, double margin) {
  double rival = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < scores.size(); ++i)
    if (i != y) rival = std::max(rival, scores(i));
  return std::max(scores(y) - rival + margin, 0.0);
}

ValueAndGrad decoder_hinge_input_grad(const Model& model, const Vector& x, int y, double margin) {
  if (y < 0 || y >= model.num_classes()) throw std::invalid_argument("class index out of range");
  const EncodeCache cache = model.encode_with_cache(x);
  const Vector scores = decode_scores(flatten_logits(cache.out.logits), model.code());
  int rival = -1;
  for (int i = 0; i < scores.size(); ++i)
    if (i != y && (rival < 0 || scores(i) > scores(rival))) rival = i;
  const double value = std::max(scores(y) - scores(rival) + margin, 0.0);
  Vector ds = Vector::Zero(scores.size());
  if (value > 0) {
    ds(y) = 1.0;
    ds(rival) = -1.0;
  }
  const ModelGrad g = model.backprop_scores(cache, ds);
  return {value, g.input};
}

double meta_hinge(const EncoderOutput& out, const IntVector& labels, double kappa) {
  double total = 0.0;
  for (int n = 0; n < out.logits.cols(); ++n) {
    const int y = labels(n);
    if (out.logits.rows() == 1) {
      total += std::max(0.0, 1.0 - out.logits(0, n) * (2 * y - 1));
    } else {
      double rival = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < out.logits.rows(); ++i)
        if (i != y) rival = std::max(rival, out.logits(i, n));
      total += std::max(rival - out.logits(y, n) + kappa, 0.0);
    }
  }
  return total;
}

ValueAndGrad meta_hinge_input_grad(const Model& model, const Vector& x, int y, double kappa) {
  const IntVector labels = meta_labels(model.code(), y);
  const EncodeCache cache = model.encode_with_cache(x);
  Matrix dz = Matrix::Zero(cache.out.logits.rows(), cache.out.logits.cols());
  for (int n = 0; n < dz.cols(); ++n) {
    const int t = labels(n);
    if (dz.rows() == 1) {
      const double sgn = 2 * t - 1;
      if (1.0 - cache.out.logits(0, n) * sgn > 0) dz(0, n) = -sgn;
    } else {
      int rival = -1;
      for (int i = 0; i < dz.rows(); ++i)
        if (i != t && (rival < 0 || cache.out.logits(i, n) > cache.out.logits(rival, n))) rival = i;
      if (cache.out.logits(rival, n) - cache.out.logits(t, n) + kappa > 0) {
        dz(rival, n) = 1.0;
        dz(t, n) = -1.0;
      }
    }
  }
  const ModelGrad g = model.backprop_logits(cache, dz);
  return {meta_hinge(cache.out, labels, kappa), g.input};
}

ValueAndGrad branch_ce_input_grad(const Model& model, const Vector& x, int branch, int meta_label) {
  if (branch < 0 || branch >= model.code_length())
    throw std::invalid_argument("branch index out of range");
  const EncodeCache cache = model.encode_with_cache(x);
  Matrix dz = Matrix::Zero(cache.out.logits.rows(), cache.out.logits.cols());
  double loss = 0.0;
  if (dz.rows() == 1) {
    const double z = cache.out.logits(0, branch);
    loss = meta_label == 1 ? softplus(-z) : softplus(z);
    dz(0, branch) = logistic(z) - meta_label;
  } else {
    const Vector p = softmax(cache.out.logits.col(branch));
    loss = -std::log(std::max(p(meta_label), 1e-300));
    dz.col(branch) = p;
    dz(meta_label, branch) -= 1.0;
  }
  const ModelGrad g = model.backprop_logits(cache, dz);
  return {loss, g.input};
}

Matrix score_input_jacobian(const Model& model, const Vector& x) {
  const EncodeCache cache = model.encode_with_cache(x);
  Matrix jac(model.num_classes(), model.input_dim());
  for (int j = 0; j < model.num_classes(); ++j) {
    Vector ds = Vector::Zero(model.num_classes());
    ds(j) = 1.0;
    jac.row(j) = model.backprop_scores(cache, ds).input.transpose();
  }
  return jac;
}

int branch_meta_prediction(const EncoderOutput& out, int branch) {
  if (out.logits.rows() == 1) return out.logits(0, branch) > 0 ? 1 : 0;
  int best = 0;
  for (int i = 1; i < out.logits.rows(); ++i)
    if (out.logits(i, branch) > out.logits(best, branch)) best = i;
  return best;
}

double smoothing_residual(double zeta, double gamma) {
  return 1.0 / zeta - gamma * std::log(zeta / (1.0 - zeta));
}

double smoothing_fixed_point(double gamma) {
  if (gamma <= 0) throw std::invalid_argument("smoothing fixed point: residual never vanishes for gamma <= 0");
  // In u = log(zeta/(1-zeta)) the residual is r(u) = 1 + exp(-u) - gamma*u,
  // strictly decreasing with r(0) = 2 > 0.
  const auto residual = [gamma](double u) { return 1.0 + std::exp(-u) - gamma * u; };
  double lo = 0.0, hi = 1.0;
  while (residual(hi) > 0) hi *= 2;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double r = residual(mid);
    if (std::abs(r) < 1e-12) return logistic(mid);
    (r > 0 ? lo : hi) = mid;
  }
  return logistic(0.5 * (lo + hi));
}

std::string serialize_model(const Model& m) {
  nlohmann::json j;
  j["front"] = nlohmann::json::parse(serialize_net(m.front()));
  auto branches = nlohmann::json::array();
  for (const auto& b : m.branches()) branches.push_back(nlohmann::json::parse(serialize_net(b)));
  j["branches"] = std::move(branches);
  nlohmann::json head;
  head["rows"] = m.head().rows();
  head["cols"] = m.head().cols();
  auto data = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.head().rows(); ++r)
    for (Eigen::Index c = 0; c < m.head().cols(); ++c) data.push_back(m.head()(r, c));
  head["data"] = std::move(data);
  j["head"] = std::move(head);
  j["code_matrix"] = nlohmann::json::parse(serialize(m.code()));
  return j.dump();
}

Model parse_model(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("model parse error: ") + e.what());
  }
  DenseNet front = parse_net(j.at("front").dump());
  std::vector<DenseNet> branches;
  for (const auto& b : j.at("branches")) branches.push_back(parse_net(b.dump()));
  const auto& head_json = j.at("head");
  const Eigen::Index rows = head_json.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = head_json.at("cols").get<Eigen::Index>();
  Matrix head(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) head(r, c) = head_json.at("data").at(k++).get<double>();
  CodeMatrix code = parse_code_matrix(j.at("code_matrix").dump());
  return Model(std::move(front), std::move(branches), std::move(head), std::move(code));
}

}  // namespace ecoc
