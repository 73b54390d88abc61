#include "ecoc/dense_net.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ecoc {

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Logistic: return "logistic";
  }
  return "identity";
}

Activation activation_from_name(const std::string& name) {
  if (name == "identity") return Activation::Identity;
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  if (name == "logistic") return Activation::Logistic;
  throw std::invalid_argument("unknown activation: " + name);
}

double logistic(double s) {
  if (s >= 0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

Vector softmax(const Vector& v) {
  const double m = v.maxCoeff();
  Vector e = (v.array() - m).exp();
  return e / e.sum();
}

Vector apply_activation(Activation a, const Vector& pre) {
  switch (a) {
    case Activation::Identity: return pre;
    case Activation::Relu: return pre.cwiseMax(0.0);
    case Activation::Tanh: return pre.array().tanh();
    case Activation::Logistic: {
      Vector out(pre.size());
      for (Eigen::Index i = 0; i < pre.size(); ++i) out(i) = logistic(pre(i));
      return out;
    }
  }
  return pre;
}

Vector activation_derivative(Activation a, const Vector& pre, const Vector& post) {
  switch (a) {
    case Activation::Identity: return Vector::Ones(pre.size());
    case Activation::Relu: {
      Vector d(pre.size());
      for (Eigen::Index i = 0; i < pre.size(); ++i) d(i) = pre(i) > 0 ? 1.0 : 0.0;
      return d;
    }
    case Activation::Tanh: return (1.0 - post.array().square()).matrix();
    case Activation::Logistic: return (post.array() * (1.0 - post.array())).matrix();
  }
  return Vector::Ones(pre.size());
}

DenseNet::DenseNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("network needs at least one layer");
  for (size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.weight.rows() != layer.bias.size())
      throw std::invalid_argument("layer bias size does not match weight rows");
    if (l > 0 && layers_[l - 1].weight.rows() != layer.weight.cols())
      throw std::invalid_argument("adjacent layer dimensions do not chain");
    if (!layer.weight.allFinite() || !layer.bias.allFinite())
      throw std::invalid_argument("layer parameters must be finite");
  }
}

std::size_t DenseNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

ForwardCache DenseNet::forward(const Vector& x) const {
  if (x.size() != input_dim()) throw std::invalid_argument("forward: input dimension mismatch");
  ForwardCache cache;
  cache.input = x;
  cache.pre.reserve(layers_.size());
  cache.post.reserve(layers_.size());
  const Vector* cur = &cache.input;
  for (const auto& layer : layers_) {
    cache.pre.push_back(layer.weight * (*cur) + layer.bias);
    cache.post.push_back(apply_activation(layer.activation, cache.pre.back()));
    cur = &cache.post.back();
  }
  return cache;
}

GradientBundle DenseNet::backward(const ForwardCache& cache, const Vector& upstream_grad) const {
  if (cache.post.size() != layers_.size())
    throw std::invalid_argument("backward: cache does not match network");
  if (upstream_grad.size() != output_dim())
    throw std::invalid_argument("backward: upstream gradient dimension mismatch");
  GradientBundle g;
  g.layers.resize(layers_.size());
  Vector delta = upstream_grad;
  for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
    const auto& layer = layers_[l];
    delta = delta.cwiseProduct(activation_derivative(layer.activation, cache.pre[l], cache.post[l]));
    const Vector& below = l == 0 ? cache.input : cache.post[l - 1];
    g.layers[l].weight = delta * below.transpose();
    g.layers[l].bias = delta;
    delta = layer.weight.transpose() * delta;
  }
  g.input_grad = std::move(delta);
  return g;
}

DenseNet DenseNet::random(const std::vector<int>& dims, const std::vector<Activation>& activations,
                          Rng& rng) {
  if (dims.size() < 2 || activations.size() != dims.size() - 1)
    throw std::invalid_argument("random net: need dims per layer boundary and one activation per layer");
  std::vector<DenseLayer> layers;
  layers.reserve(activations.size());
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l], out = dims[l + 1];
    const double scale = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> u(-scale, scale);
    DenseLayer layer;
    layer.weight = Matrix::NullaryExpr(out, in, [&]() { return u(rng); });
    layer.bias = Vector::Zero(out);
    layer.activation = activations[l];
    layers.push_back(std::move(layer));
  }
  return DenseNet(std::move(layers));
}

GradientBundle zero_like(const DenseNet& net) {
  GradientBundle g;
  g.layers.reserve(net.layers().size());
  for (const auto& l : net.layers())
    g.layers.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
  g.input_grad = Vector::Zero(net.input_dim());
  return g;
}

void accumulate(GradientBundle& acc, const GradientBundle& g, double scale) {
  for (size_t l = 0; l < acc.layers.size(); ++l) {
    acc.layers[l].weight += scale * g.layers[l].weight;
    acc.layers[l].bias += scale * g.layers[l].bias;
  }
  if (acc.input_grad.size() == g.input_grad.size()) acc.input_grad += scale * g.input_grad;
}

double max_rel_error(const Vector& a, const Vector& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double denom = std::max({1.0, std::abs(a(i)), std::abs(b(i))});
    worst = std::max(worst, std::abs(a(i) - b(i)) / denom);
  }
  return worst;
}

FiniteDiffReport finite_diff_check(const DenseNet& net, const Vector& x, const ScalarLoss& loss,
                                   double step, double tol) {
  const ForwardCache cache = net.forward(x);
  const GradientBundle analytic = net.backward(cache, loss.grad(cache.output()));

  DenseNet probe = net;
  const auto eval = [&](const Vector& input) { return loss.value(probe(input)); };

  double worst = 0.0;
  const auto compare = [&](double got, double expect) {
    const double denom = std::max({1.0, std::abs(got), std::abs(expect)});
    worst = std::max(worst, std::abs(got - expect) / denom);
  };

  for (size_t l = 0; l < probe.layers().size(); ++l) {
    auto& layer = probe.layers()[l];
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        const double saved = layer.weight(r, c);
        layer.weight(r, c) = saved + step;
        const double up = eval(x);
        layer.weight(r, c) = saved - step;
        const double down = eval(x);
        layer.weight(r, c) = saved;
        compare(analytic.layers[l].weight(r, c), (up - down) / (2 * step));
      }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
      const double saved = layer.bias(r);
      layer.bias(r) = saved + step;
      const double up = eval(x);
      layer.bias(r) = saved - step;
      const double down = eval(x);
      layer.bias(r) = saved;
      compare(analytic.layers[l].bias(r), (up - down) / (2 * step));
    }
  }
  Vector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double saved = xp(i);
    xp(i) = saved + step;
    const double up = eval(xp);
    xp(i) = saved - step;
    const double down = eval(xp);
    xp(i) = saved;
    compare(analytic.input_grad(i), (up - down) / (2 * step));
  }
  return {worst, worst < tol};
}

std::string serialize_net(const DenseNet& net) {
  nlohmann::json j;
  auto layers = nlohmann::json::array();
  for (const auto& l : net.layers()) {
    nlohmann::json layer;
    layer["activation"] = activation_name(l.activation);
    layer["out"] = l.weight.rows();
    layer["in"] = l.weight.cols();
    auto w = nlohmann::json::array();
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.push_back(l.weight(r, c));
    layer["weights"] = std::move(w);
    auto b = nlohmann::json::array();
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) b.push_back(l.bias(r));
    layer["bias"] = std::move(b);
    layers.push_back(std::move(layer));
  }
  j["layers"] = std::move(layers);
  return j.dump();
}

DenseNet parse_net(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("checkpoint parse error: ") + e.what());
  }
  std::vector<DenseLayer> layers;
  for (const auto& layer : j.at("layers")) {
    DenseLayer l;
    l.activation = activation_from_name(layer.at("activation").get<std::string>());
    const Eigen::Index out = layer.at("out").get<Eigen::Index>();
    const Eigen::Index in = layer.at("in").get<Eigen::Index>();
    const auto& w = layer.at("weights");
    const auto& b = layer.at("bias");
    if (static_cast<Eigen::Index>(w.size()) != out * in || static_cast<Eigen::Index>(b.size()) != out)
      throw std::invalid_argument("checkpoint parse error: parameter count mismatch");
    l.weight = Matrix(out, in);
    Eigen::Index k = 0;
    for (Eigen::Index r = 0; r < out; ++r)
      for (Eigen::Index c = 0; c < in; ++c) l.weight(r, c) = w.at(k++).get<double>();
    l.bias = Vector(out);
    for (Eigen::Index r = 0; r < out; ++r) l.bias(r) = b.at(r).get<double>();
    layers.push_back(std::move(l));
  }
  return DenseNet(std::move(layers));
}

}  // namespace ecoc
