#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ecoc/types.hpp"

namespace ecoc {

enum class Activation { Identity, Relu, Tanh, Logistic };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

// Numerically stable scalar logistic and elementwise/softmax helpers.
double logistic(double s);
Vector softmax(const Vector& v);
Vector apply_activation(Activation a, const Vector& pre);
// Derivative of the activation given pre-activation and activation values.
// relu derivative at 0 is defined as 0.
Vector activation_derivative(Activation a, const Vector& pre, const Vector& post);

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
  Activation activation = Activation::Identity;
};

struct ForwardCache {
  Vector input;
  std::vector<Vector> pre;   // per-layer pre-activation
  std::vector<Vector> post;  // per-layer activation output
  const Vector& output() const { return post.back(); }
};

struct LayerGrad {
  Matrix weight;
  Vector bias;
};

struct GradientBundle {
  std::vector<LayerGrad> layers;
  Vector input_grad;
};

// Plain fully-connected network with explicit forward/backward passes. All
// parameters are double precision; the object is immutable during inference
// so concurrent forward calls are safe.
class DenseNet {
 public:
  DenseNet() = default;
  explicit DenseNet(std::vector<DenseLayer> layers);

  int input_dim() const { return static_cast<int>(layers_.front().weight.cols()); }
  int output_dim() const { return static_cast<int>(layers_.back().weight.rows()); }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  std::size_t parameter_count() const;

  ForwardCache forward(const Vector& x) const;
  Vector operator()(const Vector& x) const { return forward(x).post.back(); }

  // Exact reverse-mode gradients of output . upstream_grad w.r.t. all
  // parameters and the input; cache must come from a matching forward call.
  GradientBundle backward(const ForwardCache& cache, const Vector& upstream_grad) const;

  // Glorot-uniform initialization, deterministic per rng state.
  static DenseNet random(const std::vector<int>& dims, const std::vector<Activation>& activations,
                         Rng& rng);

 private:
  std::vector<DenseLayer> layers_;
};

GradientBundle zero_like(const DenseNet& net);
void accumulate(GradientBundle& acc, const GradientBundle& g, double scale = 1.0);

struct FiniteDiffReport {
  double max_relative_error = 0.0;
  bool pass = false;
};

// Compares backward gradients against central finite differences of
// loss(net(x)) over every parameter and input coordinate. The loss supplies
// its value and its gradient w.r.t. the network output.
struct ScalarLoss {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> grad;
};

FiniteDiffReport finite_diff_check(const DenseNet& net, const Vector& x, const ScalarLoss& loss,
                                   double step = 1e-4, double tol = 1e-5);

// max |a-b| / max(1, |a|, |b|) over coordinates — the relative-error measure
// used by all gradient checks in this project.
double max_rel_error(const Vector& a, const Vector& b);

// Structured-text checkpoint with exact double round-trip.
std::string serialize_net(const DenseNet& net);
DenseNet parse_net(const std::string& text);

}  // namespace ecoc
