#pragma once

#include <string>
#include <vector>

#include "ecoc/code_matrix.hpp"
#include "ecoc/dense_net.hpp"
#include "ecoc/types.hpp"

namespace ecoc {

enum class LossKind { Hinge, CrossEntropy, MulticlassHinge };

const char* loss_kind_name(LossKind k);
LossKind loss_kind_from_name(const std::string& name);

struct LossConfig {
  LossKind kind = LossKind::CrossEntropy;
  double gamma = 0.0;  // diversity weight
  double kappa = 0.0;  // multiclass hinge confidence

  void validate() const;
};

struct EncoderOutput {
  Matrix logits;    // logits_per_branch x N (one row for binary heads)
  Matrix features;  // F x N
};

struct EncodeCache {
  ForwardCache front;
  std::vector<ForwardCache> branches;
  EncoderOutput out;
};

struct ModelGrad {
  GradientBundle front;
  std::vector<GradientBundle> branches;
  Matrix head;
  Vector input;
};

// Ensemble of N meta-classifiers over a code matrix: a shared front network,
// one branch network per column, and a single linear head shared by every
// branch. Binary models emit one logit per branch; q-ary models emit q.
class Model {
 public:
  Model(DenseNet front, std::vector<DenseNet> branches, Matrix head, CodeMatrix code);

  // Default architecture: front input->32->32 relu, branches 32->F relu,
  // linear head. qary selects a q-row head instead of a single-logit head.
  static Model random(int input_dim, const CodeMatrix& code, bool qary, std::uint64_t seed,
                      int hidden_dim = 32, int feature_dim = 8);

  const DenseNet& front() const { return front_; }
  const std::vector<DenseNet>& branches() const { return branches_; }
  const Matrix& head() const { return head_; }
  const CodeMatrix& code() const { return code_; }
  const IntMatrix& expanded_code() const { return expanded_; }

  int input_dim() const { return front_.input_dim(); }
  int feature_dim() const { return static_cast<int>(head_.cols()); }
  int code_length() const { return code_.code_length(); }
  int num_classes() const { return code_.num_classes(); }
  int logits_per_branch() const { return static_cast<int>(head_.rows()); }
  bool qary() const { return logits_per_branch() > 1; }
  std::size_t parameter_count() const;

  EncodeCache encode_with_cache(const Vector& x) const;
  EncoderOutput encode(const Vector& x) const { return encode_with_cache(x).out; }

  // Backpropagates d(loss)/d(logits) to every parameter and the input.
  ModelGrad backprop_logits(const EncodeCache& cache, const Matrix& dlogits) const;
  // Backpropagates d(loss)/d(decoder scores).
  ModelGrad backprop_scores(const EncodeCache& cache, const Vector& dscores) const;

  // In-place SGD-style update: p -= scale * grad for every parameter.
  void apply_update(const ModelGrad& grad, double scale);

  DenseNet& mutable_front() { return front_; }
  std::vector<DenseNet>& mutable_branches() { return branches_; }
  Matrix& mutable_head() { return head_; }

 private:
  DenseNet front_;
  std::vector<DenseNet> branches_;
  Matrix head_;
  CodeMatrix code_;
  IntMatrix expanded_;  // binary expansion used by q-ary decoding
};

ModelGrad zero_grad(const Model& m);
void accumulate(ModelGrad& acc, const ModelGrad& g, double scale = 1.0);

// Row y of the code matrix (the per-branch meta labels of class y).
IntVector meta_labels(const CodeMatrix& m, int y);

// Per-branch output distribution: [1-nu(z), nu(z)] for single-logit branches,
// softmax(z) otherwise.
Vector branch_distribution(const Vector& branch_logits);

// Mean per-branch loss of one sample (Eq. averaging weight 1/N; the trainer
// adds the 1/K batch average).
double encoder_loss(const EncoderOutput& out, const IntVector& labels, const LossConfig& cfg);
// Mean per-branch Shannon entropy of the output distributions.
double diversity_term(const EncoderOutput& out);
// encoder_loss - gamma * diversity_term.
double joint_loss(const EncoderOutput& out, const IntVector& labels, const LossConfig& cfg);
// d(joint_loss)/d(logits), same shape as out.logits.
Matrix joint_loss_grad(const EncoderOutput& out, const IntVector& labels, const LossConfig& cfg);

// Decoder scores: (2M-1) tanh(z) for binary logits (len N), or the one-hot
// expanded matrix times the per-branch softmax probabilities for q-ary logits
// (len qN).
Vector decode_scores(const Vector& z, const CodeMatrix& m);
// softmax(decode_scores)
Vector decode(const Vector& z, const CodeMatrix& m);

// Flattened logits of the encoder (column per branch, stacked).
Vector flatten_logits(const Matrix& logits);

int predict_from_scores(const Vector& scores);  // argmax, lowest index on ties
int predict(const Model& model, const Vector& x);

// Scalar objective + input gradient pairs used by training checks and attacks.
struct ValueAndGrad {
  double value;
  Vector grad;
};

// Cross entropy -log p_y through the full decode path.
ValueAndGrad ce_loss_input_grad(const Model& model, const Vector& x, int y);
// max(s_y - max_{i!=y} s_i + margin, 0) on decoder scores (the attack hinge).
double decoder_hinge(const Vector& scores, int y, double margin);
ValueAndGrad decoder_hinge_input_grad(const Model& model, const Vector& x, int y, double margin);
// Summed per-branch training hinge against the true meta labels.
double meta_hinge(const EncoderOutput& out, const IntVector& labels, double kappa);
ValueAndGrad meta_hinge_input_grad(const Model& model, const Vector& x, int y, double kappa);
// CE of a single branch's meta distribution (substitute-model attacks).
ValueAndGrad branch_ce_input_grad(const Model& model, const Vector& x, int branch, int meta_label);
// Jacobian of decoder scores w.r.t. the input, one row per class.
Matrix score_input_jacobian(const Model& model, const Vector& x);

// Meta prediction of one branch: logit sign for binary heads, block argmax for
// q-ary heads.
int branch_meta_prediction(const EncoderOutput& out, int branch);

// Unique root in (0.5, 1) of 1/zeta = gamma * log(zeta/(1-zeta)). Solved by
// bisection in logit space; the logit-form residual meets 1e-12 for any
// gamma > 0 even where no representable zeta can.
double smoothing_fixed_point(double gamma);
double smoothing_residual(double zeta, double gamma);

// Checkpoint: front/branch/head parameter blocks plus the embedded code matrix.
std::string serialize_model(const Model& m);
Model parse_model(const std::string& text);

}  // namespace ecoc
