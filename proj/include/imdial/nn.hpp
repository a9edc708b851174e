#pragma once

// Feed-forward networks with ReLU hidden layers, reverse-mode gradients,
// AdamW and global-norm clipping. Samples are matrix columns.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "imdial/random.hpp"

namespace imdial::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Layer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

/// Activations recorded by a forward pass. Valid only while the network's
/// parameters are unchanged.
struct Tape {
  std::vector<Matrix> inputs;  // input to each layer
  std::vector<Matrix> pre;     // pre-activation of each layer
  Matrix output;
  std::uint64_t stamp = 0;
};

struct Gradient {
  std::vector<Matrix> weight;
  std::vector<Vector> bias;
  Matrix input;  // d loss / d input, one column per sample

  double squared_norm() const;  // parameters only
  double norm() const;
  void scale(double factor);
  Gradient& operator+=(const Gradient& other);
  bool all_finite() const;
};

class Mlp {
 public:
  Mlp() = default;
  /// He-uniform weights, zero biases.
  Mlp(std::vector<int> sizes, Rng& rng);
  static Mlp zeros(std::vector<int> sizes);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  std::size_t parameter_count() const;

  /// Throws ShapeError when input rows differ from input_dim().
  Matrix forward(const Matrix& input, Tape* tape = nullptr) const;
  Vector forward_one(const Vector& input) const;

  /// Throws TapeError when the tape predates a parameter change.
  Gradient backward(const Tape& tape, const Matrix& output_grad) const;

  Gradient zero_gradient() const;

  const std::vector<Layer>& layers() const { return layers_; }
  /// Mutable access invalidates outstanding tapes.
  std::vector<Layer>& mutable_layers();

  std::uint64_t stamp() const { return stamp_; }
  std::uint64_t checksum() const;

  nlohmann::json to_json() const;
  static Mlp from_json(const nlohmann::json& j);

  bool operator==(const Mlp& o) const;

 private:
  void restamp();

  std::vector<int> sizes_;
  std::vector<Layer> layers_;
  std::uint64_t stamp_ = 0;
};

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

class AdamW {
 public:
  AdamW() = default;
  AdamW(const Mlp& net, AdamWConfig config);

  /// Decoupled weight decay, bias-corrected moments. Throws ShapeError on a
  /// shape mismatch and NumericError on a non-finite gradient.
  void step(Mlp& net, const Gradient& grad);

  const AdamWConfig& config() const { return config_; }
  void set_lr(double lr) { config_.lr = lr; }
  std::int64_t steps() const { return steps_; }

  nlohmann::json to_json() const;
  static AdamW from_json(const nlohmann::json& j);

 private:
  AdamWConfig config_;
  std::int64_t steps_ = 0;
  std::vector<Matrix> m_w, v_w;
  std::vector<Vector> m_b, v_b;
};

/// Scales every gradient by max_norm / global_norm when the global L2 norm of
/// all parameter gradients exceeds max_norm. Returns the pre-clip norm.
double clip_grad_norm(std::span<Gradient* const> grads, double max_norm);
double clip_grad_norm(Gradient& grad, double max_norm);

/// Bit-level hash of a sequence of doubles.
std::uint64_t hash_doubles(const double* data, std::size_t n, std::uint64_t seed);

}  // namespace imdial::nn
