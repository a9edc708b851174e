#include "imdial/nn.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <string>

#include "imdial/error.hpp"

namespace imdial::nn {

using nlohmann::json;

namespace {

std::uint64_t next_stamp() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

json matrix_to_json(const Matrix& m) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  }
  return flat;
}

Matrix matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
  const auto flat = j.get<std::vector<double>>();
  if (flat.size() != static_cast<std::size_t>(rows * cols)) {
    throw ShapeError("checkpoint matrix has the wrong size");
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
  }
  return m;
}

}  // namespace

std::uint64_t hash_doubles(const double* data, std::size_t n, std::uint64_t seed) {
  std::uint64_t h = seed ^ 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, data + i, sizeof bits);
    h = (h ^ bits) * 0x100000001b3ULL;
    h ^= h >> 29;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Gradient
// ---------------------------------------------------------------------------

double Gradient::squared_norm() const {
  double s = 0.0;
  for (const auto& w : weight) s += w.squaredNorm();
  for (const auto& b : bias) s += b.squaredNorm();
  return s;
}

double Gradient::norm() const { return std::sqrt(squared_norm()); }

void Gradient::scale(double factor) {
  for (auto& w : weight) w *= factor;
  for (auto& b : bias) b *= factor;
  if (input.size() > 0) input *= factor;
}

Gradient& Gradient::operator+=(const Gradient& other) {
  if (weight.size() != other.weight.size()) throw ShapeError("gradient layer count mismatch");
  for (std::size_t i = 0; i < weight.size(); ++i) {
    weight[i] += other.weight[i];
    bias[i] += other.bias[i];
  }
  return *this;
}

bool Gradient::all_finite() const {
  for (const auto& w : weight) {
    if (!w.allFinite()) return false;
  }
  for (const auto& b : bias) {
    if (!b.allFinite()) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Mlp
// ---------------------------------------------------------------------------

Mlp::Mlp(std::vector<int> sizes, Rng& rng) : Mlp(zeros(std::move(sizes))) {
  for (auto& layer : layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.weight.cols()));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        layer.weight(r, c) = rng.uniform(-limit, limit);
      }
    }
  }
  restamp();
}

Mlp Mlp::zeros(std::vector<int> sizes) {
  if (sizes.size() < 2) throw ShapeError("an MLP needs at least input and output sizes");
  for (int s : sizes) {
    if (s <= 0) throw ShapeError("layer sizes must be positive");
  }
  Mlp net;
  net.sizes_ = std::move(sizes);
  for (std::size_t i = 0; i + 1 < net.sizes_.size(); ++i) {
    net.layers_.push_back({Matrix::Zero(net.sizes_[i + 1], net.sizes_[i]),
                           Vector::Zero(net.sizes_[i + 1])});
  }
  net.restamp();
  return net;
}

void Mlp::restamp() { stamp_ = next_stamp(); }

std::vector<Layer>& Mlp::mutable_layers() {
  restamp();
  return layers_;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Matrix Mlp::forward(const Matrix& input, Tape* tape) const {
  if (input.rows() != input_dim()) {
    throw ShapeError("MLP input has " + std::to_string(input.rows()) + " rows, expected " +
                     std::to_string(input_dim()));
  }
  if (tape != nullptr) {
    tape->inputs.clear();
    tape->pre.clear();
    tape->stamp = stamp_;
  }
  Matrix x = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    // Coefficient-wise product: every output entry is summed in the same
    // order whatever the batch width, so batched and single-sample passes
    // agree bit for bit.
    Matrix z = layers_[i].weight.lazyProduct(x);
    z.colwise() += layers_[i].bias;
    if (tape != nullptr) {
      tape->inputs.push_back(std::move(x));
      tape->pre.push_back(z);
    }
    x = (i + 1 < layers_.size()) ? Matrix(z.cwiseMax(0.0)) : std::move(z);
  }
  if (tape != nullptr) tape->output = x;
  return x;
}

Vector Mlp::forward_one(const Vector& input) const { return forward(input); }

Gradient Mlp::zero_gradient() const {
  Gradient g;
  for (const auto& l : layers_) {
    g.weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
    g.bias.push_back(Vector::Zero(l.bias.size()));
  }
  return g;
}

Gradient Mlp::backward(const Tape& tape, const Matrix& output_grad) const {
  if (tape.stamp != stamp_ || tape.inputs.size() != layers_.size()) {
    throw TapeError("tape does not belong to the current parameters");
  }
  if (output_grad.rows() != output_dim() || output_grad.cols() != tape.output.cols()) {
    throw ShapeError("output gradient shape does not match the forward pass");
  }
  Gradient g;
  g.weight.resize(layers_.size());
  g.bias.resize(layers_.size());
  Matrix delta = output_grad;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    if (k + 1 < layers_.size()) {
      delta = delta.cwiseProduct((tape.pre[k].array() > 0.0).cast<double>().matrix());
    }
    g.weight[k].noalias() = delta * tape.inputs[k].transpose();
    g.bias[k] = delta.rowwise().sum();
    delta = layers_[k].weight.transpose() * delta;
  }
  g.input = std::move(delta);
  return g;
}

std::uint64_t Mlp::checksum() const {
  std::uint64_t h = 0;
  for (const auto& l : layers_) {
    h = hash_doubles(l.weight.data(), static_cast<std::size_t>(l.weight.size()), h);
    h = hash_doubles(l.bias.data(), static_cast<std::size_t>(l.bias.size()), h);
  }
  return h;
}

bool Mlp::operator==(const Mlp& o) const {
  if (sizes_ != o.sizes_) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].weight != o.layers_[i].weight || layers_[i].bias != o.layers_[i].bias) {
      return false;
    }
  }
  return true;
}

json Mlp::to_json() const {
  json weights = json::array();
  json biases = json::array();
  for (const auto& l : layers_) {
    weights.push_back(matrix_to_json(l.weight));
    biases.push_back(std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size()));
  }
  return json{{"layers", sizes_}, {"weights", weights}, {"biases", biases}};
}

Mlp Mlp::from_json(const json& j) {
  Mlp net = zeros(j.at("layers").get<std::vector<int>>());
  for (std::size_t i = 0; i < net.layers_.size(); ++i) {
    auto& l = net.layers_[i];
    l.weight = matrix_from_json(j.at("weights").at(i), l.weight.rows(), l.weight.cols());
    const auto b = j.at("biases").at(i).get<std::vector<double>>();
    if (b.size() != static_cast<std::size_t>(l.bias.size())) throw ShapeError("bias size mismatch");
    l.bias = Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(b.size()));
  }
  net.restamp();
  return net;
}

// ---------------------------------------------------------------------------
// AdamW
// ---------------------------------------------------------------------------

AdamW::AdamW(const Mlp& net, AdamWConfig config) : config_(config) {
  for (const auto& l : net.layers()) {
    m_w.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
    v_w.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
    m_b.push_back(Vector::Zero(l.bias.size()));
    v_b.push_back(Vector::Zero(l.bias.size()));
  }
}

void AdamW::step(Mlp& net, const Gradient& grad) {
  if (grad.weight.size() != m_w.size() || net.layers().size() != m_w.size()) {
    throw ShapeError("optimizer, network and gradient disagree on layer count");
  }
  for (std::size_t i = 0; i < m_w.size(); ++i) {
    if (grad.weight[i].rows() != m_w[i].rows() || grad.weight[i].cols() != m_w[i].cols() ||
        grad.bias[i].size() != m_b[i].size()) {
      throw ShapeError("gradient shape mismatch at layer " + std::to_string(i));
    }
  }
  if (!grad.all_finite()) {
    throw NumericError("non-finite gradient (norm " + std::to_string(grad.norm()) +
                       ") at optimizer step " + std::to_string(steps_));
  }
  ++steps_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const double decay = 1.0 - config_.lr * config_.weight_decay;
  auto& layers = net.mutable_layers();
  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    param *= decay;
    param.array() -=
        config_.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + config_.eps);
  };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    update(layers[i].weight, m_w[i], v_w[i], grad.weight[i]);
    update(layers[i].bias, m_b[i], v_b[i], grad.bias[i]);
  }
}

json AdamW::to_json() const {
  json mw = json::array(), vw = json::array(), mb = json::array(), vb = json::array(),
       shapes = json::array();
  for (std::size_t i = 0; i < m_w.size(); ++i) {
    shapes.push_back({m_w[i].rows(), m_w[i].cols()});
    mw.push_back(matrix_to_json(m_w[i]));
    vw.push_back(matrix_to_json(v_w[i]));
    mb.push_back(std::vector<double>(m_b[i].data(), m_b[i].data() + m_b[i].size()));
    vb.push_back(std::vector<double>(v_b[i].data(), v_b[i].data() + v_b[i].size()));
  }
  return json{{"lr", config_.lr},         {"beta1", config_.beta1},
              {"beta2", config_.beta2},   {"eps", config_.eps},
              {"weight_decay", config_.weight_decay},
              {"steps", steps_},          {"shapes", shapes},
              {"m_w", mw},                {"v_w", vw},
              {"m_b", mb},                {"v_b", vb}};
}

AdamW AdamW::from_json(const json& j) {
  AdamW opt;
  opt.config_ = {j.at("lr").get<double>(), j.at("beta1").get<double>(),
                 j.at("beta2").get<double>(), j.at("eps").get<double>(),
                 j.at("weight_decay").get<double>()};
  opt.steps_ = j.at("steps").get<std::int64_t>();
  const auto& shapes = j.at("shapes");
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto rows = shapes[i][0].get<Eigen::Index>();
    const auto cols = shapes[i][1].get<Eigen::Index>();
    opt.m_w.push_back(matrix_from_json(j.at("m_w")[i], rows, cols));
    opt.v_w.push_back(matrix_from_json(j.at("v_w")[i], rows, cols));
    const auto mb = j.at("m_b")[i].get<std::vector<double>>();
    const auto vb = j.at("v_b")[i].get<std::vector<double>>();
    opt.m_b.push_back(Eigen::Map<const Vector>(mb.data(), static_cast<Eigen::Index>(mb.size())));
    opt.v_b.push_back(Eigen::Map<const Vector>(vb.data(), static_cast<Eigen::Index>(vb.size())));
  }
  return opt;
}

// ---------------------------------------------------------------------------
// Clipping
// ---------------------------------------------------------------------------

double clip_grad_norm(std::span<Gradient* const> grads, double max_norm) {
  if (!(max_norm > 0.0)) throw ArgumentError("max_norm must be positive");
  double sq = 0.0;
  for (const Gradient* g : grads) sq += g->squared_norm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double factor = max_norm / norm;
    for (Gradient* g : grads) g->scale(factor);
  }
  return norm;
}

double clip_grad_norm(Gradient& grad, double max_norm) {
  Gradient* one[] = {&grad};
  return clip_grad_norm(one, max_norm);
}

}  // namespace imdial::nn
