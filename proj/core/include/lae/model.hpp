#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace lae {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class Activation { None, Relu };

/// y = act(W x + b). `weights` is out_dim x in_dim.
struct LinearLayer {
  Matrix weights;
  Vector bias;
  Activation activation = Activation::None;

  Eigen::Index in_dim() const noexcept { return weights.cols(); }
  Eigen::Index out_dim() const noexcept { return weights.rows(); }
};

struct LayerGradient {
  Matrix weights;
  Vector bias;
};

/// Batch-mean gradients, one entry per layer of the owning network.
struct GradientBuffer {
  std::vector<LayerGradient> layers;
  std::size_t sample_count = 0;

  void set_zero();
};

class Network;

/// Activations recorded by forward() for use by backward().
struct ForwardCache {
  /// inputs[i] is the input of layer i; inputs[0] is the batch itself.
  std::vector<Matrix> inputs;
  /// Pre-activation output of every layer.
  std::vector<Matrix> pre_activations;
  const Network* owner = nullptr;
  std::uint64_t revision = 0;
};

/// Feature extractor (every layer but the last) followed by a linear
/// classifier (the last layer). The classifier output is the logit vector.
class Network {
public:
  Network() = default;
  explicit Network(std::vector<LinearLayer> layers, bool freeze_extractor = false);

  const std::vector<LinearLayer>& layers() const noexcept { return layers_; }
  std::span<const LinearLayer> extractor() const noexcept {
    return {layers_.data(), layers_.size() - 1};
  }
  const LinearLayer& classifier() const noexcept { return layers_.back(); }

  /// Mutable access. Invalidates any ForwardCache taken before the call.
  LinearLayer& mutable_layer(std::size_t index);

  bool freeze_extractor() const noexcept { return freeze_extractor_; }
  void set_freeze_extractor(bool freeze) noexcept { freeze_extractor_ = freeze; }
  bool is_frozen(std::size_t layer_index) const noexcept {
    return freeze_extractor_ && layer_index + 1 < layers_.size();
  }

  /// [d_in, h1, ..., d_feat, K]
  std::vector<std::size_t> arch() const;
  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(layers_.front().in_dim()); }
  std::size_t num_classes() const noexcept { return static_cast<std::size_t>(layers_.back().out_dim()); }
  std::size_t parameter_count() const noexcept;
  std::uint64_t revision() const noexcept { return revision_; }

  GradientBuffer zero_gradients() const;

  friend bool operator==(const Network& a, const Network& b);

private:
  std::vector<LinearLayer> layers_;
  bool freeze_extractor_ = false;
  std::uint64_t revision_ = 0;
};

/// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), zero biases, relu on every
/// extractor layer. Same (arch, seed) gives a bitwise-identical network.
Network init_network(std::span<const std::size_t> arch, std::uint64_t seed);

/// Logits for each row of `batch`. Fills `cache` when given.
Matrix forward(const Network& net, const Matrix& batch, ForwardCache* cache = nullptr);

/// Backpropagates per-sample logit gradients (B x K) and returns batch-mean
/// parameter gradients. Extractor gradients are zero when the extractor is
/// frozen. relu'(0) = 0.
GradientBuffer backward(const Network& net, const ForwardCache& cache, const Matrix& logit_gradients);

/// Expected age of the softmax of each logit row.
std::vector<double> predict_age(const Network& net, const Matrix& batch);

} // namespace lae
