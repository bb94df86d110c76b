#include "lae/model.hpp"

#include "lae/error.hpp"
#include "lae/losses.hpp"

#include <cmath>
#include <random>
#include <string>

namespace lae {

void GradientBuffer::set_zero() {
  for (auto& g : layers) {
    g.weights.setZero();
    g.bias.setZero();
  }
  sample_count = 0;
}

Network::Network(std::vector<LinearLayer> layers, bool freeze_extractor)
    : layers_(std::move(layers)), freeze_extractor_(freeze_extractor) {
  if (layers_.empty()) {
    throw ConfigError("network needs at least one layer");
  }
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& layer = layers_[i];
    if (layer.bias.size() != layer.out_dim()) {
      throw ConfigError("layer " + std::to_string(i) + ": bias length does not match output width");
    }
    if (i > 0 && layer.in_dim() != layers_[i - 1].out_dim()) {
      throw ConfigError("layer " + std::to_string(i) + ": input width does not chain");
    }
  }
}

LinearLayer& Network::mutable_layer(std::size_t index) {
  ++revision_;
  return layers_.at(index);
}

std::vector<std::size_t> Network::arch() const {
  std::vector<std::size_t> dims;
  dims.reserve(layers_.size() + 1);
  dims.push_back(input_dim());
  for (const auto& layer : layers_) {
    dims.push_back(static_cast<std::size_t>(layer.out_dim()));
  }
  return dims;
}

std::size_t Network::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& layer : layers_) {
    n += static_cast<std::size_t>(layer.weights.size() + layer.bias.size());
  }
  return n;
}

GradientBuffer Network::zero_gradients() const {
  GradientBuffer g;
  g.layers.reserve(layers_.size());
  for (const auto& layer : layers_) {
    g.layers.push_back({Matrix::Zero(layer.out_dim(), layer.in_dim()), Vector::Zero(layer.out_dim())});
  }
  return g;
}

bool operator==(const Network& a, const Network& b) {
  if (a.freeze_extractor_ != b.freeze_extractor_ || a.layers_.size() != b.layers_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.layers_.size(); ++i) {
    const auto& x = a.layers_[i];
    const auto& y = b.layers_[i];
    if (x.activation != y.activation || x.weights.rows() != y.weights.rows() ||
        x.weights.cols() != y.weights.cols() || x.weights != y.weights || x.bias != y.bias) {
      return false;
    }
  }
  return true;
}

Network init_network(std::span<const std::size_t> arch, std::uint64_t seed) {
  if (arch.size() < 2) {
    throw ConfigError("architecture needs an input width and a class count");
  }
  for (std::size_t d : arch) {
    if (d < 1) {
      throw ConfigError("architecture dimensions must be >= 1");
    }
  }
  std::mt19937_64 rng(seed);
  std::vector<LinearLayer> layers;
  for (std::size_t i = 0; i + 1 < arch.size(); ++i) {
    const auto fan_in = static_cast<Eigen::Index>(arch[i]);
    const auto fan_out = static_cast<Eigen::Index>(arch[i + 1]);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    LinearLayer layer;
    layer.weights.resize(fan_out, fan_in);
    for (Eigen::Index r = 0; r < fan_out; ++r) {
      for (Eigen::Index c = 0; c < fan_in; ++c) {
        layer.weights(r, c) = dist(rng);
      }
    }
    layer.bias = Vector::Zero(fan_out);
    layer.activation = (i + 2 < arch.size()) ? Activation::Relu : Activation::None;
    layers.push_back(std::move(layer));
  }
  return Network(std::move(layers));
}

Matrix forward(const Network& net, const Matrix& batch, ForwardCache* cache) {
  if (batch.cols() != static_cast<Eigen::Index>(net.input_dim())) {
    throw DomainError("batch width " + std::to_string(batch.cols()) + " does not match network input " +
                      std::to_string(net.input_dim()));
  }
  if (cache) {
    cache->inputs.clear();
    cache->pre_activations.clear();
    cache->owner = &net;
    cache->revision = net.revision();
  }

  Matrix current = batch;
  for (const auto& layer : net.layers()) {
    Matrix pre = current * layer.weights.transpose();
    pre.rowwise() += layer.bias.transpose();
    Matrix post = layer.activation == Activation::Relu ? Matrix(pre.cwiseMax(0.0)) : pre;
    if (cache) {
      cache->inputs.push_back(std::move(current));
      cache->pre_activations.push_back(std::move(pre));
    }
    current = std::move(post);
  }
  return current;
}

GradientBuffer backward(const Network& net, const ForwardCache& cache, const Matrix& logit_gradients) {
  const auto& layers = net.layers();
  if (cache.owner != &net || cache.revision != net.revision() || cache.inputs.size() != layers.size()) {
    throw UsageError("backward called without a fresh forward cache for this network");
  }
  const Eigen::Index batch = cache.inputs.front().rows();
  if (logit_gradients.rows() != batch ||
      logit_gradients.cols() != static_cast<Eigen::Index>(net.num_classes())) {
    throw UsageError("logit gradient shape does not match the cached batch");
  }

  GradientBuffer grads = net.zero_gradients();
  grads.sample_count = static_cast<std::size_t>(batch);
  const double inv_batch = 1.0 / static_cast<double>(batch);

  Matrix delta = logit_gradients; // dL/d(output) of layer idx
  for (std::size_t idx = layers.size(); idx-- > 0;) {
    if (net.is_frozen(idx)) {
      break;
    }
    const auto& layer = layers[idx];
    if (layer.activation == Activation::Relu) {
      delta = delta.cwiseProduct(
          cache.pre_activations[idx].unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
    }
    grads.layers[idx].weights.noalias() = inv_batch * (delta.transpose() * cache.inputs[idx]);
    grads.layers[idx].bias = inv_batch * delta.colwise().sum().transpose();
    if (idx > 0 && !net.is_frozen(idx - 1)) {
      delta = delta * layer.weights;
    }
  }
  return grads;
}

std::vector<double> predict_age(const Network& net, const Matrix& batch) {
  const Matrix logits = forward(net, batch);
  std::vector<double> ages(static_cast<std::size_t>(logits.rows()));
  std::vector<double> row(static_cast<std::size_t>(logits.cols()));
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      row[static_cast<std::size_t>(c)] = logits(r, c);
    }
    ages[static_cast<std::size_t>(r)] = expected_age(softmax(row));
  }
  return ages;
}

} // namespace lae
