#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qamro/types.hpp"

namespace qamro {

/// Parameters of one prediction head: three affine layers with tanh after
/// the first two, scalar linear output.
struct HeadParams {
  Matrix w1;  // h1 x input_dim
  Vector b1;  // h1
  Matrix w2;  // h2 x h1
  Vector b2;  // h2
  Vector w3;  // h2
  double b3 = 0.0;
};

/// Activations kept from forward() for the matching backward() call.
struct HeadCache {
  Matrix a1;  // n x h1
  Matrix a2;  // n x h2
};

using HeadGrads = HeadParams;

/// Multi-head MLP over a shared feature vector; one scalar output per
/// rating dimension. All heads are independent parameter-wise.
class Regressor {
 public:
  Regressor() = default;

  /// Seeded init: weights ~ N(0, 1/fan_in), hidden biases zero, output
  /// bias at output_bias so initial predictions sit near it.
  Regressor(int input_dim, std::vector<std::string> head_names,
            std::vector<int> hidden_dims, std::uint64_t seed,
            double output_bias);

  /// Rebuild from explicit parameters (checkpoint load); shape-checked.
  Regressor(int input_dim, std::vector<std::string> head_names,
            std::vector<int> hidden_dims, std::uint64_t seed,
            std::vector<HeadParams> heads);

  int input_dim() const { return input_dim_; }
  std::uint64_t rng_seed() const { return seed_; }
  const std::vector<std::string>& head_names() const { return head_names_; }
  const std::vector<int>& hidden_dims() const { return hidden_dims_; }
  const std::vector<HeadParams>& heads() const { return heads_; }
  std::vector<HeadParams>& heads() { return heads_; }

  /// features: n x input_dim. Returns n x n_heads, one column per head in
  /// head_names() order.
  Matrix forward(const Eigen::Ref<const Matrix>& features) const;
  Matrix forward(const Eigen::Ref<const Matrix>& features,
                 std::vector<HeadCache>& caches) const;

  /// output_grads: n x n_heads, d loss / d prediction. Exact backprop.
  std::vector<HeadGrads> backward(const Eigen::Ref<const Matrix>& features,
                                  const std::vector<HeadCache>& caches,
                                  const Eigen::Ref<const Matrix>& output_grads) const;

  void apply_step(const std::vector<HeadGrads>& grads, double learning_rate);

 private:
  int input_dim_ = 0;
  std::vector<int> hidden_dims_;
  std::uint64_t seed_ = 0;
  std::vector<std::string> head_names_;
  std::vector<HeadParams> heads_;
};

struct Checkpoint {
  Regressor regressor;
  LossConfig loss;
};

/// JSON layout with exact double round-trip; loading restores the model
/// bit for bit and re-saving reproduces the file byte for byte.
void save_checkpoint(const std::filesystem::path& path, const Regressor& reg,
                     const LossConfig& loss);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace qamro
