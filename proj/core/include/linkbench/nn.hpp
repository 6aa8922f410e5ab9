#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace linkbench {

// Minimal dense matrix, row-major.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
};

// out = a * b^T  (a: n x k, b: m x k) -> n x m
Mat matmul_nt(const Mat& a, const Mat& b);
// out = a^T * b  (a: k x n, b: k x m) -> n x m
Mat matmul_tn(const Mat& a, const Mat& b);

enum class Activation { kRelu, kSigmoid, kTanh };

double apply_activation(Activation act, double x);
double activation_slope(Activation act, double pre, double post);

struct DenseParams {
  Mat w;                    // out x in
  std::vector<double> b;    // out
};

struct TrainConfig {
  enum class Optimizer { kSgd, kAdam };
  Optimizer optimizer = Optimizer::kAdam;
  double learning_rate = 1e-3;
  int epochs = 50;
  int batch_size = 32;
  std::uint64_t seed = 0;
};

struct Mlp {
  std::vector<DenseParams> layers;
  Activation activation = Activation::kRelu;
};

// Layers sized dims[0] -> dims[1] -> ... -> dims.back(); weights drawn
// uniformly from +-1/sqrt(fan_in), biases zero. Deterministic given seed.
Mlp make_mlp(const std::vector<std::size_t>& dims, Activation act,
             std::uint64_t seed);

// Hidden layers activated, final layer linear (logits).
std::vector<double> mlp_forward(const Mlp& net, std::span<const double> input);

std::vector<double> softmax(std::span<const double> logits);

struct Sample {
  std::vector<double> x;
  int label = 0;
};

// Ordered views over every trainable array of a model. The flat-vector
// layout used by optimizers, gradient checks and persistence follows block
// order.
struct ParamPack {
  std::vector<std::span<double>> blocks;

  std::size_t total() const;
  std::vector<double> to_flat() const;
  void from_flat(std::span<const double> flat);
  void add(Mat& m) { blocks.push_back({m.data.data(), m.data.size()}); }
  void add(std::vector<double>& v) { blocks.push_back({v.data(), v.size()}); }
};

ParamPack params_of(Mlp& net);
ParamPack params_of(DenseParams& layer);

// Softmax cross-entropy of one example, scaled by `scale`; parameter
// gradients are accumulated into `grad` (flat, aligned with params_of(net))
// and the input gradient is written to *dx when requested.
double mlp_example_grad(const Mlp& net, std::span<const double> x, int label,
                        double scale, std::span<double> grad,
                        std::vector<double>* dx);

// Mean softmax cross-entropy over the index subset; gradient accumulated
// into `grad` (flat, aligned with params_of(net)).
double mlp_loss_grad(const Mlp& net, std::span<const Sample> samples,
                     std::span<const std::size_t> batch,
                     std::vector<double>& grad);

using LossGradFn =
    std::function<double(std::span<const std::size_t>, std::vector<double>&)>;

// Shared training loop: seeded shuffling, mini-batches, SGD or Adam
// (beta1 0.9, beta2 0.999, eps 1e-8). Returns the per-epoch mean loss and
// throws if the loss turns non-finite.
std::vector<double> run_training(ParamPack params, std::size_t sample_count,
                                 const TrainConfig& cfg, const LossGradFn& fn);

// Convenience wrapper over run_training + mlp_loss_grad.
std::vector<double> train_mlp(Mlp& net, std::span<const Sample> samples,
                              const TrainConfig& cfg);

// One message-passing layer: each node averages the transformed
// representations of its neighbors (zero vector when it has none) and
// combines them with its own transformed state through a ReLU.
struct GnnLayerParams {
  Mat w_self;               // out x in
  Mat w_msg;                // out x in
  std::vector<double> b;    // out
};

GnnLayerParams make_gnn_layer(std::size_t in, std::size_t out, std::uint64_t seed);

Mat gnn_layer(const std::vector<std::vector<int>>& adj, const Mat& h,
              const GnnLayerParams& params);

// Row order used by sort pooling: descending by last channel, then by
// earlier channels, then by row index.
std::vector<std::size_t> sort_pool_order(const Mat& h);

// Fixed-size readout: top k_sp rows in pool order, concatenated and
// zero-padded.
std::vector<double> sort_pool(const Mat& h, int k_sp);

// Textual round-trip-exact persistence (hex floats).
void write_params(std::ostream& out, const ParamPack& params);
void read_params(std::istream& in, ParamPack& params);
void write_train_config(std::ostream& out, const TrainConfig& cfg);
TrainConfig read_train_config(std::istream& in);

}  // namespace linkbench
