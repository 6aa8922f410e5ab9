#include "linkbench/nn.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "linkbench/errors.hpp"
#include "linkbench/rng.hpp"

namespace linkbench {

Mat matmul_nt(const Mat& a, const Mat& b) {
  if (a.cols != b.cols) throw Error("matmul_nt: inner dimensions disagree");
  Mat out(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ar = a.data.data() + i * a.cols;
    for (std::size_t j = 0; j < b.rows; ++j) {
      const double* br = b.data.data() + j * b.cols;
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) acc += ar[k] * br[k];
      out(i, j) = acc;
    }
  }
  return out;
}

Mat matmul_tn(const Mat& a, const Mat& b) {
  if (a.rows != b.rows) throw Error("matmul_tn: inner dimensions disagree");
  Mat out(a.cols, b.cols);
  for (std::size_t k = 0; k < a.rows; ++k) {
    const double* ar = a.data.data() + k * a.cols;
    const double* br = b.data.data() + k * b.cols;
    for (std::size_t i = 0; i < a.cols; ++i) {
      double* orow = out.data.data() + i * out.cols;
      const double av = ar[i];
      if (av == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) orow[j] += av * br[j];
    }
  }
  return out;
}

double apply_activation(Activation act, double x) {
  switch (act) {
    case Activation::kRelu: return x > 0.0 ? x : 0.0;
    case Activation::kSigmoid: return 1.0 / (1.0 + std::exp(-x));
    case Activation::kTanh: return std::tanh(x);
  }
  return x;
}

double activation_slope(Activation act, double pre, double post) {
  switch (act) {
    case Activation::kRelu: return pre > 0.0 ? 1.0 : 0.0;
    case Activation::kSigmoid: return post * (1.0 - post);
    case Activation::kTanh: return 1.0 - post * post;
  }
  return 1.0;
}

namespace {

void init_dense(DenseParams& layer, std::size_t out, std::size_t in, Rng& rng) {
  layer.w = Mat(out, in);
  layer.b.assign(out, 0.0);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (double& x : layer.w.data) x = rng.symmetric(bound);
}

}  // namespace

Mlp make_mlp(const std::vector<std::size_t>& dims, Activation act,
             std::uint64_t seed) {
  if (dims.size() < 2) throw Error("an MLP needs at least one layer");
  for (std::size_t d : dims) {
    if (d == 0) throw Error("MLP layer width must be positive");
  }
  Mlp net;
  net.activation = act;
  Rng rng(mix_seed(seed, 0x6d6c70));
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    DenseParams layer;
    init_dense(layer, dims[i + 1], dims[i], rng);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

std::vector<double> mlp_forward(const Mlp& net, std::span<const double> input) {
  std::vector<double> current(input.begin(), input.end());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const DenseParams& layer = net.layers[l];
    if (layer.w.cols != current.size()) {
      throw Error("MLP shape mismatch at layer " + std::to_string(l));
    }
    std::vector<double> next(layer.w.rows);
    for (std::size_t o = 0; o < layer.w.rows; ++o) {
      const double* wr = layer.w.data.data() + o * layer.w.cols;
      double acc = layer.b[o];
      for (std::size_t i = 0; i < current.size(); ++i) acc += wr[i] * current[i];
      next[o] = acc;
    }
    if (l + 1 < net.layers.size()) {
      for (double& x : next) x = apply_activation(net.activation, x);
    }
    current = std::move(next);
  }
  return current;
}

std::vector<double> softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  return out;
}

std::size_t ParamPack::total() const {
  std::size_t n = 0;
  for (const auto& block : blocks) n += block.size();
  return n;
}

std::vector<double> ParamPack::to_flat() const {
  std::vector<double> flat;
  flat.reserve(total());
  for (const auto& block : blocks) flat.insert(flat.end(), block.begin(), block.end());
  return flat;
}

void ParamPack::from_flat(std::span<const double> flat) {
  if (flat.size() != total()) throw Error("flat parameter size mismatch");
  std::size_t cursor = 0;
  for (auto& block : blocks) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(cursor), block.size(),
                block.begin());
    cursor += block.size();
  }
}

ParamPack params_of(Mlp& net) {
  ParamPack pack;
  for (DenseParams& layer : net.layers) {
    pack.add(layer.w);
    pack.add(layer.b);
  }
  return pack;
}

ParamPack params_of(DenseParams& layer) {
  ParamPack pack;
  pack.add(layer.w);
  pack.add(layer.b);
  return pack;
}

double mlp_example_grad(const Mlp& net, std::span<const double> x, int label,
                        double scale, std::span<double> grad,
                        std::vector<double>* dx) {
  const std::size_t depth = net.layers.size();

  // Gradient blocks mirror params_of order: w0, b0, w1, b1, ...
  std::vector<std::size_t> offsets;
  std::size_t cursor = 0;
  for (const DenseParams& layer : net.layers) {
    offsets.push_back(cursor);
    cursor += layer.w.data.size();
    offsets.push_back(cursor);
    cursor += layer.b.size();
  }
  if (grad.size() != cursor) throw Error("gradient buffer size mismatch");

  std::vector<std::vector<double>> pre(depth), post(depth + 1);
  post[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < depth; ++l) {
    const DenseParams& layer = net.layers[l];
    if (layer.w.cols != post[l].size()) {
      throw Error("MLP shape mismatch at layer " + std::to_string(l));
    }
    pre[l].assign(layer.w.rows, 0.0);
    for (std::size_t o = 0; o < layer.w.rows; ++o) {
      const double* wr = layer.w.data.data() + o * layer.w.cols;
      double acc = layer.b[o];
      for (std::size_t i = 0; i < post[l].size(); ++i) acc += wr[i] * post[l][i];
      pre[l][o] = acc;
    }
    post[l + 1] = pre[l];
    if (l + 1 < depth) {
      for (double& value : post[l + 1]) value = apply_activation(net.activation, value);
    }
  }

  const std::vector<double>& logits = post[depth];
  const double top = *std::max_element(logits.begin(), logits.end());
  double lse = 0.0;
  for (double z : logits) lse += std::exp(z - top);
  lse = top + std::log(lse);
  const double loss = (lse - logits[static_cast<std::size_t>(label)]) * scale;

  std::vector<double> delta(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) {
    delta[j] = std::exp(logits[j] - lse) * scale;
  }
  delta[static_cast<std::size_t>(label)] -= scale;

  for (std::size_t l = depth; l-- > 0;) {
    const DenseParams& layer = net.layers[l];
    double* gw = grad.data() + offsets[2 * l];
    double* gb = grad.data() + offsets[2 * l + 1];
    for (std::size_t o = 0; o < layer.w.rows; ++o) {
      gb[o] += delta[o];
      double* gwr = gw + o * layer.w.cols;
      for (std::size_t i = 0; i < layer.w.cols; ++i) {
        gwr[i] += delta[o] * post[l][i];
      }
    }
    const bool need_input = l > 0 || dx != nullptr;
    if (!need_input) break;
    std::vector<double> prev(layer.w.cols, 0.0);
    for (std::size_t o = 0; o < layer.w.rows; ++o) {
      const double* wr = layer.w.data.data() + o * layer.w.cols;
      for (std::size_t i = 0; i < layer.w.cols; ++i) prev[i] += wr[i] * delta[o];
    }
    if (l == 0) {
      *dx = std::move(prev);
      break;
    }
    for (std::size_t i = 0; i < prev.size(); ++i) {
      prev[i] *= activation_slope(net.activation, pre[l - 1][i], post[l][i]);
    }
    delta = std::move(prev);
  }
  return loss;
}

double mlp_loss_grad(const Mlp& net, std::span<const Sample> samples,
                     std::span<const std::size_t> batch,
                     std::vector<double>& grad) {
  if (batch.empty()) throw Error("loss requires a non-empty batch");
  std::size_t total = 0;
  for (const DenseParams& layer : net.layers) {
    total += layer.w.data.size() + layer.b.size();
  }
  if (grad.size() != total) grad.assign(total, 0.0);

  const double inv = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (std::size_t idx : batch) {
    const Sample& sample = samples[idx];
    loss += mlp_example_grad(net, sample.x, sample.label, inv, grad, nullptr);
  }
  return loss;
}

std::vector<double> run_training(ParamPack params, std::size_t sample_count,
                                 const TrainConfig& cfg, const LossGradFn& fn) {
  if (cfg.epochs < 1) throw Error("training requires epochs >= 1");
  if (cfg.batch_size < 1) throw Error("training requires batch_size >= 1");
  if (!(cfg.learning_rate > 0.0)) throw Error("learning rate must be positive");
  if (sample_count == 0) throw Error("training requires at least one sample");

  const std::size_t total = params.total();
  std::vector<double> gradient(total, 0.0);
  std::vector<double> m(total, 0.0), v(total, 0.0);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  long step = 0;

  Rng rng(mix_seed(cfg.seed, 0x747261696eULL));
  std::vector<std::size_t> order(sample_count);
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < sample_count;
         begin += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(sample_count, begin + static_cast<std::size_t>(cfg.batch_size));
      std::span<const std::size_t> batch(order.data() + begin, end - begin);
      std::fill(gradient.begin(), gradient.end(), 0.0);
      const double loss = fn(batch, gradient);
      if (!std::isfinite(loss)) {
        throw Error("training diverged (non-finite loss) at epoch " +
                    std::to_string(epoch));
      }
      epoch_loss += loss * static_cast<double>(batch.size());

      std::size_t cursor = 0;
      if (cfg.optimizer == TrainConfig::Optimizer::kSgd) {
        for (auto& block : params.blocks) {
          for (double& value : block) {
            value -= cfg.learning_rate * gradient[cursor++];
          }
        }
      } else {
        ++step;
        const double correction1 = 1.0 - std::pow(kBeta1, step);
        const double correction2 = 1.0 - std::pow(kBeta2, step);
        for (auto& block : params.blocks) {
          for (double& value : block) {
            const double gval = gradient[cursor];
            m[cursor] = kBeta1 * m[cursor] + (1.0 - kBeta1) * gval;
            v[cursor] = kBeta2 * v[cursor] + (1.0 - kBeta2) * gval * gval;
            const double mhat = m[cursor] / correction1;
            const double vhat = v[cursor] / correction2;
            value -= cfg.learning_rate * mhat / (std::sqrt(vhat) + kEps);
            ++cursor;
          }
        }
      }
    }
    trace.push_back(epoch_loss / static_cast<double>(sample_count));
  }
  return trace;
}

std::vector<double> train_mlp(Mlp& net, std::span<const Sample> samples,
                              const TrainConfig& cfg) {
  return run_training(params_of(net), samples.size(), cfg,
                      [&](std::span<const std::size_t> batch,
                          std::vector<double>& grad) {
                        return mlp_loss_grad(net, samples, batch, grad);
                      });
}

GnnLayerParams make_gnn_layer(std::size_t in, std::size_t out,
                              std::uint64_t seed) {
  GnnLayerParams params;
  Rng rng(mix_seed(seed, 0x676e6e));
  params.w_self = Mat(out, in);
  params.w_msg = Mat(out, in);
  params.b.assign(out, 0.0);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (double& x : params.w_self.data) x = rng.symmetric(bound);
  for (double& x : params.w_msg.data) x = rng.symmetric(bound);
  return params;
}

Mat gnn_layer(const std::vector<std::vector<int>>& adj, const Mat& h,
              const GnnLayerParams& params) {
  if (adj.size() != h.rows) throw Error("gnn_layer: adjacency/feature mismatch");
  if (params.w_self.cols != h.cols || params.w_msg.cols != h.cols) {
    throw Error("gnn_layer: weight width does not match features");
  }
  const std::size_t n = h.rows;
  Mat mean(n, h.cols);
  for (std::size_t i = 0; i < n; ++i) {
    if (adj[i].empty()) continue;  // no neighbors -> zero message
    const double inv = 1.0 / static_cast<double>(adj[i].size());
    double* mr = mean.data.data() + i * mean.cols;
    for (int j : adj[i]) {
      const double* hr = h.data.data() + static_cast<std::size_t>(j) * h.cols;
      for (std::size_t c = 0; c < h.cols; ++c) mr[c] += hr[c] * inv;
    }
  }
  Mat self_part = matmul_nt(h, params.w_self);
  Mat msg_part = matmul_nt(mean, params.w_msg);
  Mat out(n, params.w_self.rows);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t o = 0; o < out.cols; ++o) {
      out(i, o) = apply_activation(
          Activation::kRelu, self_part(i, o) + msg_part(i, o) + params.b[o]);
    }
  }
  return out;
}

std::vector<std::size_t> sort_pool_order(const Mat& h) {
  std::vector<std::size_t> order(h.rows);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (std::size_t c = h.cols; c-- > 0;) {
      if (h(a, c) != h(b, c)) return h(a, c) > h(b, c);
    }
    return a < b;
  });
  return order;
}

std::vector<double> sort_pool(const Mat& h, int k_sp) {
  if (k_sp < 1) throw Error("sort pooling requires k >= 1");
  const auto order = sort_pool_order(h);
  std::vector<double> out(static_cast<std::size_t>(k_sp) * h.cols, 0.0);
  const std::size_t take = std::min<std::size_t>(order.size(),
                                                 static_cast<std::size_t>(k_sp));
  for (std::size_t r = 0; r < take; ++r) {
    auto src = h.row(order[r]);
    std::copy(src.begin(), src.end(), out.begin() + static_cast<std::ptrdiff_t>(r * h.cols));
  }
  return out;
}

void write_params(std::ostream& out, const ParamPack& params) {
  out << "blocks " << params.blocks.size() << '\n';
  char buf[40];
  for (const auto& block : params.blocks) {
    out << block.size();
    for (double x : block) {
      std::snprintf(buf, sizeof(buf), " %a", x);
      out << buf;
    }
    out << '\n';
  }
}

void read_params(std::istream& in, ParamPack& params) {
  std::string tag;
  std::size_t count = 0;
  in >> tag >> count;
  if (tag != "blocks" || count != params.blocks.size()) {
    throw DataError("model file does not match the expected parameter layout");
  }
  for (auto& block : params.blocks) {
    std::size_t size = 0;
    in >> size;
    if (size != block.size()) throw DataError("parameter block size mismatch");
    for (double& x : block) {
      std::string token;
      in >> token;
      x = std::strtod(token.c_str(), nullptr);
    }
  }
  if (!in) throw DataError("truncated model file");
}

void write_train_config(std::ostream& out, const TrainConfig& cfg) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%a", cfg.learning_rate);
  out << "train "
      << (cfg.optimizer == TrainConfig::Optimizer::kAdam ? "adam" : "sgd") << ' '
      << buf << ' ' << cfg.epochs << ' ' << cfg.batch_size << ' ' << cfg.seed
      << '\n';
}

TrainConfig read_train_config(std::istream& in) {
  std::string tag, optimizer, lr;
  TrainConfig cfg;
  in >> tag >> optimizer >> lr >> cfg.epochs >> cfg.batch_size >> cfg.seed;
  if (tag != "train" || (optimizer != "adam" && optimizer != "sgd")) {
    throw DataError("malformed training config in model file");
  }
  cfg.optimizer = optimizer == "adam" ? TrainConfig::Optimizer::kAdam
                                      : TrainConfig::Optimizer::kSgd;
  cfg.learning_rate = std::strtod(lr.c_str(), nullptr);
  return cfg;
}

}  // namespace linkbench
