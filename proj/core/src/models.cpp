#include "linkbench/models.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "linkbench/errors.hpp"
#include "linkbench/rng.hpp"

namespace linkbench {

namespace {

void check_balanced(const SplitBundle& fold) {
  if (fold.train_pos.pairs.size() != fold.train_neg.pairs.size()) {
    throw Error("training sets must be balanced: " +
                std::to_string(fold.train_pos.pairs.size()) + " positives vs " +
                std::to_string(fold.train_neg.pairs.size()) + " negatives");
  }
}

}  // namespace

Graph scoring_graph(const SplitBundle& fold) {
  return fold.train_graph.with_edges(fold.test_pos.pairs);
}

std::vector<double> wlnm_encode(const Graph& g, NodeId u, NodeId v, int k) {
  EnclosingSubgraph sg = extract_k_subgraph(g, u, v, k);
  return wl_label(sg).vec;
}

WlnmModel wlnm_train(const SplitBundle& fold, int k, const TrainConfig& cfg) {
  const std::size_t width =
      static_cast<std::size_t>(k) * static_cast<std::size_t>(k - 1) / 2;
  if (k < 2 || width <= 1) {
    throw Error("subgraph size k = " + std::to_string(k) +
                " yields an empty encoding");
  }
  check_balanced(fold);

  const Graph g = scoring_graph(fold);
  std::vector<Sample> samples;
  samples.reserve(fold.train_pos.pairs.size() + fold.train_neg.pairs.size());
  for (const auto& [u, v] : fold.train_pos.pairs) {
    samples.push_back({wlnm_encode(g, u, v, k), 1});
  }
  for (const auto& [u, v] : fold.train_neg.pairs) {
    samples.push_back({wlnm_encode(g, u, v, k), 0});
  }

  WlnmModel model;
  model.k = k;
  model.cfg = cfg;
  model.mlp = make_mlp({width - 1, 32, 32, 2}, Activation::kRelu, cfg.seed);
  model.loss_trace = train_mlp(model.mlp, samples, cfg);
  model.trained = true;
  return model;
}

LinkScore wlnm_score(const WlnmModel& m, const Graph& g, NodeId u, NodeId v) {
  if (!m.trained) throw Error("scoring requires a trained model");
  const std::vector<double> enc = wlnm_encode(g, u, v, m.k);
  const std::vector<double> probs = softmax(mlp_forward(m.mlp, enc));
  return {u, v, probs[1]};
}

SealSample seal_encode(const Graph& g, NodeId u, NodeId v,
                       const SealConfig& params, const LatentTable* latents,
                       const Graph* attr_graph, int attr_width) {
  if (attr_graph && attr_graph->attribute_count() != attr_width) {
    throw Error("attribute width does not match the trained model");
  }
  EnclosingSubgraph sg = extract_h_subgraph(g, u, v, params.h);
  DrnlLabeling lab = drnl(sg);
  FeatureSpec spec{params.label_cap, params.d_lat, attr_width};
  FeatureMatrix fm = build_feature_matrix(sg, lab, spec, latents, attr_graph);
  SealSample sample;
  sample.features = Mat(fm.rows, fm.cols);
  sample.features.data = std::move(fm.data);
  sample.adj = std::move(sg.adj);
  return sample;
}

ParamPack params_of(SealModel& m) {
  ParamPack pack;
  for (GnnLayerParams& layer : m.gnn) {
    pack.add(layer.w_self);
    pack.add(layer.w_msg);
    pack.add(layer.b);
  }
  ParamPack head = params_of(m.head);
  pack.blocks.insert(pack.blocks.end(), head.blocks.begin(), head.blocks.end());
  return pack;
}

namespace {

Mat neighbor_mean(const std::vector<std::vector<int>>& adj, const Mat& h) {
  Mat out(h.rows, h.cols);
  for (std::size_t i = 0; i < h.rows; ++i) {
    if (adj[i].empty()) continue;
    const double inv = 1.0 / static_cast<double>(adj[i].size());
    double* orow = out.data.data() + i * out.cols;
    for (int j : adj[i]) {
      const double* hr = h.data.data() + static_cast<std::size_t>(j) * h.cols;
      for (std::size_t c = 0; c < h.cols; ++c) orow[c] += hr[c] * inv;
    }
  }
  return out;
}

// Adjoint of neighbor_mean: routes each row's gradient back to the rows it
// averaged.
Mat neighbor_mean_adjoint(const std::vector<std::vector<int>>& adj, const Mat& d) {
  Mat out(d.rows, d.cols);
  for (std::size_t i = 0; i < d.rows; ++i) {
    if (adj[i].empty()) continue;
    const double inv = 1.0 / static_cast<double>(adj[i].size());
    const double* drow = d.data.data() + i * d.cols;
    for (int j : adj[i]) {
      double* orow = out.data.data() + static_cast<std::size_t>(j) * out.cols;
      for (std::size_t c = 0; c < d.cols; ++c) orow[c] += drow[c] * inv;
    }
  }
  return out;
}

struct SealTrace {
  std::vector<Mat> h;      // h[0] = input, h[l+1] = layer l output
  std::vector<Mat> mean;   // neighbor means per layer
  std::vector<Mat> pre;    // pre-activations per layer
  std::vector<double> pooled;
  std::vector<std::size_t> order;
};

SealTrace seal_forward_trace(const SealModel& m, const SealSample& sample) {
  SealTrace trace;
  trace.h.push_back(sample.features);
  for (const GnnLayerParams& layer : m.gnn) {
    const Mat& h = trace.h.back();
    Mat mean = neighbor_mean(sample.adj, h);
    Mat self_part = matmul_nt(h, layer.w_self);
    Mat msg_part = matmul_nt(mean, layer.w_msg);
    Mat pre(h.rows, layer.w_self.rows);
    for (std::size_t i = 0; i < pre.rows; ++i) {
      for (std::size_t o = 0; o < pre.cols; ++o) {
        pre(i, o) = self_part(i, o) + msg_part(i, o) + layer.b[o];
      }
    }
    Mat post = pre;
    for (double& x : post.data) x = apply_activation(Activation::kRelu, x);
    trace.mean.push_back(std::move(mean));
    trace.pre.push_back(std::move(pre));
    trace.h.push_back(std::move(post));
  }
  trace.order = sort_pool_order(trace.h.back());
  trace.pooled = sort_pool(trace.h.back(), m.params.k_sp);
  return trace;
}

}  // namespace

std::vector<double> seal_forward(const SealModel& m, const SealSample& sample) {
  SealTrace trace = seal_forward_trace(m, sample);
  return mlp_forward(m.head, trace.pooled);
}

double seal_loss_grad(const SealModel& m, std::span<const SealSample> samples,
                      std::span<const std::size_t> batch,
                      std::vector<double>& grad) {
  if (batch.empty()) throw Error("loss requires a non-empty batch");

  std::size_t gnn_total = 0;
  for (const GnnLayerParams& layer : m.gnn) {
    gnn_total += layer.w_self.data.size() + layer.w_msg.data.size() + layer.b.size();
  }
  std::size_t head_total = 0;
  for (const DenseParams& layer : m.head.layers) {
    head_total += layer.w.data.size() + layer.b.size();
  }
  if (grad.size() != gnn_total + head_total) {
    grad.assign(gnn_total + head_total, 0.0);
  }
  std::span<double> head_grad(grad.data() + gnn_total, head_total);

  const double inv = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (std::size_t idx : batch) {
    const SealSample& sample = samples[idx];
    SealTrace trace = seal_forward_trace(m, sample);

    std::vector<double> dpooled;
    loss += mlp_example_grad(m.head, trace.pooled, sample.label, inv, head_grad,
                             &dpooled);

    // Scatter the pooled gradient back onto the selected rows.
    const std::size_t channels = trace.h.back().cols;
    Mat dh(trace.h.back().rows, channels);
    const std::size_t take =
        std::min<std::size_t>(trace.order.size(),
                              static_cast<std::size_t>(m.params.k_sp));
    for (std::size_t r = 0; r < take; ++r) {
      double* drow = dh.data.data() + trace.order[r] * channels;
      for (std::size_t c = 0; c < channels; ++c) drow[c] += dpooled[r * channels + c];
    }

    std::size_t offset = gnn_total;
    for (std::size_t l = m.gnn.size(); l-- > 0;) {
      const GnnLayerParams& layer = m.gnn[l];
      offset -= layer.w_self.data.size() + layer.w_msg.data.size() + layer.b.size();
      double* gw_self = grad.data() + offset;
      double* gw_msg = gw_self + layer.w_self.data.size();
      double* gb = gw_msg + layer.w_msg.data.size();

      Mat dpre = dh;
      for (std::size_t i = 0; i < dpre.data.size(); ++i) {
        if (trace.pre[l].data[i] <= 0.0) dpre.data[i] = 0.0;
      }

      Mat gws = matmul_tn(dpre, trace.h[l]);      // out x in
      Mat gwm = matmul_tn(dpre, trace.mean[l]);   // out x in
      for (std::size_t i = 0; i < gws.data.size(); ++i) gw_self[i] += gws.data[i];
      for (std::size_t i = 0; i < gwm.data.size(); ++i) gw_msg[i] += gwm.data[i];
      for (std::size_t i = 0; i < dpre.rows; ++i) {
        for (std::size_t o = 0; o < dpre.cols; ++o) gb[o] += dpre(i, o);
      }

      if (l == 0) break;
      Mat back_self(dpre.rows, layer.w_self.cols);
      Mat back_msg(dpre.rows, layer.w_msg.cols);
      for (std::size_t i = 0; i < dpre.rows; ++i) {
        for (std::size_t o = 0; o < dpre.cols; ++o) {
          const double dv = dpre(i, o);
          if (dv == 0.0) continue;
          const double* ws = layer.w_self.data.data() + o * layer.w_self.cols;
          const double* wm = layer.w_msg.data.data() + o * layer.w_msg.cols;
          double* bs = back_self.data.data() + i * back_self.cols;
          double* bm = back_msg.data.data() + i * back_msg.cols;
          for (std::size_t c = 0; c < layer.w_self.cols; ++c) {
            bs[c] += dv * ws[c];
            bm[c] += dv * wm[c];
          }
        }
      }
      Mat routed = neighbor_mean_adjoint(sample.adj, back_msg);
      dh = Mat(back_self.rows, back_self.cols);
      for (std::size_t i = 0; i < dh.data.size(); ++i) {
        dh.data[i] = back_self.data[i] + routed.data[i];
      }
    }
  }
  return loss;
}

SealModel seal_train(const SplitBundle& fold, const SealConfig& params,
                     const TrainConfig& cfg) {
  if (params.h < 1) throw Error("hop radius h must be >= 1");
  if (params.layers < 1) throw Error("at least one message-passing layer");
  check_balanced(fold);

  SealModel model;
  model.params = params;
  model.cfg = cfg;
  model.latents = latent_features(fold.train_graph, params.d_lat,
                                  params.latent_iters, cfg.seed);
  model.attr_width = fold.train_graph.attribute_count();

  const Graph g = scoring_graph(fold);
  const Graph* attr_graph =
      fold.train_graph.has_attributes() ? &fold.train_graph : nullptr;

  std::vector<SealSample> samples;
  samples.reserve(fold.train_pos.pairs.size() + fold.train_neg.pairs.size());
  for (const auto& [u, v] : fold.train_pos.pairs) {
    samples.push_back(seal_encode(g, u, v, params, &model.latents, attr_graph));
    samples.back().label = 1;
  }
  for (const auto& [u, v] : fold.train_neg.pairs) {
    samples.push_back(seal_encode(g, u, v, params, &model.latents, attr_graph));
    samples.back().label = 0;
  }

  const std::size_t f0 = static_cast<std::size_t>(params.label_cap + 1) +
                         static_cast<std::size_t>(params.d_lat) +
                         static_cast<std::size_t>(model.attr_width);
  std::size_t in = f0;
  for (int l = 0; l < params.layers; ++l) {
    model.gnn.push_back(make_gnn_layer(in, static_cast<std::size_t>(params.hidden),
                                       mix_seed(cfg.seed, 100 + static_cast<std::uint64_t>(l))));
    in = static_cast<std::size_t>(params.hidden);
  }
  model.head = make_mlp({static_cast<std::size_t>(params.k_sp) * in,
                         static_cast<std::size_t>(params.hidden), 2},
                        Activation::kRelu, mix_seed(cfg.seed, 200));

  model.loss_trace = run_training(
      params_of(model), samples.size(), cfg,
      [&](std::span<const std::size_t> batch, std::vector<double>& grad) {
        return seal_loss_grad(model, samples, batch, grad);
      });
  model.trained = true;
  return model;
}

LinkScore seal_score(const SealModel& m, const Graph& g, NodeId u, NodeId v) {
  if (!m.trained) throw Error("scoring requires a trained model");
  const Graph* attr_graph = g.has_attributes() ? &g : nullptr;
  SealSample sample = seal_encode(g, u, v, m.params, &m.latents, attr_graph);
  const std::vector<double> probs = softmax(seal_forward(m, sample));
  return {u, v, probs[1]};
}

namespace {

constexpr std::string_view kModelMagic = "linkbench-model";

void write_dims(std::ostream& out, const Mlp& net) {
  out << "dims " << net.layers.size() + 1;
  out << ' ' << net.layers.front().w.cols;
  for (const DenseParams& layer : net.layers) out << ' ' << layer.w.rows;
  out << '\n';
}

std::vector<std::size_t> read_dims(std::istream& in) {
  std::string tag;
  std::size_t count = 0;
  in >> tag >> count;
  if (tag != "dims") throw DataError("malformed model file: expected dims");
  std::vector<std::size_t> dims(count);
  for (auto& d : dims) in >> d;
  return dims;
}

}  // namespace

void save_wlnm(const WlnmModel& m, const std::string& fold_checksum,
               std::ostream& out) {
  out << kModelMagic << " v1 wlnm\n";
  out << "fold " << fold_checksum << '\n';
  write_train_config(out, m.cfg);
  out << "k " << m.k << '\n';
  write_dims(out, m.mlp);
  Mlp& mlp = const_cast<Mlp&>(m.mlp);
  write_params(out, params_of(mlp));
}

WlnmModel load_wlnm(std::istream& in, std::string* fold_checksum) {
  std::string magic, version, kind, tag, checksum;
  in >> magic >> version >> kind >> tag >> checksum;
  if (magic != kModelMagic || version != "v1" || kind != "wlnm" || tag != "fold") {
    throw DataError("not a wlnm model file");
  }
  if (fold_checksum) *fold_checksum = checksum;
  WlnmModel m;
  m.cfg = read_train_config(in);
  in >> tag >> m.k;
  if (tag != "k") throw DataError("malformed model file: expected k");
  const std::vector<std::size_t> dims = read_dims(in);
  m.mlp = make_mlp(dims, Activation::kRelu, 0);
  ParamPack pack = params_of(m.mlp);
  read_params(in, pack);
  m.trained = true;
  return m;
}

void save_seal(const SealModel& m, const std::string& fold_checksum,
               std::ostream& out) {
  out << kModelMagic << " v1 seal\n";
  out << "fold " << fold_checksum << '\n';
  write_train_config(out, m.cfg);
  out << "seal " << m.params.h << ' ' << m.params.d_lat << ' '
      << m.params.label_cap << ' ' << m.params.k_sp << ' ' << m.params.layers
      << ' ' << m.params.hidden << ' ' << m.params.latent_iters << ' '
      << m.attr_width << '\n';
  write_dims(out, m.head);
  out << "latents " << m.latents.nodes << ' ' << m.latents.dim;
  char buf[40];
  for (double x : m.latents.data) {
    std::snprintf(buf, sizeof(buf), " %a", x);
    out << buf;
  }
  out << '\n';
  SealModel& mutable_model = const_cast<SealModel&>(m);
  write_params(out, params_of(mutable_model));
}

SealModel load_seal(std::istream& in, std::string* fold_checksum) {
  std::string magic, version, kind, tag, checksum;
  in >> magic >> version >> kind >> tag >> checksum;
  if (magic != kModelMagic || version != "v1" || kind != "seal" || tag != "fold") {
    throw DataError("not a seal model file");
  }
  if (fold_checksum) *fold_checksum = checksum;
  SealModel m;
  m.cfg = read_train_config(in);
  in >> tag >> m.params.h >> m.params.d_lat >> m.params.label_cap >>
      m.params.k_sp >> m.params.layers >> m.params.hidden >>
      m.params.latent_iters >> m.attr_width;
  if (tag != "seal") throw DataError("malformed model file: expected seal");
  const std::vector<std::size_t> head_dims = read_dims(in);

  in >> tag >> m.latents.nodes >> m.latents.dim;
  if (tag != "latents") throw DataError("malformed model file: expected latents");
  m.latents.data.resize(m.latents.nodes * m.latents.dim);
  for (double& x : m.latents.data) {
    std::string token;
    in >> token;
    x = std::strtod(token.c_str(), nullptr);
  }

  const std::size_t f0 = static_cast<std::size_t>(m.params.label_cap + 1) +
                         static_cast<std::size_t>(m.params.d_lat) +
                         static_cast<std::size_t>(m.attr_width);
  std::size_t in_width = f0;
  for (int l = 0; l < m.params.layers; ++l) {
    m.gnn.push_back(make_gnn_layer(in_width,
                                   static_cast<std::size_t>(m.params.hidden), 0));
    in_width = static_cast<std::size_t>(m.params.hidden);
  }
  m.head = make_mlp(head_dims, Activation::kRelu, 0);
  ParamPack pack = params_of(m);
  read_params(in, pack);
  m.trained = true;
  return m;
}

}  // namespace linkbench
