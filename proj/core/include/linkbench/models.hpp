#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "linkbench/graph.hpp"
#include "linkbench/nn.hpp"
#include "linkbench/split.hpp"
#include "linkbench/subgraph.hpp"

namespace linkbench {

struct LinkScore {
  NodeId u = 0;
  NodeId v = 0;
  double prob = 0.0;  // softmax probability of the link existing
};

// MLP classifier over fixed-size refinement-ordered subgraph encodings.
struct WlnmModel {
  int k = 10;
  Mlp mlp;
  TrainConfig cfg;
  std::vector<double> loss_trace;
  bool trained = false;
};

// Both graph classifiers extract subgraphs from the observed graph (train
// edges plus test positives) with the candidate link masked per extraction.
Graph scoring_graph(const SplitBundle& fold);

// Fixed-size encoding fed to the WLNM classifier: k(k-1)/2 - 1 entries.
std::vector<double> wlnm_encode(const Graph& g, NodeId u, NodeId v, int k);

WlnmModel wlnm_train(const SplitBundle& fold, int k, const TrainConfig& cfg);
LinkScore wlnm_score(const WlnmModel& m, const Graph& g, NodeId u, NodeId v);

struct SealConfig {
  int h = 1;           // extraction radius
  int d_lat = 16;      // latent embedding width
  int label_cap = 10;  // structural one-hot cap
  int k_sp = 30;       // sort-pooling size
  int layers = 3;      // message-passing depth
  int hidden = 32;     // channel width
  int latent_iters = 30;
};

// Message-passing network over variable-size subgraphs with distance-pair
// structural labels, factorization latents and optional node attributes.
struct SealModel {
  SealConfig params;
  std::vector<GnnLayerParams> gnn;
  Mlp head;
  LatentTable latents;
  int attr_width = 0;
  TrainConfig cfg;
  std::vector<double> loss_trace;
  bool trained = false;
};

// One encoded subgraph ready for the network.
struct SealSample {
  Mat features;
  std::vector<std::vector<int>> adj;
  int label = 0;
};

SealSample seal_encode(const Graph& g, NodeId u, NodeId v,
                       const SealConfig& params, const LatentTable* latents,
                       const Graph* attr_graph, int attr_width);

// Trainable parameters in flat order: per layer w_self, w_msg, b; then the
// head MLP.
ParamPack params_of(SealModel& m);

// Mean cross-entropy over the batch with gradients for every parameter
// (message weights, self weights, biases, head), accumulated flat.
double seal_loss_grad(const SealModel& m, std::span<const SealSample> samples,
                      std::span<const std::size_t> batch,
                      std::vector<double>& grad);

std::vector<double> seal_forward(const SealModel& m, const SealSample& sample);

SealModel seal_train(const SplitBundle& fold, const SealConfig& params,
                     const TrainConfig& cfg);
LinkScore seal_score(const SealModel& m, const Graph& g, NodeId u, NodeId v);

// Round-trip exact persistence; the fold checksum binds a model file to the
// split it was trained on.
void save_wlnm(const WlnmModel& m, const std::string& fold_checksum,
               std::ostream& out);
WlnmModel load_wlnm(std::istream& in, std::string* fold_checksum = nullptr);
void save_seal(const SealModel& m, const std::string& fold_checksum,
               std::ostream& out);
SealModel load_seal(std::istream& in, std::string* fold_checksum = nullptr);

}  // namespace linkbench
