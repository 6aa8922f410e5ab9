#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "linkbench/graph.hpp"

namespace linkbench {

// Induced subgraph around a candidate pair. nodes[0] and nodes[1] are the
// pair itself; local adjacency never contains the candidate link, even when
// it exists in the source graph.
struct EnclosingSubgraph {
  std::vector<NodeId> nodes;            // original ids, pair first
  std::vector<std::vector<int>> adj;    // sorted local adjacency lists
  std::vector<int> hop_of;              // hop from the pair (0 for endpoints)
  int requested_k = 0;                  // > 0 for fixed-size extractions

  std::size_t size() const { return nodes.size(); }
  bool has_local_edge(int i, int j) const;
};

// Fixed-size extraction: rings of increasing hop are added until k nodes are
// reached; an overfull last ring is truncated by (dist_u + dist_v, id).
// Reachable sets smaller than k are kept as-is and padded at encoding time.
EnclosingSubgraph extract_k_subgraph(const Graph& g, NodeId u, NodeId v, int k);

// Variable-size extraction: the union of the h-hop balls around u and v.
EnclosingSubgraph extract_h_subgraph(const Graph& g, NodeId u, NodeId v, int h);

struct WlEncoding {
  std::vector<int> labels;    // final rank per local node, 1..size
  std::vector<double> vec;    // upper-triangle adjacency, pair entry removed
  int iterations = 0;         // refinement rounds until the fixed point
};

// Color refinement seeded by distances to the pair, iterated to a fixed
// point (or max_iters if > 0); ties in the final order are broken by
// (initial color, original id). The vector has k(k-1)/2 - 1 binary entries,
// zero-padded when the subgraph is smaller than k.
WlEncoding wl_label(const EnclosingSubgraph& sg, int max_iters = 0);

struct DrnlLabeling {
  std::vector<int> labels;  // endpoints 1; unreachable 0
  std::vector<int> dist_u;  // in-subgraph hop distances, -1 unreachable
  std::vector<int> dist_v;
};

// Closed-form label for distances (du, dv) to the two endpoints; symmetric
// in its arguments. Requires du, dv >= 1.
int drnl_label(int du, int dv);

DrnlLabeling drnl(const EnclosingSubgraph& sg);

// Per-node embedding of the train graph: rank-d factorization of the
// adjacency matrix by seeded orthogonal iteration, rows L2-normalized.
struct LatentTable {
  std::size_t dim = 0;
  std::size_t nodes = 0;
  std::vector<double> data;  // node-major

  std::span<const double> row(NodeId v) const {
    return {data.data() + static_cast<std::size_t>(v) * dim, dim};
  }
};

LatentTable latent_features(const Graph& train, int d_lat, int iters,
                            std::uint64_t seed);

struct FeatureSpec {
  int label_cap = 10;
  int latent_dim = 16;
  int attr_width = 0;
};

// Per-node rows: one-hot(min(label, cap)) || latent row || attribute
// one-hot. Absent blocks keep their declared width and stay zero.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

FeatureMatrix build_feature_matrix(const EnclosingSubgraph& sg,
                                   const DrnlLabeling& lab,
                                   const FeatureSpec& spec,
                                   const LatentTable* latents,
                                   const Graph* attr_graph);

}  // namespace linkbench
