#include "linkbench/subgraph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <unordered_map>

#include "linkbench/errors.hpp"
#include "linkbench/rng.hpp"

namespace linkbench {

namespace {

constexpr int kUnreached = std::numeric_limits<int>::max() / 4;

// BFS over the full graph with the candidate link (u, v) masked out.
std::vector<int> masked_bfs(const Graph& g, NodeId src, NodeId mask_a,
                            NodeId mask_b) {
  std::vector<int> dist(g.node_count(), -1);
  dist[src] = 0;
  std::deque<NodeId> queue{src};
  while (!queue.empty()) {
    NodeId x = queue.front();
    queue.pop_front();
    for (NodeId y : g.neighbors(x)) {
      if ((x == mask_a && y == mask_b) || (x == mask_b && y == mask_a)) continue;
      if (dist[y] < 0) {
        dist[y] = dist[x] + 1;
        queue.push_back(y);
      }
    }
  }
  return dist;
}

// Local BFS inside the extracted subgraph (already masked).
std::vector<int> local_bfs(const EnclosingSubgraph& sg, int src) {
  std::vector<int> dist(sg.size(), -1);
  dist[src] = 0;
  std::deque<int> queue{src};
  while (!queue.empty()) {
    int x = queue.front();
    queue.pop_front();
    for (int y : sg.adj[x]) {
      if (dist[y] < 0) {
        dist[y] = dist[x] + 1;
        queue.push_back(y);
      }
    }
  }
  return dist;
}

EnclosingSubgraph assemble(const Graph& g, NodeId u, NodeId v,
                           std::vector<NodeId> nodes, std::vector<int> hops,
                           int requested_k) {
  EnclosingSubgraph sg;
  sg.nodes = std::move(nodes);
  sg.hop_of = std::move(hops);
  sg.requested_k = requested_k;

  std::unordered_map<NodeId, int> local;
  local.reserve(sg.nodes.size());
  for (std::size_t i = 0; i < sg.nodes.size(); ++i) {
    local.emplace(sg.nodes[i], static_cast<int>(i));
  }
  sg.adj.assign(sg.nodes.size(), {});
  for (std::size_t i = 0; i < sg.nodes.size(); ++i) {
    for (NodeId w : g.neighbors(sg.nodes[i])) {
      auto it = local.find(w);
      if (it != local.end()) sg.adj[i].push_back(it->second);
    }
    std::sort(sg.adj[i].begin(), sg.adj[i].end());
  }
  // The candidate link is never part of the local adjacency.
  auto drop = [&](int from, int to) {
    auto& list = sg.adj[from];
    auto it = std::lower_bound(list.begin(), list.end(), to);
    if (it != list.end() && *it == to) list.erase(it);
  };
  drop(0, 1);
  drop(1, 0);
  return sg;
}

void check_pair(const Graph& g, NodeId u, NodeId v) {
  if (u >= g.node_count() || v >= g.node_count()) {
    throw Error("subgraph extraction: node id out of range");
  }
  if (u == v) throw Error("subgraph extraction requires two distinct nodes");
}

}  // namespace

bool EnclosingSubgraph::has_local_edge(int i, int j) const {
  const auto& list = adj[static_cast<std::size_t>(i)];
  return std::binary_search(list.begin(), list.end(), j);
}

EnclosingSubgraph extract_k_subgraph(const Graph& g, NodeId u, NodeId v, int k) {
  check_pair(g, u, v);
  if (k < 2) throw Error("subgraph size k must be >= 2");

  const std::vector<int> du = masked_bfs(g, u, u, v);
  const std::vector<int> dv = masked_bfs(g, v, u, v);

  // Bucket reachable nodes by hop = min distance to the pair.
  std::map<int, std::vector<NodeId>> rings;
  for (NodeId w = 0; w < g.node_count(); ++w) {
    if (w == u || w == v) continue;
    const int a = du[w] < 0 ? kUnreached : du[w];
    const int b = dv[w] < 0 ? kUnreached : dv[w];
    const int hop = std::min(a, b);
    if (hop >= kUnreached) continue;
    rings[hop].push_back(w);
  }

  std::vector<NodeId> nodes{u, v};
  std::vector<int> hops{0, 0};
  auto ring_order = [&](NodeId a, NodeId b) {
    const long sa = static_cast<long>(du[a] < 0 ? kUnreached : du[a]) +
                    (dv[a] < 0 ? kUnreached : dv[a]);
    const long sb = static_cast<long>(du[b] < 0 ? kUnreached : du[b]) +
                    (dv[b] < 0 ? kUnreached : dv[b]);
    if (sa != sb) return sa < sb;
    return a < b;
  };
  for (auto& [hop, ring] : rings) {
    if (nodes.size() >= static_cast<std::size_t>(k)) break;
    std::sort(ring.begin(), ring.end(), ring_order);
    const std::size_t room = static_cast<std::size_t>(k) - nodes.size();
    const std::size_t take = std::min(room, ring.size());
    for (std::size_t i = 0; i < take; ++i) {
      nodes.push_back(ring[i]);
      hops.push_back(hop);
    }
  }
  return assemble(g, u, v, std::move(nodes), std::move(hops), k);
}

EnclosingSubgraph extract_h_subgraph(const Graph& g, NodeId u, NodeId v, int h) {
  check_pair(g, u, v);
  if (h < 1) throw Error("hop radius h must be >= 1");

  const std::vector<int> du = masked_bfs(g, u, u, v);
  const std::vector<int> dv = masked_bfs(g, v, u, v);

  std::vector<std::pair<std::pair<int, NodeId>, int>> members;  // ((hop, id), hop)
  for (NodeId w = 0; w < g.node_count(); ++w) {
    if (w == u || w == v) continue;
    const bool in_u = du[w] >= 0 && du[w] <= h;
    const bool in_v = dv[w] >= 0 && dv[w] <= h;
    if (!in_u && !in_v) continue;
    const int a = du[w] < 0 ? kUnreached : du[w];
    const int b = dv[w] < 0 ? kUnreached : dv[w];
    const int hop = std::min(a, b);
    members.push_back({{hop, w}, hop});
  }
  std::sort(members.begin(), members.end());

  std::vector<NodeId> nodes{u, v};
  std::vector<int> hops{0, 0};
  for (const auto& [key, hop] : members) {
    nodes.push_back(key.second);
    hops.push_back(hop);
  }
  return assemble(g, u, v, std::move(nodes), std::move(hops), 0);
}

WlEncoding wl_label(const EnclosingSubgraph& sg, int max_iters) {
  const int n = static_cast<int>(sg.size());
  const int k = sg.requested_k > 0 ? sg.requested_k : n;
  if (n > k) throw Error("subgraph larger than its declared size");
  if (k < 2) throw Error("encoding needs at least two nodes");

  // Initial colors from the (min, max) distance pair to the endpoints.
  const std::vector<int> d0 = local_bfs(sg, 0);
  const std::vector<int> d1 = local_bfs(sg, 1);
  std::vector<std::pair<int, int>> keys(n);
  for (int i = 0; i < n; ++i) {
    const int a = d0[i] < 0 ? kUnreached : d0[i];
    const int b = d1[i] < 0 ? kUnreached : d1[i];
    keys[i] = {std::min(a, b), std::max(a, b)};
  }
  std::map<std::pair<int, int>, int> key_rank;
  for (const auto& key : keys) key_rank.emplace(key, 0);
  int next = 1;
  for (auto& [key, rank] : key_rank) rank = next++;
  std::vector<int> initial(n), color(n);
  for (int i = 0; i < n; ++i) initial[i] = color[i] = key_rank.at(keys[i]);

  // Hash-based refinement: a node's next color ranks the pair (own color,
  // sorted neighbor colors). Ranking preserves the previous order, so the
  // partition refines monotonically and reaches a fixed point in <= n rounds.
  const int limit = max_iters > 0 ? max_iters : n;
  int iterations = 0;
  for (int round = 0; round < limit; ++round) {
    using Signature = std::pair<int, std::vector<int>>;
    std::vector<Signature> sig(n);
    for (int i = 0; i < n; ++i) {
      std::vector<int> around;
      around.reserve(sg.adj[i].size());
      for (int j : sg.adj[i]) around.push_back(color[j]);
      std::sort(around.begin(), around.end());
      sig[i] = {color[i], std::move(around)};
    }
    std::map<Signature, int> sig_rank;
    for (const auto& s : sig) sig_rank.emplace(s, 0);
    int fresh = 1;
    for (auto& [s, rank] : sig_rank) rank = fresh++;
    std::vector<int> refined(n);
    for (int i = 0; i < n; ++i) refined[i] = sig_rank.at(sig[i]);
    ++iterations;
    if (refined == color) break;
    color = std::move(refined);
  }

  // Total order: refined color, then initial color, then original id.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (color[a] != color[b]) return color[a] < color[b];
    if (initial[a] != initial[b]) return initial[a] < initial[b];
    return sg.nodes[a] < sg.nodes[b];
  });

  WlEncoding enc;
  enc.iterations = iterations;
  enc.labels.assign(n, 0);
  std::vector<int> position(n);  // local node -> 0-based slot
  for (int rank = 0; rank < n; ++rank) {
    enc.labels[order[rank]] = rank + 1;
    position[order[rank]] = rank;
  }

  // Upper-triangle adjacency in slot order, the pair entry (slots 0,1)
  // removed; slots beyond n stay zero.
  std::vector<std::vector<double>> grid(k, std::vector<double>(k, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j : sg.adj[i]) {
      grid[position[i]][position[j]] = 1.0;
    }
  }
  enc.vec.reserve(static_cast<std::size_t>(k) * (k - 1) / 2 - 1);
  for (int r = 0; r < k; ++r) {
    for (int c = r + 1; c < k; ++c) {
      if (r == 0 && c == 1) continue;
      enc.vec.push_back(grid[r][c]);
    }
  }
  return enc;
}

int drnl_label(int du, int dv) {
  const int d = du + dv;
  const int half = d / 2;
  return 1 + std::min(du, dv) + half * (half + d % 2 - 1);
}

DrnlLabeling drnl(const EnclosingSubgraph& sg) {
  DrnlLabeling lab;
  lab.dist_u = local_bfs(sg, 0);
  lab.dist_v = local_bfs(sg, 1);
  lab.labels.assign(sg.size(), 0);
  lab.labels[0] = 1;
  lab.labels[1] = 1;
  for (std::size_t i = 2; i < sg.size(); ++i) {
    const int du = lab.dist_u[i];
    const int dv = lab.dist_v[i];
    if (du < 0 || dv < 0) continue;  // unreachable from an endpoint -> 0
    lab.labels[i] = drnl_label(du, dv);
  }
  return lab;
}

namespace {

// Modified Gram-Schmidt over column-major columns; near-dependent columns
// collapse to zero.
void orthonormalize(std::vector<std::vector<double>>& cols) {
  for (std::size_t j = 0; j < cols.size(); ++j) {
    auto& col = cols[j];
    for (std::size_t p = 0; p < j; ++p) {
      const auto& prev = cols[p];
      double dot = 0.0;
      for (std::size_t i = 0; i < col.size(); ++i) dot += col[i] * prev[i];
      for (std::size_t i = 0; i < col.size(); ++i) col[i] -= dot * prev[i];
    }
    double norm = 0.0;
    for (double x : col) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-12) {
      std::fill(col.begin(), col.end(), 0.0);
    } else {
      for (double& x : col) x /= norm;
    }
  }
}

}  // namespace

LatentTable latent_features(const Graph& train, int d_lat, int iters,
                            std::uint64_t seed) {
  const std::size_t n = train.node_count();
  if (d_lat < 1) throw Error("latent dimension must be >= 1");
  if (static_cast<std::size_t>(d_lat) > n) {
    throw Error("latent dimension " + std::to_string(d_lat) +
                " exceeds node count " + std::to_string(n));
  }

  Rng rng(seed);
  std::vector<std::vector<double>> q(static_cast<std::size_t>(d_lat),
                                     std::vector<double>(n));
  for (auto& col : q) {
    for (double& x : col) x = rng.symmetric(1.0);
  }
  orthonormalize(q);

  std::vector<std::vector<double>> z(q.size(), std::vector<double>(n));
  for (int round = 0; round < iters; ++round) {
    for (std::size_t c = 0; c < q.size(); ++c) {
      for (NodeId i = 0; i < n; ++i) {
        double acc = 0.0;
        for (NodeId w : train.neighbors(i)) acc += q[c][w];
        z[c][i] = acc;
      }
    }
    std::swap(q, z);
    orthonormalize(q);
  }

  LatentTable table;
  table.dim = static_cast<std::size_t>(d_lat);
  table.nodes = n;
  table.data.assign(n * table.dim, 0.0);
  for (NodeId i = 0; i < n; ++i) {
    double norm = 0.0;
    for (std::size_t c = 0; c < table.dim; ++c) norm += q[c][i] * q[c][i];
    norm = std::sqrt(norm);
    if (norm < 1e-12) continue;
    for (std::size_t c = 0; c < table.dim; ++c) {
      table.data[i * table.dim + c] = q[c][i] / norm;
    }
  }
  return table;
}

FeatureMatrix build_feature_matrix(const EnclosingSubgraph& sg,
                                   const DrnlLabeling& lab,
                                   const FeatureSpec& spec,
                                   const LatentTable* latents,
                                   const Graph* attr_graph) {
  if (latents && latents->dim != static_cast<std::size_t>(spec.latent_dim)) {
    throw Error("latent table width does not match the feature spec");
  }
  FeatureMatrix fm;
  fm.rows = sg.size();
  fm.cols = static_cast<std::size_t>(spec.label_cap + 1) +
            static_cast<std::size_t>(spec.latent_dim) +
            static_cast<std::size_t>(spec.attr_width);
  fm.data.assign(fm.rows * fm.cols, 0.0);
  for (std::size_t i = 0; i < fm.rows; ++i) {
    double* row = fm.data.data() + i * fm.cols;
    const int slot = std::min(lab.labels[i], spec.label_cap);
    row[slot] = 1.0;
    if (latents) {
      auto emb = latents->row(sg.nodes[i]);
      for (int c = 0; c < spec.latent_dim; ++c) {
        row[spec.label_cap + 1 + c] = emb[static_cast<std::size_t>(c)];
      }
    }
    if (attr_graph && spec.attr_width > 0) {
      const int value = attr_graph->attribute(sg.nodes[i]);
      if (value >= 0 && value < spec.attr_width) {
        row[spec.label_cap + 1 + spec.latent_dim + value] = 1.0;
      }
    }
  }
  return fm;
}

}  // namespace linkbench
