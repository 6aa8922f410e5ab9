#include "linkbench/graph.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <fstream>
#include <sstream>

#include "linkbench/errors.hpp"
#include "linkbench/rng.hpp"

namespace linkbench {

namespace {

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace

NodeId Graph::Builder::intern(std::string_view label) {
  auto it = index_.find(std::string(label));
  if (it != index_.end()) return it->second;
  NodeId id = static_cast<NodeId>(labels_.size());
  labels_.emplace_back(label);
  index_.emplace(labels_.back(), id);
  return id;
}

void Graph::Builder::add_edge(std::string_view a, std::string_view b) {
  NodeId u = intern(a);
  NodeId v = intern(b);
  if (u == v) {
    ++report_.self_loops_dropped;
    return;
  }
  if (u > v) std::swap(u, v);
  edges_.emplace_back(u, v);
}

Graph Graph::Builder::build() {
  if (labels_.empty()) throw DataError("empty graph: no nodes found");
  std::sort(edges_.begin(), edges_.end());
  auto last = std::unique(edges_.begin(), edges_.end());
  report_.duplicate_edges_dropped += static_cast<std::size_t>(edges_.end() - last);
  edges_.erase(last, edges_.end());

  Graph g;
  g.labels_ = std::move(labels_);
  g.index_ = std::move(index_);
  g.attributes_.assign(g.labels_.size(), -1);
  g.rebuild_adjacency(std::move(edges_));
  return g;
}

void Graph::rebuild_adjacency(std::vector<Edge> edges) {
  const std::size_t n = labels_.size();
  offsets_.assign(n + 1, 0);
  for (const auto& [u, v] : edges) {
    ++offsets_[u + 1];
    ++offsets_[v + 1];
  }
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
  adjacency_.resize(offsets_[n]);
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& [u, v] : edges) {
    adjacency_[cursor[u]++] = v;
    adjacency_[cursor[v]++] = u;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]),
              adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]));
  }
  edge_count_ = edges.size();
}

void Graph::check_node(NodeId v) const {
  if (v >= labels_.size()) {
    throw Error("node id " + std::to_string(v) + " out of range (node count " +
                std::to_string(labels_.size()) + ")");
  }
}

std::span<const NodeId> Graph::neighbors(NodeId v) const {
  check_node(v);
  return {adjacency_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
}

std::size_t Graph::degree(NodeId v) const {
  check_node(v);
  return offsets_[v + 1] - offsets_[v];
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  check_node(u);
  check_node(v);
  if (u == v) return false;
  if (degree(u) > degree(v)) std::swap(u, v);
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

const std::string& Graph::label(NodeId v) const {
  check_node(v);
  return labels_[v];
}

std::optional<NodeId> Graph::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (NodeId u = 0; u < labels_.size(); ++u) {
    for (NodeId v : neighbors(u)) {
      if (v > u) out.emplace_back(u, v);
    }
  }
  return out;
}

int Graph::attribute(NodeId v) const {
  check_node(v);
  return attributes_[v];
}

Graph Graph::without_edges(const std::vector<Edge>& removed) const {
  std::vector<Edge> keep = edges();
  std::vector<Edge> gone = removed;
  for (auto& [u, v] : gone) {
    if (u > v) std::swap(u, v);
  }
  std::sort(gone.begin(), gone.end());
  std::vector<Edge> out;
  out.reserve(keep.size());
  std::set_difference(keep.begin(), keep.end(), gone.begin(), gone.end(),
                      std::back_inserter(out));
  Graph g = *this;
  g.rebuild_adjacency(std::move(out));
  return g;
}

Graph Graph::with_edges(const std::vector<Edge>& added) const {
  std::vector<Edge> all = edges();
  for (auto [u, v] : added) {
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    all.emplace_back(u, v);
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  Graph g = *this;
  g.rebuild_adjacency(std::move(all));
  return g;
}

void Graph::attach_attributes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open attribute file: " + path.string());
  std::unordered_map<std::string, int> values;
  std::string line;
  std::size_t lineno = 0;
  std::vector<int> attrs(labels_.size(), -1);
  while (std::getline(in, line)) {
    ++lineno;
    auto tokens = split_tokens(line);
    if (tokens.empty() || tokens[0].front() == '#') continue;
    if (tokens.size() != 2) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": expected 2 tokens, got " + std::to_string(tokens.size()));
    }
    auto node = find(tokens[0]);
    if (!node) continue;  // attribute rows for absent nodes are ignored
    auto [it, inserted] = values.emplace(std::string(tokens[1]),
                                         static_cast<int>(values.size()));
    attrs[*node] = it->second;
  }
  attributes_ = std::move(attrs);
  attribute_count_ = static_cast<int>(values.size());
}

Graph load_edge_list(const std::filesystem::path& path, EdgeListFormat format,
                     LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open edge list: " + path.string());
  Graph::Builder builder;
  std::string line;
  std::size_t lineno = 0;
  const std::size_t want = format == EdgeListFormat::kPairs ? 2 : 3;
  while (std::getline(in, line)) {
    ++lineno;
    auto tokens = split_tokens(line);
    if (tokens.empty() || tokens[0].front() == '#') continue;
    if (tokens.size() != want) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": expected " + std::to_string(want) + " tokens, got " +
                      std::to_string(tokens.size()));
    }
    if (format == EdgeListFormat::kPairs) {
      builder.add_edge(tokens[0], tokens[1]);
    } else {
      builder.add_edge(tokens[0], tokens[2]);
    }
  }
  Graph g = builder.build();
  if (report) *report = builder.report();
  return g;
}

void save_edge_list(const Graph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write edge list: " + path.string());
  for (const auto& [u, v] : g.edges()) {
    out << g.label(u) << ' ' << g.label(v) << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

std::string graph_checksum(const Graph& g) {
  // Label-based and order-independent: hash each edge line separately and
  // combine commutatively.
  std::uint64_t sum = 0;
  for (const auto& [u, v] : g.edges()) {
    const std::string& a = g.label(u);
    const std::string& b = g.label(v);
    std::string line = a <= b ? a + "\t" + b : b + "\t" + a;
    sum += fnv1a64(line);
  }
  sum ^= fnv1a64(std::to_string(g.node_count()));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(sum));
  return buf;
}

std::size_t count_components(const Graph& g) {
  const std::size_t n = g.node_count();
  std::vector<bool> seen(n, false);
  std::size_t components = 0;
  std::vector<NodeId> stack;
  for (NodeId s = 0; s < n; ++s) {
    if (seen[s]) continue;
    ++components;
    seen[s] = true;
    stack.push_back(s);
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      for (NodeId v : g.neighbors(u)) {
        if (!seen[v]) {
          seen[v] = true;
          stack.push_back(v);
        }
      }
    }
  }
  return components;
}

std::size_t sorted_intersection_size(std::span<const NodeId> a,
                                     std::span<const NodeId> b) {
  std::size_t count = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

std::vector<NodeId> sorted_intersection(std::span<const NodeId> a,
                                        std::span<const NodeId> b) {
  std::vector<NodeId> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

std::size_t triangles_through(const Graph& g, NodeId z) {
  auto nz = g.neighbors(z);
  std::size_t paired = 0;
  for (NodeId u : nz) {
    paired += sorted_intersection_size(nz, g.neighbors(u));
  }
  return paired / 2;  // each triangle edge (u,w) counted from both ends
}

double clustering_coefficient(const Graph& g, NodeId z) {
  const std::size_t d = g.degree(z);
  if (d < 2) return 0.0;
  const auto t = static_cast<double>(triangles_through(g, z));
  return 2.0 * t / (static_cast<double>(d) * static_cast<double>(d - 1));
}

namespace {

// BFS distances from src; -1 means unreachable.
void bfs_distances(const Graph& g, NodeId src, std::vector<int>& dist) {
  std::fill(dist.begin(), dist.end(), -1);
  dist[src] = 0;
  std::deque<NodeId> queue{src};
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    for (NodeId v : g.neighbors(u)) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
}

std::vector<NodeId> largest_component(const Graph& g) {
  const std::size_t n = g.node_count();
  std::vector<bool> seen(n, false);
  std::vector<NodeId> best, current, stack;
  for (NodeId s = 0; s < n; ++s) {
    if (seen[s]) continue;
    current.clear();
    seen[s] = true;
    stack.push_back(s);
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      current.push_back(u);
      for (NodeId v : g.neighbors(u)) {
        if (!seen[v]) {
          seen[v] = true;
          stack.push_back(v);
        }
      }
    }
    if (current.size() > best.size()) best = current;
  }
  return best;
}

constexpr std::size_t kAllPairsLimit = 5000;
constexpr std::size_t kSampledSources = 1000;

}  // namespace

GraphStats compute_stats(const Graph& g, bool with_paths) {
  GraphStats stats;
  stats.nodes = g.node_count();
  stats.links = g.edge_count();
  stats.avg_degree =
      stats.nodes == 0 ? 0.0
                       : 2.0 * static_cast<double>(stats.links) /
                             static_cast<double>(stats.nodes);
  std::uint64_t triangle_ends = 0;
  double clustering_sum = 0.0;
  for (NodeId v = 0; v < stats.nodes; ++v) {
    triangle_ends += triangles_through(g, v);
    clustering_sum += clustering_coefficient(g, v);
  }
  stats.triangles = triangle_ends / 3;
  stats.avg_clustering =
      stats.nodes == 0 ? 0.0 : clustering_sum / static_cast<double>(stats.nodes);

  if (!with_paths) return stats;

  std::vector<NodeId> component = largest_component(g);
  if (component.size() < 2) return stats;

  std::vector<NodeId> sources = component;
  if (component.size() > kAllPairsLimit) {
    Rng rng(0x5eed5eedULL);
    rng.shuffle(sources);
    sources.resize(kSampledSources);
  }
  std::vector<int> dist(g.node_count(), -1);
  std::uint64_t pair_count = 0;
  std::uint64_t dist_sum = 0;
  std::size_t max_dist = 0;
  for (NodeId s : sources) {
    bfs_distances(g, s, dist);
    for (NodeId t : component) {
      if (t == s || dist[t] < 0) continue;
      dist_sum += static_cast<std::uint64_t>(dist[t]);
      ++pair_count;
      max_dist = std::max(max_dist, static_cast<std::size_t>(dist[t]));
    }
  }
  if (pair_count > 0) {
    stats.apl = static_cast<double>(dist_sum) / static_cast<double>(pair_count);
    stats.diameter = max_dist;
  }
  return stats;
}

}  // namespace linkbench
