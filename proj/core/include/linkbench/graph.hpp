#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace linkbench {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;  // normalized: first < second

enum class EdgeListFormat { kPairs, kTriples };

struct LoadReport {
  std::size_t self_loops_dropped = 0;
  std::size_t duplicate_edges_dropped = 0;
};

// Immutable undirected simple graph. Node ids are dense 0..n-1, assigned in
// first-appearance order of the original labels; adjacency lists are sorted.
// Safe for concurrent reads after construction.
class Graph {
 public:
  class Builder {
   public:
    NodeId intern(std::string_view label);
    // Adds an undirected edge by label. Self-loops are dropped (counted);
    // duplicates are dropped at build time (counted).
    void add_edge(std::string_view a, std::string_view b);
    const LoadReport& report() const { return report_; }
    // Throws DataError if no nodes were interned.
    Graph build();

   private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, NodeId> index_;
    std::vector<Edge> edges_;
    LoadReport report_;
  };

  std::size_t node_count() const { return labels_.size(); }
  std::size_t edge_count() const { return edge_count_; }

  // Sorted, duplicate-free neighborhood. Throws on out-of-range ids.
  std::span<const NodeId> neighbors(NodeId v) const;
  std::size_t degree(NodeId v) const;
  bool has_edge(NodeId u, NodeId v) const;

  const std::string& label(NodeId v) const;
  std::optional<NodeId> find(std::string_view label) const;

  // All edges, normalized and sorted ascending.
  std::vector<Edge> edges() const;

  // Optional per-node categorical attribute; -1 when unset.
  bool has_attributes() const { return attribute_count_ > 0; }
  int attribute_count() const { return attribute_count_; }
  int attribute(NodeId v) const;

  // Derived graphs sharing this graph's node universe, labels and attributes.
  Graph without_edges(const std::vector<Edge>& removed) const;
  Graph with_edges(const std::vector<Edge>& added) const;

  // Attaches a categorical attribute sidecar ("label value" per line).
  void attach_attributes(const std::filesystem::path& path);

 private:
  friend class Builder;
  void check_node(NodeId v) const;
  void rebuild_adjacency(std::vector<Edge> edges);

  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> index_;
  std::vector<std::size_t> offsets_;  // CSR offsets, size n+1
  std::vector<NodeId> adjacency_;
  std::size_t edge_count_ = 0;
  std::vector<int> attributes_;
  int attribute_count_ = 0;
};

// Reads a whitespace-separated edge list; lines starting with '#' are
// ignored. Pairs: "u v". Triples: "subject relation object" with the
// relation discarded and parallel links collapsed.
Graph load_edge_list(const std::filesystem::path& path, EdgeListFormat format,
                     LoadReport* report = nullptr);

// Writes "label label" per edge in ascending id order.
void save_edge_list(const Graph& g, const std::filesystem::path& path);

// Order-independent checksum of the edge set (by label), hex string.
std::string graph_checksum(const Graph& g);

// Number of connected components (isolated nodes count as components).
std::size_t count_components(const Graph& g);

std::size_t sorted_intersection_size(std::span<const NodeId> a,
                                     std::span<const NodeId> b);
std::vector<NodeId> sorted_intersection(std::span<const NodeId> a,
                                        std::span<const NodeId> b);

// Number of triangles passing through z.
std::size_t triangles_through(const Graph& g, NodeId z);

// Local clustering coefficient; nodes of degree < 2 score 0.
double clustering_coefficient(const Graph& g, NodeId z);

struct GraphStats {
  std::size_t nodes = 0;
  std::size_t links = 0;
  double avg_degree = 0.0;
  std::uint64_t triangles = 0;
  double avg_clustering = 0.0;
  std::optional<double> apl;
  std::optional<std::size_t> diameter;
};

// Path metrics (avg path length, diameter) are computed over the largest
// connected component: all-pairs BFS up to 5000 nodes, otherwise sampled
// from 1000 fixed-seed source nodes.
GraphStats compute_stats(const Graph& g, bool with_paths = false);

}  // namespace linkbench
