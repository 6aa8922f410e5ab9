#include "linkbench/split.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "linkbench/errors.hpp"
#include "linkbench/rng.hpp"

namespace linkbench {

namespace {

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
  std::vector<std::size_t> parent;
};

std::uint64_t pair_key(const Graph& g, Edge e) {
  return static_cast<std::uint64_t>(e.first) * g.node_count() + e.second;
}

void write_pairs(const Graph& g, const PairSet& set,
                 const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write pair set: " + path.string());
  for (const auto& [u, v] : set.pairs) {
    out << g.label(u) << ' ' << g.label(v) << '\n';
  }
}

PairSet read_pairs(const Graph& g, const std::filesystem::path& path,
                   Polarity polarity) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open pair set: " + path.string());
  PairSet set;
  set.polarity = polarity;
  std::string a, b;
  while (in >> a >> b) {
    auto u = g.find(a);
    auto v = g.find(b);
    if (!u || !v) {
      throw DataError(path.string() + ": pair references unknown node '" +
                      (u ? b : a) + "'");
    }
    Edge e{std::min(*u, *v), std::max(*u, *v)};
    set.pairs.push_back(e);
  }
  std::sort(set.pairs.begin(), set.pairs.end());
  return set;
}

}  // namespace

PairSet sample_negatives(const Graph& g, std::size_t n,
                         const std::vector<const PairSet*>& exclude,
                         std::uint64_t seed) {
  const std::size_t v = g.node_count();
  const std::uint64_t total_pairs =
      static_cast<std::uint64_t>(v) * (v - 1) / 2;
  std::unordered_set<std::uint64_t> excluded;
  for (const PairSet* set : exclude) {
    for (Edge e : set->pairs) excluded.insert(pair_key(g, e));
  }
  const std::uint64_t non_edges = total_pairs - g.edge_count();
  const std::uint64_t available =
      non_edges - std::min<std::uint64_t>(non_edges, excluded.size());
  if (n > available) {
    throw Error("cannot sample " + std::to_string(n) + " negative pairs: only " +
                std::to_string(available) + " non-edges available");
  }

  PairSet out;
  out.polarity = Polarity::kNegative;
  out.pairs.reserve(n);
  Rng rng(seed);
  std::unordered_set<std::uint64_t> chosen;

  if (non_edges < 3 * static_cast<std::uint64_t>(n) + 16) {
    // Dense regime: enumerate the candidates and take a seeded shuffle prefix.
    std::vector<Edge> candidates;
    for (NodeId a = 0; a + 1 < v; ++a) {
      for (NodeId b = a + 1; b < v; ++b) {
        Edge e{a, b};
        if (g.has_edge(a, b) || excluded.count(pair_key(g, e))) continue;
        candidates.push_back(e);
      }
    }
    rng.shuffle(candidates);
    out.pairs.assign(candidates.begin(),
                     candidates.begin() + static_cast<std::ptrdiff_t>(n));
  } else {
    while (out.pairs.size() < n) {
      NodeId a = static_cast<NodeId>(rng.below(v));
      NodeId b = static_cast<NodeId>(rng.below(v));
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      Edge e{a, b};
      std::uint64_t key = pair_key(g, e);
      if (g.has_edge(a, b) || excluded.count(key) || chosen.count(key)) continue;
      chosen.insert(key);
      out.pairs.push_back(e);
    }
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  return out;
}

std::vector<SplitBundle> make_splits(const Graph& g, int folds,
                                     double test_fraction, std::uint64_t seed) {
  if (folds < 1) throw Error("folds must be >= 1");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error("test_fraction must lie in (0, 1)");
  }

  const std::vector<Edge> all_edges = g.edges();
  const auto quota = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(all_edges.size())));

  std::vector<SplitBundle> bundles;
  bundles.reserve(static_cast<std::size_t>(folds));
  for (int fold = 0; fold < folds; ++fold) {
    const std::uint64_t fold_seed = mix_seed(seed, static_cast<std::uint64_t>(fold));

    // Seeded spanning forest; only co-tree edges are removable without
    // changing the component structure.
    std::vector<Edge> shuffled = all_edges;
    Rng forest_rng(mix_seed(fold_seed, 1));
    forest_rng.shuffle(shuffled);
    UnionFind uf(g.node_count());
    std::vector<Edge> cotree;
    for (Edge e : shuffled) {
      if (!uf.unite(e.first, e.second)) cotree.push_back(e);
    }
    if (quota > cotree.size()) {
      throw Error("test quota " + std::to_string(quota) +
                  " exceeds co-tree size " + std::to_string(cotree.size()) +
                  " (shortfall " + std::to_string(quota - cotree.size()) +
                  "); every further removal would disconnect the train graph");
    }
    forest_rng.shuffle(cotree);

    SplitBundle bundle;
    bundle.fold_index = fold;
    bundle.seed = seed;
    bundle.test_pos.polarity = Polarity::kPositive;
    bundle.test_pos.pairs.assign(cotree.begin(),
                                 cotree.begin() + static_cast<std::ptrdiff_t>(quota));
    std::sort(bundle.test_pos.pairs.begin(), bundle.test_pos.pairs.end());

    bundle.train_graph = g.without_edges(bundle.test_pos.pairs);
    bundle.train_pos.polarity = Polarity::kPositive;
    bundle.train_pos.pairs = bundle.train_graph.edges();

    bundle.test_neg = sample_negatives(g, bundle.test_pos.pairs.size(), {},
                                       mix_seed(fold_seed, 2));
    bundle.train_neg = sample_negatives(g, bundle.train_pos.pairs.size(),
                                        {&bundle.test_neg}, mix_seed(fold_seed, 3));
    bundles.push_back(std::move(bundle));
  }
  return bundles;
}

void save_splits(const std::vector<SplitBundle>& folds, const Graph& source,
                 double test_fraction, const std::filesystem::path& dir) {
  const std::string checksum = graph_checksum(source);
  for (const SplitBundle& fold : folds) {
    std::filesystem::path fold_dir =
        dir / ("fold_" + std::to_string(fold.fold_index));
    std::filesystem::create_directories(fold_dir);
    save_edge_list(fold.train_graph, fold_dir / "train_edges.txt");
    write_pairs(fold.train_graph, fold.test_pos, fold_dir / "test_pos.txt");
    write_pairs(fold.train_graph, fold.train_neg, fold_dir / "train_neg.txt");
    write_pairs(fold.train_graph, fold.test_neg, fold_dir / "test_neg.txt");

    nlohmann::json manifest{{"fold_index", fold.fold_index},
                            {"seed", fold.seed},
                            {"test_fraction", test_fraction},
                            {"source_checksum", checksum}};
    std::ofstream out(fold_dir / "manifest.json");
    if (!out) throw Error("cannot write manifest in " + fold_dir.string());
    out << manifest.dump(2) << '\n';
  }
}

FoldManifest read_fold_manifest(const std::filesystem::path& fold_dir) {
  std::ifstream in(fold_dir / "manifest.json");
  if (!in) throw DataError("cannot open manifest in " + fold_dir.string());
  nlohmann::json j = nlohmann::json::parse(in, nullptr, true, true);
  FoldManifest m;
  m.fold_index = j.at("fold_index").get<int>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.test_fraction = j.at("test_fraction").get<double>();
  m.source_checksum = j.at("source_checksum").get<std::string>();
  return m;
}

SplitBundle load_fold(const std::filesystem::path& fold_dir) {
  FoldManifest manifest = read_fold_manifest(fold_dir);
  SplitBundle bundle;
  bundle.fold_index = manifest.fold_index;
  bundle.seed = manifest.seed;
  bundle.train_graph =
      load_edge_list(fold_dir / "train_edges.txt", EdgeListFormat::kPairs);
  bundle.train_pos.polarity = Polarity::kPositive;
  bundle.train_pos.pairs = bundle.train_graph.edges();
  bundle.test_pos =
      read_pairs(bundle.train_graph, fold_dir / "test_pos.txt", Polarity::kPositive);
  bundle.train_neg =
      read_pairs(bundle.train_graph, fold_dir / "train_neg.txt", Polarity::kNegative);
  bundle.test_neg =
      read_pairs(bundle.train_graph, fold_dir / "test_neg.txt", Polarity::kNegative);
  return bundle;
}

}  // namespace linkbench
