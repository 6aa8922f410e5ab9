#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "linkbench/graph.hpp"

namespace linkbench {

enum class Polarity { kPositive, kNegative };

struct PairSet {
  std::vector<Edge> pairs;  // normalized u < v, sorted ascending, unique
  Polarity polarity = Polarity::kPositive;
};

// One train/test fold. Train edges are the full edge set minus the test
// positives; the train graph keeps the source graph's node universe, labels
// and attributes, and has the same number of connected components.
struct SplitBundle {
  int fold_index = 0;
  std::uint64_t seed = 0;
  Graph train_graph;
  PairSet train_pos;
  PairSet train_neg;
  PairSet test_pos;
  PairSet test_neg;
};

// Produces `folds` independent random splits. Test positives are drawn only
// from co-tree edges of a seeded spanning forest, which preserves the
// component structure of the training graph exactly. Deterministic in
// (g, folds, test_fraction, seed).
std::vector<SplitBundle> make_splits(const Graph& g, int folds,
                                     double test_fraction, std::uint64_t seed);

// Uniform sample of n distinct non-edges, disjoint from every set in
// `exclude`. Deterministic given seed. Throws when n is infeasible.
PairSet sample_negatives(const Graph& g, std::size_t n,
                         const std::vector<const PairSet*>& exclude,
                         std::uint64_t seed);

// Persists each fold under dir/fold_<i>/ as train_edges.txt, test_pos.txt,
// train_neg.txt, test_neg.txt plus manifest.json.
void save_splits(const std::vector<SplitBundle>& folds, const Graph& source,
                 double test_fraction, const std::filesystem::path& dir);

// Reloads one persisted fold; node ids are re-interned from train_edges.txt
// and pair files are resolved by label.
SplitBundle load_fold(const std::filesystem::path& fold_dir);

struct FoldManifest {
  int fold_index = 0;
  std::uint64_t seed = 0;
  double test_fraction = 0.0;
  std::string source_checksum;
};

FoldManifest read_fold_manifest(const std::filesystem::path& fold_dir);

}  // namespace linkbench
