#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "linkbench/graph.hpp"

namespace linkbench {

// Local similarity indices. Every index is a function of the two endpoint
// neighborhoods (and, for IA/CAR/CCLP, of the links among common neighbors).
enum class Heuristic {
  kAA,    // Adamic-Adar
  kCN,    // common neighbors
  kRA,    // resource allocation
  kPA,    // preferential attachment
  kJA,    // Jaccard
  kSA,    // Salton (cosine)
  kSO,    // Sorensen
  kHPI,   // hub promoted
  kHDI,   // hub depressed
  kLLHN,  // local Leicht-Holme-Newman
  kIA,    // individual attraction
  kCAR,   // Cannistraci-Alanis-Ravai
  kCCLP,  // clustering-coefficient weighted
};

inline constexpr std::array<Heuristic, 13> kAllHeuristics = {
    Heuristic::kAA,  Heuristic::kCN,  Heuristic::kRA,   Heuristic::kPA,
    Heuristic::kJA,  Heuristic::kSA,  Heuristic::kSO,   Heuristic::kHPI,
    Heuristic::kHDI, Heuristic::kLLHN, Heuristic::kIA,  Heuristic::kCAR,
    Heuristic::kCCLP};

std::string_view heuristic_name(Heuristic h);
std::optional<Heuristic> heuristic_from_name(std::string_view name);

// Similarity score for an unordered pair. Always finite: formulas with a
// degenerate denominator return 0. Throws on invalid or equal nodes.
double heuristic_score(const Graph& g, Heuristic h, NodeId u, NodeId v);

struct ScoredPair {
  NodeId u = 0;
  NodeId v = 0;
  double score = 0.0;
  int truth = -1;  // 1 positive, 0 negative, -1 unknown
};

struct BatchResult {
  std::vector<ScoredPair> scores;
  std::optional<double> per_link_ms;  // absent for empty batches
};

// Scores every pair; per_link_ms is single-threaded wall clock divided by
// the batch size.
BatchResult score_batch(const Graph& g, Heuristic h, std::span<const Edge> pairs);

// CSV dump with header "u,v,heuristic,score,truth" (labels, not ids).
void write_scores_csv(const Graph& g, Heuristic h,
                      std::span<const ScoredPair> scores, std::ostream& out);

}  // namespace linkbench
