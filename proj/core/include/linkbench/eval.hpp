#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "linkbench/graph.hpp"
#include "linkbench/heuristics.hpp"

namespace linkbench {

// Fraction of true links among the top-L ranked pairs, L = number of
// positives present. Ties rank negatives above positives (pessimistic).
double precision_at_top(std::vector<ScoredPair> scored);

struct ThresholdedPrecision {
  double precision = 0.0;
  double max_score = 0.0;  // extremes of the top-L ranked scores
  double min_score = 0.0;
};

// Precision counting only positives in the top-L whose score strictly
// exceeds the midpoint of the top-L score range.
ThresholdedPrecision precision_thresholded(std::vector<ScoredPair> scored);

struct AucSampleSpec {
  std::size_t n = 0;  // number of sampled (positive, negative) comparisons
  std::uint64_t seed = 0;
};

// Sampled AUC: n independent with-replacement comparisons, ties half-credited.
double auc_sampled(std::span<const double> pos, std::span<const double> neg,
                   const AucSampleSpec& spec);

// Exact Mann-Whitney AUC over all positive x negative pairs (the oracle
// auc_sampled converges to). Deliberately a naive double loop.
double auc_exact(std::span<const double> pos, std::span<const double> neg);

// Mean wall-clock per scored link, after one untimed warm-up pass.
double time_heuristic_ms(const Graph& g, Heuristic h, std::span<const Edge> pairs);

// Total wall-clock of an arbitrary work closure (model train + score).
double time_total_ms(const std::function<void()>& work);

struct MetricsRow {
  std::string graph;
  int fold = 0;  // -1 marks the aggregate (mean) row
  std::string approach;
  double precision = 0.0;
  std::optional<double> precision_thr;  // similarity approaches only
  double auc = 0.0;
  double max_score = 0.0;
  double min_score = 0.0;
  std::optional<double> time_ms;  // absent when timing is disabled
};

struct MetricsReport {
  std::vector<MetricsRow> rows;

  // Appends one mean row per (graph, approach) group, in first-seen order.
  void append_aggregates();
};

// CSV columns: graph,fold,approach,precision,precision_thr,auc,max_score,
// min_score,time_ms. Lines starting with '#' carry provenance.
void write_metrics_csv(std::ostream& out, const MetricsReport& report,
                       const std::string& comment);
MetricsReport read_metrics_csv(std::istream& in);

// Markdown tables: one accuracy block per approach (precision, thresholded
// precision, score extremes, AUC) and one timing table, means over folds.
std::string metrics_markdown(const MetricsReport& report);

}  // namespace linkbench
