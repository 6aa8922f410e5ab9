#include "linkbench/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "linkbench/errors.hpp"
#include "linkbench/rng.hpp"

namespace linkbench {

namespace {

// Descending score; at equal scores negatives come first so that positives
// are pushed out of the top-L. Node ids make the order total.
bool rank_before(const ScoredPair& a, const ScoredPair& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.truth != b.truth) return a.truth < b.truth;
  if (a.u != b.u) return a.u < b.u;
  return a.v < b.v;
}

std::size_t checked_positive_count(const std::vector<ScoredPair>& scored) {
  if (scored.empty()) throw Error("cannot rank an empty score list");
  std::size_t positives = 0;
  for (const ScoredPair& s : scored) {
    if (s.truth != 0 && s.truth != 1) {
      throw Error("ranking requires known truth labels");
    }
    positives += static_cast<std::size_t>(s.truth);
  }
  if (positives == 0) throw Error("score list contains no positive pairs");
  return positives;
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

double precision_at_top(std::vector<ScoredPair> scored) {
  const std::size_t top = checked_positive_count(scored);
  std::sort(scored.begin(), scored.end(), rank_before);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < top; ++i) {
    hits += static_cast<std::size_t>(scored[i].truth);
  }
  return static_cast<double>(hits) / static_cast<double>(top);
}

ThresholdedPrecision precision_thresholded(std::vector<ScoredPair> scored) {
  const std::size_t top = checked_positive_count(scored);
  std::sort(scored.begin(), scored.end(), rank_before);
  ThresholdedPrecision result;
  result.max_score = scored.front().score;
  result.min_score = scored[top - 1].score;
  const double threshold = (result.max_score + result.min_score) / 2.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < top; ++i) {
    if (scored[i].truth == 1 && scored[i].score > threshold) ++hits;
  }
  result.precision = static_cast<double>(hits) / static_cast<double>(top);
  return result;
}

double auc_sampled(std::span<const double> pos, std::span<const double> neg,
                   const AucSampleSpec& spec) {
  if (pos.empty() || neg.empty()) {
    throw Error("sampled AUC requires non-empty positive and negative sets");
  }
  if (spec.n == 0) throw Error("sampled AUC requires n >= 1");
  Rng rng(spec.seed);
  std::size_t wins = 0, ties = 0;
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double p = pos[rng.below(pos.size())];
    const double q = neg[rng.below(neg.size())];
    if (p > q) {
      ++wins;
    } else if (p == q) {
      ++ties;
    }
  }
  return (static_cast<double>(wins) + 0.5 * static_cast<double>(ties)) /
         static_cast<double>(spec.n);
}

double auc_exact(std::span<const double> pos, std::span<const double> neg) {
  if (pos.empty() || neg.empty()) {
    throw Error("exact AUC requires non-empty positive and negative sets");
  }
  double credit = 0.0;
  for (double p : pos) {
    for (double q : neg) {
      if (p > q) {
        credit += 1.0;
      } else if (p == q) {
        credit += 0.5;
      }
    }
  }
  return credit / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

double time_heuristic_ms(const Graph& g, Heuristic h, std::span<const Edge> pairs) {
  score_batch(g, h, pairs);  // warm-up: touches adjacency, fills caches
  BatchResult timed = score_batch(g, h, pairs);
  return timed.per_link_ms.value_or(0.0);
}

double time_total_ms(const std::function<void()>& work) {
  const auto start = std::chrono::steady_clock::now();
  work();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count();
}

void MetricsReport::append_aggregates() {
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<const MetricsRow*>> groups;
  for (const MetricsRow& row : rows) {
    if (row.fold < 0) continue;
    auto key = std::make_pair(row.graph, row.approach);
    auto [it, inserted] = groups.emplace(key, std::vector<const MetricsRow*>{});
    if (inserted) order.push_back(key);
    it->second.push_back(&row);
  }
  std::vector<MetricsRow> aggregates;
  for (const auto& key : order) {
    const auto& members = groups.at(key);
    MetricsRow mean;
    mean.graph = key.first;
    mean.approach = key.second;
    mean.fold = -1;
    const auto n = static_cast<double>(members.size());
    bool all_thr = true, all_time = true;
    double thr_sum = 0.0, time_sum = 0.0;
    for (const MetricsRow* row : members) {
      mean.precision += row->precision / n;
      mean.auc += row->auc / n;
      mean.max_score += row->max_score / n;
      mean.min_score += row->min_score / n;
      if (row->precision_thr) {
        thr_sum += *row->precision_thr / n;
      } else {
        all_thr = false;
      }
      if (row->time_ms) {
        time_sum += *row->time_ms / n;
      } else {
        all_time = false;
      }
    }
    if (all_thr) mean.precision_thr = thr_sum;
    if (all_time) mean.time_ms = time_sum;
    aggregates.push_back(std::move(mean));
  }
  rows.insert(rows.end(), aggregates.begin(), aggregates.end());
}

void write_metrics_csv(std::ostream& out, const MetricsReport& report,
                       const std::string& comment) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "graph,fold,approach,precision,precision_thr,auc,max_score,min_score,time_ms\n";
  for (const MetricsRow& row : report.rows) {
    out << row.graph << ',';
    if (row.fold < 0) {
      out << "mean";
    } else {
      out << row.fold;
    }
    out << ',' << row.approach << ',' << format_double(row.precision) << ',';
    if (row.precision_thr) out << format_double(*row.precision_thr);
    out << ',' << format_double(row.auc) << ',' << format_double(row.max_score)
        << ',' << format_double(row.min_score) << ',';
    if (row.time_ms) out << format_double(*row.time_ms);
    out << '\n';
  }
}

MetricsReport read_metrics_csv(std::istream& in) {
  MetricsReport report;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column header
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    while (fields.size() < 9) fields.emplace_back();
    MetricsRow row;
    row.graph = fields[0];
    row.fold = fields[1] == "mean" ? -1 : std::stoi(fields[1]);
    row.approach = fields[2];
    row.precision = std::stod(fields[3]);
    if (!fields[4].empty()) row.precision_thr = std::stod(fields[4]);
    row.auc = std::stod(fields[5]);
    row.max_score = std::stod(fields[6]);
    row.min_score = std::stod(fields[7]);
    if (!fields[8].empty()) row.time_ms = std::stod(fields[8]);
    report.rows.push_back(std::move(row));
  }
  return report;
}

namespace {

std::string format_cell(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", x);
  return buf;
}

}  // namespace

std::string metrics_markdown(const MetricsReport& report) {
  std::vector<std::string> graphs, approaches;
  std::map<std::pair<std::string, std::string>, const MetricsRow*> means;
  for (const MetricsRow& row : report.rows) {
    if (row.fold != -1) continue;
    if (std::find(graphs.begin(), graphs.end(), row.graph) == graphs.end()) {
      graphs.push_back(row.graph);
    }
    if (std::find(approaches.begin(), approaches.end(), row.approach) ==
        approaches.end()) {
      approaches.push_back(row.approach);
    }
    means[{row.graph, row.approach}] = &row;
  }

  std::ostringstream md;
  md << "## Accuracy (means over folds)\n\n";
  md << "| Approach | Metric |";
  for (const auto& gname : graphs) md << ' ' << gname << " |";
  md << "\n|---|---|";
  for (std::size_t i = 0; i < graphs.size(); ++i) md << "---|";
  md << '\n';
  for (const auto& approach : approaches) {
    const std::array<std::string, 4> metric_names = {"Precision", "Max score",
                                                     "Min score", "AUC"};
    for (const auto& metric : metric_names) {
      md << "| " << approach << " | " << metric << " |";
      for (const auto& gname : graphs) {
        auto it = means.find({gname, approach});
        if (it == means.end()) {
          md << " |";
          continue;
        }
        const MetricsRow& row = *it->second;
        if (metric == "Precision") {
          md << ' ' << format_cell(row.precision);
          if (row.precision_thr) md << " (" << format_cell(*row.precision_thr) << ')';
          md << " |";
        } else if (metric == "Max score") {
          md << ' ' << format_cell(row.max_score) << " |";
        } else if (metric == "Min score") {
          md << ' ' << format_cell(row.min_score) << " |";
        } else {
          md << ' ' << format_cell(row.auc) << " |";
        }
      }
      md << '\n';
    }
  }

  bool any_time = false;
  for (const MetricsRow& row : report.rows) {
    if (row.fold == -1 && row.time_ms) any_time = true;
  }
  if (any_time) {
    md << "\n## Computational time (ms, means over folds)\n\n";
    md << "| Approach |";
    for (const auto& gname : graphs) md << ' ' << gname << " |";
    md << "\n|---|";
    for (std::size_t i = 0; i < graphs.size(); ++i) md << "---|";
    md << '\n';
    for (const auto& approach : approaches) {
      md << "| " << approach << " |";
      for (const auto& gname : graphs) {
        auto it = means.find({gname, approach});
        if (it != means.end() && it->second->time_ms) {
          md << ' ' << format_cell(*it->second->time_ms) << " |";
        } else {
          md << " |";
        }
      }
      md << '\n';
    }
  }
  return md.str();
}

}  // namespace linkbench
