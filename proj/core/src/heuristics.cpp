#include "linkbench/heuristics.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include "linkbench/errors.hpp"

namespace linkbench {

std::string_view heuristic_name(Heuristic h) {
  switch (h) {
    case Heuristic::kAA: return "AA";
    case Heuristic::kCN: return "CN";
    case Heuristic::kRA: return "RA";
    case Heuristic::kPA: return "PA";
    case Heuristic::kJA: return "JA";
    case Heuristic::kSA: return "SA";
    case Heuristic::kSO: return "SO";
    case Heuristic::kHPI: return "HPI";
    case Heuristic::kHDI: return "HDI";
    case Heuristic::kLLHN: return "LLHN";
    case Heuristic::kIA: return "IA";
    case Heuristic::kCAR: return "CAR";
    case Heuristic::kCCLP: return "CCLP";
  }
  return "?";
}

std::optional<Heuristic> heuristic_from_name(std::string_view name) {
  for (Heuristic h : kAllHeuristics) {
    if (heuristic_name(h) == name) return h;
  }
  return std::nullopt;
}

namespace {

inline double ratio_or_zero(double num, double den) {
  return den == 0.0 ? 0.0 : num / den;
}

}  // namespace

double heuristic_score(const Graph& g, Heuristic h, NodeId u, NodeId v) {
  if (u == v) throw Error("similarity score requires two distinct nodes");
  const auto nu = g.neighbors(u);
  const auto nv = g.neighbors(v);
  const auto du = static_cast<double>(nu.size());
  const auto dv = static_cast<double>(nv.size());

  if (h == Heuristic::kPA) return du * dv;

  const std::vector<NodeId> common = sorted_intersection(nu, nv);
  const auto cn = static_cast<double>(common.size());

  switch (h) {
    case Heuristic::kCN:
      return cn;
    case Heuristic::kJA:
      return ratio_or_zero(cn, du + dv - cn);
    case Heuristic::kSA:
      return ratio_or_zero(cn, std::sqrt(du * dv));
    case Heuristic::kSO:
      return ratio_or_zero(2.0 * cn, du + dv);
    case Heuristic::kHPI:
      return ratio_or_zero(cn, std::max(du, dv));
    case Heuristic::kHDI:
      return ratio_or_zero(cn, std::min(du, dv));
    case Heuristic::kLLHN:
      return ratio_or_zero(cn, du * dv);
    case Heuristic::kAA: {
      double sum = 0.0;
      for (NodeId z : common) {
        const auto dz = static_cast<double>(g.degree(z));
        if (dz > 1.0) sum += 1.0 / std::log(dz);  // degree-1 term would be 1/ln 1
      }
      return sum;
    }
    case Heuristic::kRA: {
      double sum = 0.0;
      for (NodeId z : common) {
        const auto dz = static_cast<double>(g.degree(z));
        if (dz > 0.0) sum += 1.0 / dz;
      }
      return sum;
    }
    case Heuristic::kIA: {
      // r counts links between z and the other common neighbors.
      double sum = 0.0;
      for (NodeId z : common) {
        const auto dz = static_cast<double>(g.degree(z));
        if (dz == 0.0) continue;
        const auto r = static_cast<double>(
            sorted_intersection_size(g.neighbors(z), common));
        sum += (r + 2.0) / dz;
      }
      return sum;
    }
    case Heuristic::kCAR: {
      double sum = 0.0;
      for (NodeId z : common) {
        const auto level2 = static_cast<double>(
            sorted_intersection_size(g.neighbors(z), common));
        sum += 1.0 + level2 / 2.0;
      }
      return sum;
    }
    case Heuristic::kCCLP: {
      double sum = 0.0;
      for (NodeId z : common) sum += clustering_coefficient(g, z);
      return sum;
    }
    case Heuristic::kPA:
      break;  // handled above
  }
  throw Error("unknown heuristic");
}

BatchResult score_batch(const Graph& g, Heuristic h, std::span<const Edge> pairs) {
  BatchResult result;
  result.scores.reserve(pairs.size());
  if (pairs.empty()) return result;

  const auto start = std::chrono::steady_clock::now();
  for (const auto& [u, v] : pairs) {
    result.scores.push_back(ScoredPair{u, v, heuristic_score(g, h, u, v), -1});
  }
  const auto stop = std::chrono::steady_clock::now();
  const double total_ms =
      std::chrono::duration<double, std::milli>(stop - start).count();
  result.per_link_ms = total_ms / static_cast<double>(pairs.size());
  return result;
}

void write_scores_csv(const Graph& g, Heuristic h,
                      std::span<const ScoredPair> scores, std::ostream& out) {
  out << "u,v,heuristic,score,truth\n";
  char buf[64];
  for (const ScoredPair& s : scores) {
    std::snprintf(buf, sizeof(buf), "%.17g", s.score);
    out << g.label(s.u) << ',' << g.label(s.v) << ',' << heuristic_name(h)
        << ',' << buf << ',';
    if (s.truth == 1) {
      out << "positive";
    } else if (s.truth == 0) {
      out << "negative";
    }
    out << '\n';
  }
}

}  // namespace linkbench
