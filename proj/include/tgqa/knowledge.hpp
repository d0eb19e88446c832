#pragma once

#include <string>
#include <vector>

#include "tgqa/temporal_graph.hpp"

namespace tgqa {

struct QAItem;

// "<minuend> - <subtrahend> = <difference>", years only.
struct GapStatement {
  TimePoint minuend;
  TimePoint subtrahend;
  int difference = 0;

  friend bool operator==(const GapStatement&, const GapStatement&) = default;
};

// In-context arithmetic scaffolding derived from a graph: the ascending time
// chain, the time gaps a question needs and the ordering of those gaps.
struct ExternalKnowledge {
  std::vector<TimePoint> time_chain;
  std::vector<GapStatement> gaps;
  std::vector<int> gap_ordering;

  bool empty() const { return time_chain.empty() && gaps.empty() && gap_ordering.empty(); }
  friend bool operator==(const ExternalKnowledge&, const ExternalKnowledge&) = default;
};

enum class GapMode {
  kReferenced,    // durations of the question's events, plus the Q4 start gap
  kAllDurations,  // every complete interval in the graph
  kAllPairs,      // every pairwise difference between distinct graph times
};

// Distinct fact times, ascending. Throws GranularityMismatch unless every
// time is at year granularity.
std::vector<TimePoint> deriveTimeChain(const TemporalGraph& graph);

// Sorted by (minuend, subtrahend), duplicate-free. Throws GranularityMismatch.
std::vector<GapStatement> deriveGaps(const TemporalGraph& graph, const QAItem& item,
                                     GapMode mode = GapMode::kReferenced);

std::vector<int> deriveGapOrdering(const std::vector<GapStatement>& gaps);
std::vector<int> deriveGapOrdering(std::vector<int> differences);

ExternalKnowledge deriveKnowledge(const TemporalGraph& graph, const QAItem& item,
                                  GapMode mode = GapMode::kReferenced);

// Chain joined by " before ", one "A - B = D" line per gap, then the ordering
// joined by " < ". Lines joined by '\n'; empty parts are omitted.
std::string renderKnowledge(const ExternalKnowledge& knowledge);

ExternalKnowledge shiftKnowledge(const ExternalKnowledge& knowledge, int years);

}  // namespace tgqa
