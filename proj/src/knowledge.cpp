#include "tgqa/knowledge.hpp"

#include <algorithm>
#include <set>

#include "tgqa/error.hpp"
#include "tgqa/qa.hpp"
#include "tgqa/text.hpp"

namespace tgqa {
namespace {

void requireYear(const TimePoint& t) {
  if (!t.isYear()) {
    throw Error(ErrorCode::kGranularityMismatch,
                "external knowledge needs year granularity, got " + formatTime(t));
  }
}

GapStatement gap(const TimePoint& later, const TimePoint& earlier) {
  requireYear(later);
  requireYear(earlier);
  return GapStatement{later, earlier, later.year() - earlier.year()};
}

}  // namespace

std::vector<TimePoint> deriveTimeChain(const TemporalGraph& graph) {
  std::set<TimePoint> times;
  for (const auto& f : graph.facts()) {
    requireYear(f.time);
    times.insert(f.time);
  }
  return {times.begin(), times.end()};
}

std::vector<GapStatement> deriveGaps(const TemporalGraph& graph, const QAItem& item,
                                     GapMode mode) {
  std::vector<GapStatement> gaps;
  auto addDuration = [&](const EventKey& key) {
    const Interval* iv = graph.interval(key);
    if (iv && iv->complete()) gaps.push_back(gap(*iv->end, *iv->start));
  };
  switch (mode) {
    case GapMode::kReferenced:
      for (const auto& key : item.slots.events) addDuration(key);
      if (item.qtype == QuestionType::kQ4 && item.slots.events.size() >= 2) {
        const Interval* a = graph.interval(item.slots.events[0]);
        const Interval* b = graph.interval(item.slots.events[1]);
        if (a && b && a->start && b->start) {
          const auto& [lo, hi] = std::minmax(*a->start, *b->start);
          gaps.push_back(gap(hi, lo));
        }
      }
      break;
    case GapMode::kAllDurations:
      for (const auto& [key, iv] : graph.intervals()) addDuration(key);
      break;
    case GapMode::kAllPairs: {
      const auto chain = deriveTimeChain(graph);
      for (std::size_t i = 0; i < chain.size(); ++i) {
        for (std::size_t j = i + 1; j < chain.size(); ++j) gaps.push_back(gap(chain[j], chain[i]));
      }
      break;
    }
  }
  std::sort(gaps.begin(), gaps.end(), [](const GapStatement& x, const GapStatement& y) {
    return std::tie(x.minuend, x.subtrahend) < std::tie(y.minuend, y.subtrahend);
  });
  gaps.erase(std::unique(gaps.begin(), gaps.end()), gaps.end());
  return gaps;
}

std::vector<int> deriveGapOrdering(std::vector<int> differences) {
  std::sort(differences.begin(), differences.end());
  differences.erase(std::unique(differences.begin(), differences.end()), differences.end());
  return differences;
}

std::vector<int> deriveGapOrdering(const std::vector<GapStatement>& gaps) {
  std::vector<int> d;
  d.reserve(gaps.size());
  for (const auto& g : gaps) d.push_back(g.difference);
  return deriveGapOrdering(std::move(d));
}

ExternalKnowledge deriveKnowledge(const TemporalGraph& graph, const QAItem& item, GapMode mode) {
  ExternalKnowledge k;
  k.time_chain = deriveTimeChain(graph);
  k.gaps = deriveGaps(graph, item, mode);
  k.gap_ordering = deriveGapOrdering(k.gaps);
  return k;
}

std::string renderKnowledge(const ExternalKnowledge& knowledge) {
  std::vector<std::string> lines;
  if (!knowledge.time_chain.empty()) {
    std::vector<std::string> chain;
    for (const auto& t : knowledge.time_chain) chain.push_back(formatTime(t));
    lines.push_back(join(chain, " before "));
  }
  for (const auto& g : knowledge.gaps) {
    lines.push_back(formatTime(g.minuend) + " - " + formatTime(g.subtrahend) + " = " +
                    std::to_string(g.difference));
  }
  if (!knowledge.gap_ordering.empty()) {
    std::vector<std::string> order;
    for (int d : knowledge.gap_ordering) order.push_back(std::to_string(d));
    lines.push_back(join(order, " < "));
  }
  return join(lines, "\n");
}

ExternalKnowledge shiftKnowledge(const ExternalKnowledge& knowledge, int years) {
  ExternalKnowledge out = knowledge;
  for (auto& t : out.time_chain) t = t.shiftedYears(years);
  for (auto& g : out.gaps) {
    g.minuend = g.minuend.shiftedYears(years);
    g.subtrahend = g.subtrahend.shiftedYears(years);
  }
  return out;
}

}  // namespace tgqa
