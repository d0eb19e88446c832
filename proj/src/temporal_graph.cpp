#include "tgqa/temporal_graph.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "tgqa/error.hpp"
#include "tgqa/resources.hpp"
#include "tgqa/text.hpp"

namespace tgqa {

std::string eventPhrase(const EventKey& key) {
  const auto slot = key.relation.find(kObjectSlot);
  if (slot != std::string::npos) {
    std::string rel = key.relation;
    rel.replace(slot, kObjectSlot.size(), key.object);
    return key.subject + " " + rel;
  }
  return key.subject + " " + key.relation + " " + key.object;
}

std::string eventRef(const EventKey& key) { return "(" + eventPhrase(key) + ")"; }

std::string_view endpointName(Endpoint e) {
  return e == Endpoint::kStart ? "start" : "end";
}

const Interval* TemporalGraph::interval(const EventKey& key) const {
  auto it = intervals_.find(key);
  return it == intervals_.end() ? nullptr : &it->second;
}

std::vector<EventKey> TemporalGraph::events() const {
  std::vector<EventKey> out;
  std::set<EventKey> seen;
  for (const auto& f : facts_) {
    if (seen.insert(f.key).second) out.push_back(f.key);
  }
  return out;
}

std::vector<std::string> TemporalGraph::entities() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& f : facts_) {
    for (const std::string* name : {&f.key.subject, &f.key.object}) {
      if (seen.insert(*name).second) out.push_back(*name);
    }
  }
  return out;
}

TemporalGraph sortChronological(std::vector<TemporalFact> facts) {
  TemporalGraph graph;
  for (const auto& f : facts) {
    if (f.key.subject.empty() || f.key.relation.empty() || f.key.object.empty()) {
      throw Error(ErrorCode::kMalformedLine, "event key has an empty component");
    }
    Interval& iv = graph.intervals_[f.key];
    auto& slot = f.endpoint == Endpoint::kStart ? iv.start : iv.end;
    if (slot) {
      throw Error(ErrorCode::kDuplicateEndpoint,
                  eventRef(f.key) + " has two " + std::string(endpointName(f.endpoint)) +
                      " facts");
    }
    slot = f.time;
  }
  for (const auto& [key, iv] : graph.intervals_) {
    if (iv.complete() && *iv.end < *iv.start) {
      throw Error(ErrorCode::kInvertedInterval,
                  eventRef(key) + " ends at " + formatTime(*iv.end) + " before it starts at " +
                      formatTime(*iv.start));
    }
  }
  std::stable_sort(facts.begin(), facts.end(), [](const TemporalFact& a, const TemporalFact& b) {
    if (auto c = a.time <=> b.time; c != 0) return c < 0;
    return a.endpoint == Endpoint::kStart && b.endpoint == Endpoint::kEnd;
  });
  graph.facts_ = std::move(facts);
  return graph;
}

int durationOf(const TemporalGraph& graph, const EventKey& key) {
  const Interval* iv = graph.interval(key);
  if (!iv || !iv->complete()) {
    throw Error(ErrorCode::kMissingEndpoint, eventRef(key) + " lacks a start or an end");
  }
  if (!iv->start->isYear() || !iv->end->isYear()) {
    throw Error(ErrorCode::kGranularityMismatch,
                eventRef(key) + " is not at year granularity");
  }
  return iv->end->year() - iv->start->year();
}

RelationLexicon::RelationLexicon(std::vector<std::string> relations) {
  for (auto& r : relations) add(std::move(r));
}

void RelationLexicon::add(std::string relation) {
  if (relation.empty()) return;
  if (std::find(relations_.begin(), relations_.end(), relation) == relations_.end()) {
    relations_.push_back(std::move(relation));
  }
}

std::optional<EventKey> RelationLexicon::split(std::string_view phrase) const {
  phrase = trim(phrase);
  std::optional<EventKey> best;
  std::size_t best_pos = std::string_view::npos;
  std::size_t best_len = 0;
  auto consider = [&](std::size_t pos, std::size_t len, EventKey key) {
    if (key.subject.empty() || key.object.empty()) return;
    if (pos < best_pos || (pos == best_pos && len > best_len)) {
      best_pos = pos;
      best_len = len;
      best = std::move(key);
    }
  };
  for (const std::string& rel : relations_) {
    const auto slot = rel.find(kObjectSlot);
    if (slot != std::string::npos) {
      // "<infix> … <suffix>": subject <infix> object <suffix>
      const std::string infix(trim(std::string_view(rel).substr(0, slot)));
      const std::string suffix(trim(std::string_view(rel).substr(slot + kObjectSlot.size())));
      const std::string tail = " " + suffix;
      if (!suffix.empty() && !phrase.ends_with(tail)) continue;
      std::string_view head = phrase.substr(0, phrase.size() - (suffix.empty() ? 0 : tail.size()));
      const std::string needle = " " + infix + " ";
      const auto pos = head.find(needle);
      if (infix.empty() || pos == std::string_view::npos) continue;
      consider(pos, rel.size(),
               EventKey{std::string(head.substr(0, pos)), rel,
                        std::string(head.substr(pos + needle.size()))});
      continue;
    }
    const std::string needle = " " + rel + " ";
    const auto pos = phrase.find(needle);
    if (pos == std::string_view::npos) continue;
    consider(pos, rel.size(),
             EventKey{std::string(phrase.substr(0, pos)), rel,
                      std::string(phrase.substr(pos + needle.size()))});
  }
  if (best) return best;

  const auto words = splitWords(phrase);
  if (words.size() < 3) return std::nullopt;
  std::vector<std::string> middle;
  for (std::size_t i = 1; i + 1 < words.size(); ++i) middle.emplace_back(words[i]);
  return EventKey{std::string(words.front()), join(middle, " "), std::string(words.back())};
}

const RelationLexicon& defaultLexicon() {
  static const RelationLexicon lexicon = [] {
    RelationLexicon lex;
    for (auto line : splitLines(resource("relations.tsv"))) {
      if (line.empty() || line.front() == '#') continue;
      const auto cols = split(line, '\t');
      if (cols.size() >= 2) lex.add(std::string(cols[1]));
    }
    for (auto line : splitLines(resource("synonyms.tsv"))) {
      if (line.empty() || line.front() == '#') continue;
      const auto cols = split(line, '\t');
      if (cols.size() >= 2) lex.add(std::string(cols[1]));
    }
    return lex;
  }();
  return lexicon;
}

std::string renderFact(const TemporalFact& fact) {
  return eventRef(fact.key) + (fact.endpoint == Endpoint::kStart ? " starts at " : " ends at ") +
         formatTime(fact.time);
}

std::string renderTimeline(const TemporalGraph& graph) {
  std::string out;
  for (const auto& f : graph.facts()) {
    if (!out.empty()) out += '\n';
    out += renderFact(f);
  }
  return out;
}

std::optional<TemporalFact> parseFactLine(std::string_view line, const RelationLexicon& lexicon) {
  line = trim(line);
  if (line.size() < 2 || line.front() != '(') return std::nullopt;
  constexpr std::string_view kStarts = ") starts at ";
  constexpr std::string_view kEnds = ") ends at ";
  const auto s = line.rfind(kStarts);
  const auto e = line.rfind(kEnds);
  std::size_t cut;
  Endpoint endpoint;
  std::size_t marker_len;
  if (s != std::string_view::npos && (e == std::string_view::npos || s > e)) {
    cut = s;
    endpoint = Endpoint::kStart;
    marker_len = kStarts.size();
  } else if (e != std::string_view::npos) {
    cut = e;
    endpoint = Endpoint::kEnd;
    marker_len = kEnds.size();
  } else {
    return std::nullopt;
  }
  const auto time = parseTime(line.substr(cut + marker_len));
  if (!time) return std::nullopt;
  auto key = lexicon.split(line.substr(1, cut - 1));
  if (!key) return std::nullopt;
  return TemporalFact{std::move(*key), endpoint, *time};
}

TemporalGraph parseTimeline(std::string_view text, const RelationLexicon& lexicon) {
  std::vector<TemporalFact> facts;
  const auto lines = splitLines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    auto fact = parseFactLine(lines[i], lexicon);
    if (!fact) {
      throw Error(ErrorCode::kMalformedLine,
                  "line " + std::to_string(i + 1) + ": '" + std::string(lines[i]) + "'");
    }
    facts.push_back(std::move(*fact));
  }
  return sortChronological(std::move(facts));
}

}  // namespace tgqa
