#pragma once

#include <compare>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tgqa/time_point.hpp"

namespace tgqa {

// (subject, relation, object). Relations are surface phrases ("was married
// to"). A relation containing the ellipsis "…" places the object at the
// ellipsis instead of after the relation, e.g. "and … became life partner".
struct EventKey {
  std::string subject;
  std::string relation;
  std::string object;

  friend auto operator<=>(const EventKey&, const EventKey&) = default;
};

inline constexpr std::string_view kObjectSlot = "\xE2\x80\xA6";  // U+2026

// "<subject> <relation> <object>", without parentheses.
std::string eventPhrase(const EventKey& key);
// "(<subject> <relation> <object>)", the form questions and answers use.
std::string eventRef(const EventKey& key);

enum class Endpoint { kStart, kEnd };
std::string_view endpointName(Endpoint e);  // "start" / "end"

struct TemporalFact {
  EventKey key;
  Endpoint endpoint = Endpoint::kStart;
  TimePoint time = TimePoint::ofYear(1);

  friend bool operator==(const TemporalFact&, const TemporalFact&) = default;
};

struct Interval {
  std::optional<TimePoint> start;
  std::optional<TimePoint> end;

  bool complete() const { return start.has_value() && end.has_value(); }
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Chronologically ordered facts. Equal times put start facts before end facts
// and otherwise keep input order. At most one start and one end per event.
class TemporalGraph {
 public:
  TemporalGraph() = default;

  const std::vector<TemporalFact>& facts() const noexcept { return facts_; }
  const std::map<EventKey, Interval>& intervals() const noexcept { return intervals_; }
  bool empty() const noexcept { return facts_.empty(); }
  std::size_t size() const noexcept { return facts_.size(); }

  bool contains(const EventKey& key) const { return intervals_.contains(key); }
  const Interval* interval(const EventKey& key) const;

  // Event keys in order of their first fact.
  std::vector<EventKey> events() const;
  // Subjects and objects in order of first appearance.
  std::vector<std::string> entities() const;

  friend bool operator==(const TemporalGraph&, const TemporalGraph&) = default;

 private:
  friend TemporalGraph sortChronological(std::vector<TemporalFact> facts);

  std::vector<TemporalFact> facts_;
  std::map<EventKey, Interval> intervals_;
};

// Throws DuplicateEndpoint or InvertedInterval.
TemporalGraph sortChronological(std::vector<TemporalFact> facts);

// end.year - start.year for an event with both endpoints at year granularity.
// Throws MissingEndpoint or GranularityMismatch.
int durationOf(const TemporalGraph& graph, const EventKey& key);

// Known relation surfaces used to split "(s r o)" phrases back into keys.
class RelationLexicon {
 public:
  RelationLexicon() = default;
  explicit RelationLexicon(std::vector<std::string> relations);

  void add(std::string relation);
  const std::vector<std::string>& relations() const noexcept { return relations_; }

  // Splits a phrase using the earliest (then longest) known relation; falls
  // back to first word / middle words / last word when nothing matches.
  // Returns nullopt for phrases shorter than three words without a match.
  std::optional<EventKey> split(std::string_view phrase) const;

 private:
  std::vector<std::string> relations_;
};

// Relations from the bundled relation table and synonym map.
const RelationLexicon& defaultLexicon();

// One line per fact: "(<phrase>) starts at <time>" / "... ends at <time>",
// joined with '\n', no trailing newline.
std::string renderTimeline(const TemporalGraph& graph);
std::string renderFact(const TemporalFact& fact);

// Inverse of renderTimeline. Blank lines are skipped. Throws MalformedLine
// (with the 1-based line number), DuplicateEndpoint or InvertedInterval.
TemporalGraph parseTimeline(std::string_view text,
                            const RelationLexicon& lexicon = defaultLexicon());

// Parses one "(<phrase>) starts at <time>" line; nullopt when it does not match.
std::optional<TemporalFact> parseFactLine(std::string_view line,
                                          const RelationLexicon& lexicon);

}  // namespace tgqa
