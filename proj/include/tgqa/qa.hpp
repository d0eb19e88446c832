#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tgqa/knowledge.hpp"
#include "tgqa/temporal_graph.hpp"

namespace tgqa {

// Q0 first-of-two, Q1 k-th of N, Q2 event duration, Q3 comparative duration,
// Q4 start gap, Q5 adjacent event, Q6 event time, Q7 same year,
// Q8 overlap at start.
enum class QuestionType { kQ0, kQ1, kQ2, kQ3, kQ4, kQ5, kQ6, kQ7, kQ8 };
inline constexpr std::size_t kQuestionTypeCount = 9;

std::string_view questionTypeTag(QuestionType type);
std::optional<QuestionType> parseQuestionType(std::string_view tag);
bool isBooleanType(QuestionType type);

enum class Direction { kBefore, kAfter };

struct QASlots {
  std::vector<EventKey> events;         // A, B, ... in question order
  std::optional<int> ordinal;           // Q1, 1-based
  std::optional<Direction> direction;   // Q5

  friend bool operator==(const QASlots&, const QASlots&) = default;
};

// One bootstrapped chain of thought with its score components.
struct CoTCandidate {
  std::string text;
  std::string parsed_answer;
  double log_p_correct = 0.0;        // length-normalized log P(a* | q, c)
  double plausibility_growth = 0.0;  // G(c)
  double score = 0.0;                // log P + gamma * G
  double sample_prob = 0.0;          // softmax over accepted scores
  bool accepted = false;
  bool selected = false;

  friend bool operator==(const CoTCandidate&, const CoTCandidate&) = default;
};

struct QAItem {
  std::string id;
  QuestionType qtype = QuestionType::kQ0;
  std::string question;
  QASlots slots;
  std::vector<std::string> gold_answers;
  std::vector<std::string> candidates;
  std::optional<ExternalKnowledge> knowledge;
  std::optional<std::string> cot;
  std::vector<CoTCandidate> cots;

  friend bool operator==(const QAItem&, const QAItem&) = default;
};

struct QAConfig {
  std::array<bool, kQuestionTypeCount> enabled{true, true, true, true, true,
                                               true, true, true, true};
  // Q1 gets the largest share, Q7 the second largest.
  std::array<int, kQuestionTypeCount> max_per_type{3, 8, 3, 3, 3, 3, 3, 5, 3};
  int q1_min_events = 3;
  int q1_max_events = 5;
  std::uint64_t seed = 0;
};

std::string ordinalWord(int k);  // 1 -> "first"
std::string renderQuestion(QuestionType type, const QASlots& slots);

// Symbolic answer. Throws MissingEndpoint, GranularityMismatch or
// AmbiguousTie (the deciding comparison ties).
std::string oracleAnswer(const TemporalGraph& graph, const QAItem& item);

// Boolean types: {True, False}. Q0/Q1: the listed events. Q5: every event in
// the graph. Q2/Q4/Q6: every distinct duration / start gap / time in the
// graph. The gold answers are always included; numeric sets with a single
// value are padded with the next value up.
std::vector<std::string> generateCandidates(const TemporalGraph& graph, const QAItem& item);

// Deterministic under config.seed. Only unambiguous items are emitted, each
// with gold == oracleAnswer and at least two candidates.
std::vector<QAItem> generateQAs(const TemporalGraph& graph, const QAConfig& config = {});

// Parenthesized event references, "(A b C)", with nesting respected.
std::vector<std::string> extractEventRefs(std::string_view text);

// Recovers type and slots from a rendered question by locating the graph's
// event references in it. nullopt when the text is not one of the templates.
std::optional<QAItem> parseQuestion(std::string_view question, const TemporalGraph& graph);

}  // namespace tgqa
