#pragma once

#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "tgqa/backend.hpp"
#include "tgqa/temporal_graph.hpp"

namespace tgqa {

struct TimeExpression {
  std::string surface;
  std::optional<TimePoint> normalized;
  bool valid = false;
};

// Rule normalizer: "3 April 1909", "April 3, 1909", "Apr 1956", "1973",
// "1930s", "early/mid/late 1980s" (also hyphenated) and the canonical
// "between L and H". Idempotent on its own output.
std::optional<TimePoint> normalizeTimeExpression(std::string_view surface);

// Regex scan for time expressions, longest form first, deduplicated by
// surface in order of appearance.
std::vector<TimeExpression> scanTimeExpressions(std::string_view text);

// Backend mode sends the extraction prompt and normalizes its answer; with
// no backend the story is scanned directly. Only valid expressions return.
std::vector<TimeExpression> identifyTimeExpressions(std::string_view story, Backend* backend);

struct ExtractionRule {
  std::string name;
  std::regex pattern;
  int entity_group = 1;
  int relation_group = 2;  // 0: use `relation` literally
  std::string relation;
};

std::vector<ExtractionRule> defaultExtractionRules();

struct ExtractionResult {
  enum class Source { kRule, kBackend };
  std::vector<std::string> entities;
  std::vector<std::string> relations;
  Source source = Source::kRule;
};

// Rules first; questions no rule matches go to the backend's qa_extract
// prompt (answer lines "entity: ..." and "relation: ..."). Event references
// "(s r o)" in a question are split with the default lexicon. Throws
// NoExtractorConfigured when a question is unmatched and there is no
// backend.
ExtractionResult extractEntitiesRelations(const std::vector<std::string>& questions,
                                          const std::vector<ExtractionRule>& rules,
                                          Backend* backend);

struct ConstructOptions {
  // Reject facts at times outside the provided time points.
  bool strict_times = false;
  std::vector<std::string> demos;  // prepended, each followed by a blank line
  GenerateParams generation{1024, 0.0, 0};
};

// Parses timeline lines, or "<time>: <sentence>" bullets, or for the ordinal
// variant "<n>. <sentence>" lines whose n becomes the year. A sentence
// "..., until <time>" also gets an end fact. Throws UnparsableTimeline.
TemporalGraph parseConstructedTimeline(std::string_view text,
                                       const std::vector<std::string>& entities,
                                       bool ordinal = false);

// Prompts with tg_construct (or tg_construct_ordinal when `times` is empty)
// and parses the reply. Throws UnparsableTimeline for empty stories, empty
// or unparsable output, and (strict mode) disallowed times.
TemporalGraph constructTG(std::string_view story, const std::vector<std::string>& entities,
                          const std::vector<std::string>& relations,
                          const std::vector<TimeExpression>& times, Backend& backend,
                          const ConstructOptions& options = {});

struct TgQuestion {
  std::string id;
  std::string question;
  std::vector<std::string> golds;
};

enum class QaFlagStatus { kPending, kAccepted, kRejected };

struct QaFlag {
  std::string qa_id;
  EventKey event;  // graph event sharing most words with the question
  std::string expected;
  std::string model_answer;
  QaFlagStatus status = QaFlagStatus::kPending;
};

// Asks every question over the rendered timeline (tg_verify prompt). An
// answer matches when it, or the span after its last answer marker, exactly
// matches a gold after normalization.
std::vector<QaFlag> verifyTG(const TemporalGraph& tg, const std::vector<TgQuestion>& qas,
                             Backend& backend, int max_inflight = 1);

// Resolves the flag for `qa_id`. Throws UnknownFlag.
void applyQaDecision(std::vector<QaFlag>& flags, const std::string& qa_id, QaFlagStatus status);

}  // namespace tgqa
