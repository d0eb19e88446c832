#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tgqa/backend.hpp"
#include "tgqa/dataset.hpp"
#include "tgqa/mock_backend.hpp"
#include "tgqa/qa.hpp"

namespace tgqa {

// The fact list (one rendered fact per line) followed by the story request.
std::string storyPrompt(const TemporalGraph& graph);

// Throws EmptyGraph, EmptyGeneration or backend errors.
std::string generateStory(Backend& backend, const TemporalGraph& graph,
                          const GenerateParams& params = {});

// "When did the event (<phrase>) start?" / "... end?"
std::string probeQuestion(const TemporalFact& fact);
std::string probePrompt(const std::string& story, const TemporalFact& fact);

// Exact match after normalization, an answer that normalizes to the expected
// time, or the expected year appearing as a token of the answer.
bool probeMatches(const std::string& answer, const TimePoint& expected);

// One probe per fact; unmatched answers become pending flags with ids
// "<sample_id>#<fact index>".
std::vector<AlignmentFlag> probeAlignment(Backend& backend, const std::string& story,
                                          const TemporalGraph& graph,
                                          const std::string& sample_id, int max_inflight = 1);

// "<phrase> began in <time>." or "<phrase> ended in <time>."
std::string narrateFact(const TemporalFact& fact);

// Mock responders: the narrator writes one narrateFact line per fact of a
// story prompt; the grounded prober answers a probe from the matching story
// line, or "The story does not say." when there is none.
MockBackend::Responder makeNarratorResponder();
MockBackend::Responder makeGroundedProbeResponder();

// Pending flags only, ordered by (sample_id, event, endpoint), written
// atomically as JSONL.
void emitReviewQueue(const std::vector<AlignmentFlag>& flags, const std::filesystem::path& path);
std::vector<AlignmentFlag> readReviewQueue(const std::filesystem::path& path);

struct ReviewDecision {
  std::string flag_id;
  FlagStatus status = FlagStatus::kPending;
  std::optional<TimePoint> corrected;  // required for kFixed
  std::optional<FlagLabel> label;
};

// Decisions are the queue lines after review: status set to accepted,
// rejected or fixed, "corrected" holding the new time for fixes.
std::vector<ReviewDecision> readReviewDecisions(const std::filesystem::path& path);

// Rejected samples are dropped. Fixes patch the flagged fact, re-run the
// oracle over the sample's items (items that become unanswerable are
// removed), rebuild candidates and knowledge, and clear CoTs. Throws
// UnknownFlag, ReviewIncomplete (a pending flag without a decision) or
// StalePatch (a fix that breaks the graph).
std::vector<DatasetSample> applyReview(const std::vector<DatasetSample>& dataset,
                                       const std::vector<ReviewDecision>& decisions);

}  // namespace tgqa
