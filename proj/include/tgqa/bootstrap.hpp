#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tgqa/backend.hpp"
#include "tgqa/knowledge.hpp"
#include "tgqa/mock_backend.hpp"
#include "tgqa/qa.hpp"

namespace tgqa {

// q-dagger: rendered timeline, external knowledge and the question.
struct AugmentedQuery {
  std::string graph_text;
  ExternalKnowledge knowledge;
  QAItem question;
};

// Uses item.knowledge when present, otherwise derives it with `mode`. Graphs
// that are not all-year get empty knowledge.
AugmentedQuery makeQuery(const TemporalGraph& graph, const QAItem& item,
                         GapMode mode = GapMode::kReferenced);

struct CoTDemo {
  std::optional<QuestionType> qtype;
  std::string timeline;
  std::string question;
  std::string useful_information;
  std::string cot;
};

// JSONL objects {qtype?, timeline, question, useful_information, cot}.
std::vector<CoTDemo> loadDemos(std::istream& in);
const std::vector<CoTDemo>& bundledDemos();
// Demos of the query's type first, then the rest; at most `n`.
std::vector<CoTDemo> selectDemos(const std::vector<CoTDemo>& demos, QuestionType type,
                                 std::size_t n);

std::string renderDemo(const CoTDemo& demo);
std::string renderQueryPrompt(const AugmentedQuery& query);
std::string renderCoTPrompt(const std::vector<CoTDemo>& demos, const AugmentedQuery& query);

// Worked reasoning in the style of the curated demos, ending in
// "thus, the answer is <gold>." Throws what oracleAnswer throws.
std::string referenceCoT(const TemporalGraph& graph, const QAItem& item);
// Same reasoning steps with a different final answer.
std::string referenceCoTWithAnswer(const TemporalGraph& graph, const QAItem& item,
                                   const std::string& answer);

// Span after the last "the answer is" or "Answer:" (case-insensitive), with
// trailing punctuation and whitespace removed; "" without a marker.
std::string parseFinalAnswer(std::string_view cot);

// Keeps candidates whose parsed answer matches a gold after answer
// normalization; kept candidates are marked accepted.
std::vector<CoTCandidate> filterCorrect(const std::vector<CoTCandidate>& candidates,
                                        const std::vector<std::string>& golds);

// Mean token log-prob of `continuation` after `prompt`. Throws
// InvalidArgument for an empty continuation.
double sequenceLogProb(Backend& backend, const std::string& prompt,
                       const std::string& continuation);

// Prompt used to score answers after a CoT: the query block, a blank line
// and the CoT cut just after its last answer marker.
std::string answerContext(const AugmentedQuery& query, std::string_view cot);

enum class WrongMean {
  kArithmetic,  // log of the mean of exp(log P(a'))
  kGeometric,   // mean of log P(a')
};

double plausibilityGrowthFromLogProbs(double log_p_gold, const std::vector<double>& log_p_wrong,
                                      WrongMean mean = WrongMean::kArithmetic);
double plausibilityGrowth(Backend& backend, const AugmentedQuery& query, const std::string& cot,
                          const std::string& gold, const std::vector<std::string>& wrong_answers,
                          WrongMean mean = WrongMean::kArithmetic);

std::vector<double> softmax(const std::vector<double>& scores);
// Successive draws proportional to the remaining probabilities.
std::vector<std::size_t> sampleWithoutReplacement(const std::vector<double>& probs,
                                                  std::size_t n, std::uint64_t seed);

struct ScoreConfig {
  double gamma = 0.5;
  int n_keep = 1;
  WrongMean mean = WrongMean::kArithmetic;
  bool greedy = false;  // take the top n_keep scores instead of sampling
  std::uint64_t seed = 0;
  int max_inflight = 1;
};

// Fills log_p_correct, plausibility_growth, score and sample_prob for every
// accepted candidate and marks n_keep of them selected. Throws NoAcceptedCoT
// for an empty list.
std::vector<CoTCandidate> scoreAndSample(Backend& backend, const AugmentedQuery& query,
                                         std::vector<CoTCandidate> accepted,
                                         const std::string& gold,
                                         const std::vector<std::string>& wrong_answers,
                                         const ScoreConfig& config);

struct BootstrapConfig {
  int k = 5;
  std::size_t n_demos = 1;
  GapMode gap_mode = GapMode::kReferenced;
  GenerateParams generation{512, 0.7, 0};
  ScoreConfig scoring;
};

// K generations of the demo-prefixed prompt, each with its parsed answer.
// Throws EmptyGeneration for blank output.
std::vector<CoTCandidate> generateCoTCandidates(Backend& backend, const AugmentedQuery& query,
                                                int k, const std::vector<CoTDemo>& demos,
                                                const BootstrapConfig& config = {});

// Generate, filter, score and sample for one item. The returned item keeps
// the accepted candidates in `cots` and the first selected one in `cot`;
// with nothing accepted both stay empty.
QAItem bootstrapItem(Backend& backend, const TemporalGraph& graph, const QAItem& item,
                     const std::vector<CoTDemo>& demos, const BootstrapConfig& config);

// Mock responder for CoT prompts: parses the Test block, answers with the
// reference reasoning, and with probability `error_rate` (hash of prompt and
// seed) ends on a wrong candidate instead.
MockBackend::Responder makeCoTResponder(double error_rate);

}  // namespace tgqa
