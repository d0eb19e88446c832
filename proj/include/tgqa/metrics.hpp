#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tgqa/backend.hpp"
#include "tgqa/qa.hpp"

namespace tgqa {

// Lowercase, drop ASCII punctuation, drop the articles a/an/the, collapse
// whitespace.
std::string normalizeAnswer(std::string_view text);

// 1 iff the normalized prediction equals some normalized gold.
int exactMatch(std::string_view pred, const std::vector<std::string>& golds);

// Best bag-of-tokens F1 over the golds.
double tokenF1(std::string_view pred, const std::vector<std::string>& golds);

struct PerplexityChoice {
  std::string prediction;
  std::vector<double> scores;  // sequenceLogProb per candidate, in input order
  int correct = 0;
};

// Scores " " + candidate after `question_prompt` and picks the highest mean
// log-prob (first candidate wins ties).
PerplexityChoice perplexityChoice(Backend& backend, const std::string& question_prompt,
                                  const std::vector<std::string>& candidates,
                                  const std::vector<std::string>& golds, int max_inflight = 1);

int perplexityAccuracy(Backend& backend, const std::string& question_prompt,
                       const std::vector<std::string>& candidates,
                       const std::vector<std::string>& golds);

struct ItemScore {
  QuestionType qtype = QuestionType::kQ0;
  double em = 0.0;
  double f1 = 0.0;
  double acc = 0.0;
};

struct MetricTriple {
  double em = 0.0;
  double f1 = 0.0;
  double acc = 0.0;
};

struct CategoryScore {
  MetricTriple mean;
  int n = 0;
};

struct EvalReport {
  std::map<QuestionType, CategoryScore> per_category;
  MetricTriple macro;
  int total_items = 0;
};

// Per-category means, then the unweighted mean over categories present.
EvalReport aggregateReport(const std::vector<ItemScore>& items);

std::string reportToJson(const EvalReport& report);
// "| <label> | EM | F1 | Acc |" with three decimals.
std::string reportTableRow(const EvalReport& report, std::string_view label);

}  // namespace tgqa
