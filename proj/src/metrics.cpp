#include "tgqa/metrics.hpp"

#include <cstdio>
#include <json.hpp>

#include "tgqa/bootstrap.hpp"
#include "tgqa/error.hpp"
#include "tgqa/text.hpp"

namespace tgqa {

std::string normalizeAnswer(std::string_view text) {
  std::string stripped;
  stripped.reserve(text.size());
  for (char c : text) {
    if (!isAsciiPunct(c)) stripped += c;
  }
  const std::string lowered = toLower(stripped);
  std::vector<std::string> kept;
  for (std::string_view w : splitWords(lowered)) {
    if (w != "a" && w != "an" && w != "the") kept.emplace_back(w);
  }
  return join(kept, " ");
}

int exactMatch(std::string_view pred, const std::vector<std::string>& golds) {
  const std::string p = normalizeAnswer(pred);
  for (const auto& g : golds) {
    if (normalizeAnswer(g) == p) return 1;
  }
  return 0;
}

namespace {

double f1Single(const std::string& pred, const std::string& gold) {
  const auto pt = splitWords(pred);
  const auto gt = splitWords(gold);
  if (pt.empty() && gt.empty()) return 1.0;
  if (pt.empty() || gt.empty()) return 0.0;
  std::map<std::string_view, int> bag;
  for (auto t : gt) ++bag[t];
  int common = 0;
  for (auto t : pt) {
    auto it = bag.find(t);
    if (it != bag.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / pt.size();
  const double recall = static_cast<double>(common) / gt.size();
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

double tokenF1(std::string_view pred, const std::vector<std::string>& golds) {
  const std::string p = normalizeAnswer(pred);
  double best = 0.0;
  for (const auto& g : golds) {
    const std::string ng = normalizeAnswer(g);
    best = std::max(best, f1Single(p, ng));
  }
  return best;
}

PerplexityChoice perplexityChoice(Backend& backend, const std::string& question_prompt,
                                  const std::vector<std::string>& candidates,
                                  const std::vector<std::string>& golds, int max_inflight) {
  if (candidates.empty()) throw Error(ErrorCode::kInvalidArgument, "no candidates to score");
  PerplexityChoice out;
  out.scores = parallelMap(candidates, max_inflight, [&](const std::string& c) {
    return sequenceLogProb(backend, question_prompt, " " + c);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < out.scores.size(); ++i) {
    if (out.scores[i] > out.scores[best]) best = i;
  }
  out.prediction = candidates[best];
  out.correct = exactMatch(out.prediction, golds);
  return out;
}

int perplexityAccuracy(Backend& backend, const std::string& question_prompt,
                       const std::vector<std::string>& candidates,
                       const std::vector<std::string>& golds) {
  return perplexityChoice(backend, question_prompt, candidates, golds).correct;
}

EvalReport aggregateReport(const std::vector<ItemScore>& items) {
  EvalReport report;
  for (const auto& item : items) {
    auto& cat = report.per_category[item.qtype];
    cat.mean.em += item.em;
    cat.mean.f1 += item.f1;
    cat.mean.acc += item.acc;
    ++cat.n;
  }
  report.total_items = static_cast<int>(items.size());
  if (report.per_category.empty()) return report;
  for (auto& [type, cat] : report.per_category) {
    cat.mean.em /= cat.n;
    cat.mean.f1 /= cat.n;
    cat.mean.acc /= cat.n;
    report.macro.em += cat.mean.em;
    report.macro.f1 += cat.mean.f1;
    report.macro.acc += cat.mean.acc;
  }
  const double k = static_cast<double>(report.per_category.size());
  report.macro.em /= k;
  report.macro.f1 /= k;
  report.macro.acc /= k;
  return report;
}

std::string reportToJson(const EvalReport& report) {
  nlohmann::ordered_json j;
  auto triple = [](const MetricTriple& m) {
    return nlohmann::ordered_json{{"em", m.em}, {"f1", m.f1}, {"acc", m.acc}};
  };
  j["total_items"] = report.total_items;
  j["macro"] = triple(report.macro);
  nlohmann::ordered_json cats = nlohmann::ordered_json::object();
  for (const auto& [type, cat] : report.per_category) {
    auto c = triple(cat.mean);
    c["n"] = cat.n;
    cats[std::string(questionTypeTag(type))] = c;
  }
  j["per_category"] = cats;
  return j.dump(2);
}

std::string reportTableRow(const EvalReport& report, std::string_view label) {
  char buf[128];
  std::snprintf(buf, sizeof buf, " | %.3f | %.3f | %.3f |", report.macro.em, report.macro.f1,
                report.macro.acc);
  return "| " + std::string(label) + buf;
}

}  // namespace tgqa
