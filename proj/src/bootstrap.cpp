#include "tgqa/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "tgqa/error.hpp"
#include "tgqa/metrics.hpp"
#include "tgqa/prompts.hpp"
#include "tgqa/resources.hpp"
#include "tgqa/rng.hpp"
#include "tgqa/text.hpp"

namespace tgqa {
namespace {

constexpr std::string_view kMarkers[] = {"the answer is", "answer:"};

// End offset of the last answer marker, or npos.
std::size_t lastMarkerEnd(std::string_view text) {
  const std::string lower = toLower(text);
  std::size_t best_start = std::string::npos;
  std::size_t best_end = std::string::npos;
  for (std::string_view m : kMarkers) {
    const std::size_t p = lower.rfind(m);
    if (p == std::string::npos) continue;
    if (best_start == std::string::npos || p > best_start) {
      best_start = p;
      best_end = p + m.size();
    }
  }
  return best_end;
}

double logMeanExp(const std::vector<double>& xs) {
  const double m = *std::max_element(xs.begin(), xs.end());
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s / static_cast<double>(xs.size()));
}

const EventKey* findByRef(const TemporalGraph& graph, const std::string& ref) {
  for (const auto& [key, iv] : graph.intervals()) {
    if (eventRef(key) == ref) return &key;
  }
  return nullptr;
}

std::string startLine(const TemporalGraph& graph, const EventKey& key) {
  const Interval* iv = graph.interval(key);
  std::string s = eventRef(key);
  if (iv && iv->start) s += " starts at " + formatTime(*iv->start);
  return s;
}

std::string reasoningFor(const TemporalGraph& graph, const QAItem& item, const std::string& gold) {
  const auto& ev = item.slots.events;
  std::ostringstream out;
  auto start = [&](const EventKey& k) { return *graph.interval(k)->start; };
  auto end = [&](const EventKey& k) { return *graph.interval(k)->end; };
  switch (item.qtype) {
    case QuestionType::kQ0:
      out << startLine(graph, ev[0]) << "\n" << startLine(graph, ev[1]) << "\n"
          << formatTime(std::min(start(ev[0]), start(ev[1]))) << " is earlier than "
          << formatTime(std::max(start(ev[0]), start(ev[1])));
      break;
    case QuestionType::kQ1: {
      std::vector<EventKey> sorted = ev;
      std::stable_sort(sorted.begin(), sorted.end(),
                       [&](const EventKey& a, const EventKey& b) { return start(a) < start(b); });
      out << "Sorting the events by start time:\n";
      for (const auto& k : sorted) out << startLine(graph, k) << "\n";
      out << "The " << ordinalWord(item.slots.ordinal.value_or(1)) << " one is " << gold;
      break;
    }
    case QuestionType::kQ2: {
      const auto s = start(ev[0]);
      const auto e = end(ev[0]);
      out << eventRef(ev[0]) << " starts at " << formatTime(s) << ", ends at " << formatTime(e)
          << ", " << formatTime(e) << " - " << formatTime(s) << " = " << (e.year() - s.year());
      break;
    }
    case QuestionType::kQ3: {
      out << "The duration for each event can be calculated as follows:\n";
      int d[2];
      for (int i = 0; i < 2; ++i) {
        const auto s = start(ev[i]);
        const auto e = end(ev[i]);
        d[i] = e.year() - s.year();
        out << eventRef(ev[i]) << " starts at " << formatTime(s) << ", ends at " << formatTime(e)
            << ", " << formatTime(e) << " - " << formatTime(s) << " = " << d[i] << "\n";
      }
      if (d[0] > d[1]) {
        out << d[0] << " is greater than " << d[1];
      } else {
        out << d[0] << " is less than " << d[1];
      }
      break;
    }
    case QuestionType::kQ4: {
      const auto [lo, hi] = std::minmax(start(ev[0]), start(ev[1]));
      out << startLine(graph, ev[0]) << "\n" << startLine(graph, ev[1]) << "\n" << formatTime(hi)
          << " - " << formatTime(lo) << " = " << (hi.year() - lo.year());
      break;
    }
    case QuestionType::kQ5: {
      out << startLine(graph, ev[0]) << "\n";
      const EventKey* other = findByRef(graph, gold);
      const bool before = item.slots.direction.value_or(Direction::kBefore) == Direction::kBefore;
      if (other) out << startLine(graph, *other) << "\n";
      out << "It is the closest start " << (before ? "before" : "after") << " "
          << formatTime(start(ev[0]));
      break;
    }
    case QuestionType::kQ6:
      out << startLine(graph, ev[0]);
      break;
    case QuestionType::kQ7: {
      const auto a = start(ev[0]);
      const auto b = start(ev[1]);
      out << startLine(graph, ev[0]) << "\n" << startLine(graph, ev[1]) << "\n" << a.year()
          << (a.year() == b.year() ? " is the same year as " : " is a different year from ")
          << b.year();
      break;
    }
    case QuestionType::kQ8: {
      const auto s = start(ev[0]);
      const auto e = end(ev[0]);
      const auto b = start(ev[1]);
      out << eventRef(ev[0]) << " starts at " << formatTime(s) << ", ends at " << formatTime(e)
          << "\n"
          << startLine(graph, ev[1]) << "\n"
          << eventRef(ev[1])
          << ((s <= b && b < e) ? " started while " : " did not start while ")
          << eventRef(ev[0]) << " was happening";
      break;
    }
  }
  return out.str();
}

nlohmann::json demoJson(std::string_view line, std::size_t line_no) {
  try {
    return nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation,
                "demo line " + std::to_string(line_no) + ": " + e.what());
  }
}

}  // namespace

AugmentedQuery makeQuery(const TemporalGraph& graph, const QAItem& item, GapMode mode) {
  AugmentedQuery q;
  q.graph_text = renderTimeline(graph);
  q.question = item;
  if (item.knowledge) {
    q.knowledge = *item.knowledge;
  } else {
    try {
      q.knowledge = deriveKnowledge(graph, item, mode);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kGranularityMismatch) throw;
    }
  }
  return q;
}

std::vector<CoTDemo> loadDemos(std::istream& in) {
  std::vector<CoTDemo> demos;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto j = demoJson(line, line_no);
    CoTDemo d;
    try {
      if (j.contains("qtype")) {
        d.qtype = parseQuestionType(j.at("qtype").get<std::string>());
        if (!d.qtype) throw Error(ErrorCode::kSchemaViolation, "unknown qtype");
      }
      d.timeline = j.at("timeline").get<std::string>();
      d.question = j.at("question").get<std::string>();
      d.useful_information = j.at("useful_information").get<std::string>();
      d.cot = j.at("cot").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kSchemaViolation,
                  "demo line " + std::to_string(line_no) + ": " + e.what());
    }
    demos.push_back(std::move(d));
  }
  return demos;
}

const std::vector<CoTDemo>& bundledDemos() {
  static const std::vector<CoTDemo> demos = [] {
    std::istringstream in{std::string(resource("cot_demos.jsonl"))};
    return loadDemos(in);
  }();
  return demos;
}

std::vector<CoTDemo> selectDemos(const std::vector<CoTDemo>& demos, QuestionType type,
                                 std::size_t n) {
  std::vector<CoTDemo> out;
  for (const auto& d : demos) {
    if (out.size() < n && d.qtype == type) out.push_back(d);
  }
  for (const auto& d : demos) {
    if (out.size() < n && d.qtype != type) out.push_back(d);
  }
  return out;
}

std::string renderDemo(const CoTDemo& demo) {
  return renderPrompt("cot_demo", {{"timeline", demo.timeline},
                                   {"question", demo.question},
                                   {"useful_information", demo.useful_information},
                                   {"cot", demo.cot}});
}

std::string renderQueryPrompt(const AugmentedQuery& query) {
  return renderPrompt("cot_query", {{"timeline", query.graph_text},
                                    {"question", query.question.question},
                                    {"useful_information", renderKnowledge(query.knowledge)}});
}

std::string renderCoTPrompt(const std::vector<CoTDemo>& demos, const AugmentedQuery& query) {
  std::string out;
  for (const auto& d : demos) out += renderDemo(d);
  out += renderQueryPrompt(query);
  return out;
}

std::string referenceCoT(const TemporalGraph& graph, const QAItem& item) {
  return referenceCoTWithAnswer(graph, item, oracleAnswer(graph, item));
}

std::string referenceCoTWithAnswer(const TemporalGraph& graph, const QAItem& item,
                                   const std::string& answer) {
  const std::string gold = oracleAnswer(graph, item);
  return reasoningFor(graph, item, gold) + " , thus, the answer is " + answer + ".";
}

std::string parseFinalAnswer(std::string_view cot) {
  const std::size_t end = lastMarkerEnd(cot);
  if (end == std::string::npos) return {};
  std::string_view rest = cot.substr(end);
  rest = trim(rest);
  if (const std::size_t nl = rest.find('\n'); nl != std::string_view::npos) {
    rest = rest.substr(0, nl);
  }
  auto strip = [](char c) {
    return c == '.' || c == '!' || c == '?' || c == ',' || c == ';' || c == ':' ||
           c == ' ' || c == '\t' || c == '\r';
  };
  while (!rest.empty() && strip(rest.back())) rest.remove_suffix(1);
  return std::string(trim(rest));
}

std::vector<CoTCandidate> filterCorrect(const std::vector<CoTCandidate>& candidates,
                                        const std::vector<std::string>& golds) {
  std::vector<CoTCandidate> kept;
  for (const auto& c : candidates) {
    if (!c.parsed_answer.empty() && exactMatch(c.parsed_answer, golds)) {
      kept.push_back(c);
      kept.back().accepted = true;
    }
  }
  return kept;
}

double sequenceLogProb(Backend& backend, const std::string& prompt,
                       const std::string& continuation) {
  if (continuation.empty()) throw Error(ErrorCode::kInvalidArgument, "empty continuation");
  const auto tokens = backend.scoreContinuation(prompt, continuation);
  if (tokens.empty()) throw Error(ErrorCode::kNoLogprobSupport, "backend returned no tokens");
  double sum = 0.0;
  for (const auto& t : tokens) sum += t.logprob;
  return sum / static_cast<double>(tokens.size());
}

std::string answerContext(const AugmentedQuery& query, std::string_view cot) {
  std::string ctx = renderQueryPrompt(query) + "\n\n";
  const std::size_t end = lastMarkerEnd(cot);
  if (end == std::string::npos) {
    ctx += std::string(trim(cot));
    ctx += "\nThus, the answer is";
  } else {
    ctx += std::string(cot.substr(0, end));
  }
  return ctx;
}

double plausibilityGrowthFromLogProbs(double log_p_gold, const std::vector<double>& log_p_wrong,
                                      WrongMean mean) {
  if (log_p_wrong.empty()) throw Error(ErrorCode::kInvalidArgument, "no wrong answers");
  if (mean == WrongMean::kGeometric) {
    const double avg = std::accumulate(log_p_wrong.begin(), log_p_wrong.end(), 0.0) /
                       static_cast<double>(log_p_wrong.size());
    return log_p_gold - avg;
  }
  return log_p_gold - logMeanExp(log_p_wrong);
}

double plausibilityGrowth(Backend& backend, const AugmentedQuery& query, const std::string& cot,
                          const std::string& gold, const std::vector<std::string>& wrong_answers,
                          WrongMean mean) {
  if (wrong_answers.empty()) throw Error(ErrorCode::kInvalidArgument, "no wrong answers");
  const std::string ctx = answerContext(query, cot);
  std::vector<double> wrong;
  for (const auto& w : wrong_answers) wrong.push_back(sequenceLogProb(backend, ctx, " " + w));
  return plausibilityGrowthFromLogProbs(sequenceLogProb(backend, ctx, " " + gold), wrong, mean);
}

std::vector<double> softmax(const std::vector<double>& scores) {
  if (scores.empty()) return {};
  const double m = *std::max_element(scores.begin(), scores.end());
  std::vector<double> p;
  p.reserve(scores.size());
  double total = 0.0;
  for (double s : scores) {
    p.push_back(std::exp(s - m));
    total += p.back();
  }
  for (double& x : p) x /= total;
  return p;
}

std::vector<std::size_t> sampleWithoutReplacement(const std::vector<double>& probs,
                                                  std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> w = probs;
  std::vector<bool> taken(w.size(), false);
  std::vector<std::size_t> out;
  n = std::min(n, w.size());
  while (out.size() < n) {
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!taken[i]) total += w[i];
    }
    std::size_t pick = w.size();
    if (total > 0.0) {
      const double u = rng.unit() * total;
      double cum = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (taken[i] || w[i] <= 0.0) continue;
        cum += w[i];
        pick = i;
        if (u < cum) break;
      }
    } else {
      for (std::size_t i = 0; i < w.size() && pick == w.size(); ++i) {
        if (!taken[i]) pick = i;
      }
    }
    taken[pick] = true;
    out.push_back(pick);
  }
  return out;
}

std::vector<CoTCandidate> scoreAndSample(Backend& backend, const AugmentedQuery& query,
                                         std::vector<CoTCandidate> accepted,
                                         const std::string& gold,
                                         const std::vector<std::string>& wrong_answers,
                                         const ScoreConfig& config) {
  if (accepted.empty()) throw Error(ErrorCode::kNoAcceptedCoT, "no accepted chain of thought");
  if (config.gamma < 0 || config.n_keep < 1) {
    throw Error(ErrorCode::kInvalidArgument, "gamma must be >= 0 and n_keep >= 1");
  }
  struct Parts {
    double log_p;
    double growth;
  };
  const auto parts = parallelMap(accepted, config.max_inflight, [&](const CoTCandidate& c) {
    const std::string ctx = answerContext(query, c.text);
    const double lp = sequenceLogProb(backend, ctx, " " + gold);
    double g = 0.0;
    if (!wrong_answers.empty()) {
      std::vector<double> wrong;
      for (const auto& w : wrong_answers) wrong.push_back(sequenceLogProb(backend, ctx, " " + w));
      g = plausibilityGrowthFromLogProbs(lp, wrong, config.mean);
    }
    return Parts{lp, g};
  });
  std::vector<double> scores;
  for (std::size_t i = 0; i < accepted.size(); ++i) {
    auto& c = accepted[i];
    c.accepted = true;
    c.selected = false;
    c.log_p_correct = parts[i].log_p;
    c.plausibility_growth = parts[i].growth;
    c.score = c.log_p_correct + config.gamma * c.plausibility_growth;
    scores.push_back(c.score);
  }
  const auto probs = softmax(scores);
  for (std::size_t i = 0; i < accepted.size(); ++i) accepted[i].sample_prob = probs[i];

  std::vector<std::size_t> chosen;
  if (config.greedy) {
    std::vector<std::size_t> order(accepted.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    order.resize(std::min<std::size_t>(order.size(), config.n_keep));
    chosen = order;
  } else {
    chosen = sampleWithoutReplacement(probs, config.n_keep, config.seed);
  }
  for (std::size_t i : chosen) accepted[i].selected = true;
  return accepted;
}

std::vector<CoTCandidate> generateCoTCandidates(Backend& backend, const AugmentedQuery& query,
                                                int k, const std::vector<CoTDemo>& demos,
                                                const BootstrapConfig& config) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "K must be at least 1");
  const std::string prompt = renderCoTPrompt(demos, query);
  std::vector<int> indices(k);
  std::iota(indices.begin(), indices.end(), 0);
  return parallelMap(indices, config.scoring.max_inflight, [&](int i) {
    GenerateParams params = config.generation;
    params.seed = deriveSeed(config.generation.seed, static_cast<std::uint64_t>(i));
    std::string text = backend.generate(prompt, params);
    if (trim(text).empty()) throw Error(ErrorCode::kEmptyGeneration, "backend returned no text");
    CoTCandidate c;
    c.parsed_answer = parseFinalAnswer(text);
    c.text = std::move(text);
    return c;
  });
}

QAItem bootstrapItem(Backend& backend, const TemporalGraph& graph, const QAItem& item,
                     const std::vector<CoTDemo>& demos, const BootstrapConfig& config) {
  QAItem out = item;
  out.cots.clear();
  out.cot.reset();
  const AugmentedQuery query = makeQuery(graph, item, config.gap_mode);
  const auto candidates = generateCoTCandidates(
      backend, query, config.k, selectDemos(demos, item.qtype, config.n_demos), config);
  auto accepted = filterCorrect(candidates, item.gold_answers);
  if (accepted.empty()) return out;
  std::vector<std::string> wrong;
  for (const auto& c : item.candidates) {
    if (std::find(item.gold_answers.begin(), item.gold_answers.end(), c) ==
        item.gold_answers.end()) {
      wrong.push_back(c);
    }
  }
  ScoreConfig scoring = config.scoring;
  scoring.seed = deriveSeed(config.scoring.seed, fnv1a64(item.id));
  out.cots = scoreAndSample(backend, query, std::move(accepted), item.gold_answers.front(), wrong,
                            scoring);
  for (const auto& c : out.cots) {
    if (c.selected) {
      out.cot = c.text;
      break;
    }
  }
  return out;
}

MockBackend::Responder makeCoTResponder(double error_rate) {
  return [error_rate](const std::string& prompt,
                      const GenerateParams& params) -> std::optional<std::string> {
    constexpr std::string_view kTest = "Test:\nTimeline:\n";
    constexpr std::string_view kQuestion = "\n\nQuestion: ";
    constexpr std::string_view kInfo = "\n\nUseful information:";
    const std::size_t t = prompt.rfind(kTest);
    if (t == std::string::npos) return std::nullopt;
    const std::size_t q = prompt.find(kQuestion, t);
    if (q == std::string::npos) return std::nullopt;
    const std::size_t info = prompt.find(kInfo, q);
    if (info == std::string::npos) return std::nullopt;
    const std::size_t tl_start = t + kTest.size();
    const std::string_view view(prompt);
    try {
      const TemporalGraph graph = parseTimeline(view.substr(tl_start, q - tl_start));
      const std::size_t q_start = q + kQuestion.size();
      auto item = parseQuestion(view.substr(q_start, info - q_start), graph);
      if (!item) return std::nullopt;
      const std::string gold = oracleAnswer(graph, *item);
      item->gold_answers = {gold};
      const std::uint64_t h = splitmix64(fnv1a64(prompt) ^ splitmix64(params.seed));
      const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
      if (u < error_rate) {
        std::vector<std::string> wrong;
        for (const auto& c : generateCandidates(graph, *item)) {
          if (c != gold) wrong.push_back(c);
        }
        if (!wrong.empty()) {
          return referenceCoTWithAnswer(graph, *item, wrong[splitmix64(h) % wrong.size()]);
        }
      }
      return referenceCoT(graph, *item);
    } catch (const Error&) {
      return std::nullopt;
    }
  };
}

}  // namespace tgqa
