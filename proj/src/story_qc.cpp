#include "tgqa/story_qc.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "tgqa/error.hpp"
#include "tgqa/knowledge.hpp"
#include "tgqa/metrics.hpp"
#include "tgqa/prompts.hpp"
#include "tgqa/text.hpp"
#include "tgqa/text2tg.hpp"

namespace tgqa {
namespace {

constexpr std::string_view kStoryRequest = "\n\nBased on the above facts, generate a short story for me.";
constexpr std::string_view kProbeLead = "\n\nWhen did the event ";

std::string endpointVerb(Endpoint e) { return e == Endpoint::kStart ? "start" : "end"; }

}  // namespace

std::string storyPrompt(const TemporalGraph& graph) {
  return renderPrompt("story_gen", {{"facts", renderTimeline(graph)}});
}

std::string generateStory(Backend& backend, const TemporalGraph& graph,
                          const GenerateParams& params) {
  if (graph.empty()) throw Error(ErrorCode::kEmptyGraph, "nothing to narrate");
  std::string story = backend.generate(storyPrompt(graph), params);
  if (trim(story).empty()) throw Error(ErrorCode::kEmptyGeneration, "backend returned an empty story");
  return story;
}

std::string probeQuestion(const TemporalFact& fact) {
  return "When did the event " + eventRef(fact.key) + " " + endpointVerb(fact.endpoint) + "?";
}

std::string probePrompt(const std::string& story, const TemporalFact& fact) {
  return renderPrompt("story_probe", {{"story", story},
                                      {"event", eventRef(fact.key)},
                                      {"endpoint", endpointVerb(fact.endpoint)}});
}

bool probeMatches(const std::string& answer, const TimePoint& expected) {
  const std::string expected_text = formatTime(expected);
  if (exactMatch(answer, {expected_text})) return true;
  if (auto t = normalizeTimeExpression(answer); t && *t == expected) return true;
  for (const auto& e : scanTimeExpressions(answer)) {
    if (e.normalized && *e.normalized == expected) return true;
  }
  const std::string year = std::to_string(expected.year());
  const std::string normalized = normalizeAnswer(answer);
  for (auto w : splitWords(normalized)) {
    if (w == year) return true;
  }
  return false;
}

std::vector<AlignmentFlag> probeAlignment(Backend& backend, const std::string& story,
                                          const TemporalGraph& graph,
                                          const std::string& sample_id, int max_inflight) {
  const auto& facts = graph.facts();
  const auto answers = parallelMap(facts, max_inflight, [&](const TemporalFact& f) {
    return backend.generate(probePrompt(story, f), {});
  });
  std::vector<AlignmentFlag> flags;
  for (std::size_t i = 0; i < facts.size(); ++i) {
    if (probeMatches(answers[i], facts[i].time)) continue;
    AlignmentFlag flag;
    flag.flag_id = sample_id + "#" + std::to_string(i);
    flag.sample_id = sample_id;
    flag.event = facts[i].key;
    flag.endpoint = facts[i].endpoint;
    flag.expected = facts[i].time;
    flag.model_answer = answers[i];
    flags.push_back(std::move(flag));
  }
  return flags;
}

std::string narrateFact(const TemporalFact& fact) {
  return eventPhrase(fact.key) + (fact.endpoint == Endpoint::kStart ? " began in " : " ended in ") +
         formatTime(fact.time) + ".";
}

MockBackend::Responder makeNarratorResponder() {
  return [](const std::string& prompt, const GenerateParams&) -> std::optional<std::string> {
    if (!std::string_view(prompt).ends_with(kStoryRequest)) return std::nullopt;
    try {
      const TemporalGraph g =
          parseTimeline(std::string_view(prompt).substr(0, prompt.size() - kStoryRequest.size()));
      std::vector<std::string> lines;
      for (const auto& f : g.facts()) lines.push_back(narrateFact(f));
      return join(lines, "\n");
    } catch (const Error&) {
      return std::nullopt;
    }
  };
}

MockBackend::Responder makeGroundedProbeResponder() {
  return [](const std::string& prompt, const GenerateParams&) -> std::optional<std::string> {
    const std::size_t lead = prompt.rfind(kProbeLead);
    if (lead == std::string::npos) return std::nullopt;
    std::string_view tail = std::string_view(prompt).substr(lead + kProbeLead.size());
    std::string_view verb;
    for (std::string_view v : {std::string_view(" start?"), std::string_view(" end?")}) {
      if (tail.ends_with(v)) verb = v;
    }
    if (verb.empty() || tail.size() < verb.size() + 2 || tail.front() != '(') return std::nullopt;
    const std::string_view ref = tail.substr(0, tail.size() - verb.size());
    if (ref.back() != ')') return std::nullopt;
    const std::string phrase(ref.substr(1, ref.size() - 2));
    const std::string cue = phrase + (verb == " start?" ? " began in " : " ended in ");
    const std::string_view story = std::string_view(prompt).substr(0, lead);
    for (auto line : splitLines(story)) {
      line = trim(line);
      if (!line.starts_with(cue)) continue;
      std::string_view when = line.substr(cue.size());
      if (when.ends_with(".")) when.remove_suffix(1);
      return "In " + std::string(when) + ".";
    }
    return std::string("The story does not say.");
  };
}

void emitReviewQueue(const std::vector<AlignmentFlag>& flags, const std::filesystem::path& path) {
  std::vector<AlignmentFlag> pending;
  for (const auto& f : flags) {
    if (f.status == FlagStatus::kPending) pending.push_back(f);
  }
  std::stable_sort(pending.begin(), pending.end(), [](const AlignmentFlag& a, const AlignmentFlag& b) {
    return std::tie(a.sample_id, a.event, a.endpoint) < std::tie(b.sample_id, b.event, b.endpoint);
  });
  std::string content;
  for (const auto& f : pending) {
    content += flagToJson(f).dump();
    content += '\n';
  }
  writeFileAtomic(path, content);
}

namespace {

template <typename Fn>
void forEachJsonLine(const std::filesystem::path& path, Fn&& fn) {
  std::istringstream in(readFile(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      fn(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kSchemaViolation,
                  path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::kSchemaViolation,
                  path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace

std::vector<AlignmentFlag> readReviewQueue(const std::filesystem::path& path) {
  std::vector<AlignmentFlag> flags;
  forEachJsonLine(path, [&](const nlohmann::json& j) { flags.push_back(flagFromJson(j)); });
  return flags;
}

std::vector<ReviewDecision> readReviewDecisions(const std::filesystem::path& path) {
  std::vector<ReviewDecision> out;
  forEachJsonLine(path, [&](const nlohmann::json& j) {
    ReviewDecision d;
    d.flag_id = j.at("flag_id").get<std::string>();
    const auto status = j.at("status").get<std::string>();
    const auto st = parseFlagStatus(status);
    if (!st) throw Error(ErrorCode::kSchemaViolation, "invalid status '" + status + "'");
    d.status = *st;
    if (j.contains("corrected") && !j["corrected"].is_null()) {
      const auto text = j["corrected"].get<std::string>();
      d.corrected = parseTime(text);
      if (!d.corrected) throw Error(ErrorCode::kSchemaViolation, "invalid corrected time '" + text + "'");
    }
    if (j.contains("label") && !j["label"].is_null()) {
      d.label = parseFlagLabel(j["label"].get<std::string>());
      if (!d.label) throw Error(ErrorCode::kSchemaViolation, "invalid label");
    }
    out.push_back(std::move(d));
  });
  return out;
}

namespace {

void regenerateItems(DatasetSample& sample) {
  const TemporalGraph graph = canonicalGraph(sample);
  std::vector<QAItem> kept;
  for (auto item : sample.qas) {
    std::string answer;
    try {
      answer = oracleAnswer(graph, item);
    } catch (const Error&) {
      continue;
    }
    item.gold_answers = {answer};
    item.candidates = generateCandidates(graph, item);
    if (item.candidates.size() < 2) continue;
    if (item.knowledge) {
      try {
        item.knowledge = deriveKnowledge(graph, item);
      } catch (const Error&) {
        item.knowledge.reset();
      }
    }
    item.cot.reset();
    item.cots.clear();
    kept.push_back(std::move(item));
  }
  sample.qas = std::move(kept);
}

}  // namespace

std::vector<DatasetSample> applyReview(const std::vector<DatasetSample>& dataset,
                                       const std::vector<ReviewDecision>& decisions) {
  std::map<std::string, const ReviewDecision*> by_id;
  for (const auto& d : decisions) by_id[d.flag_id] = &d;

  std::set<std::string> pending_ids;
  for (const auto& s : dataset) {
    for (const auto& f : s.flags) {
      if (f.status == FlagStatus::kPending) pending_ids.insert(f.flag_id);
    }
  }
  for (const auto& [id, d] : by_id) {
    if (!pending_ids.contains(id)) {
      throw Error(ErrorCode::kUnknownFlag, "decision for unknown or resolved flag '" + id + "'");
    }
  }
  for (const auto& id : pending_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end() || it->second->status == FlagStatus::kPending) {
      throw Error(ErrorCode::kReviewIncomplete, "flag '" + id + "' has no decision");
    }
  }

  std::vector<DatasetSample> out;
  for (const auto& s : dataset) {
    DatasetSample sample = s;
    bool rejected = false;
    std::vector<TemporalFact> facts = sample.graph.facts();
    bool patched = false;
    for (auto& flag : sample.flags) {
      if (flag.status != FlagStatus::kPending) continue;
      const ReviewDecision& d = *by_id.at(flag.flag_id);
      flag.status = d.status;
      if (d.label) flag.label = d.label;
      if (d.status == FlagStatus::kRejected) rejected = true;
      if (d.status != FlagStatus::kFixed) continue;
      if (!d.corrected) {
        throw Error(ErrorCode::kStalePatch, "fix for '" + flag.flag_id + "' has no corrected time");
      }
      auto it = std::find_if(facts.begin(), facts.end(), [&](const TemporalFact& f) {
        return f.key == flag.event && f.endpoint == flag.endpoint;
      });
      if (it == facts.end()) {
        throw Error(ErrorCode::kStalePatch, "flag '" + flag.flag_id + "' names a missing fact");
      }
      it->time = *d.corrected;
      patched = true;
    }
    if (rejected) continue;
    if (patched) {
      try {
        sample.graph = sortChronological(facts);
      } catch (const Error& e) {
        throw Error(ErrorCode::kStalePatch, std::string("patched graph is invalid: ") + e.what());
      }
      regenerateItems(sample);
    }
    out.push_back(std::move(sample));
  }
  return out;
}

}  // namespace tgqa
