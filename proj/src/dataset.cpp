#include "tgqa/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <unistd.h>

#include "tgqa/error.hpp"

namespace tgqa {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view flagStatusName(FlagStatus s) {
  switch (s) {
    case FlagStatus::kPending: return "pending";
    case FlagStatus::kAccepted: return "accepted";
    case FlagStatus::kRejected: return "rejected";
    case FlagStatus::kFixed: return "fixed";
  }
  return "pending";
}

std::optional<FlagStatus> parseFlagStatus(std::string_view s) {
  for (auto st : {FlagStatus::kPending, FlagStatus::kAccepted, FlagStatus::kRejected,
                  FlagStatus::kFixed}) {
    if (flagStatusName(st) == s) return st;
  }
  return std::nullopt;
}

std::string_view flagLabelName(FlagLabel l) {
  switch (l) {
    case FlagLabel::kT1: return "T1";
    case FlagLabel::kT2: return "T2";
    case FlagLabel::kT3: return "T3";
    case FlagLabel::kT4: return "T4";
  }
  return "T1";
}

std::optional<FlagLabel> parseFlagLabel(std::string_view s) {
  for (auto l : {FlagLabel::kT1, FlagLabel::kT2, FlagLabel::kT3, FlagLabel::kT4}) {
    if (flagLabelName(l) == s) return l;
  }
  return std::nullopt;
}

TemporalGraph canonicalGraph(const DatasetSample& sample) {
  const auto& aliases = sample.provenance.relation_aliases;
  if (aliases.empty()) return sample.graph;
  std::vector<TemporalFact> facts;
  for (auto f : sample.graph.facts()) {
    if (auto it = aliases.find(f.key.relation); it != aliases.end()) {
      f.key.relation = it->second.original;
      if (it->second.swapped) std::swap(f.key.subject, f.key.object);
    }
    facts.push_back(std::move(f));
  }
  return sortChronological(std::move(facts));
}

void verifySample(const DatasetSample& sample) {
  const TemporalGraph graph = canonicalGraph(sample);
  for (const auto& qa : sample.qas) {
    const std::string where = "sample " + sample.id + ", item " + qa.id;
    if (qa.gold_answers.empty()) throw Error(ErrorCode::kOracleMismatch, where + " has no gold");
    std::string answer;
    try {
      answer = oracleAnswer(graph, qa);
    } catch (const Error& e) {
      throw Error(ErrorCode::kOracleMismatch, where + " is unanswerable: " + e.what());
    }
    if (std::find(qa.gold_answers.begin(), qa.gold_answers.end(), answer) ==
        qa.gold_answers.end()) {
      throw Error(ErrorCode::kOracleMismatch,
                  where + ": gold '" + qa.gold_answers.front() + "' but oracle says '" + answer +
                      "'");
    }
  }
}

namespace {

[[noreturn]] void schema(const std::string& what) {
  throw Error(ErrorCode::kSchemaViolation, what);
}

TimePoint timeFromJson(const json& j) {
  const auto text = j.get<std::string>();
  auto t = parseTime(text);
  if (!t) schema("invalid time '" + text + "'");
  return *t;
}

ordered_json keyToJson(const EventKey& k) {
  return {{"subject", k.subject}, {"relation", k.relation}, {"object", k.object}};
}

EventKey keyFromJson(const json& j) {
  return EventKey{j.at("subject").get<std::string>(), j.at("relation").get<std::string>(),
                  j.at("object").get<std::string>()};
}

Endpoint endpointFromJson(const json& j) {
  const auto s = j.get<std::string>();
  if (s == "start") return Endpoint::kStart;
  if (s == "end") return Endpoint::kEnd;
  schema("invalid endpoint '" + s + "'");
}

ordered_json knowledgeToJson(const ExternalKnowledge& k) {
  ordered_json chain = ordered_json::array();
  for (const auto& t : k.time_chain) chain.push_back(formatTime(t));
  ordered_json gaps = ordered_json::array();
  for (const auto& g : k.gaps) {
    gaps.push_back({{"minuend", formatTime(g.minuend)},
                    {"subtrahend", formatTime(g.subtrahend)},
                    {"difference", g.difference}});
  }
  return {{"time_chain", chain}, {"gaps", gaps}, {"gap_ordering", k.gap_ordering}};
}

ExternalKnowledge knowledgeFromJson(const json& j) {
  ExternalKnowledge k;
  for (const auto& t : j.at("time_chain")) k.time_chain.push_back(timeFromJson(t));
  for (const auto& g : j.at("gaps")) {
    k.gaps.push_back(GapStatement{timeFromJson(g.at("minuend")), timeFromJson(g.at("subtrahend")),
                                  g.at("difference").get<int>()});
  }
  k.gap_ordering = j.at("gap_ordering").get<std::vector<int>>();
  return k;
}

ordered_json cotToJson(const CoTCandidate& c) {
  return {{"text", c.text},
          {"parsed_answer", c.parsed_answer},
          {"log_p_correct", c.log_p_correct},
          {"plausibility_growth", c.plausibility_growth},
          {"score", c.score},
          {"sample_prob", c.sample_prob},
          {"accepted", c.accepted},
          {"selected", c.selected}};
}

CoTCandidate cotFromJson(const json& j) {
  CoTCandidate c;
  c.text = j.at("text").get<std::string>();
  c.parsed_answer = j.at("parsed_answer").get<std::string>();
  c.log_p_correct = j.at("log_p_correct").get<double>();
  c.plausibility_growth = j.at("plausibility_growth").get<double>();
  c.score = j.at("score").get<double>();
  c.sample_prob = j.at("sample_prob").get<double>();
  c.accepted = j.at("accepted").get<bool>();
  c.selected = j.at("selected").get<bool>();
  return c;
}

template <typename T, typename Fn>
ordered_json optionalJson(const std::optional<T>& v, Fn&& fn) {
  return v ? ordered_json(fn(*v)) : ordered_json(nullptr);
}

}  // namespace

ordered_json factToJson(const TemporalFact& fact) {
  ordered_json j = keyToJson(fact.key);
  j["endpoint"] = std::string(endpointName(fact.endpoint));
  j["time"] = formatTime(fact.time);
  return j;
}

TemporalFact factFromJson(const json& j) {
  return TemporalFact{keyFromJson(j), endpointFromJson(j.at("endpoint")), timeFromJson(j.at("time"))};
}

ordered_json qaToJson(const QAItem& item) {
  ordered_json events = ordered_json::array();
  for (const auto& e : item.slots.events) events.push_back(keyToJson(e));
  ordered_json slots = {
      {"events", events},
      {"k", optionalJson(item.slots.ordinal, [](int k) { return k; })},
      {"direction", optionalJson(item.slots.direction, [](Direction d) {
         return std::string(d == Direction::kBefore ? "before" : "after");
       })}};
  ordered_json cots = ordered_json::array();
  for (const auto& c : item.cots) cots.push_back(cotToJson(c));
  return {{"id", item.id},
          {"qtype", std::string(questionTypeTag(item.qtype))},
          {"question", item.question},
          {"slots", slots},
          {"gold", item.gold_answers},
          {"candidates", item.candidates},
          {"knowledge", optionalJson(item.knowledge, knowledgeToJson)},
          {"cot", optionalJson(item.cot, [](const std::string& s) { return s; })},
          {"cots", cots}};
}

QAItem qaFromJson(const json& j) {
  QAItem item;
  item.id = j.at("id").get<std::string>();
  const auto tag = j.at("qtype").get<std::string>();
  const auto type = parseQuestionType(tag);
  if (!type) schema("unknown qtype '" + tag + "'");
  item.qtype = *type;
  item.question = j.at("question").get<std::string>();
  const json& slots = j.at("slots");
  for (const auto& e : slots.at("events")) item.slots.events.push_back(keyFromJson(e));
  if (slots.contains("k") && !slots["k"].is_null()) item.slots.ordinal = slots["k"].get<int>();
  if (slots.contains("direction") && !slots["direction"].is_null()) {
    const auto d = slots["direction"].get<std::string>();
    if (d == "before") {
      item.slots.direction = Direction::kBefore;
    } else if (d == "after") {
      item.slots.direction = Direction::kAfter;
    } else {
      schema("invalid direction '" + d + "'");
    }
  }
  item.gold_answers = j.at("gold").get<std::vector<std::string>>();
  if (item.gold_answers.empty()) schema("item " + item.id + " has no gold answer");
  item.candidates = j.at("candidates").get<std::vector<std::string>>();
  if (j.contains("knowledge") && !j["knowledge"].is_null()) {
    item.knowledge = knowledgeFromJson(j["knowledge"]);
  }
  if (j.contains("cot") && !j["cot"].is_null()) item.cot = j["cot"].get<std::string>();
  if (j.contains("cots")) {
    for (const auto& c : j["cots"]) item.cots.push_back(cotFromJson(c));
  }
  return item;
}

ordered_json flagToJson(const AlignmentFlag& flag) {
  return {{"flag_id", flag.flag_id},
          {"sample_id", flag.sample_id},
          {"subject", flag.event.subject},
          {"relation", flag.event.relation},
          {"object", flag.event.object},
          {"endpoint", std::string(endpointName(flag.endpoint))},
          {"expected", formatTime(flag.expected)},
          {"model_answer", flag.model_answer},
          {"status", std::string(flagStatusName(flag.status))},
          {"label", optionalJson(flag.label, [](FlagLabel l) { return std::string(flagLabelName(l)); })}};
}

AlignmentFlag flagFromJson(const json& j) {
  AlignmentFlag f;
  f.flag_id = j.at("flag_id").get<std::string>();
  f.sample_id = j.at("sample_id").get<std::string>();
  f.event = keyFromJson(j);
  f.endpoint = endpointFromJson(j.at("endpoint"));
  f.expected = timeFromJson(j.at("expected"));
  f.model_answer = j.at("model_answer").get<std::string>();
  const auto status = j.at("status").get<std::string>();
  const auto st = parseFlagStatus(status);
  if (!st) schema("invalid flag status '" + status + "'");
  f.status = *st;
  if (j.contains("label") && !j["label"].is_null()) {
    const auto label = j["label"].get<std::string>();
    f.label = parseFlagLabel(label);
    if (!f.label) schema("invalid flag label '" + label + "'");
  }
  return f;
}

ordered_json sampleToJson(const DatasetSample& sample) {
  ordered_json graph = ordered_json::array();
  for (const auto& f : sample.graph.facts()) graph.push_back(factToJson(f));
  ordered_json qas = ordered_json::array();
  for (const auto& q : sample.qas) qas.push_back(qaToJson(q));
  ordered_json flags = ordered_json::array();
  for (const auto& f : sample.flags) flags.push_back(flagToJson(f));
  ordered_json aliases = ordered_json::object();
  for (const auto& [rel, alias] : sample.provenance.relation_aliases) {
    aliases[rel] = {{"original", alias.original}, {"swapped", alias.swapped}};
  }
  return {{"id", sample.id},
          {"graph", graph},
          {"story", optionalJson(sample.story, [](const std::string& s) { return s; })},
          {"qas", qas},
          {"flags", flags},
          {"provenance",
           {{"seed", sample.provenance.seed},
            {"transforms", sample.provenance.transforms},
            {"split", sample.provenance.split},
            {"relation_aliases", aliases}}}};
}

DatasetSample sampleFromJson(const json& j) {
  DatasetSample s;
  try {
    s.id = j.at("id").get<std::string>();
    std::vector<TemporalFact> facts;
    for (const auto& f : j.at("graph")) facts.push_back(factFromJson(f));
    s.graph = sortChronological(std::move(facts));
    if (j.contains("story") && !j["story"].is_null()) s.story = j["story"].get<std::string>();
    for (const auto& q : j.at("qas")) s.qas.push_back(qaFromJson(q));
    if (j.contains("flags")) {
      for (const auto& f : j["flags"]) s.flags.push_back(flagFromJson(f));
    }
    if (j.contains("provenance")) {
      const json& p = j["provenance"];
      s.provenance.seed = p.value("seed", std::uint64_t{0});
      s.provenance.transforms = p.value("transforms", std::vector<std::string>{});
      s.provenance.split = p.value("split", std::string{});
      if (p.contains("relation_aliases")) {
        for (const auto& [rel, a] : p["relation_aliases"].items()) {
          s.provenance.relation_aliases[rel] =
              RelationAlias{a.at("original").get<std::string>(), a.value("swapped", false)};
        }
      }
    }
  } catch (const json::exception& e) {
    schema(e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSchemaViolation) throw;
    schema(e.what());
  }
  return s;
}

std::string readFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void writeFileAtomic(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  const auto tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp, ec);
      throw Error(ErrorCode::kIoFailure, "write failed for " + tmp);
    }
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::kIoFailure, "cannot rename into " + path.string());
  }
}

std::vector<DatasetSample> readDataset(const std::filesystem::path& path) {
  std::istringstream in(readFile(path));
  std::vector<DatasetSample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(sampleFromJson(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSchemaViolation,
                  path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::kSchemaViolation,
                  path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void writeDataset(const std::filesystem::path& path, const std::vector<DatasetSample>& samples) {
  std::set<std::string> ids;
  std::string content;
  for (const auto& s : samples) {
    if (!ids.insert(s.id).second) {
      throw Error(ErrorCode::kSchemaViolation, "duplicate sample id '" + s.id + "'");
    }
    verifySample(s);
    content += sampleToJson(s).dump();
    content += '\n';
  }
  writeFileAtomic(path, content);
}

}  // namespace tgqa
