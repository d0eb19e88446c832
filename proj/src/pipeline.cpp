#include "tgqa/pipeline.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tgqa/error.hpp"
#include "tgqa/knowledge.hpp"
#include "tgqa/mock_backend.hpp"
#include "tgqa/rng.hpp"
#include "tgqa/story_qc.hpp"
#include "tgqa/text.hpp"

namespace tgqa {
namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void configError(const std::string& msg) {
  throw Error(ErrorCode::kConfigInvalid, msg);
}

// Reads one JSON object and complains about keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string name) : name_(std::move(name)) {
    if (!j.is_object()) configError(name_ + " must be an object");
    j_ = &j;
  }

  void done() const {
    for (const auto& [key, _] : j_->items()) {
      if (!seen_.contains(key)) configError("unknown key " + name_ + "." + key);
    }
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_->find(key);
    if (it == j_->end() || it->is_null()) return nullptr;
    return &*it;
  }

  template <typename T>
  void read(const std::string& key, std::optional<T>& out) {
    T value{};
    const json* v = j_->contains(key) ? &j_->at(key) : nullptr;
    if (v && !v->is_null()) {
      read(key, value);
      out = std::move(value);
    }
    seen_.insert(key);
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    const json* v = find(key);
    if (!v) return;
    try {
      out = v->get<T>();
    } catch (const json::exception&) {
      configError(name_ + "." + key + " has the wrong type");
    }
  }

  void readPath(const std::string& key, std::optional<fs::path>& out, const fs::path& base) {
    std::optional<std::string> s;
    read(key, s);
    if (s) out = (base / *s).lexically_normal();
  }

  std::string name() const { return name_; }

 private:
  const json* j_;
  std::string name_;
  std::set<std::string> seen_;
};

template <typename T>
void readNumber(Section& s, const std::string& key, T& out) {
  const json* v = s.find(key);
  if (!v) return;
  if (!v->is_number()) configError(s.name() + "." + key + " must be a number");
  if constexpr (std::is_integral_v<T>) {
    if (!v->is_number_integer()) configError(s.name() + "." + key + " must be an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (v->is_number_integer() && !v->is_number_unsigned() && v->get<std::int64_t>() < 0) {
        configError(s.name() + "." + key + " must be non-negative");
      }
    }
  }
  out = v->get<T>();
}

std::string gapModeName(GapMode m) {
  switch (m) {
    case GapMode::kReferenced: return "referenced";
    case GapMode::kAllDurations: return "all_durations";
    case GapMode::kAllPairs: return "all_pairs";
  }
  return "referenced";
}

GapMode parseGapMode(const std::string& s) {
  if (s == "referenced") return GapMode::kReferenced;
  if (s == "all_durations") return GapMode::kAllDurations;
  if (s == "all_pairs") return GapMode::kAllPairs;
  configError("unknown knowledge mode '" + s + "'");
}

std::vector<std::string> readSplits(Section& s) {
  std::vector<std::string> splits;
  s.read("splits", splits);
  for (const auto& name : splits) {
    if (name != "train" && name != "val" && name != "test") {
      configError(s.name() + ".splits: unknown split '" + name + "'");
    }
  }
  return splits;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

NamePool loadPool(const std::optional<fs::path>& path) {
  if (!path) return bundledNamePool();
  std::ifstream in(*path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path->string());
  return loadNamePool(in);
}

std::set<std::string> allEntities(const std::vector<DatasetSample>& samples) {
  std::set<std::string> out;
  for (const auto& s : samples) {
    for (const auto& f : s.graph.facts()) {
      out.insert(f.key.subject);
      out.insert(f.key.object);
    }
  }
  return out;
}

bool inSplits(const DatasetSample& s, const std::vector<std::string>& splits) {
  for (const auto& name : splits) {
    if (s.provenance.split == name) return true;
  }
  return false;
}

}  // namespace

PipelineConfig parseConfig(const std::string& json_text, const fs::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    configError(std::string("config is not valid JSON: ") + e.what());
  }
  PipelineConfig c;
  Section top(root, "config");

  std::optional<fs::path> kg;
  top.readPath("kg_path", kg, base_dir);
  if (!kg) configError("kg_path is required");
  c.kg_path = *kg;
  std::optional<fs::path> out;
  top.readPath("output_dir", out, base_dir);
  if (out) c.output_dir = *out;
  readNumber(top, "seed", c.seed);

  if (const json* j = top.find("corpus")) {
    Section s(*j, "corpus");
    readNumber(s, "max_hops", c.corpus.max_hops);
    readNumber(s, "max_events", c.corpus.max_events);
    readNumber(s, "min_facts", c.corpus.min_facts);
    s.done();
  }
  if (const json* j = top.find("split")) {
    Section s(*j, "split");
    readNumber(s, "train", c.split.train);
    readNumber(s, "val", c.split.val);
    readNumber(s, "test", c.split.test);
    s.done();
  }
  if (const json* j = top.find("anonymize")) {
    Section s(*j, "anonymize");
    s.read("enabled", c.anonymize);
    s.readPath("name_pool", c.name_pool, base_dir);
    s.done();
  }
  if (const json* j = top.find("qa")) {
    Section s(*j, "qa");
    if (const json* types = s.find("types")) {
      if (!types->is_array()) configError("qa.types must be a list");
      c.qa.enabled.fill(false);
      for (const auto& t : *types) {
        auto q = t.is_string() ? parseQuestionType(t.get<std::string>()) : std::nullopt;
        if (!q) configError("qa.types: unknown question type " + t.dump());
        c.qa.enabled[static_cast<std::size_t>(*q)] = true;
      }
    }
    if (const json* caps = s.find("max_per_type")) {
      if (!caps->is_object()) configError("qa.max_per_type must be an object");
      for (const auto& [tag, n] : caps->items()) {
        auto q = parseQuestionType(tag);
        if (!q || !n.is_number_integer()) configError("qa.max_per_type: bad entry " + tag);
        c.qa.max_per_type[static_cast<std::size_t>(*q)] = n.get<int>();
      }
    }
    readNumber(s, "q1_min_events", c.qa.q1_min_events);
    readNumber(s, "q1_max_events", c.qa.q1_max_events);
    s.done();
  }
  if (const json* j = top.find("knowledge")) {
    Section s(*j, "knowledge");
    std::string mode = gapModeName(c.knowledge_mode);
    s.read("mode", mode);
    c.knowledge_mode = parseGapMode(mode);
    s.done();
  }
  if (const json* j = top.find("augment")) {
    Section s(*j, "augment");
    auto& a = c.augment;
    if (s.find("splits")) a.splits = readSplits(s);
    s.read("keep_original", a.keep_original);
    s.read("drop_irrelevant", a.drop_irrelevant);
    readNumber(s, "drop_probability", a.drop_probability);
    s.read("synonyms", a.synonyms);
    s.readPath("synonym_map", a.synonym_map, base_dir);
    s.read("rename_entities", a.rename_entities);
    s.read("time_offset", a.time_offset);
    s.read("random_time_offset", a.random_time_offset);
    readNumber(s, "offset_range", a.offset_range);
    s.read("per_item", a.per_item);
    s.done();
  }
  if (const json* j = top.find("bootstrap")) {
    Section s(*j, "bootstrap");
    auto& b = c.bootstrap;
    if (s.find("splits")) b.splits = readSplits(s);
    readNumber(s, "k", b.params.k);
    readNumber(s, "n_demos", b.params.n_demos);
    readNumber(s, "gamma", b.params.scoring.gamma);
    readNumber(s, "n_keep", b.params.scoring.n_keep);
    s.read("greedy", b.params.scoring.greedy);
    std::string mean = "arithmetic";
    s.read("mean", mean);
    if (mean == "arithmetic") {
      b.params.scoring.mean = WrongMean::kArithmetic;
    } else if (mean == "geometric") {
      b.params.scoring.mean = WrongMean::kGeometric;
    } else {
      configError("bootstrap.mean must be arithmetic or geometric");
    }
    readNumber(s, "temperature", b.params.generation.temperature);
    readNumber(s, "max_tokens", b.params.generation.max_tokens);
    s.readPath("demos", b.demos, base_dir);
    readNumber(s, "mock_error_rate", b.mock_error_rate);
    s.done();
  }
  if (const json* j = top.find("evaluate")) {
    Section s(*j, "evaluate");
    s.read("split", c.evaluate.split);
    s.readPath("predictions", c.evaluate.predictions, base_dir);
    s.done();
  }
  if (const json* j = top.find("backend")) {
    Section s(*j, "backend");
    auto& b = c.backend;
    std::string kind = "mock";
    s.read("kind", kind);
    if (kind == "mock") {
      b.kind = BackendSpec::Kind::kMock;
    } else if (kind == "http") {
      b.kind = BackendSpec::Kind::kHttp;
    } else {
      configError("backend.kind must be mock or http");
    }
    s.read("endpoint_url", b.endpoint_url);
    s.read("model_name", b.model_name);
    s.read("auth_env", b.auth_env);
    readNumber(s, "max_inflight", b.max_inflight);
    std::int64_t ms = b.timeout.count();
    readNumber(s, "timeout_ms", ms);
    b.timeout = std::chrono::milliseconds(ms);
    readNumber(s, "max_retries", b.max_retries);
    ms = b.retry_backoff.count();
    readNumber(s, "retry_backoff_ms", ms);
    b.retry_backoff = std::chrono::milliseconds(ms);
    readNumber(s, "mock_seed", b.mock_seed);
    s.done();
  }
  top.done();
  c.bootstrap.params.gap_mode = c.knowledge_mode;
  return c;
}

PipelineConfig loadConfig(const fs::path& path) {
  std::ifstream in(path);
  if (!in) configError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parseConfig(ss.str(), path.parent_path());
}

void validateConfig(const PipelineConfig& c) {
  auto mustExist = [](const fs::path& p, const char* what) {
    if (!fs::exists(p)) configError(std::string(what) + " not found: " + p.string());
  };
  mustExist(c.kg_path, "kg_path");
  if (c.name_pool) mustExist(*c.name_pool, "anonymize.name_pool");
  if (c.augment.synonym_map) mustExist(*c.augment.synonym_map, "augment.synonym_map");
  if (c.bootstrap.demos) mustExist(*c.bootstrap.demos, "bootstrap.demos");
  if (c.evaluate.predictions) mustExist(*c.evaluate.predictions, "evaluate.predictions");

  if (c.split.train < 0 || c.split.val < 0 || c.split.test < 0 ||
      c.split.train + c.split.val + c.split.test <= 0) {
    configError("split fractions must be non-negative with a positive sum");
  }
  if (c.corpus.max_hops < 0 || c.corpus.max_events < 1 || c.corpus.min_facts < 1) {
    configError("corpus limits out of range");
  }
  if (c.qa.q1_min_events < 2 || c.qa.q1_max_events < c.qa.q1_min_events) {
    configError("qa.q1_min_events / q1_max_events out of range");
  }
  for (int cap : c.qa.max_per_type) {
    if (cap < 0) configError("qa.max_per_type entries must be non-negative");
  }
  if (c.augment.drop_probability < 0 || c.augment.drop_probability > 1) {
    configError("augment.drop_probability must lie in [0, 1]");
  }
  if (c.augment.offset_range < 0) configError("augment.offset_range must be non-negative");
  if (c.bootstrap.params.k < 1) configError("bootstrap.k must be positive");
  if (c.bootstrap.params.scoring.n_keep < 1) configError("bootstrap.n_keep must be positive");
  if (c.bootstrap.mock_error_rate < 0 || c.bootstrap.mock_error_rate > 1) {
    configError("bootstrap.mock_error_rate must lie in [0, 1]");
  }
  if (c.evaluate.split != "train" && c.evaluate.split != "val" && c.evaluate.split != "test") {
    configError("evaluate.split must be train, val or test");
  }
  if (c.backend.max_inflight < 1) configError("backend.max_inflight must be positive");
  if (c.backend.max_retries < 0) configError("backend.max_retries must be non-negative");
}

std::string configToJson(const PipelineConfig& c) {
  auto opt = [](const std::optional<fs::path>& p) -> ordered_json {
    return p ? ordered_json(p->generic_string()) : ordered_json(nullptr);
  };
  ordered_json j;
  j["kg_path"] = c.kg_path.generic_string();
  j["output_dir"] = c.output_dir.generic_string();
  j["seed"] = c.seed;
  j["corpus"] = {{"max_hops", c.corpus.max_hops},
                 {"max_events", c.corpus.max_events},
                 {"min_facts", c.corpus.min_facts}};
  j["split"] = {{"train", c.split.train}, {"val", c.split.val}, {"test", c.split.test}};
  j["anonymize"] = {{"enabled", c.anonymize}, {"name_pool", opt(c.name_pool)}};
  ordered_json types = ordered_json::array();
  ordered_json caps = ordered_json::object();
  for (std::size_t i = 0; i < kQuestionTypeCount; ++i) {
    auto tag = std::string(questionTypeTag(static_cast<QuestionType>(i)));
    if (c.qa.enabled[i]) types.push_back(tag);
    caps[tag] = c.qa.max_per_type[i];
  }
  j["qa"] = {{"types", types},
             {"max_per_type", caps},
             {"q1_min_events", c.qa.q1_min_events},
             {"q1_max_events", c.qa.q1_max_events}};
  j["knowledge"] = {{"mode", gapModeName(c.knowledge_mode)}};
  const auto& a = c.augment;
  j["augment"] = {{"splits", a.splits},
                  {"keep_original", a.keep_original},
                  {"drop_irrelevant", a.drop_irrelevant},
                  {"drop_probability", a.drop_probability},
                  {"synonyms", a.synonyms},
                  {"synonym_map", opt(a.synonym_map)},
                  {"rename_entities", a.rename_entities},
                  {"time_offset", a.time_offset ? ordered_json(*a.time_offset) : ordered_json()},
                  {"random_time_offset", a.random_time_offset},
                  {"offset_range", a.offset_range},
                  {"per_item", a.per_item}};
  const auto& b = c.bootstrap;
  j["bootstrap"] = {
      {"splits", b.splits},
      {"k", b.params.k},
      {"n_demos", b.params.n_demos},
      {"gamma", b.params.scoring.gamma},
      {"n_keep", b.params.scoring.n_keep},
      {"greedy", b.params.scoring.greedy},
      {"mean", b.params.scoring.mean == WrongMean::kArithmetic ? "arithmetic" : "geometric"},
      {"temperature", b.params.generation.temperature},
      {"max_tokens", b.params.generation.max_tokens},
      {"demos", opt(b.demos)},
      {"mock_error_rate", b.mock_error_rate}};
  j["evaluate"] = {{"split", c.evaluate.split}, {"predictions", opt(c.evaluate.predictions)}};
  const auto& be = c.backend;
  j["backend"] = {
      {"kind", be.kind == BackendSpec::Kind::kMock ? "mock" : "http"},
      {"endpoint_url", be.endpoint_url ? ordered_json(*be.endpoint_url) : ordered_json()},
      {"model_name", be.model_name ? ordered_json(*be.model_name) : ordered_json()},
      {"auth_env", be.auth_env},
      {"max_inflight", be.max_inflight},
      {"timeout_ms", be.timeout.count()},
      {"max_retries", be.max_retries},
      {"retry_backoff_ms", be.retry_backoff.count()},
      {"mock_seed", be.mock_seed}};
  return j.dump(2);
}

std::string configHash(const PipelineConfig& config) {
  // The output location does not change what is produced.
  PipelineConfig c = config;
  c.output_dir = ".";
  return hex64(fnv1a64(configToJson(c)));
}

namespace {

struct StageInfo {
  Stage stage;
  std::string_view name;
  std::string_view artifact;
};

constexpr StageInfo kStages[] = {
    {Stage::kIngest, "ingest", "00_ingest.jsonl"},
    {Stage::kSplit, "split", "01_split.jsonl"},
    {Stage::kAnonymize, "anonymize", "02_anonymized.jsonl"},
    {Stage::kStory, "story", "03_story.jsonl"},
    {Stage::kQa, "qa", "04_qa.jsonl"},
    {Stage::kKnowledge, "knowledge", "05_knowledge.jsonl"},
    {Stage::kAugment, "augment", "06_augmented.jsonl"},
    {Stage::kBootstrap, "bootstrap", "07_bootstrap.jsonl"},
    {Stage::kVerify, "verify", "08_verified.jsonl"},
    {Stage::kEvaluate, "evaluate", "report.json"},
};

constexpr std::string_view kReviewQueue = "review_queue.jsonl";
constexpr std::string_view kReviewed = "09_reviewed.jsonl";
constexpr std::string_view kManifest = "manifest.json";

std::uint64_t stageSeed(const PipelineConfig& c, Stage s) {
  return deriveSeed(c.seed, static_cast<std::uint64_t>(s) + 1);
}

}  // namespace

std::string_view stageName(Stage s) { return kStages[static_cast<int>(s)].name; }

std::string_view stageArtifact(Stage s) { return kStages[static_cast<int>(s)].artifact; }

std::optional<Stage> parseStage(std::string_view name) {
  for (const auto& info : kStages) {
    if (info.name == name) return info.stage;
  }
  if (name == "gen-story") return Stage::kStory;
  if (name == "gen-qa") return Stage::kQa;
  return std::nullopt;
}

std::unique_ptr<Backend> makePipelineBackend(const PipelineConfig& config) {
  if (config.backend.kind == BackendSpec::Kind::kHttp) return makeBackend(config.backend);
  auto mock = std::make_unique<MockBackend>(config.backend.mock_seed);
  mock->addResponder(makeNarratorResponder());
  mock->addResponder(makeGroundedProbeResponder());
  mock->addResponder(makeCoTResponder(config.bootstrap.mock_error_rate));
  return mock;
}

Pipeline::Pipeline(PipelineConfig config, std::ostream* log)
    : config_(std::move(config)), log_(log) {
  validateConfig(config_);
  config_.bootstrap.params.gap_mode = config_.knowledge_mode;
}

fs::path Pipeline::artifact(Stage s) const { return config_.output_dir / stageArtifact(s); }

void Pipeline::say(const std::string& line) {
  if (log_) *log_ << line << '\n';
}

Backend& Pipeline::backend() {
  if (!backend_) backend_ = makePipelineBackend(config_);
  return *backend_;
}

std::vector<DatasetSample> Pipeline::load(std::initializer_list<Stage> inputs,
                                          Stage requester) const {
  std::vector<std::string> names;
  for (Stage s : inputs) {
    fs::path p = artifact(s);
    if (fs::exists(p)) return readDataset(p);
    names.emplace_back(stageArtifact(s));
  }
  throw Error(ErrorCode::kStageInputMissing,
              std::string(stageName(requester)) + " needs " + join(names, " or ") + " in " +
                  config_.output_dir.string());
}

void Pipeline::save(Stage stage, const std::vector<DatasetSample>& samples) {
  fs::path p = artifact(stage);
  writeDataset(p, samples);
  recordManifest(stage, p);
  say(std::string(stageName(stage)) + ": " + std::to_string(samples.size()) + " samples -> " +
      p.string());
}

void Pipeline::recordManifest(Stage stage, const fs::path& produced) {
  fs::path path = config_.output_dir / kManifest;
  std::string hash = configHash(config_);
  ordered_json m;
  if (fs::exists(path)) {
    try {
      m = ordered_json::parse(readFile(path));
    } catch (const std::exception&) {
      m = ordered_json();
    }
    if (!m.is_object() || m.value("config_hash", "") != hash) m = ordered_json();
  }
  if (m.empty()) {
    m["config_hash"] = hash;
    m["seed"] = config_.seed;
    m["stages"] = ordered_json::object();
  }
  ordered_json entry;
  entry["artifact"] = produced.filename().generic_string();
  entry["seed"] = stageSeed(config_, stage);
  entry["content_hash"] = hex64(fnv1a64(readFile(produced)));
  m["stages"][std::string(stageName(stage))] = entry;
  writeFileAtomic(path, m.dump(2) + "\n");
}

void Pipeline::run(std::vector<Stage> stages) {
  std::sort(stages.begin(), stages.end());
  stages.erase(std::unique(stages.begin(), stages.end()), stages.end());
  for (Stage s : stages) runStage(s);
}

void Pipeline::runStage(Stage stage) {
  switch (stage) {
    case Stage::kIngest: return ingest();
    case Stage::kSplit: return split();
    case Stage::kAnonymize: return anonymize();
    case Stage::kStory: return story();
    case Stage::kQa: return qa();
    case Stage::kKnowledge: return knowledge();
    case Stage::kAugment: return augment();
    case Stage::kBootstrap: return bootstrap();
    case Stage::kVerify: return verify();
    case Stage::kEvaluate: return evaluate();
  }
}

void Pipeline::ingest() {
  std::ifstream in(config_.kg_path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + config_.kg_path.string());
  KnowledgeGraph kg = loadKG(in);
  std::vector<TemporalGraph> graphs = extractCorpus(kg, config_.corpus);
  std::vector<DatasetSample> out;
  out.reserve(graphs.size());
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "g%03zu", i);
    DatasetSample s;
    s.id = id;
    s.graph = std::move(graphs[i]);
    s.provenance.seed = config_.seed;
    out.push_back(std::move(s));
  }
  save(Stage::kIngest, out);
}

void Pipeline::split() {
  auto samples = load({Stage::kIngest}, Stage::kSplit);
  std::vector<TemporalGraph> graphs;
  graphs.reserve(samples.size());
  for (const auto& s : samples) graphs.push_back(s.graph);
  SplitSpec spec = config_.split;
  spec.seed = stageSeed(config_, Stage::kSplit);
  SplitResult r = splitDataset(graphs, spec);
  std::vector<std::string> label(samples.size());
  for (Split sp : {Split::kTrain, Split::kVal, Split::kTest}) {
    for (std::size_t i : r.of(sp)) label[i] = std::string(splitName(sp));
  }
  std::vector<DatasetSample> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (label[i].empty()) continue;
    samples[i].provenance.split = label[i];
    out.push_back(std::move(samples[i]));
  }
  if (!r.dropped.empty()) {
    say("split: dropped " + std::to_string(r.dropped.size()) + " graphs spanning two splits");
  }
  save(Stage::kSplit, out);
}

void Pipeline::anonymize() {
  auto samples = load({Stage::kSplit}, Stage::kAnonymize);
  if (config_.anonymize && !samples.empty()) {
    std::map<std::string, std::string> types;
    for (const auto& s : samples) {
      for (const auto& [name, type] : inferEntityTypes(s.graph)) {
        auto [it, fresh] = types.emplace(name, type);
        if (!fresh && it->second == "entity") it->second = type;
      }
    }
    std::vector<std::pair<std::string, std::string>> entities(types.begin(), types.end());
    NamePool pool;
    for (auto& [type, names] : loadPool(config_.name_pool)) {
      for (const auto& n : names) pool[type].push_back(displayName(n));
    }
    EntityMap map = buildEntityMap(entities, pool, stageSeed(config_, Stage::kAnonymize));
    for (auto& s : samples) {
      s.graph = anonymizeGraph(s.graph, map);
      s.provenance.transforms.push_back("anonymize");
    }
  }
  save(Stage::kAnonymize, samples);
}

void Pipeline::story() {
  auto samples = load({Stage::kAnonymize}, Stage::kStory);
  Backend& b = backend();
  std::uint64_t seed = stageSeed(config_, Stage::kStory);
  auto stories = parallelMap(samples, config_.backend.max_inflight,
                             [&](const DatasetSample& s) {
                               GenerateParams params;
                               params.seed = deriveSeed(seed, fnv1a64(s.id));
                               return generateStory(b, s.graph, params);
                             });
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i].story = std::move(stories[i]);
  save(Stage::kStory, samples);
}

void Pipeline::qa() {
  auto samples = load({Stage::kStory, Stage::kAnonymize}, Stage::kQa);
  std::uint64_t seed = stageSeed(config_, Stage::kQa);
  for (auto& s : samples) {
    QAConfig qc = config_.qa;
    qc.seed = deriveSeed(seed, fnv1a64(s.id));
    s.qas = generateQAs(canonicalGraph(s), qc);
  }
  save(Stage::kQa, samples);
}

void Pipeline::knowledge() {
  auto samples = load({Stage::kQa}, Stage::kKnowledge);
  for (auto& s : samples) {
    TemporalGraph g = canonicalGraph(s);
    for (auto& item : s.qas) {
      try {
        item.knowledge = deriveKnowledge(g, item, config_.knowledge_mode);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kGranularityMismatch) throw;
        item.knowledge.reset();
      }
    }
  }
  save(Stage::kKnowledge, samples);
}

void Pipeline::augment() {
  auto samples = load({Stage::kKnowledge}, Stage::kAugment);
  const auto& a = config_.augment;
  AugmentConfig ac;
  ac.drop_irrelevant = a.drop_irrelevant;
  ac.drop_probability = a.drop_probability;
  if (a.synonyms) {
    if (a.synonym_map) {
      std::ifstream in(*a.synonym_map);
      if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + a.synonym_map->string());
      ac.synonym_map = loadSynonymMap(in);
    } else {
      ac.synonym_map = bundledSynonymMap();
    }
  }
  if (a.rename_entities) {
    ac.entity_pool = loadPool(config_.name_pool);
    ac.excluded_names = allEntities(samples);
  }
  ac.time_offset = a.time_offset;
  ac.random_time_offset = a.random_time_offset;
  ac.offset_range = a.offset_range;
  ac.per_item = a.per_item;
  ac.seed = stageSeed(config_, Stage::kAugment);

  std::vector<DatasetSample> chosen;
  for (const auto& s : samples) {
    if (inSplits(s, a.splits)) chosen.push_back(s);
  }
  std::vector<DatasetSample> out;
  if (a.keep_original || isNoop(ac)) out = samples;
  if (!isNoop(ac)) {
    for (auto& s : augmentBatch(chosen, ac)) out.push_back(std::move(s));
  }
  save(Stage::kAugment, out);
}

void Pipeline::bootstrap() {
  auto samples = load({Stage::kAugment, Stage::kKnowledge}, Stage::kBootstrap);
  std::vector<CoTDemo> demos;
  if (config_.bootstrap.demos) {
    std::ifstream in(*config_.bootstrap.demos);
    if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + config_.bootstrap.demos->string());
    demos = loadDemos(in);
  } else {
    demos = bundledDemos();
  }
  Backend& b = backend();
  BootstrapConfig bc = config_.bootstrap.params;
  std::uint64_t seed = stageSeed(config_, Stage::kBootstrap);
  bc.generation.seed = seed;
  bc.scoring.seed = deriveSeed(seed, 1);

  auto processed = parallelMap(
      samples, config_.backend.max_inflight, [&](const DatasetSample& s) {
        if (!inSplits(s, config_.bootstrap.splits)) return s;
        DatasetSample r = s;
        TemporalGraph g = canonicalGraph(s);
        BootstrapConfig local = bc;
        local.generation.seed = deriveSeed(bc.generation.seed, fnv1a64(s.id));
        for (auto& item : r.qas) item = bootstrapItem(b, g, item, demos, local);
        return r;
      });
  int with_cot = 0;
  int total = 0;
  for (const auto& s : processed) {
    if (!inSplits(s, config_.bootstrap.splits)) continue;
    for (const auto& item : s.qas) {
      ++total;
      if (item.cot) ++with_cot;
    }
  }
  say("bootstrap: " + std::to_string(with_cot) + "/" + std::to_string(total) +
      " items kept a chain of thought");
  save(Stage::kBootstrap, processed);
}

void Pipeline::verify() {
  auto samples = load({Stage::kBootstrap, Stage::kAugment, Stage::kKnowledge, Stage::kQa,
                       Stage::kStory},
                      Stage::kVerify);
  Backend& b = backend();
  std::vector<AlignmentFlag> queue;
  int probed = 0;
  for (auto& s : samples) {
    // Stories describe the graph before relation synonyms were applied.
    if (!s.story || !s.provenance.relation_aliases.empty()) continue;
    ++probed;
    std::vector<AlignmentFlag> kept;
    for (const auto& f : s.flags) {
      if (f.status != FlagStatus::kPending) kept.push_back(f);
    }
    for (auto& f : probeAlignment(b, *s.story, s.graph, s.id, config_.backend.max_inflight)) {
      bool decided = false;
      for (const auto& k : kept) decided = decided || k.flag_id == f.flag_id;
      if (!decided) kept.push_back(std::move(f));
    }
    s.flags = std::move(kept);
    for (const auto& f : s.flags) {
      if (f.status == FlagStatus::kPending) queue.push_back(f);
    }
  }
  emitReviewQueue(queue, config_.output_dir / kReviewQueue);
  say("verify: probed " + std::to_string(probed) + " stories, " + std::to_string(queue.size()) +
      " flags queued");
  save(Stage::kVerify, samples);
}

void Pipeline::applyReviewFile(const fs::path& decisions) {
  fs::path in = artifact(Stage::kVerify);
  if (!fs::exists(in)) {
    throw Error(ErrorCode::kStageInputMissing, "review-apply needs " + in.string());
  }
  auto reviewed = applyReview(readDataset(in), readReviewDecisions(decisions));
  fs::path out = config_.output_dir / kReviewed;
  writeDataset(out, reviewed);
  say("review-apply: " + std::to_string(reviewed.size()) + " samples -> " + out.string());
}

void Pipeline::evaluate() {
  std::vector<DatasetSample> samples;
  fs::path reviewed = config_.output_dir / kReviewed;
  if (fs::exists(reviewed)) {
    samples = readDataset(reviewed);
  } else {
    samples = load({Stage::kVerify, Stage::kBootstrap, Stage::kAugment, Stage::kKnowledge,
                    Stage::kQa},
                   Stage::kEvaluate);
  }

  std::map<std::pair<std::string, std::string>, std::string> predictions;
  if (config_.evaluate.predictions) {
    std::ifstream in(*config_.evaluate.predictions);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (trim(line).empty()) continue;
      try {
        json j = json::parse(line);
        predictions[{j.at("sample_id").get<std::string>(), j.at("qa_id").get<std::string>()}] =
            j.at("prediction").get<std::string>();
      } catch (const json::exception& e) {
        throw Error(ErrorCode::kSchemaViolation, config_.evaluate.predictions->string() +
                                                     " line " + std::to_string(n) + ": " +
                                                     e.what());
      }
    }
  }

  struct Job {
    const DatasetSample* sample;
    const QAItem* item;
  };
  std::vector<Job> jobs;
  for (const auto& s : samples) {
    if (s.provenance.split != config_.evaluate.split) continue;
    for (const auto& item : s.qas) jobs.push_back({&s, &item});
  }
  Backend& b = backend();
  auto scores = parallelMap(jobs, config_.backend.max_inflight, [&](const Job& job) {
    AugmentedQuery q = makeQuery(canonicalGraph(*job.sample), *job.item, config_.knowledge_mode);
    PerplexityChoice choice = perplexityChoice(b, renderQueryPrompt(q), job.item->candidates,
                                               job.item->gold_answers);
    std::string pred = choice.prediction;
    auto it = predictions.find({job.sample->id, job.item->id});
    if (it != predictions.end()) pred = it->second;
    ItemScore score;
    score.qtype = job.item->qtype;
    score.em = exactMatch(pred, job.item->gold_answers);
    score.f1 = tokenF1(pred, job.item->gold_answers);
    score.acc = choice.correct;
    return score;
  });
  report_ = aggregateReport(scores);
  fs::path out = artifact(Stage::kEvaluate);
  writeFileAtomic(out, reportToJson(*report_) + "\n");
  recordManifest(Stage::kEvaluate, out);
  say(reportTableRow(*report_, config_.evaluate.split));
}

}  // namespace tgqa
