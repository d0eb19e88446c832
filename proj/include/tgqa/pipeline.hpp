#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tgqa/augment.hpp"
#include "tgqa/backend.hpp"
#include "tgqa/bootstrap.hpp"
#include "tgqa/dataset.hpp"
#include "tgqa/knowledge_graph.hpp"
#include "tgqa/metrics.hpp"
#include "tgqa/qa.hpp"

namespace tgqa {

struct AugmentStageConfig {
  std::vector<std::string> splits{"train"};
  bool keep_original = true;
  bool drop_irrelevant = true;
  double drop_probability = 0.5;
  bool synonyms = true;
  std::optional<std::filesystem::path> synonym_map;  // bundled map when unset
  bool rename_entities = true;
  std::optional<int> time_offset;
  bool random_time_offset = true;
  int offset_range = 15;
  bool per_item = false;
};

struct BootstrapStageConfig {
  std::vector<std::string> splits{"train"};
  BootstrapConfig params;
  std::optional<std::filesystem::path> demos;  // bundled demos when unset
  double mock_error_rate = 0.3;                // mock backend only
};

struct EvaluateStageConfig {
  std::string split = "test";
  std::optional<std::filesystem::path> predictions;
};

struct PipelineConfig {
  std::filesystem::path kg_path;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
  CorpusOptions corpus;
  SplitSpec split;
  bool anonymize = true;
  std::optional<std::filesystem::path> name_pool;  // bundled pool when unset
  QAConfig qa;
  GapMode knowledge_mode = GapMode::kReferenced;
  AugmentStageConfig augment;
  BootstrapStageConfig bootstrap;
  EvaluateStageConfig evaluate;
  BackendSpec backend;
};

// JSON config. Relative paths resolve against `base_dir`. Unknown keys,
// wrong types and missing files throw ConfigInvalid.
PipelineConfig parseConfig(const std::string& json_text, const std::filesystem::path& base_dir);
PipelineConfig loadConfig(const std::filesystem::path& path);
void validateConfig(const PipelineConfig& config);
std::string configToJson(const PipelineConfig& config);
std::string configHash(const PipelineConfig& config);

enum class Stage {
  kIngest,
  kSplit,
  kAnonymize,
  kStory,
  kQa,
  kKnowledge,
  kAugment,
  kBootstrap,
  kVerify,
  kEvaluate,
};

std::string_view stageName(Stage s);
std::optional<Stage> parseStage(std::string_view name);
// Artifact file written by the stage (inside output_dir).
std::string_view stageArtifact(Stage s);

// Backend for backend stages; the mock gets the story, probe and CoT
// responders.
std::unique_ptr<Backend> makePipelineBackend(const PipelineConfig& config);

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config, std::ostream* log = nullptr);

  // Runs the stages in dependency order. Throws StageInputMissing when a
  // stage's input artifact is absent.
  void run(std::vector<Stage> stages);
  void runStage(Stage stage);

  // Applies the reviewed queue to the verified dataset (09_reviewed.jsonl).
  void applyReviewFile(const std::filesystem::path& decisions);

  const PipelineConfig& config() const { return config_; }
  std::filesystem::path artifact(Stage s) const;
  std::optional<EvalReport> lastReport() const { return report_; }

 private:
  std::vector<DatasetSample> load(std::initializer_list<Stage> inputs, Stage requester) const;
  void save(Stage stage, const std::vector<DatasetSample>& samples);
  void recordManifest(Stage stage, const std::filesystem::path& artifact);
  Backend& backend();
  void say(const std::string& line);

  void ingest();
  void split();
  void anonymize();
  void story();
  void qa();
  void knowledge();
  void augment();
  void bootstrap();
  void verify();
  void evaluate();

  PipelineConfig config_;
  std::ostream* log_;
  std::unique_ptr<Backend> backend_;
  std::optional<EvalReport> report_;
};

}  // namespace tgqa
