// tgqa: command-line driver for the dataset pipeline.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tgqa/bootstrap.hpp"
#include "tgqa/dataset.hpp"
#include "tgqa/error.hpp"
#include "tgqa/pipeline.hpp"
#include "tgqa/prompts.hpp"
#include "tgqa/text.hpp"

namespace {

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> backend;
  std::optional<std::string> out;
};

tgqa::PipelineConfig resolveConfig(const GlobalOptions& g) {
  if (g.config.empty()) {
    throw tgqa::Error(tgqa::ErrorCode::kConfigInvalid, "--config is required for this command");
  }
  tgqa::PipelineConfig c = tgqa::loadConfig(g.config);
  if (g.seed) c.seed = *g.seed;
  if (g.out) c.output_dir = *g.out;
  if (g.backend) {
    c.backend.kind =
        *g.backend == "http" ? tgqa::BackendSpec::Kind::kHttp : tgqa::BackendSpec::Kind::kMock;
  }
  return c;
}

int renderPrompts(const std::string& id, const std::vector<std::string>& slot_args,
                  const std::string& dataset, const std::string& sample_id,
                  const std::string& item_id) {
  const auto& registry = tgqa::PromptRegistry::bundled();
  if (!dataset.empty()) {
    for (const auto& s : tgqa::readDataset(dataset)) {
      if (s.id != sample_id) continue;
      for (const auto& item : s.qas) {
        if (item.id != item_id) continue;
        auto query = tgqa::makeQuery(tgqa::canonicalGraph(s), item);
        auto demos = tgqa::selectDemos(tgqa::bundledDemos(), item.qtype, 1);
        std::cout << tgqa::renderCoTPrompt(demos, query) << '\n';
        return 0;
      }
    }
    throw tgqa::Error(tgqa::ErrorCode::kInvalidArgument,
                      "no item " + item_id + " in sample " + sample_id);
  }
  if (id.empty()) {
    for (const auto& name : registry.ids()) {
      const auto& t = registry.get(name);
      std::vector<std::string> slots(t.required_slots.begin(), t.required_slots.end());
      std::cout << name << ": " << tgqa::join(slots, ", ") << '\n';
    }
    return 0;
  }
  tgqa::SlotMap slots;
  for (const auto& kv : slot_args) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw tgqa::Error(tgqa::ErrorCode::kInvalidArgument, "--slot expects key=value: " + kv);
    }
    slots[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  std::cout << registry.render(id, slots) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal graph QA dataset pipeline"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config, "Pipeline config (JSON)");
  app.add_option("--seed", g.seed, "Override the config seed");
  app.add_option("--backend", g.backend, "Model backend")
      ->check(CLI::IsMember({"mock", "http"}));
  app.add_option("--out", g.out, "Override the output directory");
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress progress lines");

  struct StageCommand {
    const char* name;
    tgqa::Stage stage;
    const char* help;
  };
  const StageCommand stage_commands[] = {
      {"ingest", tgqa::Stage::kIngest, "Extract temporal subgraphs from the KG"},
      {"split", tgqa::Stage::kSplit, "Event-disjoint train/val/test split"},
      {"anonymize", tgqa::Stage::kAnonymize, "Replace entity names from the name pool"},
      {"gen-story", tgqa::Stage::kStory, "Generate a story per graph"},
      {"gen-qa", tgqa::Stage::kQa, "Generate template questions"},
      {"knowledge", tgqa::Stage::kKnowledge, "Attach time chains and gaps"},
      {"augment", tgqa::Stage::kAugment, "Augment the training split"},
      {"bootstrap", tgqa::Stage::kBootstrap, "Bootstrap chains of thought"},
      {"verify", tgqa::Stage::kVerify, "Probe stories and queue flags for review"},
  };
  std::optional<tgqa::Stage> chosen;
  for (const auto& sc : stage_commands) {
    auto* sub = app.add_subcommand(sc.name, sc.help);
    sub->callback([&chosen, stage = sc.stage] { chosen = stage; });
  }

  std::string stages_arg;
  auto* run = app.add_subcommand("run", "Run several stages in dependency order");
  run->add_option("--stages", stages_arg, "Comma-separated stage names")->required();

  std::string decisions;
  auto* review = app.add_subcommand("review-apply", "Apply reviewed flag decisions");
  review->add_option("--decisions", decisions, "Reviewed queue (JSONL)")
      ->required()
      ->check(CLI::ExistingFile);

  std::optional<std::string> predictions;
  std::optional<std::string> eval_split;
  auto* evaluate = app.add_subcommand("evaluate", "Score a split and write report.json");
  evaluate->add_option("--predictions", predictions, "JSONL of {sample_id, qa_id, prediction}");
  evaluate->add_option("--split", eval_split, "Split to score")
      ->check(CLI::IsMember({"train", "val", "test"}));

  std::string prompt_id, dataset, sample_id, item_id;
  std::vector<std::string> slot_args;
  auto* prompts = app.add_subcommand("render-prompts", "List or render prompt templates");
  prompts->add_option("--id", prompt_id, "Template id");
  prompts->add_option("--slot", slot_args, "key=value slot (repeatable)");
  prompts->add_option("--dataset", dataset, "Render the CoT prompt for an item in this file");
  prompts->add_option("--sample", sample_id, "Sample id (with --dataset)");
  prompts->add_option("--item", item_id, "QA item id (with --dataset)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (prompts->parsed()) return renderPrompts(prompt_id, slot_args, dataset, sample_id, item_id);

    tgqa::PipelineConfig config = resolveConfig(g);
    if (predictions) config.evaluate.predictions = *predictions;
    if (eval_split) config.evaluate.split = *eval_split;
    tgqa::Pipeline pipeline(config, quiet ? nullptr : &std::cerr);

    if (chosen) {
      pipeline.runStage(*chosen);
    } else if (run->parsed()) {
      std::vector<tgqa::Stage> stages;
      for (auto name : tgqa::split(stages_arg, ',')) {
        auto s = tgqa::parseStage(tgqa::trim(name));
        if (!s) {
          throw tgqa::Error(tgqa::ErrorCode::kConfigInvalid,
                            "unknown stage '" + std::string(tgqa::trim(name)) + "'");
        }
        stages.push_back(*s);
      }
      pipeline.run(stages);
    } else if (review->parsed()) {
      pipeline.applyReviewFile(decisions);
    } else if (evaluate->parsed()) {
      pipeline.runStage(tgqa::Stage::kEvaluate);
      std::cout << tgqa::reportTableRow(*pipeline.lastReport(), config.evaluate.split) << '\n';
    }
    return 0;
  } catch (const tgqa::Error& e) {
    std::cerr << "tgqa: " << e.what() << '\n';
    return tgqa::exitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "tgqa: " << e.what() << '\n';
    return 4;
  }
}
