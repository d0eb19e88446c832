#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tgqa/qa.hpp"
#include "tgqa/temporal_graph.hpp"

namespace tgqa {

enum class FlagStatus { kPending, kAccepted, kRejected, kFixed };
// T1 wrong information, T2 logical inconsistency, T3 external knowledge
// error, T4 temporal graph error.
enum class FlagLabel { kT1, kT2, kT3, kT4 };

std::string_view flagStatusName(FlagStatus s);
std::optional<FlagStatus> parseFlagStatus(std::string_view s);
std::string_view flagLabelName(FlagLabel l);
std::optional<FlagLabel> parseFlagLabel(std::string_view s);

// A fact whose time the story does not support.
struct AlignmentFlag {
  std::string flag_id;
  std::string sample_id;
  EventKey event;
  Endpoint endpoint = Endpoint::kStart;
  TimePoint expected;
  std::string model_answer;
  FlagStatus status = FlagStatus::kPending;
  std::optional<FlagLabel> label;

  friend bool operator==(const AlignmentFlag&, const AlignmentFlag&) = default;
};

// A synonym substitution recorded so the original graph can be restored.
struct RelationAlias {
  std::string original;
  bool swapped = false;  // subject and object were exchanged

  friend bool operator==(const RelationAlias&, const RelationAlias&) = default;
};

struct Provenance {
  std::uint64_t seed = 0;
  std::vector<std::string> transforms;
  std::string split;
  std::map<std::string, RelationAlias> relation_aliases;  // keyed by new relation

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct DatasetSample {
  std::string id;
  TemporalGraph graph;
  std::optional<std::string> story;
  std::vector<QAItem> qas;
  std::vector<AlignmentFlag> flags;
  Provenance provenance;

  friend bool operator==(const DatasetSample&, const DatasetSample&) = default;
};

// The graph the QA items were written against: relation aliases undone.
TemporalGraph canonicalGraph(const DatasetSample& sample);

// Throws OracleMismatch naming the first item whose gold disagrees with
// oracleAnswer on the canonical graph (or cannot be answered).
void verifySample(const DatasetSample& sample);

nlohmann::ordered_json factToJson(const TemporalFact& fact);
TemporalFact factFromJson(const nlohmann::json& j);
nlohmann::ordered_json qaToJson(const QAItem& item);
QAItem qaFromJson(const nlohmann::json& j);
nlohmann::ordered_json flagToJson(const AlignmentFlag& flag);
AlignmentFlag flagFromJson(const nlohmann::json& j);
nlohmann::ordered_json sampleToJson(const DatasetSample& sample);
DatasetSample sampleFromJson(const nlohmann::json& j);

// One sample per line. Reading throws SchemaViolation with the line number;
// writing verifies every sample first, rejects duplicate ids, and replaces
// the file atomically.
std::vector<DatasetSample> readDataset(const std::filesystem::path& path);
void writeDataset(const std::filesystem::path& path, const std::vector<DatasetSample>& samples);

// Writes via a sibling temp file and rename. Throws IoFailure.
void writeFileAtomic(const std::filesystem::path& path, const std::string& content);
std::string readFile(const std::filesystem::path& path);

}  // namespace tgqa
