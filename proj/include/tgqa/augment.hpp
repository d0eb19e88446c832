#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tgqa/dataset.hpp"
#include "tgqa/knowledge_graph.hpp"

namespace tgqa {

struct SynonymEntry {
  std::string replacement;
  // Argument-reordering synonym. A replacement containing the object slot
  // marker places the object there; otherwise subject and object swap.
  bool swap = false;

  friend bool operator==(const SynonymEntry&, const SynonymEntry&) = default;
};

struct RelationSynonymMap {
  std::map<std::string, SynonymEntry> mapping;
};

// original<TAB>replacement[<TAB>swap]; '#' lines are comments.
RelationSynonymMap loadSynonymMap(std::istream& in);
const RelationSynonymMap& bundledSynonymMap();

// original<TAB>replacement entity names.
EntityMap loadEntityMap(std::istream& in);

struct AugmentConfig {
  bool drop_irrelevant = false;
  double drop_probability = 0.5;
  std::optional<RelationSynonymMap> synonym_map;
  // Either a fixed map or a pool to draw a fresh per-sample map from.
  std::optional<EntityMap> entity_map;
  std::optional<NamePool> entity_pool;
  std::set<std::string> excluded_names;  // never drawn from the pool
  // Fixed offset, or a per-sample draw from [-offset_range, offset_range].
  std::optional<int> time_offset;
  bool random_time_offset = false;
  int offset_range = 15;
  // Emit one sample per QA item so irrelevance is judged per question.
  bool per_item = false;
  std::uint64_t seed = 0;
};

// Events whose reference (or the reference of their mirror with subject and
// object exchanged) appears in none of the item's question, CoT and gold
// answers.
std::set<EventKey> findIrrelevantEvents(const DatasetSample& sample, const QAItem& item);

// Each event irrelevant to every item is dropped with probability p.
DatasetSample dropIrrelevantEvents(const DatasetSample& sample, double p, std::uint64_t seed);

// Rewrites graph relations only and records the aliases in provenance.
// Entries whose replacement already names another relation in the graph
// are skipped.
DatasetSample applyRelationSynonyms(const DatasetSample& sample, const RelationSynonymMap& map);

// Renames entities and moves every year by `time_offset`, in the graph,
// questions, slots, answers, candidates, CoTs and knowledge. Throws
// UnmappedEntity or NegativeYear.
DatasetSample remapEntitiesAndTimes(const DatasetSample& sample, const EntityMap& entity_map,
                                    int time_offset);

// Applies drop, synonyms, entity map and time offset in that order. Output
// ids get a "+aug" suffix unless the config is all-off, in which case the
// input is returned unchanged.
std::vector<DatasetSample> augmentBatch(const std::vector<DatasetSample>& dataset,
                                        const AugmentConfig& config);

bool isNoop(const AugmentConfig& config);

}  // namespace tgqa
