#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tgqa/temporal_graph.hpp"

namespace tgqa {

struct Quintuple {
  std::string subject;
  std::string relation;
  std::string object;
  std::optional<TimePoint> start;
  std::optional<TimePoint> end;

  friend bool operator==(const Quintuple&, const Quintuple&) = default;
};

// YAGO11k-style temporal KG. Exact duplicate rows are collapsed on
// construction; adjacency is undirected.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;
  explicit KnowledgeGraph(std::vector<Quintuple> quintuples);

  const std::vector<Quintuple>& quintuples() const noexcept { return quintuples_; }
  const std::map<std::string, std::set<std::string>>& adjacency() const noexcept {
    return adjacency_;
  }
  bool hasEntity(const std::string& name) const { return adjacency_.contains(name); }
  std::size_t degree(const std::string& name) const;

 private:
  std::vector<Quintuple> quintuples_;
  std::map<std::string, std::set<std::string>> adjacency_;
};

enum class KgFormat { kTsv };

// subject<TAB>relation<TAB>object<TAB>start<TAB>end. Times are "YYYY",
// "YYYY-MM-DD" with '#' wildcards, or empty / "####" for unknown. Throws
// MalformedRow or UnparsableTime with "line L, column C" in the message.
KnowledgeGraph loadKG(std::istream& in, KgFormat format = KgFormat::kTsv);
std::optional<TimePoint> parseKgTime(std::string_view field, bool& ok);

struct RelationInfo {
  std::string kg_relation;
  std::string surface;
  std::string subject_type;
  std::string object_type;
  bool instantaneous = false;
};

// Bundled relation table (data/relations.tsv).
const std::vector<RelationInfo>& relationTable();
const RelationInfo* findRelation(std::string_view kg_relation_or_surface);
// "isMarriedTo" -> "was married to"; unknown camelCase is split into words.
std::string verbalizeRelation(std::string_view kg_relation);
// "Al_Gore" -> "Al Gore".
std::string displayName(std::string_view kg_name);

// Events among entities within max_hops of the seed, keeping the max_events
// earliest. Instantaneous relations (born, died, prizes) produce a start fact
// only. Throws UnknownEntity.
TemporalGraph extractSubgraph(const KnowledgeGraph& kg, const std::string& seed_entity,
                              int max_hops, int max_events);

struct CorpusOptions {
  int max_hops = 3;
  int max_events = 12;
  int min_facts = 4;
};

// Seeds are visited by descending degree (ties by name); a seed already
// covered by an earlier subgraph is skipped. Subgraphs with fewer than
// min_facts facts are discarded.
std::vector<TemporalGraph> extractCorpus(const KnowledgeGraph& kg, const CorpusOptions& options);

struct SplitSpec {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
  std::uint64_t seed = 0;
};

enum class Split { kTrain, kVal, kTest };
std::string_view splitName(Split s);

struct SplitResult {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
  // Graphs whose events already sit in two different splits.
  std::vector<std::size_t> dropped;

  const std::vector<std::size_t>& of(Split s) const;
};

// Event-disjoint split. Graphs are visited in seeded order; a graph sharing
// an event with an assigned graph is forced into that split, one sharing
// events with two splits is dropped, and any other graph goes to the split
// furthest below its target size. Throws UnsatisfiableSplit when sharing
// forces every graph into one split although several splits are requested.
SplitResult splitDataset(const std::vector<TemporalGraph>& graphs, const SplitSpec& spec);

struct EntityMap {
  std::map<std::string, std::string> mapping;
  std::map<std::string, std::string> entity_type;

  EntityMap inverse() const;
};

using NamePool = std::map<std::string, std::vector<std::string>>;

// type<TAB>name rows; '#' starts a comment line.
NamePool loadNamePool(std::istream& in);
NamePool bundledNamePool();

// Injective, type-respecting, deterministic under seed. Pool names equal to
// any source entity are never used. Throws PoolExhausted.
EntityMap buildEntityMap(const std::vector<std::pair<std::string, std::string>>& entities,
                         const NamePool& pool, std::uint64_t seed);

// Throws UnmappedEntity.
TemporalGraph anonymizeGraph(const TemporalGraph& graph, const EntityMap& map);

// Role-based typing from the relation table ("person", "place",
// "organization", "prize"; "entity" when unknown).
std::map<std::string, std::string> inferEntityTypes(const KnowledgeGraph& kg);
std::map<std::string, std::string> inferEntityTypes(const TemporalGraph& graph);

}  // namespace tgqa
