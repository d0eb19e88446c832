#include "tgqa/knowledge_graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <istream>
#include <sstream>

#include "tgqa/error.hpp"
#include "tgqa/resources.hpp"
#include "tgqa/rng.hpp"
#include "tgqa/text.hpp"

namespace tgqa {
namespace {

std::optional<int> parseDigits(std::string_view s) {
  if (s.empty()) return std::nullopt;
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool allHashes(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == '#'; });
}

}  // namespace

KnowledgeGraph::KnowledgeGraph(std::vector<Quintuple> quintuples) {
  for (auto& q : quintuples) {
    if (std::find(quintuples_.begin(), quintuples_.end(), q) != quintuples_.end()) continue;
    adjacency_[q.subject].insert(q.object);
    adjacency_[q.object].insert(q.subject);
    if (q.subject == q.object) adjacency_[q.subject].erase(q.subject);
    quintuples_.push_back(std::move(q));
  }
}

std::size_t KnowledgeGraph::degree(const std::string& name) const {
  std::size_t d = 0;
  for (const auto& q : quintuples_) {
    if (q.subject == name) ++d;
    if (q.object == name) ++d;
  }
  return d;
}

std::optional<TimePoint> parseKgTime(std::string_view field, bool& ok) {
  ok = true;
  field = trim(field);
  if (field.empty() || allHashes(field)) return std::nullopt;
  const auto parts = split(field, '-');
  if (parts.size() != 1 && parts.size() != 3) {
    ok = false;
    return std::nullopt;
  }
  if (allHashes(parts[0]) || parts[0].find('#') != std::string_view::npos) {
    // Unknown year: the whole time is unknown.
    if (parts[0].find_first_not_of("0123456789#") != std::string_view::npos) ok = false;
    return std::nullopt;
  }
  auto year = parseDigits(parts[0]);
  if (!year || *year < 1) {
    ok = false;
    return std::nullopt;
  }
  if (parts.size() == 1) return TimePoint::ofYear(*year);
  if (allHashes(parts[1])) return TimePoint::ofYear(*year);
  auto month = parseDigits(parts[1]);
  if (!month || *month < 1 || *month > 12) {
    ok = false;
    return std::nullopt;
  }
  if (allHashes(parts[2])) return TimePoint::ofMonth(*year, *month);
  auto day = parseDigits(parts[2]);
  if (!day || *day < 1 || *day > daysInMonth(*year, *month)) {
    ok = false;
    return std::nullopt;
  }
  return TimePoint::ofDay(*year, *month, *day);
}

KnowledgeGraph loadKG(std::istream& in, KgFormat format) {
  if (format != KgFormat::kTsv) throw Error(ErrorCode::kInvalidArgument, "unsupported KG format");
  std::vector<Quintuple> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 5) {
      throw Error(ErrorCode::kMalformedRow, "line " + std::to_string(line_no) + ", column 1: expected 5 tab-separated fields, found " +
                                                std::to_string(fields.size()));
    }
    for (int col = 0; col < 3; ++col) {
      if (trim(fields[col]).empty()) {
        throw Error(ErrorCode::kMalformedRow, "line " + std::to_string(line_no) + ", column " +
                                                  std::to_string(col + 1) + ": empty field");
      }
    }
    Quintuple q{std::string(trim(fields[0])), std::string(trim(fields[1])),
                std::string(trim(fields[2])), std::nullopt, std::nullopt};
    for (int col : {3, 4}) {
      bool ok = true;
      auto t = parseKgTime(fields[col], ok);
      if (!ok) {
        throw Error(ErrorCode::kUnparsableTime, "line " + std::to_string(line_no) + ", column " +
                                                    std::to_string(col + 1) + ": '" +
                                                    std::string(fields[col]) + "'");
      }
      (col == 3 ? q.start : q.end) = t;
    }
    if (q.start && q.end && *q.end < *q.start) {
      throw Error(ErrorCode::kInvertedInterval,
                  "line " + std::to_string(line_no) + ", column 5: end precedes start");
    }
    rows.push_back(std::move(q));
  }
  return KnowledgeGraph(std::move(rows));
}

const std::vector<RelationInfo>& relationTable() {
  static const std::vector<RelationInfo> table = [] {
    std::vector<RelationInfo> out;
    for (auto line : splitLines(resource("relations.tsv"))) {
      if (line.empty() || line.front() == '#') continue;
      const auto c = split(line, '\t');
      if (c.size() < 5) continue;
      out.push_back(RelationInfo{std::string(c[0]), std::string(c[1]), std::string(c[2]),
                                 std::string(c[3]), c[4] == "instant"});
    }
    return out;
  }();
  return table;
}

const RelationInfo* findRelation(std::string_view name) {
  for (const auto& r : relationTable()) {
    if (r.kg_relation == name || r.surface == name) return &r;
  }
  return nullptr;
}

std::string verbalizeRelation(std::string_view kg_relation) {
  if (const auto* r = findRelation(kg_relation)) return r->surface;
  std::string out;
  for (char c : kg_relation) {
    if (c >= 'A' && c <= 'Z') {
      if (!out.empty()) out += ' ';
      out += static_cast<char>(c - 'A' + 'a');
    } else if (c == '_') {
      out += ' ';
    } else {
      out += c;
    }
  }
  return out;
}

std::string displayName(std::string_view kg_name) { return replaceAll(kg_name, "_", " "); }

namespace {

struct Extraction {
  TemporalGraph graph;
  std::set<std::string> kg_entities;
};

Extraction extractImpl(const KnowledgeGraph& kg, const std::string& seed, int max_hops,
                       int max_events) {
  if (!kg.hasEntity(seed)) throw Error(ErrorCode::kUnknownEntity, "'" + seed + "' is not in the KG");
  if (max_hops < 1 || max_events < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_hops and max_events must be at least 1");
  }
  std::map<std::string, int> dist{{seed, 0}};
  std::deque<std::string> frontier{seed};
  while (!frontier.empty()) {
    const std::string cur = frontier.front();
    frontier.pop_front();
    const int d = dist[cur];
    if (d == max_hops) continue;
    for (const auto& nb : kg.adjacency().at(cur)) {
      if (dist.emplace(nb, d + 1).second) frontier.push_back(nb);
    }
  }

  struct Candidate {
    const Quintuple* q;
    EventKey key;
    TimePoint first;
  };
  std::vector<Candidate> events;
  std::set<EventKey> seen;
  for (const auto& q : kg.quintuples()) {
    if (!dist.contains(q.subject) || !dist.contains(q.object)) continue;
    if (!q.start && !q.end) continue;
    const auto* info = findRelation(q.relation);
    const bool instant = info && info->instantaneous;
    if (instant && !q.start) continue;
    EventKey key{displayName(q.subject), verbalizeRelation(q.relation), displayName(q.object)};
    if (!seen.insert(key).second) continue;
    events.push_back(Candidate{&q, std::move(key), q.start ? *q.start : *q.end});
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const Candidate& a, const Candidate& b) { return a.first < b.first; });
  if (events.size() > static_cast<std::size_t>(max_events)) events.resize(max_events);

  Extraction out;
  std::vector<TemporalFact> facts;
  for (const auto& c : events) {
    const auto* info = findRelation(c.q->relation);
    const bool instant = info && info->instantaneous;
    if (c.q->start) facts.push_back({c.key, Endpoint::kStart, *c.q->start});
    if (c.q->end && !instant) facts.push_back({c.key, Endpoint::kEnd, *c.q->end});
    out.kg_entities.insert(c.q->subject);
    out.kg_entities.insert(c.q->object);
  }
  out.graph = sortChronological(std::move(facts));
  return out;
}

}  // namespace

TemporalGraph extractSubgraph(const KnowledgeGraph& kg, const std::string& seed_entity,
                              int max_hops, int max_events) {
  return extractImpl(kg, seed_entity, max_hops, max_events).graph;
}

std::vector<TemporalGraph> extractCorpus(const KnowledgeGraph& kg, const CorpusOptions& options) {
  std::vector<std::pair<std::size_t, std::string>> seeds;
  for (const auto& [name, nbrs] : kg.adjacency()) seeds.emplace_back(kg.degree(name), name);
  std::stable_sort(seeds.begin(), seeds.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::set<std::string> covered;
  std::vector<TemporalGraph> out;
  for (const auto& [deg, name] : seeds) {
    if (covered.contains(name)) continue;
    auto ex = extractImpl(kg, name, options.max_hops, options.max_events);
    if (ex.graph.size() < static_cast<std::size_t>(options.min_facts)) continue;
    covered.insert(ex.kg_entities.begin(), ex.kg_entities.end());
    out.push_back(std::move(ex.graph));
  }
  return out;
}

std::string_view splitName(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "";
}

const std::vector<std::size_t>& SplitResult::of(Split s) const {
  return s == Split::kTrain ? train : s == Split::kVal ? val : test;
}

SplitResult splitDataset(const std::vector<TemporalGraph>& graphs, const SplitSpec& spec) {
  const double ratios[3] = {spec.train, spec.val, spec.test};
  for (double r : ratios) {
    if (r < 0.0 || r > 1.0) throw Error(ErrorCode::kInvalidArgument, "split ratio outside [0,1]");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "split ratios must sum to 1");
  }
  const std::size_t n = graphs.size();
  // Largest-remainder targets.
  std::size_t target[3];
  double rem[3];
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = ratios[i] * static_cast<double>(n);
    target[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    rem[i] = exact - static_cast<double>(target[i]);
    assigned += target[i];
  }
  while (assigned < n) {
    int best = 0;
    for (int i = 1; i < 3; ++i) {
      if (rem[i] > rem[best] + 1e-12) best = i;
    }
    ++target[best];
    rem[best] = -1.0;
    ++assigned;
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(spec.seed);
  rng.shuffle(order);

  std::map<EventKey, int> owner;
  std::vector<std::size_t> bucket[3];
  SplitResult result;
  for (std::size_t idx : order) {
    std::set<int> owners;
    for (const auto& [key, iv] : graphs[idx].intervals()) {
      if (auto it = owner.find(key); it != owner.end()) owners.insert(it->second);
    }
    int dest;
    if (owners.size() > 1) {
      result.dropped.push_back(idx);
      continue;
    } else if (owners.size() == 1) {
      dest = *owners.begin();
    } else {
      dest = 0;
      long best = static_cast<long>(target[0]) - static_cast<long>(bucket[0].size());
      for (int i = 1; i < 3; ++i) {
        const long deficit = static_cast<long>(target[i]) - static_cast<long>(bucket[i].size());
        if (deficit > best) {
          best = deficit;
          dest = i;
        }
      }
    }
    bucket[dest].push_back(idx);
    for (const auto& [key, iv] : graphs[idx].intervals()) owner.emplace(key, dest);
  }

  int requested = 0, used = 0;
  for (int i = 0; i < 3; ++i) {
    if (target[i] > 0) ++requested;
    if (!bucket[i].empty()) ++used;
  }
  if (n > 1 && requested > 1 && used == 1) {
    throw Error(ErrorCode::kUnsatisfiableSplit,
                "shared events force all " + std::to_string(n) + " graphs into one split");
  }
  for (auto& b : bucket) std::sort(b.begin(), b.end());
  std::sort(result.dropped.begin(), result.dropped.end());
  result.train = std::move(bucket[0]);
  result.val = std::move(bucket[1]);
  result.test = std::move(bucket[2]);
  return result;
}

EntityMap EntityMap::inverse() const {
  EntityMap inv;
  for (const auto& [from, to] : mapping) {
    inv.mapping[to] = from;
    if (auto it = entity_type.find(from); it != entity_type.end()) inv.entity_type[to] = it->second;
  }
  return inv;
}

NamePool loadNamePool(std::istream& in) {
  NamePool pool;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    const auto c = split(line, '\t');
    if (c.size() != 2) throw Error(ErrorCode::kMalformedRow, "name pool row needs type<TAB>name");
    pool[std::string(trim(c[0]))].emplace_back(trim(c[1]));
  }
  return pool;
}

NamePool bundledNamePool() {
  std::istringstream in{std::string(resource("name_pool.tsv"))};
  return loadNamePool(in);
}

EntityMap buildEntityMap(const std::vector<std::pair<std::string, std::string>>& entities,
                         const NamePool& pool, std::uint64_t seed) {
  std::map<std::string, std::string> types;
  for (const auto& [name, type] : entities) types.emplace(name, type);
  std::set<std::string> vocabulary;
  for (const auto& [name, type] : types) vocabulary.insert(name);

  std::map<std::string, std::vector<std::string>> by_type;
  for (const auto& [name, type] : types) by_type[type].push_back(name);

  EntityMap map;
  for (const auto& [type, names] : by_type) {
    auto it = pool.find(type);
    std::vector<std::string> candidates;
    if (it != pool.end()) {
      for (const auto& c : it->second) {
        if (!vocabulary.contains(c) &&
            std::find(candidates.begin(), candidates.end(), c) == candidates.end()) {
          candidates.push_back(c);
        }
      }
    }
    if (candidates.size() < names.size()) {
      throw Error(ErrorCode::kPoolExhausted, "type '" + type + "' needs " +
                                                 std::to_string(names.size()) + " names, pool has " +
                                                 std::to_string(candidates.size()));
    }
    Rng rng(deriveSeed(seed, fnv1a64(type)));
    rng.shuffle(candidates);
    for (std::size_t i = 0; i < names.size(); ++i) {
      map.mapping[names[i]] = candidates[i];
      map.entity_type[names[i]] = type;
    }
  }
  return map;
}

TemporalGraph anonymizeGraph(const TemporalGraph& graph, const EntityMap& map) {
  auto rename = [&](const std::string& name) {
    auto it = map.mapping.find(name);
    if (it == map.mapping.end()) throw Error(ErrorCode::kUnmappedEntity, "no mapping for '" + name + "'");
    return it->second;
  };
  std::vector<TemporalFact> facts;
  facts.reserve(graph.size());
  for (const auto& f : graph.facts()) {
    facts.push_back({EventKey{rename(f.key.subject), f.key.relation, rename(f.key.object)},
                     f.endpoint, f.time});
  }
  return sortChronological(std::move(facts));
}

namespace {
// A specific role type wins over the generic "entity".
void assignType(std::map<std::string, std::string>& types, const std::string& name,
                const std::string& type) {
  auto [it, inserted] = types.emplace(name, type);
  if (!inserted && it->second == "entity") it->second = type;
}
}  // namespace

std::map<std::string, std::string> inferEntityTypes(const KnowledgeGraph& kg) {
  std::map<std::string, std::string> types;
  for (const auto& q : kg.quintuples()) {
    const auto* info = findRelation(q.relation);
    assignType(types, q.subject, info ? info->subject_type : "entity");
    assignType(types, q.object, info ? info->object_type : "entity");
  }
  return types;
}

std::map<std::string, std::string> inferEntityTypes(const TemporalGraph& graph) {
  std::map<std::string, std::string> types;
  for (const auto& f : graph.facts()) {
    const auto* info = findRelation(f.key.relation);
    assignType(types, f.key.subject, info ? info->subject_type : "entity");
    assignType(types, f.key.object, info ? info->object_type : "entity");
  }
  return types;
}

}  // namespace tgqa
