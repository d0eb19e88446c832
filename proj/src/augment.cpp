#include "tgqa/augment.hpp"

#include <algorithm>
#include <sstream>

#include "tgqa/error.hpp"
#include "tgqa/knowledge.hpp"
#include "tgqa/resources.hpp"
#include "tgqa/rng.hpp"
#include "tgqa/text.hpp"

namespace tgqa {
namespace {

bool wordAt(std::string_view text, std::size_t i) { return i < text.size() && isWordChar(text[i]); }

bool isDigit(char c) { return c >= '0' && c <= '9'; }

// Single left-to-right pass: entity names (longest first) at word
// boundaries are renamed, and standalone integers found in `years` are
// moved by `offset`.
class TextRewriter {
 public:
  TextRewriter(const std::map<std::string, std::string>& names, std::set<int> years, int offset)
      : years_(std::move(years)), offset_(offset) {
    for (const auto& [from, to] : names) {
      if (from != to && !from.empty()) names_.emplace_back(from, to);
    }
    std::stable_sort(names_.begin(), names_.end(),
                     [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
  }

  std::string operator()(std::string_view text) const {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
      const bool boundary = i == 0 || !isWordChar(text[i - 1]);
      if (boundary) {
        bool matched = false;
        for (const auto& [from, to] : names_) {
          if (text.compare(i, from.size(), from) == 0 && !wordAt(text, i + from.size())) {
            out += to;
            i += from.size();
            matched = true;
            break;
          }
        }
        if (matched) continue;
        if (isDigit(text[i])) {
          std::size_t j = i;
          while (j < text.size() && isDigit(text[j])) ++j;
          const std::string_view run = text.substr(i, j - i);
          if (offset_ != 0 && !wordAt(text, j) && run.size() <= 6 && run[0] != '0') {
            const int value = std::stoi(std::string(run));
            if (years_.contains(value)) {
              out += std::to_string(value + offset_);
              i = j;
              continue;
            }
          }
          out.append(run);
          i = j;
          continue;
        }
      }
      out += text[i++];
    }
    return out;
  }

 private:
  std::vector<std::pair<std::string, std::string>> names_;
  std::set<int> years_;
  int offset_;
};

std::set<int> graphYears(const TemporalGraph& graph) {
  std::set<int> years;
  for (const auto& f : graph.facts()) {
    years.insert(f.time.year());
    if (auto r = f.time.approxRange()) years.insert(r->second);
  }
  return years;
}

int minYear(const TemporalGraph& graph) {
  int m = std::numeric_limits<int>::max();
  for (const auto& f : graph.facts()) m = std::min(m, f.time.year());
  return m;
}

EventKey mirrored(const EventKey& k) { return EventKey{k.object, k.relation, k.subject}; }

bool mentioned(const std::string& haystack, const EventKey& key) {
  return haystack.find(eventRef(key)) != std::string::npos ||
         haystack.find(eventRef(mirrored(key))) != std::string::npos;
}

void refreshKnowledge(QAItem& item, const TemporalGraph& graph) {
  if (!item.knowledge) return;
  try {
    item.knowledge->time_chain = deriveTimeChain(graph);
  } catch (const Error&) {
    return;
  }
  const std::set<TimePoint> times(item.knowledge->time_chain.begin(),
                                  item.knowledge->time_chain.end());
  auto& gaps = item.knowledge->gaps;
  gaps.erase(std::remove_if(gaps.begin(), gaps.end(),
                            [&](const GapStatement& g) {
                              return !times.contains(g.minuend) || !times.contains(g.subtrahend);
                            }),
             gaps.end());
  item.knowledge->gap_ordering = deriveGapOrdering(gaps);
}

NamePool displayPool(const NamePool& pool, const std::set<std::string>& excluded) {
  NamePool out;
  for (const auto& [type, names] : pool) {
    auto& dst = out[type];
    for (const auto& n : names) {
      std::string d = displayName(n);
      if (!excluded.contains(d)) dst.push_back(std::move(d));
    }
  }
  return out;
}

std::string signedYears(int offset) {
  return (offset >= 0 ? "+" : "") + std::to_string(offset);
}

}  // namespace

RelationSynonymMap loadSynonymMap(std::istream& in) {
  RelationSynonymMap map;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    const auto cols = split(line, '\t');
    if (cols.size() < 2 || cols.size() > 3 || trim(cols[0]).empty() || trim(cols[1]).empty()) {
      throw Error(ErrorCode::kMalformedRow, "synonym map line " + std::to_string(line_no));
    }
    SynonymEntry e{std::string(trim(cols[1])), false};
    if (cols.size() == 3) {
      if (trim(cols[2]) != "swap") {
        throw Error(ErrorCode::kMalformedRow,
                    "synonym map line " + std::to_string(line_no) + ": third column must be 'swap'");
      }
      e.swap = true;
    }
    map.mapping[std::string(trim(cols[0]))] = std::move(e);
  }
  return map;
}

const RelationSynonymMap& bundledSynonymMap() {
  static const RelationSynonymMap map = [] {
    std::istringstream in{std::string(resource("synonyms.tsv"))};
    return loadSynonymMap(in);
  }();
  return map;
}

EntityMap loadEntityMap(std::istream& in) {
  EntityMap map;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 2 || trim(cols[0]).empty() || trim(cols[1]).empty()) {
      throw Error(ErrorCode::kMalformedRow, "entity map line " + std::to_string(line_no));
    }
    map.mapping[std::string(trim(cols[0]))] = std::string(trim(cols[1]));
  }
  return map;
}

std::set<EventKey> findIrrelevantEvents(const DatasetSample& sample, const QAItem& item) {
  std::string context = item.question;
  if (item.cot) context += "\n" + *item.cot;
  for (const auto& g : item.gold_answers) context += "\n" + g;
  std::set<EventKey> slot_events(item.slots.events.begin(), item.slots.events.end());
  const TemporalGraph graph = canonicalGraph(sample);
  std::set<EventKey> out;
  for (const auto& [key, iv] : graph.intervals()) {
    if (slot_events.contains(key) || slot_events.contains(mirrored(key))) continue;
    if (!mentioned(context, key)) out.insert(key);
  }
  return out;
}

DatasetSample dropIrrelevantEvents(const DatasetSample& sample, double p, std::uint64_t seed) {
  if (p < 0.0 || p > 1.0) throw Error(ErrorCode::kInvalidArgument, "drop probability outside [0,1]");
  const TemporalGraph canonical = canonicalGraph(sample);
  std::set<EventKey> irrelevant;
  for (const auto& [key, iv] : canonical.intervals()) irrelevant.insert(key);
  for (const auto& item : sample.qas) {
    const auto local = findIrrelevantEvents(sample, item);
    std::set<EventKey> kept;
    std::set_intersection(irrelevant.begin(), irrelevant.end(), local.begin(), local.end(),
                          std::inserter(kept, kept.begin()));
    irrelevant = std::move(kept);
  }
  Rng rng(seed);
  std::set<EventKey> dropped;
  for (const auto& key : canonical.events()) {
    if (irrelevant.contains(key) && rng.bernoulli(p)) dropped.insert(key);
  }
  DatasetSample out = sample;
  if (dropped.empty()) return out;
  std::vector<TemporalFact> facts;
  const auto canonical_facts = canonical.facts();
  for (std::size_t i = 0; i < canonical_facts.size(); ++i) {
    if (!dropped.contains(canonical_facts[i].key)) facts.push_back(sample.graph.facts()[i]);
  }
  out.graph = sortChronological(std::move(facts));
  const TemporalGraph new_canonical = canonicalGraph(out);
  for (auto& item : out.qas) refreshKnowledge(item, new_canonical);
  return out;
}

DatasetSample applyRelationSynonyms(const DatasetSample& sample, const RelationSynonymMap& map) {
  DatasetSample out = sample;
  if (map.mapping.empty()) return out;
  std::set<std::string> present;
  for (const auto& [key, iv] : sample.graph.intervals()) present.insert(key.relation);

  std::map<std::string, std::string> rename;  // current relation -> new relation
  std::map<std::string, bool> swaps;
  std::set<std::string> targets;
  for (const auto& rel : present) {
    auto it = map.mapping.find(rel);
    if (it == map.mapping.end()) continue;
    const SynonymEntry& e = it->second;
    if (present.contains(e.replacement) || targets.contains(e.replacement)) continue;
    rename[rel] = e.replacement;
    swaps[rel] = e.swap && e.replacement.find(kObjectSlot) == std::string::npos;
    targets.insert(e.replacement);
  }
  if (rename.empty()) return out;

  auto& aliases = out.provenance.relation_aliases;
  for (const auto& [from, to] : rename) {
    RelationAlias alias{from, swaps[from]};
    if (auto prior = aliases.find(from); prior != aliases.end()) {
      alias.original = prior->second.original;
      alias.swapped = prior->second.swapped != alias.swapped;
      aliases.erase(prior);
    }
    aliases[to] = alias;
  }
  std::vector<TemporalFact> facts;
  for (auto f : sample.graph.facts()) {
    if (auto it = rename.find(f.key.relation); it != rename.end()) {
      if (swaps[f.key.relation]) std::swap(f.key.subject, f.key.object);
      f.key.relation = it->second;
    }
    facts.push_back(std::move(f));
  }
  out.graph = sortChronological(std::move(facts));
  out.provenance.transforms.push_back("relation_synonyms");
  return out;
}

DatasetSample remapEntitiesAndTimes(const DatasetSample& sample, const EntityMap& entity_map,
                                    int time_offset) {
  const TemporalGraph renamed = anonymizeGraph(sample.graph, entity_map);
  std::vector<TemporalFact> facts;
  for (const auto& f : renamed.facts()) {
    facts.push_back(TemporalFact{f.key, f.endpoint, f.time.shiftedYears(time_offset)});
  }
  DatasetSample out = sample;
  out.graph = sortChronological(std::move(facts));

  std::map<std::string, std::string> names;
  for (const auto& e : sample.graph.entities()) names[e] = entity_map.mapping.at(e);
  const TextRewriter rewrite(names, graphYears(sample.graph), time_offset);
  auto rename = [&](const std::string& n) {
    auto it = names.find(n);
    if (it == names.end()) throw Error(ErrorCode::kUnmappedEntity, "no mapping for '" + n + "'");
    return it->second;
  };

  for (auto& item : out.qas) {
    item.question = rewrite(item.question);
    for (auto& e : item.slots.events) {
      e.subject = rename(e.subject);
      e.object = rename(e.object);
    }
    for (auto& g : item.gold_answers) g = rewrite(g);
    for (auto& c : item.candidates) {
      // Time candidates may include padding years absent from the graph.
      auto t = item.qtype == QuestionType::kQ6 ? parseTime(c) : std::nullopt;
      c = t ? formatTime(t->shiftedYears(time_offset)) : rewrite(c);
    }
    if (item.cot) item.cot = rewrite(*item.cot);
    for (auto& c : item.cots) {
      c.text = rewrite(c.text);
      c.parsed_answer = rewrite(c.parsed_answer);
    }
    if (item.knowledge) item.knowledge = shiftKnowledge(*item.knowledge, time_offset);
  }
  if (out.story) out.story = rewrite(*out.story);
  for (auto& f : out.flags) {
    f.event.subject = rename(f.event.subject);
    f.event.object = rename(f.event.object);
    f.expected = f.expected.shiftedYears(time_offset);
    f.model_answer = rewrite(f.model_answer);
  }
  return out;
}

bool isNoop(const AugmentConfig& config) {
  return !config.drop_irrelevant && !config.synonym_map && !config.entity_map &&
         !config.entity_pool && !config.time_offset && !config.random_time_offset &&
         !config.per_item;
}

std::vector<DatasetSample> augmentBatch(const std::vector<DatasetSample>& dataset,
                                        const AugmentConfig& config) {
  if (isNoop(config)) return dataset;
  if (config.drop_probability < 0.0 || config.drop_probability > 1.0) {
    throw Error(ErrorCode::kConfigInvalid, "drop probability outside [0,1]");
  }
  std::vector<DatasetSample> inputs;
  for (const auto& s : dataset) {
    if (!config.per_item) {
      inputs.push_back(s);
      continue;
    }
    for (const auto& item : s.qas) {
      DatasetSample one = s;
      one.id = s.id + "/" + item.id;
      one.qas = {item};
      inputs.push_back(std::move(one));
    }
  }

  std::vector<DatasetSample> out;
  out.reserve(inputs.size());
  for (auto sample : inputs) {
    const std::uint64_t sample_seed = deriveSeed(config.seed, fnv1a64(sample.id));
    sample.id += "+aug";
    sample.provenance.seed = config.seed;
    if (config.drop_irrelevant) {
      const std::size_t before = sample.graph.intervals().size();
      sample = dropIrrelevantEvents(sample, config.drop_probability, deriveSeed(sample_seed, 1));
      sample.provenance.transforms.push_back(
          "drop_irrelevant(" + std::to_string(before - sample.graph.intervals().size()) + ")");
    }
    if (config.synonym_map) sample = applyRelationSynonyms(sample, *config.synonym_map);

    std::optional<EntityMap> emap = config.entity_map;
    if (!emap && config.entity_pool) {
      const auto types = inferEntityTypes(canonicalGraph(sample));
      std::vector<std::pair<std::string, std::string>> entities;
      for (const auto& e : sample.graph.entities()) {
        auto it = types.find(e);
        entities.emplace_back(e, it == types.end() ? "entity" : it->second);
      }
      emap = buildEntityMap(entities, displayPool(*config.entity_pool, config.excluded_names),
                            deriveSeed(sample_seed, 2));
    }
    int offset = 0;
    if (config.time_offset) {
      offset = *config.time_offset;
    } else if (config.random_time_offset && !sample.graph.empty()) {
      Rng rng(deriveSeed(sample_seed, 3));
      const int lowest = minYear(sample.graph);
      for (int attempt = 0; attempt < 64; ++attempt) {
        const int o = rng.between(-config.offset_range, config.offset_range);
        if (lowest + o >= 1) {
          offset = o;
          break;
        }
      }
    }
    if (emap || offset != 0) {
      EntityMap identity;
      if (!emap) {
        for (const auto& e : sample.graph.entities()) identity.mapping[e] = e;
      }
      sample = remapEntitiesAndTimes(sample, emap ? *emap : identity, offset);
      if (emap) sample.provenance.transforms.push_back("entity_map");
      if (offset != 0) sample.provenance.transforms.push_back("time_offset(" + signedYears(offset) + ")");
    }
    verifySample(sample);
    out.push_back(std::move(sample));
  }
  return out;
}

}  // namespace tgqa
