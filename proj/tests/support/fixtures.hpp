#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tgqa/augment.hpp"
#include "tgqa/dataset.hpp"
#include "tgqa/knowledge_graph.hpp"
#include "tgqa/qa.hpp"
#include "tgqa/temporal_graph.hpp"

namespace tgqa::testing {

EventKey key(const std::string& s, const std::string& r, const std::string& o);
TemporalFact startAt(const EventKey& k, int year);
TemporalFact endAt(const EventKey& k, int year);

// The John Thompson / Sophia Parker sample printed with the dataset format.
std::vector<TemporalFact> thompsonFacts();
TemporalGraph thompsonGraph();
extern const char* const kThompsonTimeline;

EventKey ownedPearlNetwork();
EventKey sophiaMarriedJohn();
EventKey johnMarriedSophia();

// "True or false: event (owned) was longer in duration than event (marriage)?"
QAItem thompsonDurationItem();
// "Which event started first, (owned) or (John married Sophia)?"
QAItem thompsonFirstItem();
DatasetSample thompsonSample();

// Both augmented graphs shown for the Thompson sample.
extern const char* const kSynonymDropTimeline;
extern const char* const kRemappedTimeline;
EntityMap augmentedEntityMap();
// Seeds under which a p = 0.5 drop keeps the birth and removes both deaths:
// one for dropIrrelevantEvents directly, one as the augmentBatch seed.
inline constexpr std::uint64_t kAugmentedDropSeed = 5;
inline constexpr std::uint64_t kAugmentedBatchSeed = 15;
extern const char* const kAugmentedRemappedCoT;

// The Liam Mitchell demo graph.
extern const char* const kLiamTimeline;
TemporalGraph liamGraph();
QAItem liamDurationItem();

// Molly Adams story-generation graph (11 facts) and its prompt.
TemporalGraph mollyGraph();
extern const char* const kMollyStoryPrompt;

std::string dataPath(const std::string& relative);

}  // namespace tgqa::testing
