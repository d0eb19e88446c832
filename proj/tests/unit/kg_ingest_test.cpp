#include <gtest/gtest.h>

#include <deque>
#include <map>
#include <set>
#include <sstream>

#include "support/fixtures.hpp"
#include "tgqa/error.hpp"
#include "tgqa/knowledge_graph.hpp"
#include "tgqa/rng.hpp"

namespace tgqa {
namespace {

KnowledgeGraph kgFrom(const std::string& tsv) {
  std::istringstream in(tsv);
  return loadKG(in);
}

std::vector<std::string> splitTabs(const std::string& line) {
  std::vector<std::string> out(1);
  for (char c : line) {
    if (c == '\t') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

TEST(LoadKGTest, ParsesRowAgainstTabSplitOracle) {
  const std::string row = "Al_Gore\tisMarriedTo\tTipper\t1970\t2010";
  const auto fields = splitTabs(row);
  const KnowledgeGraph kg = kgFrom(row + "\n");
  ASSERT_EQ(kg.quintuples().size(), 1u);
  const auto& q = kg.quintuples()[0];
  EXPECT_EQ(q.subject, fields[0]);
  EXPECT_EQ(q.relation, fields[1]);
  EXPECT_EQ(q.object, fields[2]);
  EXPECT_EQ(q.start, TimePoint::ofYear(std::stoi(fields[3])));
  EXPECT_EQ(q.end, TimePoint::ofYear(std::stoi(fields[4])));
}

TEST(LoadKGTest, UnknownTimesBecomeAbsent) {
  const KnowledgeGraph kg =
      kgFrom("A\twasBornIn\tB\t####\t####\nC\towns\tD\t\t1990\nE\towns\tF\t1980-##-##\t\n");
  ASSERT_EQ(kg.quintuples().size(), 3u);
  EXPECT_FALSE(kg.quintuples()[0].start.has_value());
  EXPECT_FALSE(kg.quintuples()[1].start.has_value());
  EXPECT_EQ(kg.quintuples()[1].end, TimePoint::ofYear(1990));
  EXPECT_EQ(kg.quintuples()[2].start, TimePoint::ofYear(1980));
}

TEST(LoadKGTest, DayDatesAndDuplicates) {
  const KnowledgeGraph kg =
      kgFrom("A\towns\tB\t1909-04-03\t1976-07-##\nA\towns\tB\t1909-04-03\t1976-07-##\n");
  ASSERT_EQ(kg.quintuples().size(), 1u);
  EXPECT_EQ(kg.quintuples()[0].start, TimePoint::ofDay(1909, 4, 3));
  EXPECT_EQ(kg.quintuples()[0].end, TimePoint::ofMonth(1976, 7));
}

TEST(LoadKGTest, EmptyStreamGivesEmptyKG) {
  EXPECT_TRUE(kgFrom("").quintuples().empty());
}

TEST(LoadKGTest, ReportsLineAndColumn) {
  try {
    kgFrom("A\towns\tB\t1900\t1910\nA\towns\tB\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedRow);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  try {
    kgFrom("A\towns\tB\t19x0\t1910\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnparsableTime);
    EXPECT_NE(std::string(e.what()).find("line 1, column 4"), std::string::npos);
  }
}

TEST(VerbalizeTest, KnownAndUnknownRelations) {
  EXPECT_EQ(verbalizeRelation("isMarriedTo"), "was married to");
  EXPECT_EQ(verbalizeRelation("owns"), "owned");
  EXPECT_EQ(verbalizeRelation("hasAcademicAdvisor"), "has academic advisor");
  EXPECT_EQ(displayName("Al_Gore"), "Al Gore");
}

TEST(ExtractSubgraphTest, SelfEventOnly) {
  const KnowledgeGraph kg = kgFrom("Solo\tcreated\tSolo\t1950\t1960\n");
  const TemporalGraph g = extractSubgraph(kg, "Solo", 2, 10);
  EXPECT_EQ(g.events().size(), 1u);
  EXPECT_EQ(g.size(), 2u);
}

TEST(ExtractSubgraphTest, UnknownSeedThrows) {
  const KnowledgeGraph kg = kgFrom("A\towns\tB\t1950\t1960\n");
  try {
    extractSubgraph(kg, "Nobody", 1, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownEntity);
  }
}

// Star around S with a two-step chain beyond each spoke.
std::string starKg() {
  std::string tsv;
  for (int i = 0; i < 5; ++i) {
    const std::string spoke = "Spoke" + std::to_string(i);
    tsv += "S\tworksAt\t" + spoke + "\t" + std::to_string(1950 + i) + "\t1990\n";
    tsv += spoke + "\tworksAt\tFar" + std::to_string(i) + "\t1960\t1970\n";
    tsv += "Far" + std::to_string(i) + "\tworksAt\tFarther" + std::to_string(i) + "\t1961\t1971\n";
  }
  return tsv;
}

std::set<std::string> bfsWithin(const KnowledgeGraph& kg, const std::string& seed, int hops) {
  std::map<std::string, std::set<std::string>> adj;
  for (const auto& q : kg.quintuples()) {
    adj[q.subject].insert(q.object);
    adj[q.object].insert(q.subject);
  }
  std::set<std::string> seen{seed};
  std::vector<std::string> layer{seed};
  for (int h = 0; h < hops; ++h) {
    std::vector<std::string> next;
    for (const auto& n : layer) {
      for (const auto& m : adj[n]) {
        if (seen.insert(m).second) next.push_back(m);
      }
    }
    layer = next;
  }
  return seen;
}

TEST(ExtractSubgraphTest, OneHopStarKeepsDirectEdgesOnly) {
  const KnowledgeGraph kg = kgFrom(starKg());
  const TemporalGraph g = extractSubgraph(kg, "S", 1, 100);
  const auto reach = bfsWithin(kg, "S", 1);
  std::size_t expected = 0;
  for (const auto& q : kg.quintuples()) {
    expected += reach.contains(q.subject) && reach.contains(q.object);
  }
  EXPECT_EQ(expected, 5u);
  EXPECT_EQ(g.events().size(), expected);
  for (const auto& k : g.events()) EXPECT_EQ(k.subject, "S");
}

TEST(ExtractSubgraphProperty, EntitiesStayWithinHopsOfSeed) {
  const KnowledgeGraph kg = kgFrom(starKg());
  for (int hops = 1; hops <= 3; ++hops) {
    const auto reach = bfsWithin(kg, "S", hops);
    for (const auto& name : extractSubgraph(kg, "S", hops, 100).entities()) {
      EXPECT_TRUE(reach.contains(name)) << name << " at hops " << hops;
    }
  }
}

TEST(ExtractSubgraphTest, TruncatesToEarliestEvents) {
  std::string tsv;
  const int starts[] = {1975, 1951, 1990, 1960, 1940, 1985, 1955, 1999, 1970, 1945};
  for (int i = 0; i < 10; ++i) {
    tsv += "S\tworksAt\tOrg" + std::to_string(i) + "\t" + std::to_string(starts[i]) + "\t2000\n";
  }
  const KnowledgeGraph kg = kgFrom(tsv);
  const TemporalGraph g = extractSubgraph(kg, "S", 1, 3);
  std::vector<int> sorted(std::begin(starts), std::end(starts));
  std::sort(sorted.begin(), sorted.end());
  std::set<int> expected(sorted.begin(), sorted.begin() + 3);
  std::set<int> got;
  for (const auto& [k, iv] : g.intervals()) got.insert(iv.start->year());
  EXPECT_EQ(got, expected);
}

TEST(ExtractSubgraphTest, InstantRelationsKeepStartOnly) {
  const KnowledgeGraph kg = kgFrom("A_B\twasBornIn\tTown\t1900\t1900\nA_B\towns\tShop\t1920\t1930\n");
  const TemporalGraph g = extractSubgraph(kg, "A_B", 1, 10);
  EXPECT_EQ(g.size(), 3u);
  EXPECT_EQ(g.facts()[0].key, (EventKey{"A B", "was born in", "Town"}));
}

TEST(ExtractSubgraphTest, ThompsonQuintuplesIngestToThompsonTimeline) {
  const KnowledgeGraph kg = kgFrom(
      "John_Thompson\twasBornIn\tWeston\t1921\t####\n"
      "John_Thompson\towns\tPearl_Network\t1942\t1967\n"
      "Sophia_Parker\tisMarriedTo\tJohn_Thompson\t1947\t1953\n"
      "John_Thompson\tisMarriedTo\tSophia_Parker\t1947\t1953\n"
      "John_Thompson\tdiedIn\tRiverside\t1988\t####\n"
      "Sophia_Parker\tdiedIn\tLancaster\t1995\t####\n");
  EXPECT_EQ(renderTimeline(extractSubgraph(kg, "John_Thompson", 3, 20)),
            testing::kThompsonTimeline);
}

std::vector<TemporalGraph> disjointGraphs(int n) {
  std::vector<TemporalGraph> out;
  for (int i = 0; i < n; ++i) {
    out.push_back(sortChronological(
        {testing::startAt(testing::key("P" + std::to_string(i), "owned", "X"), 1950)}));
  }
  return out;
}

TEST(SplitDatasetTest, DisjointGraphsFollowRatios) {
  const auto r = splitDataset(disjointGraphs(10), SplitSpec{0.8, 0.1, 0.1, 42});
  EXPECT_EQ(r.train.size(), 8u);
  EXPECT_EQ(r.val.size(), 1u);
  EXPECT_EQ(r.test.size(), 1u);
  EXPECT_TRUE(r.dropped.empty());
}

TEST(SplitDatasetTest, SharedKeyForcesSameSplit) {
  auto graphs = disjointGraphs(10);
  const auto shared = testing::key("Shared", "owned", "Y");
  graphs[2] = sortChronological({testing::startAt(shared, 1950)});
  graphs[7] = sortChronological({testing::startAt(shared, 1950),
                                 testing::startAt(testing::key("Q", "owned", "Z"), 1960)});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = splitDataset(graphs, SplitSpec{0.5, 0.25, 0.25, seed});
    int where2 = -1, where7 = -1;
    for (int s = 0; s < 3; ++s) {
      for (auto i : r.of(static_cast<Split>(s))) {
        if (i == 2) where2 = s;
        if (i == 7) where7 = s;
      }
    }
    EXPECT_EQ(where2, where7);
    EXPECT_NE(where2, -1);
  }
}

TEST(SplitDatasetTest, UnsatisfiableWhenEverythingShares) {
  const auto shared = testing::key("Shared", "owned", "Y");
  std::vector<TemporalGraph> graphs;
  for (int i = 0; i < 4; ++i) {
    graphs.push_back(sortChronological(
        {testing::startAt(shared, 1950),
         testing::startAt(testing::key("P" + std::to_string(i), "owned", "X"), 1951)}));
  }
  try {
    splitDataset(graphs, SplitSpec{0.5, 0.25, 0.25, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsatisfiableSplit);
  }
}

TEST(SplitDatasetTest, DeterministicUnderSeed) {
  const auto graphs = disjointGraphs(30);
  const auto a = splitDataset(graphs, SplitSpec{0.6, 0.2, 0.2, 9});
  const auto b = splitDataset(graphs, SplitSpec{0.6, 0.2, 0.2, 9});
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.val, b.val);
  EXPECT_EQ(a.test, b.test);
}

TEST(SplitDatasetProperty, RandomGraphsNeverShareKeysAcrossSplits) {
  Rng rng(17);
  std::vector<TemporalGraph> graphs;
  for (int i = 0; i < 500; ++i) {
    std::vector<TemporalFact> facts;
    std::set<int> used;
    const int n = rng.between(1, 4);
    for (int j = 0; j < n; ++j) {
      const int id = rng.between(0, 1999);
      if (!used.insert(id).second) continue;
      facts.push_back(testing::startAt(testing::key("E" + std::to_string(id), "owned", "X"), 1950));
    }
    graphs.push_back(sortChronological(facts));
  }
  const auto r = splitDataset(graphs, SplitSpec{0.8, 0.1, 0.1, 5});
  std::set<EventKey> keys[3];
  for (int s = 0; s < 3; ++s) {
    for (auto i : r.of(static_cast<Split>(s))) {
      for (const auto& [k, iv] : graphs[i].intervals()) keys[s].insert(k);
    }
  }
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      for (const auto& k : keys[a]) EXPECT_FALSE(keys[b].contains(k));
    }
  }
  EXPECT_EQ(r.train.size() + r.val.size() + r.test.size() + r.dropped.size(), 500u);
}

TEST(EntityMapTest, SinglePoolNamesGiveExpectedMapping) {
  const NamePool pool = {{"person", {"Chris_Evans"}}, {"place", {"Lancaster"}}};
  const EntityMap m =
      buildEntityMap({{"Al_Gore", "person"}, {"Edmonton", "place"}}, pool, 0);
  EXPECT_EQ(m.mapping.at("Al_Gore"), "Chris_Evans");
  EXPECT_EQ(m.mapping.at("Edmonton"), "Lancaster");
}

TEST(EntityMapTest, HundredEntitiesFromHundredNamesIsBijection) {
  std::vector<std::pair<std::string, std::string>> entities;
  NamePool pool;
  for (int i = 0; i < 100; ++i) {
    entities.emplace_back("Orig" + std::to_string(i), "person");
    pool["person"].push_back("New" + std::to_string(i));
  }
  const EntityMap m = buildEntityMap(entities, pool, 3);
  std::set<std::string> images;
  for (const auto& [from, to] : m.mapping) images.insert(to);
  EXPECT_EQ(m.mapping.size(), 100u);
  EXPECT_EQ(images.size(), 100u);
  EXPECT_EQ(buildEntityMap(entities, pool, 3).mapping, m.mapping);
}

TEST(EntityMapTest, ExhaustedPoolAndSourceNamesExcluded) {
  const NamePool pool = {{"person", {"Ava", "Ben"}}};
  try {
    buildEntityMap({{"Ava", "person"}, {"Cal", "person"}}, pool, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPoolExhausted);
  }
  const EntityMap m = buildEntityMap({{"Ava", "person"}}, pool, 0);
  EXPECT_EQ(m.mapping.at("Ava"), "Ben");
}

TEST(AnonymizeGraphTest, AugmentedMapGivesLowerGraphEntities) {
  const TemporalGraph g = anonymizeGraph(testing::thompsonGraph(), testing::augmentedEntityMap());
  std::vector<std::string> expected = {"James Brown", "Oslo", "Iris Inn", "Ella Perry",
                                       "Auckland", "Monaco"};
  EXPECT_EQ(g.entities(), expected);
  EXPECT_EQ(g.size(), 9u);
}

TEST(AnonymizeGraphTest, IdentityAndInverseRoundTrip) {
  const TemporalGraph g = testing::thompsonGraph();
  EntityMap id;
  for (const auto& e : g.entities()) id.mapping[e] = e;
  EXPECT_EQ(anonymizeGraph(g, id), g);
  const EntityMap m = testing::augmentedEntityMap();
  const TemporalGraph a = anonymizeGraph(g, m);
  EXPECT_EQ(anonymizeGraph(a, m.inverse()), g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_EQ(a.facts()[i].time, g.facts()[i].time);
    EXPECT_EQ(a.facts()[i].endpoint, g.facts()[i].endpoint);
    EXPECT_EQ(a.facts()[i].key.relation, g.facts()[i].key.relation);
  }
}

TEST(AnonymizeGraphTest, UnmappedEntityThrows) {
  EntityMap partial;
  partial.mapping["John Thompson"] = "James Brown";
  try {
    anonymizeGraph(testing::thompsonGraph(), partial);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnmappedEntity);
  }
}

TEST(EntityTypesTest, RolesFromRelationTable) {
  const auto types = inferEntityTypes(testing::thompsonGraph());
  EXPECT_EQ(types.at("John Thompson"), "person");
  EXPECT_EQ(types.at("Weston"), "place");
  EXPECT_EQ(types.at("Pearl Network"), "organization");
}

}  // namespace
}  // namespace tgqa
