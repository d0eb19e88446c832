#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "support/fixtures.hpp"
#include "tgqa/error.hpp"
#include "tgqa/mock_backend.hpp"
#include "tgqa/rng.hpp"
#include "tgqa/text.hpp"
#include "tgqa/text2tg.hpp"

namespace tgqa {
namespace {

const char kKnoxStory[] =
    "Knox Cunningham\n\n"
    "Sir Samuel Knox Cunningham, 1st Baronet, QC (3 April 1909 \xE2\x80\x93 29 July 1976) was a "
    "Northern Irish barrister, businessman and politician. As an Ulster Unionist politician at "
    "a time when the Unionists were part of the Conservative Party, he was also a significant "
    "figure in United Kingdom politics as Parliamentary Private Secretary to Harold "
    "Macmillan. His nephew was Sir Josias Cunningham.";

const char kKnoxTimeline[] =
    "3 April 1909: Knox Cunningham was born.\n"
    "1930s: He studied law and began his legal career.\n"
    "1935: On 2 July 1935, he married Dorothy Enid Riley JP.\n"
    "1939: Cunningham was called to the Bar by the Middle Temple.\n"
    "1942: He was called to the Bar in Northern Ireland.\n"
    "1943: Cunningham fought the Belfast West by-election.\n"
    "1945: He contested the same seat in the general election.\n"
    "1947: Knox Cunningham became involved with the World Alliance of YMCAs.\n"
    "1949: He became Chairman of the National Council of the YMCA.\n"
    "1954: Cunningham was elected to Orpington Urban District Council.\n"
    "29 July 1976: Knox Cunningham passed away.\n";

const char kKnoxTimePoints[] =
    "3 April 1909, 1930s, 1939, 1942, 1943, 1945, 1947, 1949, 1954, 29 July 1976";

std::vector<TimeExpression> knoxTimes() {
  std::vector<TimeExpression> out;
  for (auto s : split(kKnoxTimePoints, ',')) {
    const std::string surface(trim(s));
    out.push_back(TimeExpression{surface, normalizeTimeExpression(surface), true});
  }
  return out;
}

// Responder returning `reply` for prompts containing `needle`.
MockBackend::Responder replyTo(std::string needle, std::string reply) {
  return [needle = std::move(needle), reply = std::move(reply)](
             const std::string& prompt, const GenerateParams&) -> std::optional<std::string> {
    if (prompt.find(needle) == std::string::npos) return std::nullopt;
    return reply;
  };
}

TEST(NormalizeTimeTest, RuleTable) {
  struct Case {
    const char* surface;
    std::optional<TimePoint> expected;
  };
  const Case cases[] = {
      {"3 April 1909", TimePoint::ofDay(1909, 4, 3)},
      {"29 July 1976", TimePoint::ofDay(1976, 7, 29)},
      {"April 3, 1909", TimePoint::ofDay(1909, 4, 3)},
      {"Apr 1956", TimePoint::ofMonth(1956, 4)},
      {"May 1955", TimePoint::ofMonth(1955, 5)},
      {"June 1994", TimePoint::ofMonth(1994, 6)},
      {"1973", TimePoint::ofYear(1973)},
      {"1930s", TimePoint::approx(1930, 1939)},
      {"early 1980s", TimePoint::approx(1980, 1983)},
      {"mid-1980s", TimePoint::approx(1984, 1986)},
      {"late 1980s", TimePoint::approx(1987, 1989)},
      {"between 1950 and 1960", TimePoint::approx(1950, 1960)},
      {"30 February 1950", std::nullopt},
      {"0973", std::nullopt},
      {"yesterday", std::nullopt},
      {"", std::nullopt},
  };
  for (const auto& c : cases) {
    EXPECT_EQ(normalizeTimeExpression(c.surface), c.expected) << c.surface;
  }
}

TEST(NormalizeTimeProperty, IdempotentOnOwnOutput) {
  Rng rng(8);
  const char* months[] = {"January", "Feb", "March", "Apr", "May", "June",
                          "Jul", "August", "Sep", "October", "Nov", "December"};
  const char* quals[] = {"early", "mid", "late"};
  for (int i = 0; i < 500; ++i) {
    const int year = rng.between(1000, 2099);
    std::string surface;
    switch (rng.below(6)) {
      case 0: surface = std::to_string(year); break;
      case 1: surface = std::string(months[rng.below(12)]) + " " + std::to_string(year); break;
      case 2:
        surface = std::to_string(rng.between(1, 28)) + " " + months[rng.below(12)] + " " +
                  std::to_string(year);
        break;
      case 3: surface = std::to_string(year / 10 * 10) + "s"; break;
      case 4: surface = std::string(quals[rng.below(3)]) + " " + std::to_string(year / 10 * 10) + "s"; break;
      default:
        surface = "between " + std::to_string(year) + " and " + std::to_string(year + 1 + rng.below(20));
    }
    const auto t = normalizeTimeExpression(surface);
    ASSERT_TRUE(t.has_value()) << surface;
    EXPECT_EQ(normalizeTimeExpression(formatTime(*t)), t) << surface;
  }
}

TEST(ScanTimeExpressionsTest, StoryDatesInOrder) {
  const auto found = scanTimeExpressions(kKnoxStory);
  ASSERT_EQ(found.size(), 2u);
  EXPECT_EQ(found[0].surface, "3 April 1909");
  EXPECT_EQ(found[0].normalized, TimePoint::ofDay(1909, 4, 3));
  EXPECT_EQ(found[1].surface, "29 July 1976");
  const auto twice = scanTimeExpressions("In 1973 and again in 1973, then late 1980s.");
  ASSERT_EQ(twice.size(), 2u);
  EXPECT_EQ(twice[1].normalized, TimePoint::approx(1987, 1989));
}

TEST(IdentifyTimeExpressionsTest, BackendOutputIsNormalizedAndFiltered) {
  MockBackend mock;
  mock.addResponder(replyTo("Extract all the time expressions",
                            "'June 1994', '1973', 'late 1980s', 'someday', '1973'"));
  const auto found = identifyTimeExpressions(kKnoxStory, &mock);
  ASSERT_EQ(found.size(), 3u);
  EXPECT_EQ(found[0].normalized, TimePoint::ofMonth(1994, 6));
  EXPECT_EQ(found[1].normalized, TimePoint::ofYear(1973));
  EXPECT_EQ(found[2].normalized, TimePoint::approx(1987, 1989));
  for (const auto& e : found) EXPECT_TRUE(e.valid);
}

TEST(IdentifyTimeExpressionsTest, DayMonthYearListSurvivesCommaSplit) {
  MockBackend mock;
  mock.addResponder(replyTo("Extract all", "April 3, 1909\n29 July 1976"));
  const auto found = identifyTimeExpressions("story", &mock);
  ASSERT_EQ(found.size(), 2u);
  EXPECT_EQ(found[0].normalized, TimePoint::ofDay(1909, 4, 3));
  EXPECT_EQ(found[1].normalized, TimePoint::ofDay(1976, 7, 29));
}

TEST(IdentifyTimeExpressionsTest, RuleOnlyModeWithoutBackend) {
  const auto found = identifyTimeExpressions(kKnoxStory, nullptr);
  EXPECT_EQ(found.size(), 2u);
}

TEST(ExtractEntitiesRelationsTest, PositionQuestion) {
  const auto r = extractEntitiesRelations(
      {"Which position did Knox Cunningham hold from May 1955 to Apr 1956?"},
      defaultExtractionRules(), nullptr);
  EXPECT_EQ(r.entities, std::vector<std::string>{"Knox Cunningham"});
  EXPECT_EQ(r.relations, std::vector<std::string>{"position"});
  EXPECT_EQ(r.source, ExtractionResult::Source::kRule);
}

TEST(ExtractEntitiesRelationsTest, EventReferenceAndDedup) {
  const auto r = extractEntitiesRelations(
      {"When did the event (John Thompson owned Pearl Network) start?",
       "When did the event (John Thompson owned Pearl Network) end?"},
      defaultExtractionRules(), nullptr);
  EXPECT_EQ(r.entities, (std::vector<std::string>{"John Thompson", "Pearl Network"}));
  EXPECT_EQ(r.relations, std::vector<std::string>{"owned"});
}

TEST(ExtractEntitiesRelationsTest, UnmatchedWithoutBackendThrows) {
  try {
    extractEntitiesRelations({"How tall is it?"}, defaultExtractionRules(), nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoExtractorConfigured);
  }
}

TEST(ExtractEntitiesRelationsTest, BackendFallbackOnlyForUnmatched) {
  MockBackend mock;
  int calls = 0;
  mock.addResponder([&](const std::string& prompt, const GenerateParams&) -> std::optional<std::string> {
    ++calls;
    EXPECT_NE(prompt.find("How tall is the Iris Inn?"), std::string::npos);
    return "entity: Iris Inn\nrelation: height";
  });
  const auto r = extractEntitiesRelations(
      {"Where was Ava Stone born?", "How tall is the Iris Inn?"}, defaultExtractionRules(), &mock);
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(r.entities, (std::vector<std::string>{"Ava Stone", "Iris Inn"}));
  EXPECT_EQ(r.relations, (std::vector<std::string>{"place of birth", "height"}));
  EXPECT_EQ(r.source, ExtractionResult::Source::kBackend);
}

TEST(ExtractEntitiesRelationsTest, RulesAgreeWithBackendOnCoveredQuestions) {
  struct Labeled {
    std::string question, entity, relation;
  };
  const std::vector<Labeled> labeled = {
      {"Which position did Knox Cunningham hold from May 1955 to Apr 1956?", "Knox Cunningham",
       "position"},
      {"Which team did Ava Stone play for from 1990 to 1994?", "Ava Stone", "team"},
      {"Which school did Ben Hale attend in 1960?", "Ben Hale", "school"},
      {"Which employer did Cara Voss work for between 1971 and 1980?", "Cara Voss", "employer"},
      {"Who was the spouse of Dan Reed from 1940 to 1950?", "Dan Reed", "spouse"},
      {"Who was the head coach of Pearl Network in 2001?", "Pearl Network", "head coach"},
      {"Where was Hana Cole born?", "Hana Cole", "place of birth"},
  };
  std::map<std::string, std::pair<std::string, std::string>> answers;
  for (const auto& l : labeled) answers[l.question] = {l.entity, l.relation};
  MockBackend mock;
  mock.addResponder([&](const std::string& prompt, const GenerateParams&) -> std::optional<std::string> {
    for (const auto& [q, er] : answers) {
      if (prompt.find(q) != std::string::npos) {
        return "entity: " + er.first + "\nrelation: " + er.second;
      }
    }
    return std::nullopt;
  });
  for (const auto& l : labeled) {
    const auto by_rule = extractEntitiesRelations({l.question}, defaultExtractionRules(), nullptr);
    const auto by_backend = extractEntitiesRelations({l.question}, {}, &mock);
    EXPECT_EQ(by_rule.entities, by_backend.entities) << l.question;
    EXPECT_EQ(by_rule.relations, by_backend.relations) << l.question;
    EXPECT_EQ(by_backend.source, ExtractionResult::Source::kBackend);
  }
}

TEST(ConstructTGTest, KnoxBulletsParseElevenItems) {
  MockBackend mock;
  std::string seen_prompt;
  mock.addResponder([&](const std::string& prompt, const GenerateParams&) -> std::optional<std::string> {
    seen_prompt = prompt;
    return std::string(kKnoxTimeline);
  });
  const auto g = constructTG(kKnoxStory, {"Knox Cunningham"}, {"position"}, knoxTimes(), mock);
  EXPECT_NE(seen_prompt.find("Construct a timeline for Knox Cunningham's position. You should only "
                             "consider these time points (" +
                             std::string(kKnoxTimePoints) + ")."),
            std::string::npos);
  EXPECT_TRUE(seen_prompt.starts_with(kKnoxStory));
  ASSERT_EQ(g.facts().size(), 11u);
  EXPECT_EQ(g.events().size(), 11u);
  for (const auto& f : g.facts()) EXPECT_EQ(f.endpoint, Endpoint::kStart);
  EXPECT_EQ(g.facts().front().time, TimePoint::ofDay(1909, 4, 3));
  EXPECT_EQ(g.facts().front().key.subject, "Knox Cunningham");
  EXPECT_EQ(g.facts().back().time, TimePoint::ofDay(1976, 7, 29));
}

TEST(ConstructTGTest, StrictTimesRejectsUnlistedYear) {
  MockBackend mock;
  mock.addResponder(replyTo("Construct a timeline", kKnoxTimeline));
  ConstructOptions strict;
  strict.strict_times = true;
  // The bullets mention 1935, which is not among the offered points.
  try {
    constructTG(kKnoxStory, {"Knox Cunningham"}, {"position"}, knoxTimes(), mock, strict);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnparsableTimeline);
  }
}

TEST(ConstructTGTest, EmptyStoryAndEmptyReply) {
  MockBackend mock;
  mock.addResponder(replyTo("Construct", "   \n"));
  EXPECT_THROW(constructTG("  ", {"A"}, {"r"}, knoxTimes(), mock), Error);
  try {
    constructTG(kKnoxStory, {"Knox Cunningham"}, {"position"}, knoxTimes(), mock);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnparsableTimeline);
  }
}

TEST(ConstructTGTest, OneBadLineFailsTheWholeTimeline) {
  MockBackend mock;
  mock.addResponder(replyTo("Construct", "1950: Ava Stone worked at Nova Labs.\nnot a bullet\n"));
  EXPECT_THROW(constructTG("story", {"Ava Stone"}, {"worked at"}, knoxTimes(), mock), Error);
}

TEST(ConstructTGTest, OrdinalVariantWithoutTimes) {
  MockBackend mock;
  std::string seen_prompt;
  mock.addResponder([&](const std::string& prompt, const GenerateParams&) -> std::optional<std::string> {
    seen_prompt = prompt;
    return "1. Ava Stone was born in Oslo.\n2. Ava Stone worked at Nova Labs.\n";
  });
  ConstructOptions opts;
  opts.demos = {"DEMO ONE"};
  const auto g = constructTG("Ava grew up in Oslo and later joined Nova Labs.", {"Ava Stone"},
                             {"worked at"}, {}, mock, opts);
  EXPECT_TRUE(seen_prompt.starts_with("DEMO ONE\n\n"));
  EXPECT_EQ(seen_prompt.find("You should only consider"), std::string::npos);
  ASSERT_EQ(g.facts().size(), 2u);
  EXPECT_EQ(g.facts()[0].key, (EventKey{"Ava Stone", "was born in", "Oslo"}));
  EXPECT_EQ(g.facts()[0].time, TimePoint::ofYear(1));
  EXPECT_EQ(g.facts()[1].key, (EventKey{"Ava Stone", "worked at", "Nova Labs"}));
  EXPECT_EQ(g.facts()[1].time, TimePoint::ofYear(2));
}

TEST(ParseConstructedTimelineTest, UntilCueAddsEndFact) {
  const auto g = parseConstructedTimeline("1950: Ava Stone worked at Nova Labs, until 1960.",
                                          {"Ava Stone"});
  ASSERT_EQ(g.facts().size(), 2u);
  const EventKey key{"Ava Stone", "worked at", "Nova Labs"};
  EXPECT_EQ(g.interval(key)->start, TimePoint::ofYear(1950));
  EXPECT_EQ(g.interval(key)->end, TimePoint::ofYear(1960));
}

TEST(ParseConstructedTimelineTest, CanonicalTimelineIsAccepted) {
  EXPECT_EQ(parseConstructedTimeline(testing::kThompsonTimeline, {}), testing::thompsonGraph());
}

TEST(ConstructTGProperty, StrictOutputsUseOnlyOfferedTimes) {
  Rng rng(12);
  const char* people[] = {"Ava Stone", "Ben Hale", "Cara Voss"};
  const char* orgs[] = {"Iris Inn", "Nova Labs", "Pearl Network", "Kite Press"};
  for (int fixture = 0; fixture < 50; ++fixture) {
    std::vector<TimeExpression> times;
    std::set<int> years;
    while (years.size() < 4) years.insert(rng.between(1900, 1999));
    for (int y : years) times.push_back({std::to_string(y), TimePoint::ofYear(y), true});
    std::string reply;
    const std::string person = people[rng.below(3)];
    int line = 0;
    for (int y : years) {
      reply += std::to_string(y) + ": " + person + " worked at " + orgs[line++ % 4] + ".\n";
    }
    MockBackend mock;
    mock.addResponder(replyTo("Construct", reply));
    ConstructOptions strict;
    strict.strict_times = true;
    const auto g = constructTG("story", {person}, {"worked at"}, times, mock, strict);
    EXPECT_EQ(g.facts().size(), years.size());
    for (const auto& f : g.facts()) EXPECT_TRUE(years.contains(f.time.year()));

    // The same reply with one extra year outside the set must not pass.
    int stray = 1850 + static_cast<int>(rng.below(40));
    MockBackend bad;
    bad.addResponder(replyTo("Construct", reply + std::to_string(stray) + ": " + person +
                                              " was born in Oslo.\n"));
    EXPECT_THROW(constructTG("story", {person}, {"worked at"}, times, bad, strict), Error);
  }
}

// Responder for tg_verify prompts: the question is the prompt's last line.
MockBackend::Responder answerTable(std::map<std::string, std::string> answers) {
  return [answers = std::move(answers)](const std::string& prompt,
                                        const GenerateParams&) -> std::optional<std::string> {
    const auto lines = splitLines(prompt);
    const std::string q(trim(lines.back()));
    auto it = answers.find(q);
    return it == answers.end() ? std::optional<std::string>() : it->second;
  };
}

std::vector<TgQuestion> thompsonQuestions() {
  return {
      {"q0", "When did the event (John Thompson owned Pearl Network) start?", {"1942"}},
      {"q1", "When did the event (Sophia Parker was married to John Thompson) end?", {"1953"}},
      {"q2", "When did the event (John Thompson was born in Weston) occur?", {"1921"}},
  };
}

TEST(VerifyTGTest, EchoingGoldGivesNoFlags) {
  MockBackend mock;
  std::map<std::string, std::string> answers;
  for (const auto& q : thompsonQuestions()) answers[q.question] = "Answer: " + q.golds.front();
  mock.addResponder(answerTable(answers));
  EXPECT_TRUE(verifyTG(testing::thompsonGraph(), thompsonQuestions(), mock).empty());
}

TEST(VerifyTGTest, OneWrongAnswerGivesOneFlag) {
  MockBackend mock;
  std::map<std::string, std::string> answers;
  for (const auto& q : thompsonQuestions()) answers[q.question] = q.golds.front();
  answers[thompsonQuestions()[1].question] = "1950";
  mock.addResponder(answerTable(answers));
  auto flags = verifyTG(testing::thompsonGraph(), thompsonQuestions(), mock, 3);
  ASSERT_EQ(flags.size(), 1u);
  EXPECT_EQ(flags[0].qa_id, "q1");
  EXPECT_EQ(flags[0].event, testing::sophiaMarriedJohn());
  EXPECT_EQ(flags[0].expected, "1953");
  EXPECT_EQ(flags[0].model_answer, "1950");
  EXPECT_EQ(flags[0].status, QaFlagStatus::kPending);

  applyQaDecision(flags, "q1", QaFlagStatus::kAccepted);
  EXPECT_EQ(flags[0].status, QaFlagStatus::kAccepted);
  try {
    applyQaDecision(flags, "q1", QaFlagStatus::kAccepted);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownFlag);
  }
  EXPECT_THROW(applyQaDecision(flags, "q9", QaFlagStatus::kRejected), Error);
}

TEST(VerifyTGProperty, FlagRateEqualsInjectedErrorRate) {
  Rng rng(21);
  const auto g = testing::thompsonGraph();
  const auto events = g.events();
  std::vector<TgQuestion> qas;
  std::map<std::string, std::string> answers;
  std::set<std::string> corrupted;
  for (int i = 0; i < 200; ++i) {
    const auto& e = events[rng.below(events.size())];
    TgQuestion q{"q" + std::to_string(i),
                 "[" + std::to_string(i) + "] When did the event (" + eventPhrase(e) + ") start?",
                 {formatTime(*g.interval(e)->start)}};
    const bool corrupt = rng.bernoulli(0.2);
    answers[q.question] = corrupt ? "1800" : q.golds.front();
    if (corrupt) corrupted.insert(q.id);
    qas.push_back(std::move(q));
  }
  MockBackend mock;
  mock.addResponder(answerTable(answers));
  auto flags = verifyTG(g, qas, mock, 4);
  std::set<std::string> flagged;
  for (const auto& f : flags) flagged.insert(f.qa_id);
  EXPECT_EQ(flagged, corrupted);
  for (const auto& f : flags) {
    EXPECT_EQ(flags.size(), corrupted.size());
    EXPECT_FALSE(f.event.subject.empty());
  }
  // Accepting one flag resolves exactly that one.
  const std::string first = flags.front().qa_id;
  applyQaDecision(flags, first, QaFlagStatus::kAccepted);
  EXPECT_EQ(std::count_if(flags.begin(), flags.end(),
                          [](const QaFlag& f) { return f.status == QaFlagStatus::kPending; }),
            static_cast<long>(flags.size()) - 1);
}

}  // namespace
}  // namespace tgqa
