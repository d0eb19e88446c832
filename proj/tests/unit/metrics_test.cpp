#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "support/oracles.hpp"
#include "tgqa/metrics.hpp"
#include "tgqa/mock_backend.hpp"
#include "tgqa/rng.hpp"

namespace tgqa {
namespace {

// Bag-of-tokens F1 computed straight from the definition.
double f1Oracle(const std::string& pred, const std::string& gold) {
  auto bag = [](const std::string& s) {
    std::map<std::string, int> m;
    const std::string n = normalizeAnswer(s);
    std::size_t i = 0;
    while (i < n.size()) {
      const std::size_t j = std::min(n.find(' ', i), n.size());
      if (j > i) ++m[n.substr(i, j - i)];
      i = j + 1;
    }
    return m;
  };
  const auto p = bag(pred), g = bag(gold);
  int np = 0, ng = 0, common = 0;
  for (const auto& [w, c] : p) np += c;
  for (const auto& [w, c] : g) ng += c;
  for (const auto& [w, c] : p) {
    if (auto it = g.find(w); it != g.end()) common += std::min(c, it->second);
  }
  if (np == 0 && ng == 0) return 1.0;
  if (common == 0) return 0.0;
  const double prec = static_cast<double>(common) / np, rec = static_cast<double>(common) / ng;
  return 2 * prec * rec / (prec + rec);
}

std::string randomAnswer(Rng& rng) {
  static const char* words[] = {"the", "a", "an", "1947", "True", "false", "Pearl", "network",
                                "in", "John", "Thompson", "(owned)", "x,", "Weston."};
  std::string s;
  const std::size_t n = rng.below(6);
  for (std::size_t i = 0; i < n; ++i) {
    s += words[rng.below(std::size(words))];
    s += rng.bernoulli(0.2) ? "  " : " ";
  }
  return s;
}

TEST(NormalizeAnswerTest, Examples) {
  EXPECT_EQ(normalizeAnswer("True."), "true");
  EXPECT_EQ(normalizeAnswer("The Pearl Network"), "pearl network");
  EXPECT_EQ(normalizeAnswer("  (John   Thompson owned an Inn) "), "john thompson owned inn");
  EXPECT_EQ(normalizeAnswer(""), "");
  EXPECT_EQ(normalizeAnswer("theory"), "theory");
}

TEST(NormalizeAnswerProperty, Idempotent) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const std::string once = normalizeAnswer(randomAnswer(rng));
    EXPECT_EQ(normalizeAnswer(once), once);
  }
}

TEST(ExactMatchTest, Examples) {
  EXPECT_EQ(exactMatch("1947", {"1947"}), 1);
  EXPECT_EQ(exactMatch("in 1947", {"1947"}), 0);
  EXPECT_EQ(exactMatch("the Iris Inn", {"Nova Labs", "Iris Inn", "Kite Press"}), 1);
  EXPECT_EQ(exactMatch("x", {}), 0);
}

TEST(TokenF1Test, Examples) {
  EXPECT_DOUBLE_EQ(tokenF1("Pearl Network", {"Pearl Network"}), 1.0);
  EXPECT_NEAR(tokenF1("in 1947", {"1947"}), 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(tokenF1("1953", {"1947"}), 0.0);
  EXPECT_DOUBLE_EQ(tokenF1("", {"1947"}), 0.0);
  EXPECT_DOUBLE_EQ(tokenF1("1947", {""}), 0.0);
  EXPECT_NEAR(tokenF1("in 1947", {"1953", "1947"}), 2.0 / 3.0, 1e-12);
}

TEST(MetricsProperty, AgreesWithOracleAndOrdered) {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const std::string pred = randomAnswer(rng);
    std::vector<std::string> golds;
    const std::size_t n = 1 + rng.below(3);
    for (std::size_t g = 0; g < n; ++g) golds.push_back(randomAnswer(rng));
    double best = 0.0;
    for (const auto& g : golds) best = std::max(best, f1Oracle(pred, g));
    const double f1 = tokenF1(pred, golds);
    const int em = exactMatch(pred, golds);
    EXPECT_NEAR(f1, best, 1e-12) << pred;
    EXPECT_LE(em, f1);
    EXPECT_LE(f1, 1.0);
    EXPECT_GE(f1, 0.0);
    if (em == 1) EXPECT_DOUBLE_EQ(f1, 1.0);
  }
}

// Gives each candidate continuation a chosen log-prob per token.
MockBackend riggedBackend(std::map<std::string, double> per_token) {
  MockBackend mock;
  mock.setScoreOverride(
      [per_token = std::move(per_token)](const std::string&, const std::string& c) -> std::optional<double> {
        auto it = per_token.find(c);
        return it == per_token.end() ? std::nullopt : std::optional<double>(it->second);
      });
  return mock;
}

TEST(PerplexityTest, RiggedChoices) {
  MockBackend gold_best = riggedBackend({{" 1942", -0.1}, {" 1947", -2.0}, {" 1953", -3.0}});
  EXPECT_EQ(perplexityAccuracy(gold_best, "Q:", {"1942", "1947", "1953"}, {"1942"}), 1);
  MockBackend gold_lower = riggedBackend({{" True", -1.5}, {" False", -0.5}});
  EXPECT_EQ(perplexityAccuracy(gold_lower, "Q:", {"True", "False"}, {"True"}), 0);

  MockBackend tie = riggedBackend({{" True", -1.0}, {" False", -1.0}});
  const auto c = perplexityChoice(tie, "Q:", {"False", "True"}, {"True"});
  EXPECT_EQ(c.prediction, "False");
  EXPECT_EQ(c.correct, 0);
  EXPECT_EQ(c.scores, (std::vector<double>{-1.0, -1.0}));
}

TEST(PerplexityTest, ArgmaxMatchesHandScoredRankings) {
  Rng rng(3);
  const std::vector<std::string> pool = {"1942", "1947", "1953", "1967", "True", "False",
                                         "(John Thompson owned Pearl Network)",
                                         "(Sophia Parker was married to John Thompson)", "Weston"};
  for (int fixture = 0; fixture < 50; ++fixture) {
    const std::uint64_t seed = rng.next();
    MockBackend mock(seed);
    const std::string prompt = "Question " + std::to_string(fixture) + "?\nAnswer:";
    std::vector<std::string> cands = pool;
    rng.shuffle(cands);
    cands.resize(2 + rng.below(5));
    std::size_t best = 0;
    std::vector<double> hand;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      hand.push_back(testing::publishedSequenceLogProb(prompt, " " + cands[i], seed));
      if (hand[i] > hand[best]) best = i;
    }
    const auto choice = perplexityChoice(mock, prompt, cands, {cands[best]}, 2);
    EXPECT_EQ(choice.prediction, cands[best]) << fixture;
    EXPECT_EQ(choice.correct, 1);
    for (std::size_t i = 0; i < cands.size(); ++i) EXPECT_NEAR(choice.scores[i], hand[i], 1e-12);
  }
}

// Multiplies every token probability by exp(delta) (delta < 0).
class ScaledBackend : public MockBackend {
 public:
  ScaledBackend(std::uint64_t seed, double delta) : MockBackend(seed), delta_(delta) {}
  std::vector<TokenScore> scoreContinuation(const std::string& p, const std::string& c) override {
    auto out = MockBackend::scoreContinuation(p, c);
    for (auto& t : out) t.logprob += delta_;
    return out;
  }

 private:
  double delta_;
};

TEST(PerplexityProperty, ArgmaxInvariantUnderUniformRescaling) {
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t seed = rng.next();
    std::vector<std::string> cands;
    for (int k = 0; k < 4; ++k) cands.push_back(std::to_string(1900 + rng.below(100)));
    MockBackend plain(seed);
    ScaledBackend scaled(seed, -rng.unit() * 3.0);
    EXPECT_EQ(perplexityChoice(plain, "P", cands, {"x"}).prediction,
              perplexityChoice(scaled, "P", cands, {"x"}).prediction);
  }
}

TEST(AggregateReportTest, MacroIsUnweightedOverCategories) {
  std::vector<ItemScore> items;
  for (int i = 0; i < 99; ++i) items.push_back({QuestionType::kQ1, 1.0, 1.0, 1.0});
  items.push_back({QuestionType::kQ4, 0.0, 0.0, 0.0});
  const auto r = aggregateReport(items);
  EXPECT_EQ(r.total_items, 100);
  EXPECT_EQ(r.per_category.size(), 2u);
  EXPECT_EQ(r.per_category.at(QuestionType::kQ1).n, 99);
  EXPECT_DOUBLE_EQ(r.macro.em, 0.5);
  EXPECT_DOUBLE_EQ(r.macro.f1, 0.5);
  EXPECT_DOUBLE_EQ(r.macro.acc, 0.5);
}

TEST(AggregateReportTest, SingleCategoryAndEmpty) {
  const auto one = aggregateReport({{QuestionType::kQ2, 1.0, 1.0, 0.0}, {QuestionType::kQ2, 0.0, 0.5, 1.0}});
  EXPECT_DOUBLE_EQ(one.macro.em, 0.5);
  EXPECT_DOUBLE_EQ(one.macro.f1, 0.75);
  EXPECT_DOUBLE_EQ(one.macro.acc, 0.5);
  const auto empty = aggregateReport({});
  EXPECT_EQ(empty.total_items, 0);
  EXPECT_TRUE(empty.per_category.empty());
}

TEST(AggregateReportProperty, PermutationInvariantAndBounded) {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    std::vector<ItemScore> items;
    const std::size_t n = 1 + rng.below(40);
    for (std::size_t k = 0; k < n; ++k) {
      const double f1 = rng.unit();
      items.push_back({static_cast<QuestionType>(rng.below(kQuestionTypeCount)),
                       static_cast<double>(rng.bernoulli(0.3)), f1, static_cast<double>(rng.bernoulli(0.5))});
    }
    const auto a = aggregateReport(items);
    rng.shuffle(items);
    const auto b = aggregateReport(items);
    EXPECT_NEAR(a.macro.em, b.macro.em, 1e-12);
    EXPECT_NEAR(a.macro.f1, b.macro.f1, 1e-12);
    EXPECT_NEAR(a.macro.acc, b.macro.acc, 1e-12);
    for (double v : {a.macro.em, a.macro.f1, a.macro.acc}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(ReportFormatTest, JsonAndTableRow) {
  const auto r = aggregateReport({{QuestionType::kQ0, 1.0, 1.0, 1.0}, {QuestionType::kQ3, 0.0, 0.5, 0.0}});
  EXPECT_EQ(reportTableRow(r, "test"), "| test | 0.500 | 0.750 | 0.500 |");
  const auto j = nlohmann::json::parse(reportToJson(r));
  EXPECT_EQ(j["total_items"], 2);
  EXPECT_DOUBLE_EQ(j["macro"]["f1"].get<double>(), 0.75);
}

}  // namespace
}  // namespace tgqa
