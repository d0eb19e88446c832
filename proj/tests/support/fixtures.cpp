#include "support/fixtures.hpp"

#include "tgqa/bootstrap.hpp"

#ifndef TGQA_DATA_DIR
#error "TGQA_DATA_DIR must point at the data directory"
#endif

namespace tgqa::testing {

EventKey key(const std::string& s, const std::string& r, const std::string& o) {
  return EventKey{s, r, o};
}

TemporalFact startAt(const EventKey& k, int year) {
  return TemporalFact{k, Endpoint::kStart, TimePoint::ofYear(year)};
}

TemporalFact endAt(const EventKey& k, int year) {
  return TemporalFact{k, Endpoint::kEnd, TimePoint::ofYear(year)};
}

EventKey ownedPearlNetwork() { return key("John Thompson", "owned", "Pearl Network"); }
EventKey sophiaMarriedJohn() { return key("Sophia Parker", "was married to", "John Thompson"); }
EventKey johnMarriedSophia() { return key("John Thompson", "was married to", "Sophia Parker"); }

std::vector<TemporalFact> thompsonFacts() {
  return {
      startAt(key("John Thompson", "was born in", "Weston"), 1921),
      startAt(ownedPearlNetwork(), 1942),
      startAt(sophiaMarriedJohn(), 1947),
      startAt(johnMarriedSophia(), 1947),
      endAt(sophiaMarriedJohn(), 1953),
      endAt(johnMarriedSophia(), 1953),
      endAt(ownedPearlNetwork(), 1967),
      startAt(key("John Thompson", "died in", "Riverside"), 1988),
      startAt(key("Sophia Parker", "died in", "Lancaster"), 1995),
  };
}

TemporalGraph thompsonGraph() { return sortChronological(thompsonFacts()); }

const char* const kThompsonTimeline =
    "(John Thompson was born in Weston) starts at 1921\n"
    "(John Thompson owned Pearl Network) starts at 1942\n"
    "(Sophia Parker was married to John Thompson) starts at 1947\n"
    "(John Thompson was married to Sophia Parker) starts at 1947\n"
    "(Sophia Parker was married to John Thompson) ends at 1953\n"
    "(John Thompson was married to Sophia Parker) ends at 1953\n"
    "(John Thompson owned Pearl Network) ends at 1967\n"
    "(John Thompson died in Riverside) starts at 1988\n"
    "(Sophia Parker died in Lancaster) starts at 1995";

QAItem thompsonDurationItem() {
  QAItem item;
  item.id = "q0";
  item.qtype = QuestionType::kQ3;
  item.slots.events = {ownedPearlNetwork(), sophiaMarriedJohn()};
  item.question =
      "True or false: event (John Thompson owned Pearl Network) was longer in duration than "
      "event (Sophia Parker was married to John Thompson)?";
  item.gold_answers = {"True"};
  item.candidates = {"True", "False"};
  item.cot =
      "The duration for each event can be calculated as follows:\n"
      "(John Thompson owned Pearl Network) starts at 1942, ends at 1967, 1967 - 1942 = 25\n"
      "(Sophia Parker was married to John Thompson) starts at 1947, ends at 1953, "
      "1953 - 1947 = 6\n"
      "25 is greater than 6 , thus, the answer is True.";
  return item;
}

QAItem thompsonFirstItem() {
  QAItem item;
  item.id = "q1";
  item.qtype = QuestionType::kQ0;
  item.slots.events = {ownedPearlNetwork(), johnMarriedSophia()};
  item.question =
      "Which event started first, (John Thompson owned Pearl Network) or (John Thompson was "
      "married to Sophia Parker)?";
  item.gold_answers = {"(John Thompson owned Pearl Network)"};
  item.candidates = {"(John Thompson owned Pearl Network)",
                     "(John Thompson was married to Sophia Parker)"};
  return item;
}

DatasetSample thompsonSample() {
  DatasetSample s;
  s.id = "thompson";
  s.graph = thompsonGraph();
  s.qas = {thompsonDurationItem()};
  s.provenance.split = "train";
  return s;
}

const char* const kSynonymDropTimeline =
    "(John Thompson was born in Weston) starts at 1921\n"
    "(John Thompson run Pearl Network) starts at 1942\n"
    "(Sophia Parker and John Thompson became life partner) starts at 1947\n"
    "(John Thompson and Sophia Parker became life partner) starts at 1947\n"
    "(Sophia Parker and John Thompson became life partner) ends at 1953\n"
    "(John Thompson and Sophia Parker became life partner) ends at 1953\n"
    "(John Thompson run Pearl Network) ends at 1967";

const char* const kRemappedTimeline =
    "(James Brown was born in Oslo) starts at 1931\n"
    "(James Brown owned Iris Inn) starts at 1952\n"
    "(Ella Perry was married to James Brown) starts at 1957\n"
    "(James Brown was married to Ella Perry) starts at 1957\n"
    "(Ella Perry was married to James Brown) ends at 1963\n"
    "(James Brown was married to Ella Perry) ends at 1963\n"
    "(James Brown owned Iris Inn) ends at 1977\n"
    "(James Brown died in Auckland) starts at 1998\n"
    "(Ella Perry died in Monaco) starts at 2005";

const char* const kAugmentedRemappedCoT =
    "The duration for each event can be calculated as follows:\n"
    "(James Brown owned Iris Inn) starts at 1952, ends at 1977, 1977 - 1952 = 25\n"
    "(Ella Perry was married to James Brown) starts at 1957, ends at 1963, 1963 - 1957 = 6\n"
    "25 is greater than 6 , thus, the answer is True.";

EntityMap augmentedEntityMap() {
  EntityMap m;
  m.mapping = {{"John Thompson", "James Brown"}, {"Weston", "Oslo"},
               {"Pearl Network", "Iris Inn"},    {"Sophia Parker", "Ella Perry"},
               {"Riverside", "Auckland"},        {"Lancaster", "Monaco"}};
  m.entity_type = {{"John Thompson", "person"}, {"Weston", "place"},
                   {"Pearl Network", "organization"}, {"Sophia Parker", "person"},
                   {"Riverside", "place"}, {"Lancaster", "place"}};
  return m;
}

const char* const kLiamTimeline =
    "(Liam Mitchell was born in Harrison) starts at 1885\n"
    "(Maddox Reynolds was born in Glenville) starts at 1893\n"
    "(Liam Mitchell was married to Emma Scott) starts at 1916\n"
    "(Emma Scott was married to Liam Mitchell) starts at 1916\n"
    "(Liam Mitchell was married to Emma Scott) ends at 1918\n"
    "(Emma Scott was married to Liam Mitchell) ends at 1918\n"
    "(Maddox Reynolds was married to Liam Mitchell) starts at 1922\n"
    "(Liam Mitchell was married to Maddox Reynolds) starts at 1922\n"
    "(Maddox Reynolds was married to Liam Mitchell) ends at 1928\n"
    "(Liam Mitchell was married to Maddox Reynolds) ends at 1928\n"
    "(Liam Mitchell died in Boston) starts at 1941\n"
    "(Emma Scott died in Oceanview) starts at 1984";

TemporalGraph liamGraph() { return parseTimeline(kLiamTimeline); }

QAItem liamDurationItem() {
  QAItem item;
  item.id = "q0";
  item.qtype = QuestionType::kQ3;
  item.slots.events = {key("Liam Mitchell", "was married to", "Maddox Reynolds"),
                       key("Emma Scott", "was married to", "Liam Mitchell")};
  item.question = renderQuestion(item.qtype, item.slots);
  item.gold_answers = {"True"};
  item.candidates = {"True", "False"};
  return item;
}

TemporalGraph mollyGraph() {
  const EventKey molly_married = key("Molly Adams", "was married to", "Liam Thomas Dawson");
  const EventKey liam_married = key("Liam Thomas Dawson", "was married to", "Molly Adams");
  return sortChronological({
      startAt(key("Molly Adams", "was born in", "Seattle"), 1896),
      startAt(key("Liam Thomas Dawson", "was born in", "Seattle"), 1896),
      startAt(molly_married, 1920),
      startAt(liam_married, 1920),
      startAt(key("Liam Thomas Dawson", "won prize",
                  "James Parker Prize for Advanced Biomedical Studies"),
              1946),
      startAt(key("Liam Thomas Dawson", "won prize", "Champion Award in Biology or Science"),
              1947),
      startAt(key("Liam Thomas Dawson", "won prize", "Oakley Smith Prize"), 1948),
      startAt(key("Liam Thomas Dawson", "won prize", "Member of the National Academy"), 1950),
      endAt(molly_married, 1957),
      endAt(liam_married, 1957),
      startAt(key("Liam Thomas Dawson", "died in", "Kingsville, Texas"), 1984),
  });
}

const char* const kMollyStoryPrompt =
    "(Molly Adams was born in Seattle) starts at 1896\n"
    "(Liam Thomas Dawson was born in Seattle) starts at 1896\n"
    "(Molly Adams was married to Liam Thomas Dawson) starts at 1920\n"
    "(Liam Thomas Dawson was married to Molly Adams) starts at 1920\n"
    "(Liam Thomas Dawson won prize James Parker Prize for Advanced Biomedical Studies) starts "
    "at 1946\n"
    "(Liam Thomas Dawson won prize Champion Award in Biology or Science) starts at 1947\n"
    "(Liam Thomas Dawson won prize Oakley Smith Prize) starts at 1948\n"
    "(Liam Thomas Dawson won prize Member of the National Academy) starts at 1950\n"
    "(Molly Adams was married to Liam Thomas Dawson) ends at 1957\n"
    "(Liam Thomas Dawson was married to Molly Adams) ends at 1957\n"
    "(Liam Thomas Dawson died in Kingsville, Texas) starts at 1984\n"
    "\n"
    "Based on the above facts, generate a short story for me.";

std::string dataPath(const std::string& relative) {
  return std::string(TGQA_DATA_DIR) + "/" + relative;
}

}  // namespace tgqa::testing
