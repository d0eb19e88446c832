#include "tgqa/qa.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>

#include "tgqa/error.hpp"
#include "tgqa/rng.hpp"
#include "tgqa/text.hpp"

namespace tgqa {
namespace {

constexpr std::array<std::string_view, 10> kOrdinals = {
    "first", "second", "third", "fourth", "fifth",
    "sixth", "seventh", "eighth", "ninth", "tenth"};

const TimePoint& startOf(const TemporalGraph& graph, const EventKey& key) {
  const Interval* iv = graph.interval(key);
  if (!iv || !iv->start) {
    throw Error(ErrorCode::kMissingEndpoint, eventRef(key) + " has no start");
  }
  return *iv->start;
}

const EventKey& slotEvent(const QAItem& item, std::size_t i) {
  if (item.slots.events.size() <= i) {
    throw Error(ErrorCode::kMissingEndpoint,
                std::string(questionTypeTag(item.qtype)) + " item lacks event slot " +
                    std::to_string(i));
  }
  return item.slots.events[i];
}

int startYear(const TemporalGraph& graph, const EventKey& key) {
  const TimePoint& t = startOf(graph, key);
  if (!t.isYear()) {
    throw Error(ErrorCode::kGranularityMismatch, eventRef(key) + " start is not a plain year");
  }
  return t.year();
}

std::string boolText(bool b) { return b ? "True" : "False"; }

}  // namespace

std::string_view questionTypeTag(QuestionType type) {
  static constexpr std::array<std::string_view, kQuestionTypeCount> tags = {
      "Q0", "Q1", "Q2", "Q3", "Q4", "Q5", "Q6", "Q7", "Q8"};
  return tags[static_cast<std::size_t>(type)];
}

std::optional<QuestionType> parseQuestionType(std::string_view tag) {
  for (std::size_t i = 0; i < kQuestionTypeCount; ++i) {
    auto t = static_cast<QuestionType>(i);
    if (questionTypeTag(t) == tag) return t;
  }
  return std::nullopt;
}

bool isBooleanType(QuestionType type) {
  return type == QuestionType::kQ3 || type == QuestionType::kQ7 || type == QuestionType::kQ8;
}

std::string ordinalWord(int k) {
  if (k >= 1 && k <= static_cast<int>(kOrdinals.size())) return std::string(kOrdinals[k - 1]);
  return std::to_string(k) + "th";
}

std::string renderQuestion(QuestionType type, const QASlots& slots) {
  auto ref = [&](std::size_t i) { return eventRef(slots.events.at(i)); };
  switch (type) {
    case QuestionType::kQ0:
      return "Which event started first, " + ref(0) + " or " + ref(1) + "?";
    case QuestionType::kQ1: {
      std::vector<std::string> refs;
      for (const auto& e : slots.events) refs.push_back(eventRef(e));
      return "Given the following " + std::to_string(slots.events.size()) +
             " events: " + join(refs, ", ") + ", which event is the " +
             ordinalWord(slots.ordinal.value_or(1)) + " one in the chronological order?";
    }
    case QuestionType::kQ2:
      return "How long did the event " + ref(0) + " last?";
    case QuestionType::kQ3:
      return "True or false: event " + ref(0) + " was longer in duration than event " + ref(1) +
             "?";
    case QuestionType::kQ4:
      return "How much time passed between the start of " + ref(0) + " and the start of " +
             ref(1) + "?";
    case QuestionType::kQ5:
      return std::string("What happened right ") +
             (slots.direction.value_or(Direction::kBefore) == Direction::kBefore ? "before"
                                                                                  : "after") +
             " " + ref(0) + " started?";
    case QuestionType::kQ6:
      return "When did the " + ref(0) + " occur?";
    case QuestionType::kQ7:
      return "True or false: " + ref(0) + " and " + ref(1) + " happened at the same year?";
    case QuestionType::kQ8:
      return "True or false: " + ref(0) + " was still happening when " + ref(1) + " started?";
  }
  return {};
}

std::string oracleAnswer(const TemporalGraph& graph, const QAItem& item) {
  switch (item.qtype) {
    case QuestionType::kQ0: {
      const auto& a = slotEvent(item, 0);
      const auto& b = slotEvent(item, 1);
      const auto c = startOf(graph, a) <=> startOf(graph, b);
      if (c == 0) throw Error(ErrorCode::kAmbiguousTie, "both events start at the same time");
      return eventRef(c < 0 ? a : b);
    }
    case QuestionType::kQ1: {
      const auto& events = item.slots.events;
      const int k = item.slots.ordinal.value_or(0);
      if (k < 1 || k > static_cast<int>(events.size())) {
        throw Error(ErrorCode::kMissingEndpoint, "Q1 ordinal out of range");
      }
      std::vector<std::pair<TimePoint, std::size_t>> starts;
      for (std::size_t i = 0; i < events.size(); ++i) {
        starts.emplace_back(startOf(graph, events[i]), i);
      }
      std::sort(starts.begin(), starts.end());
      for (std::size_t i = 1; i < starts.size(); ++i) {
        if (starts[i].first == starts[i - 1].first) {
          throw Error(ErrorCode::kAmbiguousTie, "two listed events start at the same time");
        }
      }
      return eventRef(events[starts[k - 1].second]);
    }
    case QuestionType::kQ2:
      return std::to_string(durationOf(graph, slotEvent(item, 0)));
    case QuestionType::kQ3: {
      const int da = durationOf(graph, slotEvent(item, 0));
      const int db = durationOf(graph, slotEvent(item, 1));
      if (da == db) throw Error(ErrorCode::kAmbiguousTie, "durations are equal");
      return boolText(da > db);
    }
    case QuestionType::kQ4:
      return std::to_string(
          std::abs(startYear(graph, slotEvent(item, 0)) - startYear(graph, slotEvent(item, 1))));
    case QuestionType::kQ5: {
      const auto& a = slotEvent(item, 0);
      const TimePoint& sa = startOf(graph, a);
      const bool before = item.slots.direction.value_or(Direction::kBefore) == Direction::kBefore;
      std::optional<TimePoint> best;
      std::vector<EventKey> at_best;
      for (const auto& [key, iv] : graph.intervals()) {
        if (key == a || !iv.start) continue;
        const TimePoint& s = *iv.start;
        if (before ? !(s < sa) : !(sa < s)) continue;
        if (!best || (before ? *best < s : s < *best)) {
          best = s;
          at_best = {key};
        } else if (s == *best) {
          at_best.push_back(key);
        }
      }
      if (at_best.empty()) {
        throw Error(ErrorCode::kMissingEndpoint,
                    std::string("no event starts ") + (before ? "before " : "after ") + eventRef(a));
      }
      if (at_best.size() > 1) {
        throw Error(ErrorCode::kAmbiguousTie, "several events share the adjacent start time");
      }
      return eventRef(at_best.front());
    }
    case QuestionType::kQ6:
      return formatTime(startOf(graph, slotEvent(item, 0)));
    case QuestionType::kQ7: {
      const TimePoint& sa = startOf(graph, slotEvent(item, 0));
      const TimePoint& sb = startOf(graph, slotEvent(item, 1));
      if (sa.granularity() == Granularity::kApprox || sb.granularity() == Granularity::kApprox) {
        throw Error(ErrorCode::kGranularityMismatch, "approximate start has no single year");
      }
      return boolText(sa.year() == sb.year());
    }
    case QuestionType::kQ8: {
      const auto& a = slotEvent(item, 0);
      const Interval* iv = graph.interval(a);
      if (!iv || !iv->complete()) {
        throw Error(ErrorCode::kMissingEndpoint, eventRef(a) + " needs a start and an end");
      }
      const TimePoint& sb = startOf(graph, slotEvent(item, 1));
      return boolText(*iv->start <= sb && sb < *iv->end);
    }
  }
  return {};
}

namespace {

void addUnique(std::vector<std::string>& v, const std::string& s) {
  if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

std::vector<std::string> numericCandidates(std::set<int> values, const std::vector<std::string>& gold) {
  for (const auto& g : gold) {
    try {
      values.insert(std::stoi(g));
    } catch (const std::exception&) {
    }
  }
  if (values.size() == 1) values.insert(*values.begin() + 1);
  std::vector<std::string> out;
  for (int v : values) out.push_back(std::to_string(v));
  return out;
}

}  // namespace

std::vector<std::string> generateCandidates(const TemporalGraph& graph, const QAItem& item) {
  std::vector<std::string> out;
  switch (item.qtype) {
    case QuestionType::kQ3:
    case QuestionType::kQ7:
    case QuestionType::kQ8:
      out = {"True", "False"};
      break;
    case QuestionType::kQ0:
    case QuestionType::kQ1:
      for (const auto& e : item.slots.events) addUnique(out, eventRef(e));
      break;
    case QuestionType::kQ5:
      for (const auto& e : graph.events()) addUnique(out, eventRef(e));
      break;
    case QuestionType::kQ2: {
      std::set<int> values;
      for (const auto& [key, iv] : graph.intervals()) {
        if (iv.complete() && iv.start->isYear() && iv.end->isYear()) {
          values.insert(iv.end->year() - iv.start->year());
        }
      }
      out = numericCandidates(std::move(values), item.gold_answers);
      break;
    }
    case QuestionType::kQ4: {
      std::vector<int> years;
      for (const auto& [key, iv] : graph.intervals()) {
        if (iv.start && iv.start->isYear()) years.push_back(iv.start->year());
      }
      std::set<int> values;
      for (std::size_t i = 0; i < years.size(); ++i) {
        for (std::size_t j = i + 1; j < years.size(); ++j) values.insert(std::abs(years[i] - years[j]));
      }
      out = numericCandidates(std::move(values), item.gold_answers);
      break;
    }
    case QuestionType::kQ6: {
      std::set<TimePoint> times;
      for (const auto& f : graph.facts()) times.insert(f.time);
      for (const auto& g : item.gold_answers) {
        if (auto t = parseTime(g)) times.insert(*t);
      }
      if (times.size() == 1) times.insert(times.begin()->shiftedYears(1));
      for (const auto& t : times) out.push_back(formatTime(t));
      break;
    }
  }
  for (const auto& g : item.gold_answers) addUnique(out, g);
  return out;
}

namespace {

struct Generator {
  const TemporalGraph& graph;
  const QAConfig& config;
  std::vector<EventKey> started;   // events with a start
  std::vector<EventKey> complete;  // complete year intervals

  bool tryEmit(QuestionType type, QASlots slots, std::vector<QAItem>& out) {
    QAItem item;
    item.qtype = type;
    item.slots = std::move(slots);
    try {
      item.gold_answers = {oracleAnswer(graph, item)};
    } catch (const Error&) {
      return false;
    }
    item.question = renderQuestion(type, item.slots);
    item.candidates = generateCandidates(graph, item);
    if (item.candidates.size() < 2) return false;
    for (const auto& existing : out) {
      if (existing.qtype == type && existing.slots == item.slots) return false;
    }
    out.push_back(std::move(item));
    return true;
  }

  template <typename Fn>
  void fromPool(QuestionType type, std::vector<QASlots> pool, std::vector<QAItem>& out, Fn&&) {
    Rng rng(deriveSeed(config.seed, static_cast<std::uint64_t>(type) + 1));
    rng.shuffle(pool);
    int emitted = 0;
    const int cap = config.max_per_type[static_cast<std::size_t>(type)];
    for (auto& slots : pool) {
      if (emitted >= cap) break;
      if (tryEmit(type, std::move(slots), out)) ++emitted;
    }
  }

  std::vector<QASlots> orientedPairs(const std::vector<EventKey>& events, std::uint64_t stream) {
    Rng rng(deriveSeed(config.seed, stream));
    std::vector<QASlots> pool;
    for (std::size_t i = 0; i < events.size(); ++i) {
      for (std::size_t j = i + 1; j < events.size(); ++j) {
        QASlots s;
        if (rng.bernoulli(0.5)) {
          s.events = {events[i], events[j]};
        } else {
          s.events = {events[j], events[i]};
        }
        pool.push_back(std::move(s));
      }
    }
    return pool;
  }

  void run(std::vector<QAItem>& out) {
    auto enabled = [&](QuestionType t) { return config.enabled[static_cast<std::size_t>(t)]; };
    auto none = [] {};

    if (enabled(QuestionType::kQ0)) fromPool(QuestionType::kQ0, orientedPairs(started, 100), out, none);

    if (enabled(QuestionType::kQ1) && started.size() >= 3) {
      Rng rng(deriveSeed(config.seed, 101));
      std::vector<QASlots> pool;
      const int cap = config.max_per_type[1];
      const int max_n = std::min<int>(config.q1_max_events, static_cast<int>(started.size()));
      const int min_n = std::min(config.q1_min_events, max_n);
      for (int attempt = 0; attempt < cap * 20 && static_cast<int>(pool.size()) < cap * 4; ++attempt) {
        const int n = rng.between(min_n, max_n);
        std::vector<EventKey> picked = started;
        rng.shuffle(picked);
        picked.resize(n);
        QASlots s;
        s.events = std::move(picked);
        s.ordinal = rng.between(1, n);
        pool.push_back(std::move(s));
      }
      int emitted = 0;
      for (auto& s : pool) {
        if (emitted >= cap) break;
        if (tryEmit(QuestionType::kQ1, std::move(s), out)) ++emitted;
      }
    }

    if (enabled(QuestionType::kQ2)) {
      std::vector<QASlots> pool;
      for (const auto& e : complete) pool.push_back(QASlots{{e}, std::nullopt, std::nullopt});
      fromPool(QuestionType::kQ2, std::move(pool), out, none);
    }
    if (enabled(QuestionType::kQ3)) fromPool(QuestionType::kQ3, orientedPairs(complete, 103), out, none);
    if (enabled(QuestionType::kQ4)) fromPool(QuestionType::kQ4, orientedPairs(started, 104), out, none);
    if (enabled(QuestionType::kQ5)) {
      std::vector<QASlots> pool;
      for (const auto& e : started) {
        pool.push_back(QASlots{{e}, std::nullopt, Direction::kBefore});
        pool.push_back(QASlots{{e}, std::nullopt, Direction::kAfter});
      }
      fromPool(QuestionType::kQ5, std::move(pool), out, none);
    }
    if (enabled(QuestionType::kQ6)) {
      std::vector<QASlots> pool;
      for (const auto& e : started) pool.push_back(QASlots{{e}, std::nullopt, std::nullopt});
      fromPool(QuestionType::kQ6, std::move(pool), out, none);
    }
    if (enabled(QuestionType::kQ7)) {
      // Interleave same-year and different-year pairs so both answers appear.
      std::vector<QASlots> same, diff;
      for (auto& s : orientedPairs(started, 107)) {
        const auto& a = startOf(graph, s.events[0]);
        const auto& b = startOf(graph, s.events[1]);
        (a.year() == b.year() ? same : diff).push_back(std::move(s));
      }
      Rng rng(deriveSeed(config.seed, 7));
      rng.shuffle(same);
      rng.shuffle(diff);
      std::vector<QASlots> pool;
      for (std::size_t i = 0; i < std::max(same.size(), diff.size()); ++i) {
        if (i < same.size()) pool.push_back(same[i]);
        if (i < diff.size()) pool.push_back(diff[i]);
      }
      int emitted = 0;
      const int cap = config.max_per_type[7];
      for (auto& s : pool) {
        if (emitted >= cap) break;
        if (tryEmit(QuestionType::kQ7, std::move(s), out)) ++emitted;
      }
    }
    if (enabled(QuestionType::kQ8)) {
      std::vector<QASlots> pool;
      for (const auto& a : complete) {
        for (const auto& b : started) {
          if (a != b) pool.push_back(QASlots{{a, b}, std::nullopt, std::nullopt});
        }
      }
      fromPool(QuestionType::kQ8, std::move(pool), out, none);
    }
  }
};

// Items of one type whose first event shares subject and relation share
// their answers as candidates.
void shareGroupedAnswers(std::vector<QAItem>& items) {
  std::map<std::tuple<QuestionType, std::string, std::string>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].slots.events.empty()) continue;
    const auto& e = items[i].slots.events.front();
    groups[{items[i].qtype, e.subject, e.relation}].push_back(i);
  }
  for (const auto& [key, members] : groups) {
    if (members.size() < 2 || isBooleanType(std::get<0>(key))) continue;
    if (std::get<0>(key) == QuestionType::kQ0 || std::get<0>(key) == QuestionType::kQ1) continue;
    for (std::size_t i : members) {
      for (std::size_t j : members) {
        for (const auto& g : items[j].gold_answers) addUnique(items[i].candidates, g);
      }
    }
  }
}

}  // namespace

std::vector<QAItem> generateQAs(const TemporalGraph& graph, const QAConfig& config) {
  Generator gen{graph, config, {}, {}};
  for (const auto& key : graph.events()) {
    const Interval* iv = graph.interval(key);
    if (iv->start && iv->start->granularity() != Granularity::kApprox) gen.started.push_back(key);
    if (iv->complete() && iv->start->isYear() && iv->end->isYear()) gen.complete.push_back(key);
  }
  std::vector<QAItem> items;
  gen.run(items);
  shareGroupedAnswers(items);
  for (std::size_t i = 0; i < items.size(); ++i) items[i].id = "q" + std::to_string(i);
  return items;
}

std::vector<std::string> extractEventRefs(std::string_view text) {
  std::vector<std::string> refs;
  int depth = 0;
  std::size_t open = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '(') {
      if (depth == 0) open = i;
      ++depth;
    } else if (text[i] == ')' && depth > 0) {
      if (--depth == 0) refs.emplace_back(text.substr(open, i - open + 1));
    }
  }
  return refs;
}

std::optional<QAItem> parseQuestion(std::string_view question, const TemporalGraph& graph) {
  question = trim(question);
  // Locate every graph event reference, longest first at each position.
  struct Hit {
    std::size_t pos;
    std::size_t len;
    EventKey key;
  };
  std::vector<Hit> hits;
  for (const auto& key : graph.events()) {
    const std::string ref = eventRef(key);
    for (std::size_t p = question.find(ref); p != std::string_view::npos;
         p = question.find(ref, p + 1)) {
      hits.push_back(Hit{p, ref.size(), key});
    }
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return a.pos != b.pos ? a.pos < b.pos : a.len > b.len;
  });
  std::vector<EventKey> events;
  std::size_t covered_until = 0;
  for (const auto& h : hits) {
    if (h.pos < covered_until) continue;
    events.push_back(h.key);
    covered_until = h.pos + h.len;
  }
  if (events.empty()) return std::nullopt;

  std::vector<std::pair<QuestionType, QASlots>> guesses;
  auto with = [&](QuestionType t, QASlots s) { guesses.emplace_back(t, std::move(s)); };
  QASlots base{events, std::nullopt, std::nullopt};
  if (question.starts_with("Which event started first")) with(QuestionType::kQ0, base);
  if (question.starts_with("Given the following ")) {
    for (int k = 1; k <= static_cast<int>(events.size()); ++k) {
      QASlots s = base;
      s.ordinal = k;
      with(QuestionType::kQ1, s);
    }
  }
  if (question.starts_with("How long did the event")) with(QuestionType::kQ2, base);
  if (question.starts_with("True or false: event")) with(QuestionType::kQ3, base);
  if (question.starts_with("How much time passed")) with(QuestionType::kQ4, base);
  if (question.starts_with("What happened right")) {
    QASlots s = base;
    s.direction = Direction::kBefore;
    with(QuestionType::kQ5, s);
    s.direction = Direction::kAfter;
    with(QuestionType::kQ5, s);
  }
  if (question.starts_with("When did the")) with(QuestionType::kQ6, base);
  if (question.starts_with("True or false:")) {
    with(QuestionType::kQ7, base);
    with(QuestionType::kQ8, base);
  }
  for (auto& [type, slots] : guesses) {
    try {
      if (renderQuestion(type, slots) != question) continue;
    } catch (const std::out_of_range&) {
      continue;
    }
    QAItem item;
    item.qtype = type;
    item.slots = std::move(slots);
    item.question = std::string(question);
    return item;
  }
  return std::nullopt;
}

}  // namespace tgqa
