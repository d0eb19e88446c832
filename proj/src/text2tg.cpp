#include "tgqa/text2tg.hpp"

#include <algorithm>
#include <set>

#include "tgqa/bootstrap.hpp"
#include "tgqa/error.hpp"
#include "tgqa/metrics.hpp"
#include "tgqa/prompts.hpp"
#include "tgqa/qa.hpp"
#include "tgqa/text.hpp"

namespace tgqa {
namespace {

const std::string kMonthPattern =
    "(January|February|March|April|May|June|July|August|September|October|November|December|"
    "Jan|Feb|Mar|Apr|Jun|Jul|Aug|Sept|Sep|Oct|Nov|Dec)\\.?";

std::optional<int> number(const std::string& s) {
  if (s.empty() || s.size() > 4 || s[0] == '0') return std::nullopt;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
  }
  return std::stoi(s);
}

const std::regex& timeScanner() {
  static const std::regex re(
      "\\b(\\d{1,2}) " + kMonthPattern + " (\\d{4})\\b"            // 1-3: day month year
      "|\\b" + kMonthPattern + " (\\d{1,2}), (\\d{4})\\b"          // 4-6: month day, year
      "|\\b" + kMonthPattern + " (\\d{4})\\b"                      // 7-8: month year
      "|\\b(early|mid|late)[ -](\\d{3}0)s\\b"                      // 9-10
      "|\\bbetween (\\d{4}) and (\\d{4})\\b"                       // 11-12
      "|\\b(\\d{3}0)s\\b"                                          // 13
      "|\\b(\\d{4})\\b",                                           // 14
      std::regex::icase);
  return re;
}

std::optional<TimePoint> fromMatch(const std::smatch& m) {
  auto month = [&](int g) { return monthFromName(m[g].str()); };
  try {
    if (m[1].matched) {
      auto d = number(m[1]);
      auto mo = month(2);
      auto y = number(m[3]);
      if (d && mo && y && *d >= 1 && *d <= daysInMonth(*y, *mo)) return TimePoint::ofDay(*y, *mo, *d);
    } else if (m[4].matched) {
      auto mo = month(4);
      auto d = number(m[5]);
      auto y = number(m[6]);
      if (d && mo && y && *d >= 1 && *d <= daysInMonth(*y, *mo)) return TimePoint::ofDay(*y, *mo, *d);
    } else if (m[7].matched) {
      auto mo = month(7);
      auto y = number(m[8]);
      if (mo && y) return TimePoint::ofMonth(*y, *mo);
    } else if (m[9].matched) {
      const std::string q = toLower(m[9].str());
      auto d = number(m[10]);
      if (!d) return std::nullopt;
      if (q == "early") return TimePoint::approx(*d, *d + 3);
      if (q == "mid") return TimePoint::approx(*d + 4, *d + 6);
      return TimePoint::approx(*d + 7, *d + 9);
    } else if (m[11].matched) {
      auto lo = number(m[11]);
      auto hi = number(m[12]);
      if (lo && hi && *lo < *hi) return TimePoint::approx(*lo, *hi);
    } else if (m[13].matched) {
      auto d = number(m[13]);
      if (d) return TimePoint::approx(*d, *d + 9);
    } else if (m[14].matched) {
      auto y = number(m[14]);
      if (y) return TimePoint::ofYear(*y);
    }
  } catch (const Error&) {
  }
  return std::nullopt;
}

std::string stripSentence(std::string_view s) {
  s = trim(s);
  while (!s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == ';')) s.remove_suffix(1);
  return std::string(trim(s));
}

// Sentence to event key: lexicon split, else a known entity prefix, else
// first word / middle / last word.
std::optional<EventKey> sentenceToKey(const std::string& sentence,
                                      const std::vector<std::string>& entities) {
  if (auto k = defaultLexicon().split(sentence)) {
    const auto& rels = defaultLexicon().relations();
    if (std::find(rels.begin(), rels.end(), k->relation) != rels.end()) return k;
  }
  std::vector<std::string> sorted = entities;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  for (const auto& e : sorted) {
    if (e.empty() || !sentence.starts_with(e) || sentence.size() <= e.size() ||
        sentence[e.size()] != ' ') {
      continue;
    }
    const auto rest = splitWords(std::string_view(sentence).substr(e.size() + 1));
    if (rest.size() < 2) break;
    std::vector<std::string> rel(rest.begin(), rest.end() - 1);
    return EventKey{e, join(rel, " "), std::string(rest.back())};
  }
  const auto words = splitWords(sentence);
  if (words.size() < 3) return std::nullopt;
  std::vector<std::string> mid(words.begin() + 1, words.end() - 1);
  return EventKey{std::string(words.front()), join(mid, " "), std::string(words.back())};
}

[[noreturn]] void unparsable(const std::string& why) {
  throw Error(ErrorCode::kUnparsableTimeline, why);
}

}  // namespace

std::optional<TimePoint> normalizeTimeExpression(std::string_view surface) {
  const std::string s(trim(surface));
  if (s.empty()) return std::nullopt;
  if (auto t = parseTime(s)) return t;
  std::smatch m;
  if (!std::regex_match(s, m, timeScanner())) return std::nullopt;
  return fromMatch(m);
}

std::vector<TimeExpression> scanTimeExpressions(std::string_view text) {
  std::vector<TimeExpression> out;
  std::set<std::string> seen;
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), timeScanner());
       it != std::sregex_iterator(); ++it) {
    const std::string surface = it->str();
    if (!seen.insert(surface).second) continue;
    TimeExpression e{surface, fromMatch(*it), false};
    e.valid = e.normalized.has_value();
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<TimeExpression> identifyTimeExpressions(std::string_view story, Backend* backend) {
  std::vector<TimeExpression> found;
  if (!backend) {
    found = scanTimeExpressions(story);
  } else {
    const std::string reply =
        backend->generate(renderPrompt("time_extract", {{"story", std::string(story)}}), {});
    // Reply items may be quoted, comma separated or one per line.
    std::string flat = reply;
    for (char& c : flat) {
      if (c == '\'' || c == '"' || c == '[' || c == ']') c = '\n';
    }
    std::set<std::string> seen;
    for (auto line : splitLines(flat)) {
      std::string whole = stripSentence(line);
      if (whole.starts_with("- ")) whole = whole.substr(2);
      if (auto t = normalizeTimeExpression(whole)) {
        if (seen.insert(whole).second) found.push_back(TimeExpression{whole, t, true});
        continue;
      }
      for (auto part : split(line, ',')) {
        std::string item = stripSentence(part);
        if (item.starts_with("- ")) item = item.substr(2);
        if (item.empty() || !seen.insert(item).second) continue;
        auto t = normalizeTimeExpression(item);
        if (!t) {
          // Day-month-year lists are often split at the comma; rescan the line.
          for (auto& e : scanTimeExpressions(line)) {
            if (seen.insert(e.surface).second) found.push_back(std::move(e));
          }
          continue;
        }
        found.push_back(TimeExpression{item, t, true});
      }
    }
  }
  std::erase_if(found, [](const TimeExpression& e) { return !e.valid; });
  return found;
}

std::vector<ExtractionRule> defaultExtractionRules() {
  const auto icase = std::regex::icase;
  return {
      {"position-held", std::regex("^Which position did (.+?) hold\\b.*", icase), 1, 0, "position"},
      {"which-noun-did",
       std::regex("^(?:Which|What) ([A-Za-z ]+?) did (.+?) (?:play for|work for|attend|belong to|"
                  "join|own|marry|lead|coach|study at|graduate from|live in)\\b.*",
                  icase),
       2, 1, ""},
      {"who-was-the-of",
       std::regex("^Who was the ([A-Za-z ]+?) of (.+?) (?:from|in|between|before|after|during|"
                  "until|when|at)\\b.*",
                  icase),
       2, 1, ""},
      {"where-born", std::regex("^Where was (.+?) born\\b.*", icase), 1, 0, "place of birth"},
  };
}

ExtractionResult extractEntitiesRelations(const std::vector<std::string>& questions,
                                          const std::vector<ExtractionRule>& rules,
                                          Backend* backend) {
  ExtractionResult result;
  auto addUnique = [](std::vector<std::string>& v, std::string s) {
    s = std::string(trim(s));
    if (!s.empty() && std::find(v.begin(), v.end(), s) == v.end()) v.push_back(std::move(s));
  };
  for (const auto& q : questions) {
    const std::string question(trim(q));
    bool matched = false;
    for (const auto& ref : extractEventRefs(question)) {
      if (auto k = defaultLexicon().split(std::string_view(ref).substr(1, ref.size() - 2))) {
        addUnique(result.entities, k->subject);
        addUnique(result.entities, k->object);
        addUnique(result.relations, k->relation);
        matched = true;
      }
    }
    for (const auto& rule : rules) {
      if (matched) break;
      std::smatch m;
      if (!std::regex_match(question, m, rule.pattern)) continue;
      addUnique(result.entities, m[rule.entity_group].str());
      addUnique(result.relations,
                rule.relation_group == 0 ? rule.relation : toLower(m[rule.relation_group].str()));
      matched = true;
    }
    if (matched) continue;
    if (!backend) {
      throw Error(ErrorCode::kNoExtractorConfigured,
                  "no rule matches '" + question + "' and no backend is configured");
    }
    const std::string reply =
        backend->generate(renderPrompt("qa_extract", {{"question", question}}), {});
    for (auto line : splitLines(reply)) {
      const std::string lower = toLower(trim(line));
      if (lower.starts_with("entity:")) addUnique(result.entities, std::string(trim(line).substr(7)));
      if (lower.starts_with("relation:")) {
        addUnique(result.relations, std::string(trim(line).substr(9)));
      }
    }
    result.source = ExtractionResult::Source::kBackend;
  }
  return result;
}

TemporalGraph parseConstructedTimeline(std::string_view text,
                                       const std::vector<std::string>& entities, bool ordinal) {
  if (trim(text).empty()) unparsable("empty timeline");
  try {
    TemporalGraph g = parseTimeline(text);
    if (!g.empty()) return g;
  } catch (const Error&) {
  }
  static const std::regex until_re("^(.*?),? until (.+)$");
  static const std::regex ordinal_re("^(\\d{1,3})[.):] +(.+)$");
  std::vector<TemporalFact> facts;
  std::size_t line_no = 0;
  for (auto raw : splitLines(text)) {
    ++line_no;
    std::string line(trim(raw));
    if (line.starts_with("- ") || line.starts_with("* ")) line = line.substr(2);
    if (line.empty()) continue;
    std::optional<TimePoint> start;
    std::string sentence;
    if (ordinal) {
      std::smatch m;
      if (!std::regex_match(line, m, ordinal_re)) {
        unparsable("line " + std::to_string(line_no) + " is not a numbered event");
      }
      start = TimePoint::ofYear(std::stoi(m[1].str()));
      sentence = stripSentence(m[2].str());
    } else {
      const std::size_t colon = line.find(": ");
      if (colon == std::string::npos) {
        unparsable("line " + std::to_string(line_no) + " has no '<time>: ' prefix");
      }
      start = normalizeTimeExpression(line.substr(0, colon));
      if (!start) unparsable("line " + std::to_string(line_no) + " has an invalid time");
      sentence = stripSentence(line.substr(colon + 2));
    }
    std::optional<TimePoint> end;
    std::smatch um;
    if (std::regex_match(sentence, um, until_re)) {
      if (auto t = normalizeTimeExpression(um[2].str())) {
        end = t;
        sentence = stripSentence(um[1].str());
      }
    }
    auto key = sentenceToKey(sentence, entities);
    if (!key) unparsable("line " + std::to_string(line_no) + " is too short for an event");
    facts.push_back(TemporalFact{*key, Endpoint::kStart, *start});
    if (end) facts.push_back(TemporalFact{*key, Endpoint::kEnd, *end});
  }
  if (facts.empty()) unparsable("no events in the timeline");
  try {
    return sortChronological(std::move(facts));
  } catch (const Error& e) {
    unparsable(e.what());
  }
}

TemporalGraph constructTG(std::string_view story, const std::vector<std::string>& entities,
                          const std::vector<std::string>& relations,
                          const std::vector<TimeExpression>& times, Backend& backend,
                          const ConstructOptions& options) {
  if (trim(story).empty()) unparsable("empty story");
  const bool ordinal = times.empty();
  SlotMap slots{{"story", std::string(story)},
                {"subject", entities.empty() ? std::string() : entities.front()},
                {"relation", relations.empty() ? std::string() : relations.front()}};
  std::vector<std::string> surfaces;
  for (const auto& t : times) surfaces.push_back(t.surface);
  slots["time_points"] = join(surfaces, ", ");
  std::string prompt;
  for (const auto& d : options.demos) prompt += d + "\n\n";
  prompt += renderPrompt(ordinal ? "tg_construct_ordinal" : "tg_construct", slots);
  const std::string reply = backend.generate(prompt, options.generation);
  TemporalGraph g = parseConstructedTimeline(reply, entities, ordinal);
  if (options.strict_times && !ordinal) {
    std::set<TimePoint> allowed;
    for (const auto& t : times) {
      if (t.normalized) allowed.insert(*t.normalized);
    }
    for (const auto& f : g.facts()) {
      if (!allowed.contains(f.time)) {
        unparsable("time " + formatTime(f.time) + " is not among the provided time points");
      }
    }
  }
  return g;
}

std::vector<QaFlag> verifyTG(const TemporalGraph& tg, const std::vector<TgQuestion>& qas,
                             Backend& backend, int max_inflight) {
  const std::string timeline = renderTimeline(tg);
  const auto events = tg.events();
  const auto answers = parallelMap(qas, max_inflight, [&](const TgQuestion& qa) {
    return backend.generate(renderPrompt("tg_verify", {{"timeline", timeline}, {"question", qa.question}}),
                            {});
  });
  std::vector<QaFlag> flags;
  for (std::size_t i = 0; i < qas.size(); ++i) {
    const auto& qa = qas[i];
    const std::string& answer = answers[i];
    const std::string final_answer = parseFinalAnswer(answer);
    if (exactMatch(answer, qa.golds) || (!final_answer.empty() && exactMatch(final_answer, qa.golds))) {
      continue;
    }
    QaFlag flag;
    flag.qa_id = qa.id;
    flag.expected = qa.golds.empty() ? std::string() : qa.golds.front();
    flag.model_answer = answer;
    const std::string qnorm = normalizeAnswer(qa.question);
    const auto qwords = splitWords(qnorm);
    const std::set<std::string_view> qset(qwords.begin(), qwords.end());
    bool chosen = false;
    std::size_t best = 0;
    for (const auto& e : events) {
      std::size_t overlap = 0;
      const std::string enorm = normalizeAnswer(eventPhrase(e));
      for (auto w : splitWords(enorm)) overlap += qset.contains(w);
      if (!chosen || overlap > best) {
        flag.event = e;
        best = overlap;
        chosen = true;
      }
    }
    flags.push_back(std::move(flag));
  }
  return flags;
}

void applyQaDecision(std::vector<QaFlag>& flags, const std::string& qa_id, QaFlagStatus status) {
  for (auto& f : flags) {
    if (f.qa_id == qa_id && f.status == QaFlagStatus::kPending) {
      f.status = status;
      return;
    }
  }
  throw Error(ErrorCode::kUnknownFlag, "no pending flag for question '" + qa_id + "'");
}

}  // namespace tgqa
