#include "whyqa/error_analysis.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <map>
#include <set>
#include <sstream>

#include "whyqa/errors.hpp"
#include "whyqa/rng.hpp"
#include "whyqa/utf8.hpp"

namespace whyqa {

const Category* CategorySchema::find(std::string_view code) const {
  for (const auto& c : categories)
    if (c.code == code) return &c;
  return nullptr;
}

const CategorySchema& default_schema() {
  using M = MainCategory;
  using R = Rollup;
  static const CategorySchema schema{{
      {"a", "Vague question", M::kUnanswerable, R::kNotAnswerable},
      {"b", "Expert deemed unanswerable using only text", M::kUnanswerable,
       R::kNotAnswerable},
      {"c", "Expert judged the system acceptable as the gold",
       M::kSystemAnswered, R::kSystemRight},
      {"d", "Expert sided with the system against the gold",
       M::kSystemAnswered, R::kSystemRight},
      {"e", "Real FN", M::kSystemAnswered, R::kSystemAttributed},
      {"f", "Expert disagreed with both the system and gold",
       M::kSystemAnswered, R::kSystemAttributed},
      {"g", "Real FN", M::kSystemRefrained, R::kSystemAttributed},
      {"h", "Correct answer ranked second place", M::kSystemRefrained,
       R::kSystemAttributed},
  }};
  return schema;
}

void check_schema(const CategorySchema& schema) {
  std::set<std::string> seen;
  for (const auto& c : schema.categories) {
    if (c.code.size() != 1 ||
        !std::isalpha(static_cast<unsigned char>(c.code[0])))
      throw InvalidArgument("category code \"" + c.code +
                            "\" must be a single letter");
    if (!seen.insert(c.code).second)
      throw InvalidArgument("duplicate category code \"" + c.code + "\"");
  }
  if (schema.categories.empty())
    throw InvalidArgument("category schema is empty");
}

std::string to_string(MainCategory c) {
  switch (c) {
    case MainCategory::kUnanswerable: return "unanswerable";
    case MainCategory::kSystemAnswered: return "system_answered";
    case MainCategory::kSystemRefrained: return "system_refrained";
  }
  return {};
}

std::string to_string(Rollup r) {
  switch (r) {
    case Rollup::kNotAnswerable: return "not_answerable";
    case Rollup::kSystemRight: return "system_right";
    case Rollup::kSystemAttributed: return "system_attributed";
  }
  return {};
}

namespace {

MainCategory parse_main(const std::string& s) {
  if (s == "unanswerable") return MainCategory::kUnanswerable;
  if (s == "system_answered") return MainCategory::kSystemAnswered;
  if (s == "system_refrained") return MainCategory::kSystemRefrained;
  throw FormatError("unknown main_category \"" + s + "\"");
}

Rollup parse_rollup(const std::string& s) {
  if (s == "not_answerable") return Rollup::kNotAnswerable;
  if (s == "system_right") return Rollup::kSystemRight;
  if (s == "system_attributed") return Rollup::kSystemAttributed;
  throw FormatError("unknown rollup \"" + s + "\"");
}

SystemSpan::Status parse_status(const std::string& s) {
  if (s == "refrained") return SystemSpan::Status::kRefrained;
  if (s == "located") return SystemSpan::Status::kLocated;
  if (s == "unlocatable") return SystemSpan::Status::kUnlocatable;
  throw FormatError("unknown system_span status \"" + s + "\"");
}

Json range_to_json(const OffsetRange& r) {
  return {{"begin", r.begin}, {"end", r.end}};
}

OffsetRange range_from_json(const Json& j, const std::string& where) {
  const Json& b = require_field(j, "begin", where);
  const Json& e = require_field(j, "end", where);
  if (!b.is_number_unsigned() || !e.is_number_unsigned())
    throw FormatError(where + ": offsets must be non-negative integers");
  return {b.get<std::size_t>(), e.get<std::size_t>()};
}

}  // namespace

CategorySchema schema_from_json(const Json& j) {
  const Json& cats = require_field(j, "categories", "schema");
  if (!cats.is_array()) throw FormatError("schema.categories: expected an array");
  CategorySchema schema;
  for (std::size_t i = 0; i < cats.size(); ++i) {
    const std::string w = "schema.categories[" + std::to_string(i) + "]";
    schema.categories.push_back(
        {require_string(cats[i], "code", w), require_string(cats[i], "label", w),
         parse_main(require_string(cats[i], "main_category", w)),
         parse_rollup(require_string(cats[i], "rollup", w))});
  }
  check_schema(schema);
  return schema;
}

Json schema_to_json(const CategorySchema& schema) {
  Json cats = Json::array();
  for (const auto& c : schema.categories)
    cats.push_back({{"code", c.code},
                    {"label", c.label},
                    {"main_category", to_string(c.main_category)},
                    {"rollup", to_string(c.rollup)}});
  return {{"categories", std::move(cats)}};
}

CategorySchema load_schema(const std::filesystem::path& path) {
  return schema_from_json(read_json_file(path));
}

std::string to_string(SystemSpan::Status s) {
  switch (s) {
    case SystemSpan::Status::kRefrained: return "refrained";
    case SystemSpan::Status::kLocated: return "located";
    case SystemSpan::Status::kUnlocatable: return "unlocatable";
  }
  return {};
}

SystemSpan locate_system_span(std::string_view note_text,
                              std::string_view final_answer) {
  SystemSpan span;
  if (final_answer.empty()) return span;
  const auto first = utf8::find(note_text, final_answer);
  if (!first) {
    span.status = SystemSpan::Status::kUnlocatable;
    return span;
  }
  span.status = SystemSpan::Status::kLocated;
  span.range = OffsetRange{*first, *first + utf8::length(final_answer)};
  span.ambiguous = utf8::find(note_text, final_answer, *first + 1).has_value();
  return span;
}

std::vector<FNItem> find_false_negatives(const Dataset& dataset,
                                         const AnswerMap& final_answers,
                                         const PredictionMap* predictions) {
  std::vector<FNItem> out;
  for (const auto& qa : dataset.qas) {
    const AnswerSpan* gold = qa.answerable ? qa.gold() : nullptr;
    if (!gold) continue;
    auto it = final_answers.find(qa.qa_id);
    const std::string answer = it == final_answers.end() ? "" : it->second;
    if (!answer.empty() && token_f1(answer, gold->text) > 0.0) continue;

    FNItem item;
    item.qa_id = qa.qa_id;
    item.note_id = qa.note_id;
    item.question = qa.question;
    item.gold_text = gold->text;
    item.system_answer = answer;
    const Note* note = dataset.find_note(qa.note_id);
    if (note) item.note_text = note->note_text;
    const auto begin = static_cast<std::size_t>(std::max<std::int64_t>(0, gold->begin_offset));
    item.gold_span = {begin, begin + utf8::length(gold->text)};
    item.system_span = locate_system_span(item.note_text, answer);
    if (predictions) {
      if (auto p = predictions->find(qa.qa_id); p != predictions->end())
        item.nbest = p->second.nbest;
    }
    out.push_back(std::move(item));
  }
  return out;
}

FNSample sample_fns(const std::vector<FNItem>& fns, std::size_t n,
                    std::uint64_t seed) {
  FNSample s;
  if (n > fns.size()) {
    s.warnings.push_back("requested " + std::to_string(n) +
                         " items but only " + std::to_string(fns.size()) +
                         " false negatives exist; returning all");
    n = fns.size();
  }
  std::vector<std::size_t> order(fns.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  SeededRng rng(seed);
  rng.shuffle(order);
  s.items.reserve(n);
  for (std::size_t k = 0; k < n; ++k) s.items.push_back(fns[order[k]]);
  return s;
}

Json fn_items_to_json(const std::vector<FNItem>& items) {
  Json arr = Json::array();
  for (const auto& it : items) {
    Json sys = {{"status", to_string(it.system_span.status)},
                {"ambiguous", it.system_span.ambiguous}};
    if (it.system_span.range) {
      sys["begin"] = it.system_span.range->begin;
      sys["end"] = it.system_span.range->end;
    }
    Json j = {{"qa_id", it.qa_id},
              {"note_id", it.note_id},
              {"question", it.question},
              {"gold_text", it.gold_text},
              {"system_answer", it.system_answer},
              {"note_text", it.note_text},
              {"gold_span", range_to_json(it.gold_span)},
              {"system_span", std::move(sys)}};
    if (it.nbest) {
      Json nb = Json::array();
      for (const auto& c : *it.nbest)
        nb.push_back({{"text", c.text}, {"score", c.score}});
      j["nbest"] = std::move(nb);
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

std::vector<FNItem> fn_items_from_json(const Json& j) {
  if (!j.is_array()) throw FormatError("FN sample: expected an array");
  std::vector<FNItem> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = "fn[" + std::to_string(i) + "]";
    const Json& e = j[i];
    FNItem it;
    it.qa_id = require_string(e, "qa_id", w);
    it.note_id = require_string(e, "note_id", w);
    it.question = require_string(e, "question", w);
    it.gold_text = require_string(e, "gold_text", w);
    it.system_answer = require_string(e, "system_answer", w);
    it.note_text = require_string(e, "note_text", w);
    it.gold_span = range_from_json(require_field(e, "gold_span", w), w + ".gold_span");
    const Json& sys = require_field(e, "system_span", w);
    it.system_span.status = parse_status(require_string(sys, "status", w + ".system_span"));
    if (auto a = sys.find("ambiguous"); a != sys.end() && a->is_boolean())
      it.system_span.ambiguous = a->get<bool>();
    if (sys.contains("begin"))
      it.system_span.range = range_from_json(sys, w + ".system_span");
    if (auto nb = e.find("nbest"); nb != e.end() && !nb->is_null()) {
      if (!nb->is_array()) throw FormatError(w + ".nbest: expected an array");
      std::vector<Candidate> cands;
      for (std::size_t k = 0; k < nb->size(); ++k) {
        const std::string cw = w + ".nbest[" + std::to_string(k) + "]";
        cands.push_back({require_string((*nb)[k], "text", cw),
                         require_number((*nb)[k], "score", cw)});
      }
      it.nbest = std::move(cands);
    }
    out.push_back(std::move(it));
  }
  return out;
}

std::vector<FNItem> load_fn_items(const std::filesystem::path& path) {
  try {
    return fn_items_from_json(read_json_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string utc_timestamp_now() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  const std::time_t t = system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

Json review_record_to_json(const ReviewRecord& r) {
  return {{"qa_id", r.qa_id},
          {"category_code", r.category_code},
          {"comment", r.comment},
          {"reviewer", r.reviewer},
          {"timestamp", r.timestamp}};
}

ReviewRecord review_record_from_json(const Json& j) {
  const std::string w = "review record";
  ReviewRecord r;
  r.qa_id = require_string(j, "qa_id", w);
  r.category_code = require_string(j, "category_code", w);
  r.reviewer = require_string(j, "reviewer", w);
  r.timestamp = require_string(j, "timestamp", w);
  if (auto c = j.find("comment"); c != j.end() && c->is_string())
    r.comment = c->get<std::string>();
  return r;
}

std::vector<ReviewRecord> load_review_log(const std::filesystem::path& path) {
  std::vector<ReviewRecord> out;
  if (!std::filesystem::exists(path)) return out;
  const std::string text = read_text_file(path);
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(review_record_from_json(Json::parse(line)));
    } catch (const Json::parse_error& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return out;
}

EffectiveRecords effective_records(const std::vector<ReviewRecord>& records,
                                   const std::optional<std::string>& reviewer) {
  EffectiveRecords eff;
  // (qa_id, reviewer) -> index of the winning record
  std::map<std::pair<std::string, std::string>, std::size_t> latest;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const ReviewRecord& r = records[i];
    if (reviewer && r.reviewer != *reviewer) continue;
    auto [it, fresh] = latest.emplace(std::make_pair(r.qa_id, r.reviewer), i);
    if (fresh) continue;
    const ReviewRecord& prev = records[it->second];
    if (r.timestamp >= prev.timestamp) {
      eff.audit.push_back("qa_id " + r.qa_id + " reviewer " + r.reviewer +
                          ": \"" + prev.category_code + "\" superseded by \"" +
                          r.category_code + "\"");
      it->second = i;
    } else {
      eff.audit.push_back("qa_id " + r.qa_id + " reviewer " + r.reviewer +
                          ": older \"" + r.category_code + "\" ignored");
    }
  }

  std::map<std::string, std::size_t> per_qa;
  for (const auto& [key, idx] : latest) {
    auto [it, fresh] = per_qa.emplace(key.first, idx);
    if (fresh) continue;
    const ReviewRecord& cur = records[it->second];
    const ReviewRecord& cand = records[idx];
    const bool later = cand.timestamp > cur.timestamp ||
                       (cand.timestamp == cur.timestamp && idx > it->second);
    eff.audit.push_back("qa_id " + key.first +
                        " reviewed by several reviewers; latest record counts");
    if (later) it->second = idx;
  }
  for (const auto& [_, idx] : per_qa) eff.records.push_back(records[idx]);
  return eff;
}

ReviewReport review_report(const std::vector<ReviewRecord>& records,
                           const CategorySchema& schema,
                           std::size_t sample_size,
                           const std::optional<std::string>& reviewer) {
  for (const auto& r : records)
    if (!schema.find(r.category_code))
      throw ValidationError("qa_id " + r.qa_id + ": category code \"" +
                            r.category_code + "\" is not in the schema");

  EffectiveRecords eff = effective_records(records, reviewer);
  ReviewReport rep;
  rep.audit = std::move(eff.audit);
  std::map<std::string, std::size_t> counts;
  for (const auto& r : eff.records) ++counts[r.category_code];

  for (const auto& c : schema.categories) {
    const std::size_t n = counts[c.code];
    rep.per_code.push_back({c, n});
    switch (c.main_category) {
      case MainCategory::kUnanswerable: rep.unanswerable += n; break;
      case MainCategory::kSystemAnswered: rep.system_answered += n; break;
      case MainCategory::kSystemRefrained: rep.system_refrained += n; break;
    }
    switch (c.rollup) {
      case Rollup::kNotAnswerable: rep.not_answerable += n; break;
      case Rollup::kSystemRight: rep.system_right += n; break;
      case Rollup::kSystemAttributed: rep.system_attributed += n; break;
    }
  }
  rep.reviewed = eff.records.size();
  rep.sample_size = sample_size;
  rep.unreviewed = sample_size > rep.reviewed ? sample_size - rep.reviewed : 0;
  return rep;
}

namespace {

double pct(std::size_t n, std::size_t d) {
  return d ? 100.0 * static_cast<double>(n) / static_cast<double>(d) : 0.0;
}

}  // namespace

Json review_report_to_json(const ReviewReport& r) {
  Json codes = Json::array();
  for (const auto& cc : r.per_code)
    codes.push_back({{"code", cc.category.code},
                     {"label", cc.category.label},
                     {"main_category", to_string(cc.category.main_category)},
                     {"rollup", to_string(cc.category.rollup)},
                     {"count", cc.count}});
  return {{"per_code", std::move(codes)},
          {"main_category_subtotals",
           {{"unanswerable", r.unanswerable},
            {"system_answered", r.system_answered},
            {"system_refrained", r.system_refrained}}},
          {"rollups",
           {{"not_answerable", r.not_answerable},
            {"system_right", r.system_right},
            {"system_attributed", r.system_attributed}}},
          {"reviewed", r.reviewed},
          {"sample_size", r.sample_size},
          {"unreviewed", r.unreviewed},
          {"unreviewed_percent", pct(r.unreviewed, r.sample_size)},
          {"audit", r.audit}};
}

std::string review_report_to_text(const ReviewReport& r) {
  std::ostringstream out;
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-18s %-52s %6s %9s\n", "Main category",
                "Subcategory", "Count", "Subtotal");
  out << buf;
  std::map<Rollup, std::size_t> rollup_total{
      {Rollup::kNotAnswerable, r.not_answerable},
      {Rollup::kSystemRight, r.system_right},
      {Rollup::kSystemAttributed, r.system_attributed}};
  std::set<Rollup> shown_rollup;
  std::set<MainCategory> shown_main;
  for (const auto& cc : r.per_code) {
    const std::string main = shown_main.insert(cc.category.main_category).second
                                 ? to_string(cc.category.main_category)
                                 : "";
    const std::string sub =
        shown_rollup.insert(cc.category.rollup).second
            ? std::to_string(rollup_total[cc.category.rollup])
            : "";
    const std::string label = cc.category.code + ") " + cc.category.label;
    std::snprintf(buf, sizeof buf, "%-18s %-52s %6zu %9s\n", main.c_str(),
                  label.c_str(), cc.count, sub.c_str());
    out << buf;
  }
  std::snprintf(buf, sizeof buf,
                "Reviewed %zu of %zu (%zu unreviewed)\n", r.reviewed,
                r.sample_size, r.unreviewed);
  out << buf;
  return out.str();
}

RescueStatistic rescue_statistic(const std::vector<FNItem>& fns) {
  RescueStatistic s;
  s.total = fns.size();
  for (const auto& it : fns) {
    if (!it.refrained()) continue;
    ++s.refrained;
    if (!it.nbest) {
      s.warnings.push_back(it.qa_id + ": no nbest list; counted as not rescuable");
      continue;
    }
    // The null decision already took first place, so the top non-null
    // candidate is the second-place answer.
    for (const auto& c : *it.nbest) {
      if (c.text.empty()) continue;
      if (token_f1(c.text, it.gold_text) > 0.0) ++s.rescued;
      break;
    }
  }
  s.fraction = s.total ? static_cast<double>(s.rescued) /
                             static_cast<double>(s.total)
                       : 0.0;
  return s;
}

Json rescue_statistic_to_json(const RescueStatistic& s) {
  return {{"rescued", s.rescued},
          {"refrained", s.refrained},
          {"total", s.total},
          {"fraction", s.fraction},
          {"warnings", s.warnings}};
}

}  // namespace whyqa
