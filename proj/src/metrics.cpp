#include "whyqa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "whyqa/errors.hpp"

namespace whyqa {

namespace {

bool is_ascii_punct(unsigned char c) {
  return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) ||
         (c >= 91 && c <= 96) || (c >= 123 && c <= 126);
}

bool is_space(unsigned char c) {
  return c == ' ' || (c >= '\t' && c <= '\r') || (c >= 0x1C && c <= 0x1F);
}

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

}  // namespace

const NormalizationRules& default_rules() {
  static const NormalizationRules rules;
  return rules;
}

std::vector<std::string> normalize_tokens(std::string_view text,
                                          const NormalizationRules& rules) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    if (std::find(rules.articles.begin(), rules.articles.end(), current) ==
        rules.articles.end())
      tokens.push_back(current);
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_space(c)) {
      flush();
    } else if (rules.strip_punctuation && is_ascii_punct(c)) {
      // deleted, not replaced: "don't" -> "dont"
    } else if (rules.lowercase && c >= 'A' && c <= 'Z') {
      current.push_back(static_cast<char>(c - 'A' + 'a'));
    } else {
      current.push_back(ch);
    }
  }
  flush();
  return tokens;
}

TokenBag::TokenBag(const std::vector<std::string>& tokens) {
  for (const auto& t : tokens) ++counts_[t];
  size_ = tokens.size();
}

std::size_t TokenBag::count(const std::string& token) const {
  auto it = counts_.find(token);
  return it == counts_.end() ? 0 : it->second;
}

std::size_t TokenBag::overlap(const TokenBag& other) const {
  std::size_t o = 0;
  for (const auto& [tok, n] : counts_) o += std::min(n, other.count(tok));
  return o;
}

TokenBag normalize_answer(std::string_view text,
                          const NormalizationRules& rules) {
  return TokenBag(normalize_tokens(text, rules));
}

int exact_match(std::string_view pred, std::string_view gold) {
  return normalize_tokens(pred) == normalize_tokens(gold) ? 1 : 0;
}

double token_f1(std::string_view pred, std::string_view gold) {
  const TokenBag p = normalize_answer(pred);
  const TokenBag g = normalize_answer(gold);
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  const std::size_t o = p.overlap(g);
  if (o == 0) return 0.0;
  // 2PR/(P+R) with P=o/|p|, R=o/|g| simplifies to 2o/(|p|+|g|).
  return 2.0 * static_cast<double>(o) /
         static_cast<double>(p.size() + g.size());
}

QAScore score_qa(std::string_view pred, const QAPair& qa) {
  QAScore s{qa.qa_id, 0, 0.0};
  const AnswerSpan* gold = qa.answerable ? qa.gold() : nullptr;
  if (!gold) {
    if (pred.empty()) {
      s.exact = 1;
      s.partial = 1.0;
    }
    return s;
  }
  if (pred.empty()) return s;
  s.exact = exact_match(pred, gold->text);
  s.partial = token_f1(pred, gold->text);
  return s;
}

SubsetScore compose(const SubsetScore& has_ans, const SubsetScore& no_ans) {
  return {has_ans.count + no_ans.count, has_ans.exact_sum + no_ans.exact_sum,
          has_ans.partial_sum + no_ans.partial_sum};
}

double compose_mean(double has_mean, std::size_t has_count, double no_mean,
                    std::size_t no_count) {
  const std::size_t n = has_count + no_count;
  if (n == 0) return 0.0;
  return (has_mean * static_cast<double>(has_count) +
          no_mean * static_cast<double>(no_count)) /
         static_cast<double>(n);
}

EvalResult evaluate(const Dataset& dataset, const AnswerMap& final_answers) {
  EvalResult result;
  std::vector<const QAPair*> order;
  order.reserve(dataset.qas.size());
  for (const auto& qa : dataset.qas) order.push_back(&qa);
  std::sort(order.begin(), order.end(),
            [](const QAPair* a, const QAPair* b) { return a->qa_id < b->qa_id; });

  static const std::string kRefrain;
  for (const QAPair* qa : order) {
    auto it = final_answers.find(qa->qa_id);
    if (it == final_answers.end())
      result.warnings.push_back("missing answer for " + qa->qa_id +
                                "; scored as refrain");
    const std::string& pred = it == final_answers.end() ? kRefrain : it->second;
    QAScore s = score_qa(pred, *qa);
    SubsetScore& bucket = qa->answerable ? result.report.has_ans
                                         : result.report.no_ans;
    ++bucket.count;
    bucket.exact_sum += s.exact;
    bucket.partial_sum += s.partial;
    result.scores.push_back(std::move(s));
  }
  result.report.full = compose(result.report.has_ans, result.report.no_ans);

  for (const auto& [qa_id, _] : final_answers)
    if (!dataset.find_qa(qa_id))
      result.warnings.push_back("answer for unknown qa_id " + qa_id +
                                " ignored");
  return result;
}

Json eval_report_to_json(const EvalReport& report) {
  auto block = [](const SubsetScore& s) {
    return Json{{"exact", round3(s.exact())},
                {"partial", round3(s.partial())},
                {"count", s.count}};
  };
  return {{"full", block(report.full)},
          {"has_ans", block(report.has_ans)},
          {"no_ans", block(report.no_ans)}};
}

std::string eval_report_to_text(const EvalReport& report) {
  char buf[256];
  std::ostringstream out;
  auto header = [&](const char* name, std::size_t n) {
    std::snprintf(buf, sizeof buf, "%s: %zu QAs", name, n);
    return std::string(buf);
  };
  std::snprintf(buf, sizeof buf, "%-26s%-26s%-26s\n",
                header("Full set", report.full.count).c_str(),
                header("HasAns", report.has_ans.count).c_str(),
                header("NoAns", report.no_ans.count).c_str());
  out << buf;
  std::snprintf(buf, sizeof buf, "%-13s%-13s%-13s%-13s%-13s%-13s\n", "Exact",
                "Partial", "Exact", "Partial", "Exact", "Partial");
  out << buf;
  std::snprintf(buf, sizeof buf, "%-13.3f%-13.3f%-13.3f%-13.3f%-13.3f%-13.3f\n",
                report.full.exact(), report.full.partial(),
                report.has_ans.exact(), report.has_ans.partial(),
                report.no_ans.exact(), report.no_ans.partial());
  out << buf;
  return out.str();
}

AnswerMap answers_from_json(const Json& j) {
  if (!j.is_object())
    throw FormatError("answers: expected an object mapping qa_id to text");
  AnswerMap out;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_string())
      throw FormatError("answers." + k + ": expected a string");
    out[k] = v.get<std::string>();
  }
  return out;
}

Json answers_to_json(const AnswerMap& answers) {
  Json j = Json::object();
  for (const auto& [k, v] : answers) j[k] = v;
  return j;
}

AnswerMap load_answers(const std::filesystem::path& path) {
  try {
    return answers_from_json(read_json_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace whyqa
