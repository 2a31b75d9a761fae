#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "whyqa/dataset.hpp"

namespace whyqa {

// Answer normalization rules. Defaults follow the usual SQuAD evaluation
// convention: lowercase, delete ASCII punctuation, split on whitespace, drop
// English articles. Lowercasing and punctuation apply to ASCII only; other
// code points pass through untouched.
struct NormalizationRules {
  bool lowercase = true;
  bool strip_punctuation = true;
  std::vector<std::string> articles{"a", "an", "the"};
};

const NormalizationRules& default_rules();

// Normalized tokens in their original order.
std::vector<std::string> normalize_tokens(
    std::string_view text, const NormalizationRules& rules = default_rules());

// Multiset of normalized tokens.
class TokenBag {
 public:
  TokenBag() = default;
  explicit TokenBag(const std::vector<std::string>& tokens);

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  std::size_t count(const std::string& token) const;
  bool contains(const std::string& token) const { return count(token) > 0; }
  // Size of the multiset intersection.
  std::size_t overlap(const TokenBag& other) const;
  const std::map<std::string, std::size_t>& counts() const { return counts_; }

  bool operator==(const TokenBag&) const = default;

 private:
  std::map<std::string, std::size_t> counts_;
  std::size_t size_ = 0;
};

TokenBag normalize_answer(std::string_view text,
                          const NormalizationRules& rules = default_rules());

// 1 iff the order-preserving normalized token sequences are equal.
int exact_match(std::string_view pred, std::string_view gold);

// Bag-of-tokens F1. Both empty -> 1; one empty or no overlap -> 0.
double token_f1(std::string_view pred, std::string_view gold);

struct QAScore {
  std::string qa_id;
  int exact = 0;
  double partial = 0.0;
};

// Unanswerable gold: 1/1 iff pred is the empty string (refrain), else 0/0.
// Answerable gold: exact_match / token_f1 against the first gold answer; an
// empty pred scores 0/0.
QAScore score_qa(std::string_view pred, const QAPair& qa);

// Running sums for one column group of the report. Means are derived from
// the sums so the composition identity holds on the sums exactly.
struct SubsetScore {
  std::size_t count = 0;
  double exact_sum = 0.0;
  double partial_sum = 0.0;

  double exact() const { return count ? exact_sum / count : 0.0; }
  double partial() const { return count ? partial_sum / count : 0.0; }
};

struct EvalReport {
  SubsetScore full;
  SubsetScore has_ans;
  SubsetScore no_ans;
};

// Full-set block composed from its HasAns and NoAns parts.
SubsetScore compose(const SubsetScore& has_ans, const SubsetScore& no_ans);

// Weighted mean of two subset means; used to check published tables whose
// sub-columns are reported as rounded means plus counts.
double compose_mean(double has_mean, std::size_t has_count, double no_mean,
                    std::size_t no_count);

struct EvalResult {
  EvalReport report;
  std::vector<QAScore> scores;  // sorted by qa_id
  std::vector<std::string> warnings;
};

using AnswerMap = std::map<std::string, std::string>;

// Missing answers are scored as refrains with a warning; answers for unknown
// qa_ids are ignored with a warning. Sums are accumulated in qa_id order, so
// the result does not depend on the order of dataset.qas.
EvalResult evaluate(const Dataset& dataset, const AnswerMap& final_answers);

// Means rounded to 3 decimals.
Json eval_report_to_json(const EvalReport& report);
std::string eval_report_to_text(const EvalReport& report);

AnswerMap answers_from_json(const Json& j);
Json answers_to_json(const AnswerMap& answers);
AnswerMap load_answers(const std::filesystem::path& path);

}  // namespace whyqa
