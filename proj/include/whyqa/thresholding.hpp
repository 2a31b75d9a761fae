#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "whyqa/dataset.hpp"
#include "whyqa/metrics.hpp"

namespace whyqa {

struct Candidate {
  std::string text;
  double score = 0.0;

  bool operator==(const Candidate&) const = default;
};

inline constexpr std::size_t kDefaultNBest = 20;

// One system output. nbest is sorted by descending score, ties by ascending
// text; nbest[0] mirrors (best_text, span_score).
struct Prediction {
  std::string qa_id;
  std::string best_text;
  double span_score = 0.0;
  double null_score = 0.0;
  std::vector<Candidate> nbest;

  // null_score - span_score; the system refrains when this exceeds tau.
  double null_margin() const { return null_score - span_score; }
};

using PredictionMap = std::map<std::string, Prediction>;

// Sorts candidates into nbest order, keeps the first `n`.
void order_nbest(std::vector<Candidate>& nbest, std::size_t n = kDefaultNBest);

// Empty result when the invariants hold; otherwise one message per problem.
std::vector<std::string> check_prediction(const Prediction& p);

PredictionMap predictions_from_json(const Json& j);
Json predictions_to_json(const PredictionMap& predictions);
PredictionMap load_predictions(const std::filesystem::path& path);

// Finite tau as a JSON number; infinities as "inf" / "-inf".
Json tau_to_json(double tau);
double tau_from_json(const Json& j);
// Accepts decimal numbers plus "inf", "+inf", "-inf".
double parse_tau(const std::string& text);

enum class MetricMode { kExact, kPartial };

MetricMode parse_metric_mode(const std::string& text);
std::string to_string(MetricMode mode);

// "" (refrain) iff null_score - span_score > tau, else best_text.
AnswerMap apply_null_threshold(const PredictionMap& predictions, double tau);

struct ThresholdResult {
  double tau = 0.0;
  double dev_accuracy = 0.0;
  MetricMode metric_mode = MetricMode::kExact;
};

// Candidate taus are -inf, +inf and the midpoints between consecutive
// distinct null margins. Returns the tau with the highest mean dev score;
// among ties the largest tau wins (answer as much as possible). dev_accuracy
// is identical to evaluate(dev, apply_null_threshold(predictions, tau)).
// Throws InvalidArgument on an empty dev set or a dev QA with no prediction.
ThresholdResult tune_threshold(const Dataset& dev,
                               const PredictionMap& predictions,
                               MetricMode mode = MetricMode::kExact);

// Every candidate tau in increasing order.
std::vector<double> candidate_taus(const Dataset& dev,
                                   const PredictionMap& predictions);

struct PRPoint {
  double cutoff = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::size_t n_answered = 0;
};

struct PRCurve {
  std::vector<PRPoint> points;  // increasing recall
  // (HasAns - refrained HasAns) / HasAns: no cutoff can recall more.
  double recall_upper_bound = 0.0;
  std::size_t has_ans_count = 0;
  std::size_t refrained_has_ans = 0;
};

// Answered QAs (after tau) are ranked by descending span_score; one point per
// distinct score, keeping every answered QA with span_score >= cutoff.
// precision = mean per-QA score of kept QAs; recall = summed score of kept
// QAs / HasAns count. Throws InvalidArgument when the dataset has no HasAns
// QA or a QA has no prediction.
PRCurve pr_curve(const Dataset& dataset, const PredictionMap& predictions,
                 double tau, MetricMode mode = MetricMode::kExact);

std::string pr_curve_to_csv(const PRCurve& curve);

// 1-based rank of the first nbest entry with token_f1 > 0 against the gold
// answer; nullopt when none overlaps, the QA has no gold, or there is no
// prediction for it.
std::optional<std::size_t> rescue_rank(const PredictionMap& predictions,
                                       const QAPair& qa);
std::optional<std::size_t> rescue_rank(const std::vector<Candidate>& nbest,
                                       const std::string& gold);

}  // namespace whyqa
