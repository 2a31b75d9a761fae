#include "whyqa/thresholding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "whyqa/errors.hpp"

namespace whyqa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string shortest(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

double mode_score(const QAScore& s, MetricMode mode) {
  return mode == MetricMode::kExact ? static_cast<double>(s.exact) : s.partial;
}

// Dev QAs in qa_id order paired with their predictions.
struct Row {
  const QAPair* qa;
  const Prediction* pred;
};

std::vector<Row> rows_by_id(const Dataset& d, const PredictionMap& preds) {
  std::vector<Row> rows;
  rows.reserve(d.qas.size());
  for (const auto& qa : d.qas) {
    auto it = preds.find(qa.qa_id);
    if (it == preds.end())
      throw InvalidArgument("no prediction for qa_id " + qa.qa_id);
    rows.push_back({&qa, &it->second});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.qa->qa_id < b.qa->qa_id;
  });
  return rows;
}

}  // namespace

void order_nbest(std::vector<Candidate>& nbest, std::size_t n) {
  std::sort(nbest.begin(), nbest.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.text < b.text;
            });
  if (nbest.size() > n) nbest.resize(n);
}

std::vector<std::string> check_prediction(const Prediction& p) {
  std::vector<std::string> problems;
  if (p.nbest.empty()) {
    problems.push_back(p.qa_id + ": nbest is empty");
    return problems;
  }
  if (p.nbest.front().text != p.best_text ||
      p.nbest.front().score != p.span_score)
    problems.push_back(p.qa_id + ": nbest[0] differs from (best_text, span_score)");
  for (std::size_t i = 1; i < p.nbest.size(); ++i) {
    const auto& a = p.nbest[i - 1];
    const auto& b = p.nbest[i];
    if (a.score < b.score || (a.score == b.score && !(a.text < b.text)))
      problems.push_back(p.qa_id + ": nbest not strictly ordered at rank " +
                         std::to_string(i + 1));
  }
  return problems;
}

PredictionMap predictions_from_json(const Json& j) {
  if (!j.is_object())
    throw FormatError("predictions: expected an object keyed by qa_id");
  PredictionMap out;
  for (const auto& [qa_id, v] : j.items()) {
    const std::string where = "predictions." + qa_id;
    Prediction p;
    p.qa_id = qa_id;
    p.best_text = require_string(v, "best_text", where);
    p.span_score = require_number(v, "span_score", where);
    p.null_score = require_number(v, "null_score", where);
    const Json& nbest = require_field(v, "nbest", where);
    if (!nbest.is_array()) throw FormatError(where + ".nbest: expected an array");
    for (std::size_t i = 0; i < nbest.size(); ++i) {
      const std::string cw = where + ".nbest[" + std::to_string(i) + "]";
      p.nbest.push_back({require_string(nbest[i], "text", cw),
                         require_number(nbest[i], "score", cw)});
    }
    out.emplace(qa_id, std::move(p));
  }
  return out;
}

Json predictions_to_json(const PredictionMap& predictions) {
  Json j = Json::object();
  for (const auto& [qa_id, p] : predictions) {
    Json nbest = Json::array();
    for (const auto& c : p.nbest)
      nbest.push_back({{"text", c.text}, {"score", c.score}});
    j[qa_id] = {{"best_text", p.best_text},
                {"span_score", p.span_score},
                {"null_score", p.null_score},
                {"nbest", std::move(nbest)}};
  }
  return j;
}

PredictionMap load_predictions(const std::filesystem::path& path) {
  try {
    return predictions_from_json(read_json_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Json tau_to_json(double tau) {
  if (std::isinf(tau)) return tau > 0 ? "inf" : "-inf";
  return tau;
}

double parse_tau(const std::string& text) {
  if (text == "inf" || text == "+inf") return kInf;
  if (text == "-inf") return -kInf;
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || std::isnan(v))
    throw InvalidArgument("not a threshold value: \"" + text + "\"");
  return v;
}

double tau_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_tau(j.get<std::string>());
  throw FormatError("tau: expected a number or \"inf\"/\"-inf\"");
}

MetricMode parse_metric_mode(const std::string& text) {
  if (text == "exact") return MetricMode::kExact;
  if (text == "partial") return MetricMode::kPartial;
  throw InvalidArgument("metric must be \"exact\" or \"partial\", got \"" +
                        text + "\"");
}

std::string to_string(MetricMode mode) {
  return mode == MetricMode::kExact ? "exact" : "partial";
}

AnswerMap apply_null_threshold(const PredictionMap& predictions, double tau) {
  AnswerMap out;
  for (const auto& [qa_id, p] : predictions)
    out[qa_id] = p.null_margin() > tau ? std::string() : p.best_text;
  return out;
}

std::vector<double> candidate_taus(const Dataset& dev,
                                   const PredictionMap& predictions) {
  std::vector<double> margins;
  for (const Row& r : rows_by_id(dev, predictions))
    margins.push_back(r.pred->null_margin());
  std::sort(margins.begin(), margins.end());
  margins.erase(std::unique(margins.begin(), margins.end()), margins.end());
  std::vector<double> taus{-kInf};
  for (std::size_t j = 0; j + 1 < margins.size(); ++j) {
    // Must satisfy lo <= mid < hi so the item at hi stays refrained.
    double mid = std::midpoint(margins[j], margins[j + 1]);
    if (mid >= margins[j + 1]) mid = margins[j];
    taus.push_back(mid);
  }
  taus.push_back(kInf);
  return taus;
}

ThresholdResult tune_threshold(const Dataset& dev,
                               const PredictionMap& predictions,
                               MetricMode mode) {
  if (dev.qas.empty()) throw InvalidArgument("tune_threshold: empty dev set");
  const std::vector<Row> rows = rows_by_id(dev, predictions);
  const std::size_t n = rows.size();

  std::vector<double> answered(n), refrained(n), margin(n);
  for (std::size_t i = 0; i < n; ++i) {
    answered[i] = mode_score(score_qa(rows[i].pred->best_text, *rows[i].qa), mode);
    refrained[i] = mode_score(score_qa("", *rows[i].qa), mode);
    margin[i] = rows[i].pred->null_margin();
  }
  const std::vector<double> taus = candidate_taus(dev, predictions);

  // Fast sweep: visit items by increasing margin; candidate c answers every
  // item whose margin is among the c smallest distinct values.
  std::vector<std::size_t> by_margin(n);
  std::iota(by_margin.begin(), by_margin.end(), 0);
  std::sort(by_margin.begin(), by_margin.end(),
            [&](std::size_t a, std::size_t b) { return margin[a] < margin[b]; });
  std::vector<double> approx(taus.size());
  double total = std::accumulate(refrained.begin(), refrained.end(), 0.0);
  approx[0] = total;
  std::size_t k = 0;
  for (std::size_t c = 1; c < taus.size(); ++c) {
    while (k < n && margin[by_margin[k]] <= taus[c]) {
      total += answered[by_margin[k]] - refrained[by_margin[k]];
      ++k;
    }
    approx[c] = total;
  }

  // Candidates the fast sweep cannot separate from the best are re-scored
  // with the same reduction evaluate() uses, so the chosen accuracy is
  // bit-identical to it.
  const double best_approx = *std::max_element(approx.begin(), approx.end());
  const double slack = 1e-9 * static_cast<double>(n) + 1e-12;
  auto exact_total = [&](double tau) {
    SubsetScore has, no;
    for (std::size_t i = 0; i < n; ++i) {
      SubsetScore& b = rows[i].qa->answerable ? has : no;
      ++b.count;
      const double s = margin[i] > tau ? refrained[i] : answered[i];
      (mode == MetricMode::kExact ? b.exact_sum : b.partial_sum) += s;
    }
    const SubsetScore full = compose(has, no);
    return mode == MetricMode::kExact ? full.exact() : full.partial();
  };

  ThresholdResult best{taus[0], -1.0, mode};
  for (std::size_t c = 0; c < taus.size(); ++c) {
    if (approx[c] < best_approx - slack) continue;
    const double acc = exact_total(taus[c]);
    if (acc >= best.dev_accuracy) best = {taus[c], acc, mode};
  }
  return best;
}

PRCurve pr_curve(const Dataset& dataset, const PredictionMap& predictions,
                 double tau, MetricMode mode) {
  const std::vector<Row> rows = rows_by_id(dataset, predictions);
  PRCurve curve;
  struct Answered {
    double span_score;
    double score;
  };
  std::vector<Answered> answered;
  for (const Row& r : rows) {
    const bool refrain =
        r.pred->null_margin() > tau || r.pred->best_text.empty();
    if (r.qa->answerable) {
      ++curve.has_ans_count;
      if (refrain) ++curve.refrained_has_ans;
    }
    if (!refrain)
      answered.push_back(
          {r.pred->span_score,
           mode_score(score_qa(r.pred->best_text, *r.qa), mode)});
  }
  if (curve.has_ans_count == 0)
    throw InvalidArgument("pr_curve: dataset has no answerable QA");
  const auto h = static_cast<double>(curve.has_ans_count);
  curve.recall_upper_bound =
      static_cast<double>(curve.has_ans_count - curve.refrained_has_ans) / h;

  std::stable_sort(answered.begin(), answered.end(),
                   [](const Answered& a, const Answered& b) {
                     return a.span_score > b.span_score;
                   });
  double sum = 0.0;
  for (std::size_t i = 0; i < answered.size();) {
    const double cutoff = answered[i].span_score;
    while (i < answered.size() && answered[i].span_score == cutoff)
      sum += answered[i++].score;
    curve.points.push_back(
        {cutoff, sum / static_cast<double>(i), sum / h, i});
  }
  return curve;
}

std::string pr_curve_to_csv(const PRCurve& curve) {
  std::ostringstream out;
  out << "cutoff,precision,recall,n_answered\n";
  for (const auto& p : curve.points)
    out << shortest(p.cutoff) << ',' << shortest(p.precision) << ','
        << shortest(p.recall) << ',' << p.n_answered << '\n';
  return out.str();
}

std::optional<std::size_t> rescue_rank(const std::vector<Candidate>& nbest,
                                       const std::string& gold) {
  for (std::size_t i = 0; i < nbest.size(); ++i)
    if (token_f1(nbest[i].text, gold) > 0.0) return i + 1;
  return std::nullopt;
}

std::optional<std::size_t> rescue_rank(const PredictionMap& predictions,
                                       const QAPair& qa) {
  const AnswerSpan* gold = qa.answerable ? qa.gold() : nullptr;
  auto it = predictions.find(qa.qa_id);
  if (!gold || it == predictions.end()) return std::nullopt;
  return rescue_rank(it->second.nbest, gold->text);
}

}  // namespace whyqa
