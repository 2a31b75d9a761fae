#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "whyqa/dataset.hpp"
#include "whyqa/metrics.hpp"
#include "whyqa/thresholding.hpp"

namespace whyqa {

enum class MainCategory { kUnanswerable, kSystemAnswered, kSystemRefrained };

// Three-way "who is to blame" grouping reported next to the main categories:
// not answerable at all, system actually right, truly the system's error.
enum class Rollup { kNotAnswerable, kSystemRight, kSystemAttributed };

struct Category {
  std::string code;  // single letter
  std::string label;
  MainCategory main_category = MainCategory::kUnanswerable;
  Rollup rollup = Rollup::kNotAnswerable;

  bool operator==(const Category&) const = default;
};

struct CategorySchema {
  std::vector<Category> categories;

  const Category* find(std::string_view code) const;
  bool operator==(const CategorySchema&) const = default;
};

// Categories a-h of the false-negative review.
const CategorySchema& default_schema();

// Throws InvalidArgument on duplicate or non-single-letter codes.
void check_schema(const CategorySchema& schema);

CategorySchema schema_from_json(const Json& j);
Json schema_to_json(const CategorySchema& schema);
CategorySchema load_schema(const std::filesystem::path& path);

std::string to_string(MainCategory c);
std::string to_string(Rollup r);

struct OffsetRange {
  std::size_t begin = 0;  // code points
  std::size_t end = 0;    // exclusive

  bool operator==(const OffsetRange&) const = default;
};

// Where the system's final answer sits in the note text.
struct SystemSpan {
  enum class Status { kRefrained, kLocated, kUnlocatable };
  Status status = Status::kRefrained;
  std::optional<OffsetRange> range;  // first exact occurrence
  bool ambiguous = false;            // the text occurs more than once

  bool operator==(const SystemSpan&) const = default;
};

std::string to_string(SystemSpan::Status s);

SystemSpan locate_system_span(std::string_view note_text,
                              std::string_view final_answer);

struct FNItem {
  std::string qa_id;
  std::string note_id;
  std::string question;
  std::string gold_text;
  std::string system_answer;  // "" when refrained
  std::string note_text;
  OffsetRange gold_span;
  SystemSpan system_span;
  std::optional<std::vector<Candidate>> nbest;

  bool refrained() const { return system_answer.empty(); }
};

// Every answerable QA whose final answer shares no normalized token with the
// gold answer, refrains included. Missing answers count as refrains. When
// `predictions` is given, items carry that QA's nbest list. Items follow
// dataset order.
std::vector<FNItem> find_false_negatives(
    const Dataset& dataset, const AnswerMap& final_answers,
    const PredictionMap* predictions = nullptr);

struct FNSample {
  std::vector<FNItem> items;
  std::vector<std::string> warnings;
};

// Seeded shuffle of the whole list, then the first n. n larger than the list
// returns everything with a warning.
FNSample sample_fns(const std::vector<FNItem>& fns, std::size_t n,
                    std::uint64_t seed);

Json fn_items_to_json(const std::vector<FNItem>& items);
std::vector<FNItem> fn_items_from_json(const Json& j);
std::vector<FNItem> load_fn_items(const std::filesystem::path& path);

struct ReviewRecord {
  std::string qa_id;
  std::string category_code;
  std::string comment;
  std::string reviewer;
  std::string timestamp;  // ISO-8601 UTC, "YYYY-MM-DDTHH:MM:SS.mmmZ"

  bool operator==(const ReviewRecord&) const = default;
};

// Current UTC time in the record timestamp format.
std::string utc_timestamp_now();

Json review_record_to_json(const ReviewRecord& r);
ReviewRecord review_record_from_json(const Json& j);
// One JSON object per line; blank lines skipped. A missing file is an empty
// log.
std::vector<ReviewRecord> load_review_log(const std::filesystem::path& path);

// Last write wins per (qa_id, reviewer): the later timestamp, or the later
// position in `records` on equal timestamps. When `reviewer` is set only
// that reviewer's records count. When several reviewers remain for one
// qa_id, the latest of them counts. Result is ordered by qa_id.
struct EffectiveRecords {
  std::vector<ReviewRecord> records;
  std::vector<std::string> audit;
};
EffectiveRecords effective_records(
    const std::vector<ReviewRecord>& records,
    const std::optional<std::string>& reviewer = std::nullopt);

struct CategoryCount {
  Category category;
  std::size_t count = 0;
};

struct ReviewReport {
  std::vector<CategoryCount> per_code;  // schema order
  std::size_t unanswerable = 0;         // main-category subtotals
  std::size_t system_answered = 0;
  std::size_t system_refrained = 0;
  std::size_t not_answerable = 0;       // rollups
  std::size_t system_right = 0;
  std::size_t system_attributed = 0;
  std::size_t reviewed = 0;
  std::size_t sample_size = 0;
  std::size_t unreviewed = 0;
  std::vector<std::string> audit;
};

// Throws ValidationError when a record's code is not in the schema.
ReviewReport review_report(const std::vector<ReviewRecord>& records,
                           const CategorySchema& schema,
                           std::size_t sample_size,
                           const std::optional<std::string>& reviewer =
                               std::nullopt);

Json review_report_to_json(const ReviewReport& report);
std::string review_report_to_text(const ReviewReport& report);

struct RescueStatistic {
  std::size_t rescued = 0;     // refrained FNs whose top non-null candidate overlaps gold
  std::size_t refrained = 0;
  std::size_t total = 0;       // whole FN list
  double fraction = 0.0;       // rescued / total
  std::vector<std::string> warnings;
};

RescueStatistic rescue_statistic(const std::vector<FNItem>& fns);
Json rescue_statistic_to_json(const RescueStatistic& s);

}  // namespace whyqa
