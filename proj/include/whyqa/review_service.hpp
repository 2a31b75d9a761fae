#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "whyqa/error_analysis.hpp"

namespace whyqa {

struct ReviewSessionConfig {
  std::filesystem::path fn_sample;
  std::filesystem::path review_log;
  CategorySchema schema = default_schema();
};

struct ItemStatus {
  std::string qa_id;
  bool reviewed = false;
};

struct Acknowledgment {
  ReviewRecord record;
  ReviewReport report;
};

// One review session over a fixed FN sample. The sample is read once and
// never written. Assessments go to an append-only NDJSON log; each append
// is flushed to disk before submit() returns. Reads share a lock; writes
// are serialized.
class ReviewService {
 public:
  // Throws IoError / FormatError when the sample or an existing log does
  // not parse, InvalidArgument on a bad schema.
  explicit ReviewService(ReviewSessionConfig config);

  const std::string& session_id() const { return session_id_; }
  const std::string& created() const { return created_; }
  const ReviewSessionConfig& config() const { return config_; }
  std::size_t size() const { return items_.size(); }

  Json session_json() const;

  // Sample order. With a reviewer, "reviewed" means reviewed by that
  // reviewer; without one, by anybody.
  std::vector<ItemStatus> list_items(
      const std::optional<std::string>& reviewer = std::nullopt) const;

  // Throws NotFound.
  const FNItem& get_item(const std::string& qa_id) const;

  // Throws ValidationError (unknown code, empty reviewer) or NotFound.
  Acknowledgment submit_assessment(const std::string& qa_id,
                                   const std::string& category_code,
                                   const std::string& comment,
                                   const std::string& reviewer);

  ReviewReport report(
      const std::optional<std::string>& reviewer = std::nullopt) const;

  std::vector<ReviewRecord> records() const;

 private:
  ReviewSessionConfig config_;
  std::vector<FNItem> items_;
  std::string session_id_;
  std::string created_;

  mutable std::shared_mutex mu_;
  std::vector<ReviewRecord> records_;
  std::string last_timestamp_;
};

Json item_status_to_json(const std::vector<ItemStatus>& items);
// FN item plus a "display" block with code-point highlight ranges.
Json item_display_json(const FNItem& item);

// HTTP front end: GET /api/session, GET /api/items[?reviewer=],
// GET /api/items/{qa_id}, POST /api/items/{qa_id}/assessment,
// GET /api/report[?reviewer=], static UI at /.
class ReviewHttpServer {
 public:
  ReviewHttpServer(ReviewService& service,
                   std::optional<std::filesystem::path> ui_dir = std::nullopt);
  ~ReviewHttpServer();
  ReviewHttpServer(const ReviewHttpServer&) = delete;
  ReviewHttpServer& operator=(const ReviewHttpServer&) = delete;

  // Binds (port 0 picks a free port) and serves on a background thread.
  // Returns the bound port. Throws IoError when binding fails.
  int start(const std::string& host, int port);
  // Binds and serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace whyqa
