#include "whyqa/review_service.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>
#include <set>
#include <thread>

#include "httplib.h"
#include "whyqa/errors.hpp"
#include "whyqa/manifest.hpp"

namespace whyqa {

namespace {

// Appends one line and fsyncs before returning.
void append_durable(const std::filesystem::path& path, const std::string& line) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0)
    throw IoError("cannot open review log " + path.string() + ": " +
                  std::strerror(errno));
  std::size_t done = 0;
  while (done < line.size()) {
    const ssize_t n = ::write(fd, line.data() + done, line.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      throw IoError("write to review log failed: " + std::string(std::strerror(err)));
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    const int err = errno;
    ::close(fd);
    throw IoError("fsync of review log failed: " + std::string(std::strerror(err)));
  }
  ::close(fd);
}

}  // namespace

ReviewService::ReviewService(ReviewSessionConfig config)
    : config_(std::move(config)) {
  check_schema(config_.schema);
  const std::string sample_bytes = read_text_file(config_.fn_sample);
  try {
    items_ = fn_items_from_json(Json::parse(sample_bytes));
  } catch (const Json::parse_error& e) {
    throw FormatError(config_.fn_sample.string() + ": " + e.what());
  }
  std::set<std::string> ids;
  for (const auto& it : items_)
    if (!ids.insert(it.qa_id).second)
      throw FormatError("FN sample lists qa_id " + it.qa_id + " twice");
  records_ = load_review_log(config_.review_log);
  for (const auto& r : records_)
    if (r.timestamp > last_timestamp_) last_timestamp_ = r.timestamp;
  session_id_ = sha256_hex(sample_bytes + '\n' + config_.review_log.string())
                    .substr(0, 12);
  created_ = utc_timestamp_now();
}

Json ReviewService::session_json() const {
  return {{"session_id", session_id_},
          {"fn_sample", config_.fn_sample.string()},
          {"review_log", config_.review_log.string()},
          {"created", created_},
          {"item_count", items_.size()},
          {"schema", schema_to_json(config_.schema)}};
}

std::vector<ItemStatus> ReviewService::list_items(
    const std::optional<std::string>& reviewer) const {
  std::set<std::string> reviewed;
  {
    std::shared_lock lock(mu_);
    for (const auto& r : records_)
      if (!reviewer || r.reviewer == *reviewer) reviewed.insert(r.qa_id);
  }
  std::vector<ItemStatus> out;
  out.reserve(items_.size());
  for (const auto& it : items_)
    out.push_back({it.qa_id, reviewed.count(it.qa_id) > 0});
  return out;
}

const FNItem& ReviewService::get_item(const std::string& qa_id) const {
  for (const auto& it : items_)
    if (it.qa_id == qa_id) return it;
  throw NotFound("qa_id " + qa_id + " is not in the review sample");
}

Acknowledgment ReviewService::submit_assessment(const std::string& qa_id,
                                                const std::string& category_code,
                                                const std::string& comment,
                                                const std::string& reviewer) {
  get_item(qa_id);
  if (!config_.schema.find(category_code))
    throw ValidationError("category code \"" + category_code +
                          "\" is not in the schema");
  if (reviewer.empty()) throw ValidationError("reviewer must be non-empty");

  Acknowledgment ack;
  {
    std::unique_lock lock(mu_);
    ReviewRecord rec{qa_id, category_code, comment, reviewer,
                     utc_timestamp_now()};
    // Keep log order and timestamp order consistent even if the clock
    // steps backwards.
    if (rec.timestamp < last_timestamp_) rec.timestamp = last_timestamp_;
    append_durable(config_.review_log,
                   review_record_to_json(rec).dump() + "\n");
    last_timestamp_ = rec.timestamp;
    records_.push_back(rec);
    ack.record = std::move(rec);
    ack.report = review_report(records_, config_.schema, items_.size());
  }
  return ack;
}

ReviewReport ReviewService::report(
    const std::optional<std::string>& reviewer) const {
  std::shared_lock lock(mu_);
  return review_report(records_, config_.schema, items_.size(), reviewer);
}

std::vector<ReviewRecord> ReviewService::records() const {
  std::shared_lock lock(mu_);
  return records_;
}

Json item_status_to_json(const std::vector<ItemStatus>& items) {
  Json arr = Json::array();
  for (const auto& s : items)
    arr.push_back({{"qa_id", s.qa_id}, {"reviewed", s.reviewed}});
  return arr;
}

Json item_display_json(const FNItem& item) {
  Json j = fn_items_to_json({item}).at(0);
  Json sys = {{"status", to_string(item.system_span.status)},
              {"ambiguous", item.system_span.ambiguous}};
  if (item.system_span.range)
    sys["range"] = {{"begin", item.system_span.range->begin},
                    {"end", item.system_span.range->end}};
  j["display"] = {{"gold_span",
                   {{"begin", item.gold_span.begin}, {"end", item.gold_span.end}}},
                  {"system_span", std::move(sys)},
                  {"refrained", item.refrained()}};
  return j;
}

// ---------------------------------------------------------------------------

struct ReviewHttpServer::Impl {
  ReviewService& service;
  std::optional<std::filesystem::path> ui_dir;
  httplib::Server server;
  std::thread thread;

  Impl(ReviewService& s, std::optional<std::filesystem::path> ui)
      : service(s), ui_dir(std::move(ui)) {
    routes();
  }

  static void send_json(httplib::Response& res, const Json& j, int status = 200) {
    res.status = status;
    res.set_content(j.dump(), "application/json");
  }

  static void send_error(httplib::Response& res, const Error& e) {
    int status = 500;
    if (e.kind() == "not_found") status = 404;
    else if (e.kind() == "validation" || e.kind() == "format" ||
             e.kind() == "invalid_argument")
      status = 400;
    send_json(res, {{"error", {{"kind", e.kind()}, {"message", e.what()}}}},
              status);
  }

  static std::optional<std::string> reviewer_param(const httplib::Request& req) {
    if (req.has_param("reviewer")) return req.get_param_value("reviewer");
    return std::nullopt;
  }

  template <typename F>
  static void guarded(httplib::Response& res, F&& f) {
    try {
      f();
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const std::exception& e) {
      send_error(res, Error("internal", e.what()));
    }
  }

  void routes() {
    server.Get("/api/session", [this](const httplib::Request&,
                                      httplib::Response& res) {
      guarded(res, [&] { send_json(res, service.session_json()); });
    });
    server.Get("/api/items", [this](const httplib::Request& req,
                                    httplib::Response& res) {
      guarded(res, [&] {
        send_json(res, item_status_to_json(service.list_items(reviewer_param(req))));
      });
    });
    server.Get(R"(/api/items/([^/]+))", [this](const httplib::Request& req,
                                               httplib::Response& res) {
      guarded(res, [&] {
        send_json(res, item_display_json(service.get_item(req.matches[1])));
      });
    });
    server.Post(R"(/api/items/([^/]+)/assessment)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  guarded(res, [&] {
                    Json body;
                    try {
                      body = Json::parse(req.body);
                    } catch (const Json::parse_error& e) {
                      throw FormatError(std::string("request body: ") + e.what());
                    }
                    const std::string where = "assessment";
                    const std::string code =
                        require_string(body, "category_code", where);
                    const std::string reviewer =
                        require_string(body, "reviewer", where);
                    std::string comment;
                    if (auto c = body.find("comment");
                        c != body.end() && c->is_string())
                      comment = c->get<std::string>();
                    Acknowledgment ack = service.submit_assessment(
                        req.matches[1], code, comment, reviewer);
                    send_json(res, {{"record", review_record_to_json(ack.record)},
                                    {"report", review_report_to_json(ack.report)}});
                  });
                });
    server.Get("/api/report", [this](const httplib::Request& req,
                                     httplib::Response& res) {
      guarded(res, [&] {
        send_json(res, review_report_to_json(service.report(reviewer_param(req))));
      });
    });

    if (ui_dir) {
      server.set_mount_point("/", ui_dir->string());
    } else {
      server.Get("/", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(
            "<!doctype html><html><head><title>FN review</title></head><body>"
            "<p>Review UI bundle not installed. Start review-serve with "
            "--ui-dir pointing at the built UI, or use the JSON API under "
            "/api/.</p></body></html>",
            "text/html");
      });
    }
  }
};

ReviewHttpServer::ReviewHttpServer(ReviewService& service,
                                   std::optional<std::filesystem::path> ui_dir)
    : impl_(std::make_unique<Impl>(service, std::move(ui_dir))) {}

ReviewHttpServer::~ReviewHttpServer() { stop(); }

int ReviewHttpServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind " + host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    throw IoError("cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void ReviewHttpServer::run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port))
    throw IoError("cannot listen on " + host + ":" + std::to_string(port));
}

void ReviewHttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace whyqa
