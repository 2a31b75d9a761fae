#pragma once

#include <stdexcept>
#include <string>

namespace whyqa {

// Base for every failure the toolkit reports. `kind()` is the short tag used
// in the CLI's machine-readable error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Unreadable or structurally malformed input (bad JSON, missing fields,
// invalid UTF-8). Distinct from a validation violation.
struct FormatError : Error {
  explicit FormatError(const std::string& what) : Error("format", what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error("io", what) {}
};

struct SpanError : Error {
  explicit SpanError(const std::string& what) : Error("span", what) {}
};

struct MergeError : Error {
  explicit MergeError(const std::string& what) : Error("merge", what) {}
};

struct SizingError : Error {
  explicit SizingError(const std::string& what) : Error("sizing", what) {}
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& what)
      : Error("invalid_argument", what) {}
};

struct NotFound : Error {
  explicit NotFound(const std::string& what) : Error("not_found", what) {}
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what)
      : Error("validation", what) {}
};

}  // namespace whyqa
