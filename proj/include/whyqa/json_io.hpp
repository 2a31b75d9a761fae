#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

namespace whyqa {

using Json = nlohmann::ordered_json;

// Reads and parses a UTF-8 JSON file. IoError if unreadable, FormatError if
// the content is not JSON.
Json read_json_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

// Writes `content` verbatim, creating parent directories.
void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

// Canonical serialization used for every JSON artifact: 2-space indent,
// trailing newline. Byte-identical for identical values.
std::string dump_json(const Json& j);

// Field accessors that turn a missing or mistyped field into FormatError
// carrying `where` (e.g. "qas[3]").
const Json& require_field(const Json& obj, const char* key,
                          const std::string& where);
std::string require_string(const Json& obj, const char* key,
                           const std::string& where);
bool require_bool(const Json& obj, const char* key, const std::string& where);
double require_number(const Json& obj, const char* key,
                      const std::string& where);

}  // namespace whyqa
