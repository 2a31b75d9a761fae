#include "whyqa/json_io.hpp"

#include <fstream>
#include <sstream>

#include "whyqa/errors.hpp"

namespace whyqa {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return buf.str();
}

Json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

std::string dump_json(const Json& j) {
  try {
    return j.dump(2) + "\n";
  } catch (const Json::type_error& e) {
    throw FormatError(e.what());
  }
}

const Json& require_field(const Json& obj, const char* key,
                          const std::string& where) {
  if (!obj.is_object()) throw FormatError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end())
    throw FormatError(where + ": missing field \"" + key + "\"");
  return *it;
}

std::string require_string(const Json& obj, const char* key,
                           const std::string& where) {
  const Json& v = require_field(obj, key, where);
  if (!v.is_string())
    throw FormatError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

bool require_bool(const Json& obj, const char* key, const std::string& where) {
  const Json& v = require_field(obj, key, where);
  if (!v.is_boolean())
    throw FormatError(where + "." + key + ": expected a boolean");
  return v.get<bool>();
}

double require_number(const Json& obj, const char* key,
                      const std::string& where) {
  const Json& v = require_field(obj, key, where);
  if (!v.is_number())
    throw FormatError(where + "." + key + ": expected a number");
  return v.get<double>();
}

}  // namespace whyqa
