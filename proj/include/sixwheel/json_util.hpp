#ifndef SIXWHEEL_JSON_UTIL_HPP_
#define SIXWHEEL_JSON_UTIL_HPP_

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include <json.hpp>

#include "sixwheel/errors.hpp"

namespace sixwheel {

using Json = nlohmann::json;

namespace json_util {

inline std::string join(std::string_view parent, std::string_view key) {
  if (parent.empty()) return std::string(key);
  return std::string(parent) + "." + std::string(key);
}

inline std::string index(std::string_view parent, std::size_t i) {
  return std::string(parent) + "[" + std::to_string(i) + "]";
}

inline const Json& require(const Json& j, std::string_view key,
                           std::string_view path) {
  if (!j.is_object()) throw ConfigError(std::string(path), "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(join(path, key), "missing required field");
  return *it;
}

inline double as_number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
  return v;
}

inline double number(const Json& j, std::string_view key, std::string_view path) {
  return as_number(require(j, key, path), join(path, key));
}

inline double number_or(const Json& j, std::string_view key, double fallback,
                        std::string_view path) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return as_number(j.at(std::string(key)), join(path, key));
}

inline long long integer_or(const Json& j, std::string_view key, long long fallback,
                            std::string_view path) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const Json& v = j.at(std::string(key));
  if (!v.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  return v.get<long long>();
}

inline bool boolean_or(const Json& j, std::string_view key, bool fallback,
                       std::string_view path) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const Json& v = j.at(std::string(key));
  if (!v.is_boolean()) throw ConfigError(join(path, key), "expected a boolean");
  return v.get<bool>();
}

inline const Json& array(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array");
  return j;
}

/// Reads a two-element numeric array such as `[x, y]`.
inline std::pair<double, double> pair(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(path, "expected a 2-element array");
  return {as_number(j[0], index(path, 0)), as_number(j[1], index(path, 1))};
}

inline std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open '" + file.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + file.string() + "'");
  return ss.str();
}

inline Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
}

inline Json read_json(const std::filesystem::path& file) { return parse(read_file(file)); }

/// Writes `contents` through a sibling temp file and renames it into place,
/// so a failed write never leaves a partial target behind.
inline void atomic_write(const std::filesystem::path& target, std::string_view contents) {
  namespace fs = std::filesystem;
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw IoError("cannot rename into '" + target.string() + "': " + ec.message());
  }
}

}  // namespace json_util
}  // namespace sixwheel

#endif  // SIXWHEEL_JSON_UTIL_HPP_
