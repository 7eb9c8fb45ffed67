// io.hpp
// File formats: sequence JSON, CRLB report JSON, surface metadata and helpers
// for strict (fail-closed) JSON field access.

#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "core.hpp"
#include "crlb.hpp"
#include "switching.hpp"

namespace sounder {

using Json = nlohmann::json;

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot write file: " + path.string());
  out << text;
  if (!out) throw FileError("write failed: " + path.string());
}

inline Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(origin + ": invalid JSON: " + e.what());
  }
}

// Reads members of one JSON object and remembers which were consumed, so
// finish() can reject anything unexpected. Error messages carry the full path.
class FieldReader {
 public:
  FieldReader(const Json& object, std::string path) : obj_(object), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_ + ": expected a JSON object");
  }

  const std::string& path() const { return path_; }
  std::string field_path(const std::string& key) const { return path_ + "." + key; }
  bool has(const std::string& key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }
  void mark(const std::string& key) { seen_.insert(key); }

  const Json& raw(const std::string& key) {
    seen_.insert(key);
    if (!obj_.contains(key)) throw ConfigError(field_path(key) + ": required field is missing");
    return obj_.at(key);
  }

  template <typename T>
  T get(const std::string& key) {
    const Json& v = raw(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError(field_path(key) + ": expected a number");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer()) throw ConfigError(field_path(key) + ": expected an integer");
        if constexpr (std::is_unsigned_v<T>)
          if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)
            throw ConfigError(field_path(key) + ": expected a non-negative integer");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(field_path(key) + ": expected true or false");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(field_path(key) + ": expected a string");
      }
      return v.get<T>();
    } catch (const Json::exception& e) {
      throw ConfigError(field_path(key) + ": " + e.what());
    }
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!has(key)) return fallback;
    return get<T>(key);
  }

  template <typename T>
  std::optional<T> get_optional(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) return std::nullopt;
    return get<T>(key);
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items())
      if (!seen_.count(key)) throw ConfigError(field_path(key) + ": unknown field");
  }

 private:
  const Json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

// ---------------------------------------------------------------------------
// Sequence file: {M, delta_t_s, snapshots, order: [...], partition: [[...], ...]?}

inline Json sequence_to_json(const SwitchingSequence& seq) {
  Json j;
  j["M"] = seq.size();
  j["delta_t_s"] = seq.delta_t();
  j["snapshots"] = seq.snapshots();
  j["order"] = seq.order();
  if (seq.partition()) j["partition"] = *seq.partition();
  return j;
}

inline SwitchingSequence sequence_from_json(const Json& j, const std::string& origin = "sequence") {
  FieldReader f(j, origin);
  const auto count = f.get<std::size_t>("M");
  const auto delta_t = f.get<double>("delta_t_s");
  const auto snapshots = f.get<std::size_t>("snapshots");
  std::vector<std::size_t> order;
  std::optional<Partition> partition;
  try {
    order = f.raw("order").get<std::vector<std::size_t>>();
    f.mark("partition");
    if (f.has("partition")) partition = f.raw("partition").get<Partition>();
  } catch (const Json::exception& e) {
    throw ConfigError(origin + ": malformed order/partition: " + e.what());
  }
  f.finish();
  require(order.size() == count, origin + ".order: length does not match M");
  return SwitchingSequence(std::move(order), delta_t, snapshots, std::move(partition));
}

inline std::string sequence_to_string(const SwitchingSequence& seq) { return sequence_to_json(seq).dump(2) + "\n"; }

inline void save_sequence(const SwitchingSequence& seq, const std::filesystem::path& path) {
  write_text_file(path, sequence_to_string(seq));
}

inline SwitchingSequence load_sequence(const std::string& path) {
  return sequence_from_json(parse_json(read_text_file(path), path), path);
}

// ---------------------------------------------------------------------------

inline Json crlb_numeric_json(const CRLBResult& r) {
  return Json{{"var_phi", r.var_phi()},
              {"var_nu", r.var_nu()},
              {"var_r", r.var_r()},
              {"var_psi", r.var_psi()}};
}

inline Json matrix_json(const Eigen::Matrix4d& m) {
  Json rows = Json::array();
  for (int i = 0; i < 4; ++i) {
    Json row = Json::array();
    for (int j = 0; j < 4; ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sounder
