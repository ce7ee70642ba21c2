// Part of the loo verification toolkit, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "loo/base.hpp"

namespace loo {

constexpr const char* kToolVersion = "0.1.0";

// Machine-readable run report: stable field order, reproducible bit-for-bit
// for identical inputs and flags (timing is opt-in for that reason).
class Report {
 public:
  using json = nlohmann::ordered_json;

  explicit Report(const std::string& command) {
    j_["tool"] = "loo";
    j_["version"] = kToolVersion;
    j_["command"] = command;
    j_["inputs"] = json::array();
    j_["verdicts"] = json::array();
    j_["witnesses"] = json::array();
    j_["assumptions"] = json::array();
    j_["open-obligations"] = json::array();
    j_["notes"] = json::array();
  }

  void add_input(const std::string& path, const std::string& content) {
    std::ostringstream h;
    h << std::hex << fnv64(content);
    j_["inputs"].push_back({{"path", path}, {"fnv64", h.str()}});
  }

  void add_verdict(const std::string& name, const std::string& verdict,
                   const std::string& detail) {
    j_["verdicts"].push_back(
        {{"name", name}, {"verdict", verdict}, {"detail", detail}});
  }

  void add_witness(const std::string& name, const std::string& description,
                   const std::string& trace) {
    j_["witnesses"].push_back({{"name", name},
                               {"description", description},
                               {"trace", trace}});
  }

  void add_assumption(const std::string& name) {
    j_["assumptions"].push_back(name);
  }
  void add_open(const std::string& name, const std::string& description) {
    j_["open-obligations"].push_back(
        {{"name", name}, {"description", description}});
  }
  void add_note(const std::string& note) { j_["notes"].push_back(note); }
  void set(const std::string& key, const json& v) { j_[key] = v; }

  void set_timing_ms(double ms) { j_["timing-ms"] = ms; }

  std::string dump() const { return j_.dump(2) + "\n"; }

  bool write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) return false;
    out << dump();
    return true;
  }

 private:
  json j_;
};

inline Outcome<std::string> read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return Outcome<std::string>::err("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace loo
