#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "nlbound/errors.hpp"

namespace nlbound {

/// One certified (or sampled) constant.
struct ResultRow {
  std::string name;
  std::size_t n = 0;                 // state dimension of the model
  double value = 0.0;                // reported constant (certified upper bound unless noted)
  std::optional<double> lower;       // certified lower end of the underlying search, if any
  std::optional<double> gap;         // value-side search gap u - l, if any
  bool eps_optimal = false;
  std::uint64_t subproblems = 0;
  std::uint64_t evals = 0;
  double wall_time_ms = 0.0;
  std::map<std::string, double> detail;  // auxiliary scalars (e.g. gamma_bar for QIB)

  bool operator==(const ResultRow&) const = default;
};

struct RunConfig {
  double eps_h = 1e-4;
  double eps_om = 1e-7;
  int segments = 10;
  unsigned workers = 1;

  bool operator==(const RunConfig&) const = default;
};

struct RunReport {
  std::vector<std::string> command;
  RunConfig config;
  std::string model;        // model name
  std::string fingerprint;  // content hash of the model ("" when not applicable)
  std::vector<ResultRow> results;

  bool operator==(const RunReport&) const = default;
};

namespace detail {

inline void check_finite(double v, const std::string& what) {
  if (!std::isfinite(v)) throw EvaluationError("non-finite value in report field '" + what + "'");
}

}  // namespace detail

inline void to_json(nlohmann::ordered_json& j, const ResultRow& r) {
  detail::check_finite(r.value, r.name + ".value");
  j = nlohmann::ordered_json{{"name", r.name}, {"n", r.n}, {"value", r.value}};
  if (r.lower) {
    detail::check_finite(*r.lower, r.name + ".lower");
    j["lower"] = *r.lower;
  } else {
    j["lower"] = nullptr;
  }
  if (r.gap) {
    detail::check_finite(*r.gap, r.name + ".gap");
    j["gap"] = *r.gap;
  } else {
    j["gap"] = nullptr;
  }
  j["eps_optimal"] = r.eps_optimal;
  j["subproblems"] = r.subproblems;
  j["evals"] = r.evals;
  j["wall_time_ms"] = r.wall_time_ms;
  auto d = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.detail) {
    detail::check_finite(v, r.name + "." + k);
    d[k] = v;
  }
  j["detail"] = d;
}

inline void from_json(const nlohmann::ordered_json& j, ResultRow& r) {
  r.name = j.at("name").get<std::string>();
  r.n = j.at("n").get<std::size_t>();
  r.value = j.at("value").get<double>();
  r.lower = j.at("lower").is_null() ? std::nullopt : std::optional<double>(j.at("lower").get<double>());
  r.gap = j.at("gap").is_null() ? std::nullopt : std::optional<double>(j.at("gap").get<double>());
  r.eps_optimal = j.at("eps_optimal").get<bool>();
  r.subproblems = j.at("subproblems").get<std::uint64_t>();
  r.evals = j.at("evals").get<std::uint64_t>();
  r.wall_time_ms = j.at("wall_time_ms").get<double>();
  r.detail.clear();
  for (const auto& [k, v] : j.at("detail").items()) r.detail[k] = v.get<double>();
}

inline void to_json(nlohmann::ordered_json& j, const RunConfig& c) {
  j = nlohmann::ordered_json{{"eps_h", c.eps_h}, {"eps_om", c.eps_om}, {"segments", c.segments}, {"workers", c.workers}};
}

inline void from_json(const nlohmann::ordered_json& j, RunConfig& c) {
  c.eps_h = j.at("eps_h").get<double>();
  c.eps_om = j.at("eps_om").get<double>();
  c.segments = j.at("segments").get<int>();
  c.workers = j.at("workers").get<unsigned>();
}

inline void to_json(nlohmann::ordered_json& j, const RunReport& r) {
  j = nlohmann::ordered_json{{"command", r.command},
                             {"config", r.config},
                             {"model", r.model},
                             {"fingerprint", r.fingerprint},
                             {"results", r.results}};
}

inline void from_json(const nlohmann::ordered_json& j, RunReport& r) {
  r.command = j.at("command").get<std::vector<std::string>>();
  r.config = j.at("config").get<RunConfig>();
  r.model = j.at("model").get<std::string>();
  r.fingerprint = j.at("fingerprint").get<std::string>();
  r.results = j.at("results").get<std::vector<ResultRow>>();
}

enum class Format { json, csv, text };

inline const char* csv_header() { return "n,value,lower,gap,eps_optimal,wall_time_ms,name"; }

namespace detail {

inline std::string fixed4(double v) {
  std::string s = fmt::format("{:.4f}", v);
  if (s == "-0.0000") s = "0.0000";
  return s;
}

inline std::string sci(double v) { return fmt::format("{:.2e}", v); }

}  // namespace detail

/// Table of all rows in `reports`. JSON: an array of reports; CSV/text: one
/// line per result row, constants to 4 decimals, gaps in scientific notation.
inline std::string emit_table(const std::vector<RunReport>& reports, Format f) {
  if (f == Format::json) return nlohmann::ordered_json(reports).dump(2) + "\n";
  std::string out;
  if (f == Format::csv) {
    out = std::string(csv_header()) + "\n";
    for (const auto& rep : reports)
      for (const auto& r : rep.results)
        out += fmt::format("{},{},{},{},{},{:.1f},{}\n", r.n, detail::fixed4(r.value),
                           r.lower ? detail::fixed4(*r.lower) : "", r.gap ? detail::sci(*r.gap) : "",
                           r.eps_optimal ? "true" : "false", r.wall_time_ms, r.name);
    return out;
  }
  out = fmt::format("{:>4}  {:>14}  {:>14}  {:>9}  {:>11}  {:>12}  {}\n", "n", "value", "lower", "gap", "eps_optimal",
                    "wall_time_ms", "name");
  for (const auto& rep : reports)
    for (const auto& r : rep.results)
      out += fmt::format("{:>4}  {:>14}  {:>14}  {:>9}  {:>11}  {:>12.1f}  {}\n", r.n, detail::fixed4(r.value),
                         r.lower ? detail::fixed4(*r.lower) : "-", r.gap ? detail::sci(*r.gap) : "-",
                         r.eps_optimal ? "true" : "false", r.wall_time_ms, r.name);
  return out;
}

/// A single report: JSON object for `json`, otherwise the same table layout.
inline std::string emit_report(const RunReport& rep, Format f) {
  if (f == Format::json) return nlohmann::ordered_json(rep).dump(2) + "\n";
  return emit_table({rep}, f);
}

}  // namespace nlbound
