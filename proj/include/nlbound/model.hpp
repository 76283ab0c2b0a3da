#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "nlbound/box.hpp"
#include "nlbound/errors.hpp"
#include "nlbound/expr.hpp"
#include "nlbound/interval.hpp"
#include "nlbound/parser.hpp"

namespace nlbound {

struct Variable {
  std::string name;
  Interval bounds;
};

using Matrix = std::vector<std::vector<double>>;

/// A nonlinear system  x' = A x + G f(x, u) + B u  reduced to what the
/// bounding constants need: the variables with their bounds, f, and G.
struct ModelDef {
  std::string name;
  std::vector<Variable> states;
  std::vector<Variable> inputs;
  std::vector<std::string> f_names;
  std::vector<Expr> f;
  std::optional<Matrix> G;  // n x g; identity when absent
  std::vector<std::pair<std::string, double>> constants;  // informational, already substituted

  std::size_t n() const noexcept { return states.size(); }
  std::size_t m() const noexcept { return inputs.size(); }
  std::size_t g() const noexcept { return f.size(); }

  std::vector<std::string> state_names() const {
    std::vector<std::string> out;
    for (const auto& v : states) out.push_back(v.name);
    return out;
  }

  std::vector<std::string> var_names() const {
    std::vector<std::string> out = state_names();
    for (const auto& v : inputs) out.push_back(v.name);
    return out;
  }

  /// Ω = 𝒳 × 𝒰 as a labelled box (states first, then inputs).
  Box domain() const {
    std::vector<Interval> d;
    for (const auto& v : states) d.push_back(v.bounds);
    for (const auto& v : inputs) d.push_back(v.bounds);
    return Box(std::move(d), var_names());
  }

  /// 𝒳 alone.
  Box state_domain() const {
    std::vector<Interval> d;
    for (const auto& v : states) d.push_back(v.bounds);
    return Box(std::move(d), state_names());
  }

  /// G with the identity default. Requires g = n when G is absent.
  Matrix G_or_identity() const {
    if (G) return *G;
    if (g() != n()) throw DimensionMismatch("G omitted but f has " + std::to_string(g()) + " components for " +
                                            std::to_string(n()) + " states");
    Matrix I(n(), std::vector<double>(n(), 0.0));
    for (std::size_t i = 0; i < n(); ++i) I[i][i] = 1.0;
    return I;
  }

  /// Throws ModelError if the definition is inconsistent.
  void validate() const {
    if (states.empty()) throw ModelError("model declares no states");
    if (f.empty()) throw ModelError("model declares no f components");
    if (f_names.size() != f.size()) throw ModelError("f names do not match f components");
    std::set<std::string> declared;
    for (const auto* group : {&states, &inputs})
      for (const auto& v : *group) {
        if (is_reserved_name(v.name)) throw ModelError("variable name '" + v.name + "' is reserved");
        if (!declared.insert(v.name).second) throw ModelError("duplicate variable '" + v.name + "'");
      }
    for (std::size_t i = 0; i < f.size(); ++i)
      for (const auto& v : free_vars(f[i]))
        if (!declared.count(v)) throw ModelError(f_names[i] + " uses undeclared variable '" + v + "'");
    if (G) {
      if (G->size() != n()) throw ModelError("G must have one row per state");
      for (const auto& row : *G) {
        if (row.size() != g()) throw ModelError("G rows must have one entry per f component");
        for (double v : row)
          if (!std::isfinite(v)) throw ModelError("G entries must be finite");
      }
    }
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

inline bool valid_identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

inline double parse_real(const std::string& text, int line) {
  const std::string t = trim(text);
  double v = 0.0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || p != t.data() + t.size() || !std::isfinite(v))
    throw ModelError("line " + std::to_string(line) + ": expected a real number, got '" + t + "'");
  return v;
}

inline std::string strip_comment(const std::string& line) {
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_quotes = !in_quotes;
    if (line[i] == '#' && !in_quotes) return line.substr(0, i);
  }
  return line;
}

inline std::string fmt_real(double v) { return fmt::format("{}", v); }

}  // namespace detail

/// Parse the text model format:
///
///     [constants]   name = real
///     [states]      name = [lo, hi]
///     [inputs]      name = [lo, hi]
///     [f]           f1 = "expression"
///     [G]           one row of reals per state
///
/// `#` starts a comment. Constants are substituted into expressions.
inline ModelDef parse_model(std::string_view text, std::string name = {}) {
  ModelDef m;
  m.name = std::move(name);
  std::map<std::string, double> constants;
  Matrix g_rows;
  bool has_g = false;
  std::string section;

  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  auto err = [&](const std::string& msg) { return ModelError("line " + std::to_string(line) + ": " + msg); };

  while (std::getline(in, raw)) {
    ++line;
    const std::string s = detail::trim(detail::strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[' && s.back() == ']' && s.find('=') == std::string::npos) {
      section = detail::trim(s.substr(1, s.size() - 2));
      if (section != "constants" && section != "states" && section != "inputs" && section != "f" && section != "G")
        throw err("unknown section [" + section + "]");
      if (section == "G") has_g = true;
      continue;
    }
    if (section.empty()) throw err("content before the first section");

    if (section == "G") {
      std::vector<double> row;
      std::string cell;
      std::string normalized = s;
      for (char& c : normalized)
        if (c == ',') c = ' ';
      std::istringstream cells(normalized);
      while (cells >> cell) row.push_back(detail::parse_real(cell, line));
      g_rows.push_back(std::move(row));
      continue;
    }

    const auto eq = s.find('=');
    if (eq == std::string::npos) throw err("expected 'name = value'");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string val = detail::trim(s.substr(eq + 1));
    if (!detail::valid_identifier(key)) throw err("invalid name '" + key + "'");
    if (is_reserved_name(key)) throw err("name '" + key + "' is reserved");

    if (section == "constants") {
      if (constants.count(key)) throw err("duplicate constant '" + key + "'");
      const double v = detail::parse_real(val, line);
      constants[key] = v;
      m.constants.emplace_back(key, v);
    } else if (section == "states" || section == "inputs") {
      if (constants.count(key)) throw err("'" + key + "' is already a constant");
      if (val.size() < 2 || val.front() != '[' || val.back() != ']') throw err("bounds must be written [lo, hi]");
      const std::string inner = val.substr(1, val.size() - 2);
      const auto comma = inner.find(',');
      if (comma == std::string::npos) throw err("bounds must be written [lo, hi]");
      const double lo = detail::parse_real(inner.substr(0, comma), line);
      const double hi = detail::parse_real(inner.substr(comma + 1), line);
      if (lo > hi) throw err("empty bounds for '" + key + "'");
      (section == "states" ? m.states : m.inputs).push_back({key, Interval(lo, hi)});
    } else {  // f
      if (val.size() < 2 || val.front() != '"' || val.back() != '"') throw err("f entries must be quoted");
      try {
        m.f.push_back(parse(val.substr(1, val.size() - 2), constants));
      } catch (const ParseError& e) {
        throw err(e.what());
      }
      m.f_names.push_back(key);
    }
  }
  if (has_g) m.G = std::move(g_rows);
  m.validate();
  return m;
}

inline ModelDef load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  std::string stem = path;
  if (auto slash = stem.find_last_of('/'); slash != std::string::npos) stem = stem.substr(slash + 1);
  if (auto dot = stem.rfind('.'); dot != std::string::npos) stem = stem.substr(0, dot);
  return parse_model(ss.str(), stem);
}

/// Canonical text form; `parse_model(model_to_text(m))` rebuilds an equivalent model.
inline std::string model_to_text(const ModelDef& m) {
  std::string out;
  if (!m.name.empty()) out += "# model: " + m.name + "\n";
  if (!m.constants.empty()) {
    out += "[constants]\n";
    for (const auto& [k, v] : m.constants) out += k + " = " + detail::fmt_real(v) + "\n";
  }
  out += "[states]\n";
  for (const auto& v : m.states)
    out += v.name + " = [" + detail::fmt_real(v.bounds.lo()) + ", " + detail::fmt_real(v.bounds.hi()) + "]\n";
  out += "[inputs]\n";
  for (const auto& v : m.inputs)
    out += v.name + " = [" + detail::fmt_real(v.bounds.lo()) + ", " + detail::fmt_real(v.bounds.hi()) + "]\n";
  out += "[f]\n";
  for (std::size_t i = 0; i < m.f.size(); ++i) out += m.f_names[i] + " = \"" + print(m.f[i]) + "\"\n";
  if (m.G) {
    out += "[G]\n";
    for (const auto& row : *m.G) {
      for (std::size_t j = 0; j < row.size(); ++j) out += (j ? " " : "") + detail::fmt_real(row[j]);
      out += "\n";
    }
  }
  return out;
}

/// FNV-1a 64-bit hash of the canonical text, as 16 hex digits.
inline std::string fingerprint(const ModelDef& m) {
  ModelDef unnamed = m;
  unnamed.name.clear();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : model_to_text(unnamed)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace nlbound
