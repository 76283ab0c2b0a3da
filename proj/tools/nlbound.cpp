// nlbound: certified bounding constants for nonlinear models.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

#include "nlbound/baselines.hpp"
#include "nlbound/models.hpp"
#include "nlbound/params.hpp"
#include "nlbound/report.hpp"

using namespace nlbound;

namespace {

constexpr int kUsage = 2;
constexpr int kModel = 3;
constexpr int kCompute = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string model;
  double eps_h = 1e-4;
  double eps_om = 1e-7;
  int segments = 10;
  std::string format = "json";
  int workers = 0;  // 0 = available parallelism
  bool no_timing = false;
};

/// Built-in names: traffic_s<N>, moving_object, generator.
std::optional<ModelDef> builtin_model(const std::string& name) {
  static const std::regex traffic(R"(traffic_s([0-9]+))");
  std::smatch mm;
  if (std::regex_match(name, mm, traffic)) return build_traffic({.sections = std::stoi(mm[1])}).model;
  if (name == "moving_object") return build_moving_object();
  if (name == "generator") {
    GeneratorModel g = build_generator(illustrative_generator_config());
    for (const auto& w : g.warnings) std::cerr << "warning: " << w << "\n";
    return g.model;
  }
  return std::nullopt;
}

ModelDef resolve_model(const std::string& spec) {
  if (spec.empty()) throw UsageError("--model is required for this command");
  if (std::filesystem::exists(spec)) return load_model(spec);
  if (auto m = builtin_model(spec)) return *m;
  throw ModelError("cannot open model file '" + spec + "' (and it is not a built-in model name)");
}

/// "x=[0,1]; y=[-1, 2]" (separators ';' or whitespace).
Box parse_bounds(const std::string& text) {
  static const std::regex item(R"(\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*\[\s*([^,\]]+?)\s*,\s*([^\]]+?)\s*\]\s*;?)");
  std::vector<Interval> d;
  std::vector<std::string> names;
  auto it = text.cbegin();
  std::smatch mm;
  while (it != text.cend()) {
    if (std::isspace(static_cast<unsigned char>(*it)) || *it == ';') {
      ++it;
      continue;
    }
    if (!std::regex_search(it, text.cend(), mm, item, std::regex_constants::match_continuous))
      throw UsageError("malformed --bounds near '" + std::string(it, text.cend()) + "'");
    double lo, hi;
    try {
      lo = std::stod(mm[2]);
      hi = std::stod(mm[3]);
    } catch (const std::exception&) {
      throw UsageError("malformed bound for '" + mm[1].str() + "'");
    }
    if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi))
      throw UsageError("bound for '" + mm[1].str() + "' must be finite with lo <= hi");
    if (std::find(names.begin(), names.end(), mm[1].str()) != names.end())
      throw UsageError("duplicate bound for '" + mm[1].str() + "'");
    names.push_back(mm[1]);
    d.emplace_back(lo, hi);
    it = mm[0].second;
  }
  return Box(std::move(d), std::move(names));
}

std::vector<int> parse_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(tok, &used);
      if (used != tok.size() || v < 1) throw std::invalid_argument("");
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError("--sections expects a comma-separated list of positive integers");
    }
  }
  if (out.empty()) throw UsageError("--sections expects at least one value");
  return out;
}

class Runner {
 public:
  Runner(const Globals& g, std::vector<std::string> argv) : g_(g), argv_(std::move(argv)) {
    opt_.bnb.eps_h = g.eps_h;
    opt_.bnb.eps_om = g.eps_om;
    opt_.bnb.segments = g.segments;
    opt_.workers = static_cast<unsigned>(g.workers);
    try {
      opt_.bnb.validate();
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
  }

  RunReport report(const ModelDef* m) const {
    RunReport r;
    r.command = argv_;
    r.config = {g_.eps_h, g_.eps_om, g_.segments, opt_.workers};
    if (m) {
      r.model = m->name;
      r.fingerprint = fingerprint(*m);
    }
    return r;
  }

  ResultRow row(const std::string& name, const ModelDef& m, double value, std::optional<double> lower,
                std::optional<double> gap, bool eps_optimal, const RunStats& st) const {
    ResultRow r;
    r.name = name;
    r.n = m.n();
    r.value = value;
    r.lower = lower;
    r.gap = gap;
    r.eps_optimal = eps_optimal;
    r.subproblems = st.subproblems;
    r.evals = st.evals;
    r.wall_time_ms = g_.no_timing ? 0.0 : st.wall_time_ms;
    return r;
  }

  RunReport lipschitz(const ModelDef& m, int which) const {
    const LipschitzResult l = which == 1 ? lipschitz_case1(m, opt_) : lipschitz_case2(m, opt_);
    RunReport rep = report(&m);
    rep.results.push_back(
        row(which == 1 ? "gamma_l1" : "gamma_l2", m, l.gamma, l.lower, l.gap, l.eps_optimal, l.stats));
    if (which == 2) rep.results.back().detail["unique_subproblems"] = static_cast<double>(l.unique.size());
    return rep;
  }

  RunReport osl_run(const ModelDef& m, OslEstimator est) const {
    const OSLResult o = osl(m, est, opt_);
    RunReport rep = report(&m);
    rep.results.push_back(row(std::string("gamma_s_") + to_string(est), m, o.gamma_s, o.lower, o.gap, o.eps_optimal,
                              o.stats));
    if (o.lower_gamma) rep.results.back().detail["gamma_lower"] = *o.lower_gamma;
    return rep;
  }

  RunReport qib_run(const ModelDef& m, double eps1, double eps2) const {
    const QIBResult q = qib(m, eps1, eps2, OslEstimator::gershgorin, opt_);
    RunReport rep = report(&m);
    ResultRow r1 = row("gamma_q1", m, q.gamma_q1, std::nullopt, std::nullopt, q.eps_optimal, q.stats);
    r1.detail = {{"eps1", eps1}, {"eps2", eps2}, {"gamma_m", q.gamma_m}, {"gamma_bar", q.gamma_bar},
                 {"gamma_lower", q.gamma_under}};
    rep.results.push_back(r1);
    rep.results.push_back(row("gamma_q2", m, q.gamma_q2, q.gamma_q2, 0.0, true, {}));
    return rep;
  }

  RunReport qb_run(const ModelDef& m) const {
    const QBResult q = qb(m, opt_);
    RunReport rep = report(&m);
    for (std::size_t j = 0; j < q.gamma.size(); ++j) {
      RunStats st = j == 0 ? q.stats : RunStats{};
      rep.results.push_back(row("Gamma_" + m.states[j].name, m, q.gamma[j], q.lower[j], q.gamma[j] - q.lower[j],
                                q.eps_optimal, st));
    }
    return rep;
  }

  RunReport jacobian_run(const ModelDef& m) const {
    const JacobianBounds jb = jacobian_bounds(m, opt_);
    RunReport rep = report(&m);
    bool first = true;
    for (const auto& e : jb.entries) {
      const double gap = e.structural_zero ? 0.0 : std::max(e.max.gap(), e.min.gap());
      const bool ok = e.structural_zero || (e.max.eps_optimal && e.min.eps_optimal);
      ResultRow r = row("d" + m.f_names[e.i] + "/d" + m.states[e.j].name, m, e.bounds.hi(), e.bounds.lo(), gap, ok,
                        first ? jb.stats : RunStats{});
      first = false;
      rep.results.push_back(r);
    }
    return rep;
  }

  RunReport maximize_run(const std::string& text, const std::string& bounds) const {
    Expr e;
    try {
      e = parse(text);
    } catch (const ParseError& err) {
      throw UsageError(std::string("--expr: ") + err.what());
    }
    const Box b = parse_bounds(bounds);
    for (const auto& v : free_vars(e))
      if (std::find(b.labels().begin(), b.labels().end(), v) == b.labels().end())
        throw UsageError("--bounds does not cover variable '" + v + "'");
    const Bound r = maximize_expr(e, b, opt_.bnb);
    RunReport rep = report(nullptr);
    rep.model = "expr";
    ModelDef dummy;
    dummy.states.resize(b.size());
    rep.results.push_back(row("max", dummy, r.upper, r.lower, r.gap(), r.eps_optimal, r.stats));
    return rep;
  }

  RunReport baseline_run(const ModelDef& m, SampleMethod method, std::size_t count, const std::string& objective) const {
    const auto t0 = std::chrono::steady_clock::now();
    SampleReport s;
    std::string name;
    if (objective == "lipschitz") {
      std::vector<Expr> terms;
      for (std::size_t i = 0; i < m.g(); ++i) terms.push_back(grad_sq_norm(m, i));
      s = sample_max(sum(terms), m.domain(), count, method);
      s.best_value = std::sqrt(std::max(s.best_value, 0.0));
      name = std::string("gamma_l1_") + to_string(method);
    } else {
      if (method != SampleMethod::halton) throw UsageError("jacobian-norm baseline supports --method halton only");
      s = jacobian_norm_sampled(m, count);
      name = "jacobian_norm_halton";
    }
    RunStats st;
    st.evals = s.samples;
    st.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    RunReport rep = report(&m);
    ResultRow r = row(name, m, s.best_value, std::nullopt, std::nullopt, false, st);
    r.detail["samples"] = static_cast<double>(s.samples);
    rep.results.push_back(r);
    return rep;
  }

 private:
  Globals g_;
  std::vector<std::string> argv_;
  Options opt_;
};

void emit(const std::string& text) {
  std::cout << text;
  std::cout.flush();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified bounding constants (Lipschitz, one-sided Lipschitz, QIB, QB, Jacobian) for nonlinear models"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--model", g.model, "model file (.nds) or built-in name: traffic_s<N>, moving_object, generator");
  app.add_option("--eps-h", g.eps_h, "objective gap tolerance")->capture_default_str();
  app.add_option("--eps-om", g.eps_om, "minimum box width")->capture_default_str();
  app.add_option("--segments", g.segments, "slabs for refined interval evaluation")->capture_default_str();
  app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"json", "csv", "text"}))->capture_default_str();
  app.add_option("--workers", g.workers, "worker threads (0 = available parallelism)")->check(CLI::NonNegativeNumber);
  app.add_flag("--no-timing", g.no_timing, "report wall times as 0 (reproducible output)");

  int lip_case = 1;
  auto* lip = app.add_subcommand("lipschitz", "Lipschitz constant");
  lip->add_option("--case", lip_case, "1: one global search; 2: per-component, deduplicated")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();

  std::string estimator = "gershgorin";
  auto* osl_cmd = app.add_subcommand("osl", "one-sided Lipschitz constant");
  osl_cmd->add_option("--estimator", estimator)->check(CLI::IsMember({"frobenius", "gershgorin", "zeta"}))
      ->capture_default_str();

  double eps1 = 0.0, eps2 = 0.0;
  auto* qib_cmd = app.add_subcommand("qib", "quadratic inner-boundedness constants");
  qib_cmd->add_option("--eps1", eps1)->required()->check(CLI::NonNegativeNumber);
  qib_cmd->add_option("--eps2", eps2)->required()->check(CLI::NonNegativeNumber);

  auto* qb_cmd = app.add_subcommand("qb", "quadratic-boundedness matrix (diagonal)");
  auto* jac_cmd = app.add_subcommand("jacobian", "bounded-Jacobian entries");

  std::string expr_text, bounds_text;
  auto* max_cmd = app.add_subcommand("maximize", "certified maximum of an expression over a box");
  max_cmd->add_option("--expr", expr_text)->required();
  max_cmd->add_option("--bounds", bounds_text, "e.g. \"x=[0,1]; y=[-1,2]\"")->required();

  std::string method = "halton", objective = "lipschitz";
  std::size_t count = 10000;
  auto* base_cmd = app.add_subcommand("baseline", "sampled (non-certified) under-approximation");
  base_cmd->add_option("--method", method)
      ->check(CLI::IsMember({"halton", "corners", "midpoint", "multistart_local"}))
      ->capture_default_str();
  base_cmd->add_option("--count", count)->check(CLI::PositiveNumber)->capture_default_str();
  base_cmd->add_option("--objective", objective)->check(CLI::IsMember({"lipschitz", "jacobian-norm"}))
      ->capture_default_str();

  std::string sections = "5,10";
  int table_case = 1;
  auto* table_cmd = app.add_subcommand("traffic-table", "Lipschitz constants of traffic models by section count");
  table_cmd->add_option("--sections", sections, "comma-separated section counts")->capture_default_str();
  table_cmd->add_option("--case", table_case)->check(CLI::IsMember({1, 2}))->capture_default_str();

  std::string export_name, export_out;
  auto* export_cmd = app.add_subcommand("export-model", "write a built-in model in the model-file format");
  export_cmd->add_option("name", export_name, "traffic_s<N>, moving_object or generator")->required();
  export_cmd->add_option("-o,--output", export_out, "output path (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  const std::vector<std::string> args(argv + 1, argv + argc);
  const Format fmt = g.format == "csv" ? Format::csv : g.format == "text" ? Format::text : Format::json;
  try {
    if (*export_cmd) {
      const auto m = builtin_model(export_name);
      if (!m) throw ModelError("unknown built-in model '" + export_name + "'");
      const std::string text = model_to_text(*m);
      if (export_out.empty()) {
        emit(text);
      } else {
        std::ofstream out(export_out);
        if (!(out << text)) throw ModelError("cannot write '" + export_out + "'");
      }
      return 0;
    }

    const Runner run(g, args);
    if (*max_cmd) {
      emit(emit_report(run.maximize_run(expr_text, bounds_text), fmt));
      return 0;
    }
    if (*table_cmd) {
      std::vector<RunReport> rows;
      for (int s : parse_list(sections)) rows.push_back(run.lipschitz(build_traffic({.sections = s}).model, table_case));
      emit(emit_table(rows, fmt));
      return 0;
    }

    const ModelDef m = resolve_model(g.model);
    RunReport rep;
    if (*lip) rep = run.lipschitz(m, lip_case);
    else if (*osl_cmd) rep = run.osl_run(m, *parse_estimator(estimator));
    else if (*qib_cmd) rep = run.qib_run(m, eps1, eps2);
    else if (*qb_cmd) rep = run.qb_run(m);
    else if (*jac_cmd) rep = run.jacobian_run(m);
    else if (*base_cmd) rep = run.baseline_run(m, *parse_sample_method(method), count, objective);
    emit(emit_report(rep, fmt));
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return kModel;
  } catch (const Error& e) {
    std::cerr << "computation error: " << e.what() << "\n";
    return kCompute;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCompute;
  }
}
