#pragma once

// Command pipeline and report emission shared by the fcgrow tool and its tests:
// input loading, the analysis report document, and the mapping from failures
// to exit codes and machine-readable diagnostics.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "converter.hpp"
#include "deps.hpp"
#include "matrix.hpp"
#include "oracle.hpp"
#include "parse.hpp"

namespace fcgrow {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportSchema = 1;

enum ExitCode : int { kExitPolynomial = 0, kExitInvalid = 1, kExitGrowth = 2, kExitInternal = 3 };

enum class InputFormat { Fc, Lare, Loop };
enum class Mode { Fused, Explicit };

inline const char* to_string(InputFormat f) {
  switch (f) {
    case InputFormat::Fc: return "fc";
    case InputFormat::Lare: return "lare";
    case InputFormat::Loop: return "loop";
  }
  return "?";
}

inline const char* to_string(Mode m) { return m == Mode::Fused ? "fused" : "explicit"; }

// Bad input that is neither a syntax error nor an invalid program: unreadable
// files, unknown formats, unsupported option combinations.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::optional<InputFormat> format_from_name(const std::string& s) {
  if (s == "fc") return InputFormat::Fc;
  if (s == "lare") return InputFormat::Lare;
  if (s == "loop") return InputFormat::Loop;
  return std::nullopt;
}

inline InputFormat detect_format(const std::string& path, const std::optional<InputFormat>& forced) {
  if (forced) return *forced;
  auto dot = path.rfind('.');
  if (dot != std::string::npos)
    if (auto f = format_from_name(path.substr(dot + 1))) return *f;
  throw InputError("cannot tell the format of '" + path + "'; use --format fc|lare|loop");
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// A parsed input of any of the three languages. Flowcharts keep the program;
// the other two are analyzed through a single expression.
struct LoadedInput {
  InputFormat format = InputFormat::Fc;
  std::optional<FlowchartProgram> fc;
  Lare expr;
  Cmd cmd;
  int n = 0;

  Universe universe() const {
    return fc ? universe_of(*fc) : Universe{n, lare_has_huge(expr)};
  }
  // Canonical text, so that formatting and comments do not change the digest.
  std::string canonical() const {
    switch (format) {
      case InputFormat::Fc: return print_fc(*fc);
      case InputFormat::Lare: return "vars " + std::to_string(n) + "\n" + print_lare(expr) + "\n";
      case InputFormat::Loop: return "vars " + std::to_string(n) + "\n" + print_cmd(cmd) + "\n";
    }
    return {};
  }
};

// Parses and validates. Throws ParseError, InvalidProgram or IllFormedLare.
inline LoadedInput load_text(const std::string& text, InputFormat f) {
  LoadedInput in;
  in.format = f;
  switch (f) {
    case InputFormat::Fc:
      in.fc = parse_fc(text);
      in.n = in.fc->n;
      require_valid(*in.fc);
      break;
    case InputFormat::Lare: {
      auto p = parse_lare_program(text);
      in.expr = p.expr;
      in.n = p.n;
      require_wf(in.expr, in.n);
      break;
    }
    case InputFormat::Loop: {
      auto p = parse_loop_program(text);
      in.cmd = p.cmd;
      in.n = p.n;
      in.expr = embed_structured(p.cmd);
      require_wf(in.expr, in.n);
      break;
    }
  }
  return in;
}

inline LoadedInput load_input(const std::string& path, const std::optional<InputFormat>& forced) {
  InputFormat f = detect_format(path, forced);
  return load_text(read_text(path), f);
}

inline std::string fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + buf;
}

// x1..xn for user variables, HUGE and ITER for the two synthetic indices.
inline std::string var_name(VarIdx i, const Universe& u) {
  if (i <= u.n_user) return "x" + std::to_string(i);
  if (u.huge() && i == *u.huge()) return "HUGE";
  if (i == u.n() + 1) return "ITER";
  return "x" + std::to_string(i);
}

struct PairSummary {
  std::optional<std::pair<std::string, std::string>> ends;  // absent for expression inputs
  DepSet deps;
  GrowthReport growth;
  std::optional<std::string> lare;
  std::optional<MatrixSet> matrices;
};

struct ReportDocument {
  std::string command;
  std::string input;
  InputFormat format = InputFormat::Fc;
  Mode mode = Mode::Fused;
  std::string digest;
  Universe universe;
  std::vector<PairSummary> pairs;
  GrowthReport report;
  std::vector<std::string> warnings;
  std::optional<double> timing_ms;

  int exit_code() const { return report.all_polynomial() ? kExitPolynomial : kExitGrowth; }
};

inline nlohmann::json growth_json(const GrowthReport& g, const Universe& u) {
  auto arr = nlohmann::json::array();
  for (auto& v : g.vars) {
    auto w = nlohmann::json::array();
    for (auto s : v.witnesses) w.push_back(var_name(s, u));
    arr.push_back({{"var", var_name(v.var, u)}, {"growth", to_string(v.growth)}, {"witnesses", w}});
  }
  return arr;
}

inline nlohmann::json matrix_json(const DepMatrix& m) {
  auto rows = nlohmann::json::array();
  for (int i = 1; i <= m.dim(); ++i) {
    auto row = nlohmann::json::array();
    for (int j = 1; j <= m.dim(); ++j) row.push_back(to_string(m.at(i, j)));
    rows.push_back(row);
  }
  return rows;
}

inline nlohmann::json to_json(const ReportDocument& d) {
  nlohmann::json j;
  j["schema"] = kReportSchema;
  j["tool_version"] = kToolVersion;
  j["command"] = d.command;
  j["input"] = d.input;
  j["format"] = to_string(d.format);
  j["mode"] = to_string(d.mode);
  j["digest"] = d.digest;
  j["variables"] = d.universe.n_user;
  j["huge"] = d.universe.has_huge;
  auto pairs = nlohmann::json::array();
  for (auto& p : d.pairs) {
    nlohmann::json o;
    if (p.ends) {
      o["entry"] = p.ends->first;
      o["exit"] = p.ends->second;
    }
    auto un = nlohmann::json::array(), bin = nlohmann::json::array();
    for (auto x : p.deps) (x.is_unary() ? un : bin).push_back(to_string(x));
    o["deps"] = {{"unary", un}, {"binary", bin}, {"unary_count", un.size()}, {"binary_count", bin.size()}};
    o["growth"] = growth_json(p.growth, d.universe);
    if (p.lare) o["lare"] = *p.lare;
    if (p.matrices) {
      auto ms = nlohmann::json::array();
      for (auto& m : *p.matrices) ms.push_back(matrix_json(m));
      o["matrices"] = ms;
    }
    pairs.push_back(o);
  }
  j["pairs"] = pairs;
  j["growth"] = growth_json(d.report, d.universe);
  j["polynomial"] = d.report.all_polynomial();
  j["warnings"] = d.warnings;
  if (d.timing_ms) j["timing_ms"] = *d.timing_ms;
  return j;
}

inline std::string growth_text(const GrowthReport& g, const Universe& u, const std::string& indent) {
  std::string out;
  for (auto& v : g.vars) {
    out += indent + var_name(v.var, u) + "  " + to_string(v.growth);
    if (!v.witnesses.empty()) {
      out += "  from";
      for (auto s : v.witnesses) out += " " + var_name(s, u);
    }
    out += "\n";
  }
  return out;
}

inline std::string to_text(const ReportDocument& d) {
  std::ostringstream os;
  os << "fcgrow " << kToolVersion << " " << d.command << "\n";
  os << "input    " << d.input << " (" << to_string(d.format) << ", " << to_string(d.mode) << ")\n";
  os << "digest   " << d.digest << "\n";
  os << "vars     " << d.universe.n_user << (d.universe.has_huge ? " + HUGE" : "") << "\n";
  for (auto& p : d.pairs) {
    os << "\n" << (p.ends ? "pair " + p.ends->first + " -> " + p.ends->second : std::string("expression"))
       << ": " << p.deps.unaries().size() << " unary, " << p.deps.binaries().size() << " binary\n";
    for (auto x : p.deps.unaries())
      if (x.type() != DepType::One && x.type() != DepType::OnePlus)
        os << "  " << var_name(x.src(), d.universe) << " -" << to_string(x.type()) << "-> "
           << var_name(x.dst(), d.universe) << "\n";
    if (p.lare) os << "  lare " << *p.lare << "\n";
    if (p.matrices) {
      os << "  " << p.matrices->size() << " matrices\n";
      for (auto& m : *p.matrices) {
        std::istringstream rows(to_string(m));
        for (std::string row; std::getline(rows, row);) os << "    " << row << "\n";
        os << "\n";
      }
    }
    if (d.pairs.size() > 1) os << growth_text(p.growth, d.universe, "  ");
  }
  os << "\ngrowth\n" << growth_text(d.report, d.universe, "  ");
  for (auto& w : d.warnings) os << "warning: " << w << "\n";
  if (d.timing_ms) os << "time     " << *d.timing_ms << " ms\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Commands

struct AnalysisRequest {
  std::string input;
  std::optional<InputFormat> format;
  Mode mode = Mode::Fused;
  std::size_t budget = 100000;  // explicit-mode expression size
  bool emit_lare = false;       // keep the explicit expression in the report
  bool matrices = false;        // add som of each pair
  bool timing = false;
  std::function<void(const std::string& stage, const std::string& dot)> on_stage;
};

inline ReportDocument run_analysis(const AnalysisRequest& rq, const std::string& command = "analyze") {
  auto t0 = std::chrono::steady_clock::now();
  LoadedInput in = load_input(rq.input, rq.format);
  if (rq.mode == Mode::Explicit && in.format != InputFormat::Fc)
    throw InputError("explicit mode applies to flowchart inputs only");

  ReportDocument d;
  d.command = command;
  d.input = rq.input;
  d.format = in.format;
  d.mode = rq.mode;
  d.digest = fnv1a64(in.canonical());
  d.universe = in.universe();
  const Universe& u = d.universe;

  if (in.fc) {
    ConvertOptions opt;
    opt.on_stage = rq.on_stage;
    if (rq.mode == Mode::Fused) {
      auto fa = analyze_fc_fused(*in.fc, opt);
      for (auto& [ends, deps] : fa.conversion.labels)
        d.pairs.push_back({ends, deps, fa.per_pair.at(ends), std::nullopt, std::nullopt});
      d.report = fa.report;
      d.warnings = fa.conversion.warnings;
    } else {
      auto cv = convert_fc_explicit(*in.fc, rq.budget, opt);
      d.report = classify(identity_set(u.n()), u);
      for (auto& [ends, e] : cv.labels) {
        DepSet deps = analyze_lare(e, u);
        auto g = classify(deps, u);
        d.report = worst_of(d.report, g);
        d.pairs.push_back({ends, deps, g, print_lare(e), std::nullopt});
      }
      d.warnings = cv.warnings;
    }
    if (d.pairs.empty()) d.warnings.push_back("no entry reaches an exit");
  } else {
    DepSet deps = analyze_lare(in.expr, u);
    d.report = classify(deps, u);
    std::optional<std::string> text;
    if (rq.emit_lare || in.format == InputFormat::Loop) text = print_lare(in.expr);
    d.pairs.push_back({std::nullopt, deps, d.report, text, std::nullopt});
  }
  if (rq.matrices) {
    if (u.n() > kMaxSomVars)
      throw InputError("matrix diagnostics need at most " + std::to_string(kMaxSomVars) +
                       " variables including HUGE; this input has " + std::to_string(u.n()));
    for (auto& p : d.pairs) p.matrices = som(p.deps);
  }
  if (rq.timing)
    d.timing_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return d;
}

// Result of `check`: parsing and validation only.
struct CheckResult {
  InputFormat format = InputFormat::Fc;
  int n = 0;
  std::string digest;
};

inline CheckResult run_check(const std::string& path, const std::optional<InputFormat>& forced) {
  LoadedInput in = load_input(path, forced);
  return {in.format, in.n, fnv1a64(in.canonical())};
}

struct OracleRequest {
  std::string input;
  std::optional<InputFormat> format;
  VarIdx var = 1;
  std::vector<std::uint64_t> init{1, 2, 3, 4, 5};
  EnumCaps caps;
};

// With three or more scales this is a growth probe; with fewer, the values
// are reported and the verdict stays Inconclusive.
inline ProbeReport run_oracle(const OracleRequest& rq) {
  LoadedInput in = load_input(rq.input, rq.format);
  if (rq.var < 1 || rq.var > in.n)
    throw InputError("--var " + std::to_string(rq.var) + " is not a variable of this program (1.." +
                     std::to_string(in.n) + ")");
  if (rq.init.empty()) throw InputError("--init needs at least one value");
  auto run = [&](std::uint64_t N) {
    return in.fc ? max_final(*in.fc, rq.var, uniform_state(in.n, N), rq.caps)
                 : max_final(in.expr, rq.var, uniform_state(in.n, N), rq.caps);
  };
  std::vector<std::uint64_t> scales = rq.init;
  std::sort(scales.begin(), scales.end());
  scales.erase(std::unique(scales.begin(), scales.end()), scales.end());
  if (scales.size() >= 3 && scales.front() >= 1) return probe_from(rq.var, scales, run);
  ProbeReport r;
  r.var = rq.var;
  r.scales = scales;
  for (auto N : scales) {
    MaxResult m = run(N);
    r.truncated = r.truncated || m.truncated;
    r.values.push_back(m.found ? m.value : Magnitude::of(0));
    r.witness = m.witness_text;
  }
  return r;
}

inline nlohmann::json to_json(const ProbeReport& r) {
  nlohmann::json j;
  j["schema"] = kReportSchema;
  j["tool_version"] = kToolVersion;
  j["var"] = "x" + std::to_string(r.var);
  j["scales"] = r.scales;
  auto vals = nlohmann::json::array();
  for (auto& v : r.values) vals.push_back(v.str());
  j["values"] = vals;
  j["verdict"] = to_string(r.verdict);
  j["truncated"] = r.truncated;
  j["witness"] = r.witness;
  j["fitted_exponent"] = r.fitted_exponent;
  j["drift"] = r.drift;
  return j;
}

inline std::string to_text(const ProbeReport& r) {
  std::ostringstream os;
  os << "x" << r.var << "\n";
  for (std::size_t k = 0; k < r.scales.size(); ++k)
    os << "  N=" << r.scales[k] << "  max " << r.values[k].str() << "\n";
  os << "verdict  " << to_string(r.verdict) << (r.truncated ? " (truncated)" : "") << "\n";
  if (r.scales.size() >= 3) os << "exponent " << r.fitted_exponent << "\n";
  if (!r.witness.empty()) os << "witness  " << r.witness << "\n";
  return os.str();
}

// SRG of every pair, as one DOT document.
inline std::string srg_dot(const ReportDocument& d) {
  std::string out;
  for (auto& p : d.pairs) {
    std::string name = p.ends ? "\"srg " + p.ends->first + " -> " + p.ends->second + "\"" : "srg";
    out += build_srg(p.deps).to_dot(name);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Failures

struct Diagnostic {
  int exit_code = kExitInternal;
  std::string kind;
  std::string message;
  std::optional<int> line, column;
  std::vector<nlohmann::json> items;  // per-violation details
};

// Maps the exception in flight to an exit code and a diagnostic.
inline Diagnostic diagnose(std::exception_ptr ep) {
  Diagnostic d;
  try {
    std::rethrow_exception(ep);
  } catch (const ParseError& e) {
    d = {kExitInvalid, "ParseError", e.detail, e.line, e.column, {}};
  } catch (const InvalidProgram& e) {
    d = {kExitInvalid, "InvalidProgram", "the program violates " + std::to_string(e.violations.size()) + " structural rule(s)", std::nullopt, std::nullopt, {}};
    for (auto& v : e.violations)
      d.items.push_back({{"kind", to_string(v.kind)}, {"ids", v.ids}, {"message", v.message}});
  } catch (const IllFormedLare& e) {
    d = {kExitInvalid, "IllFormedLare", "the expression violates " + std::to_string(e.violations.size()) + " well-formedness rule(s)", std::nullopt, std::nullopt, {}};
    for (auto& v : e.violations) d.items.push_back({{"kind", to_string(v.kind)}, {"where", v.where}});
  } catch (const SizeBudgetExceeded& e) {
    d = {kExitInvalid, "SizeBudgetExceeded", e.what(), std::nullopt, std::nullopt, {}};
  } catch (const InputError& e) {
    d = {kExitInvalid, "InputError", e.what(), std::nullopt, std::nullopt, {}};
  } catch (const StarAtRoot& e) {
    d = {kExitInternal, "StarAtRoot", e.what(), std::nullopt, std::nullopt, {}};
  } catch (const InternalError& e) {
    d = {kExitInternal, "InternalError", e.what(), std::nullopt, std::nullopt, {}};
  } catch (const std::exception& e) {
    d = {kExitInternal, "InternalError", e.what(), std::nullopt, std::nullopt, {}};
  } catch (...) {
    d = {kExitInternal, "InternalError", "unknown exception", std::nullopt, std::nullopt, {}};
  }
  return d;
}

inline nlohmann::json to_json(const Diagnostic& d) {
  nlohmann::json e{{"kind", d.kind}, {"message", d.message}};
  if (d.line) e["line"] = *d.line;
  if (d.column) e["column"] = *d.column;
  if (!d.items.empty()) e["violations"] = d.items;
  return {{"schema", kReportSchema}, {"tool_version", kToolVersion}, {"exit_code", d.exit_code}, {"error", e}};
}

inline std::string to_text(const Diagnostic& d) {
  std::string out = "error: " + d.kind;
  if (d.line) out += " at line " + std::to_string(*d.line) + ", column " + std::to_string(*d.column);
  out += ": " + d.message + "\n";
  for (auto& it : d.items) {
    out += "  [" + it.value("kind", std::string()) + "] ";
    out += it.contains("message") ? it["message"].get<std::string>() : it.value("where", std::string());
    out += "\n";
  }
  return out;
}

}  // namespace fcgrow
