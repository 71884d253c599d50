#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "fcgrow/report.hpp"

using namespace fcgrow;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_logger_st("fcgrow");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::err);
  if (const char* env = std::getenv("FCGROW_LOG")) {
    std::string v = env;
    if (v == "error")
      spdlog::set_level(spdlog::level::err);
    else if (v == "info")
      spdlog::set_level(spdlog::level::info);
    else if (v == "debug")
      spdlog::set_level(spdlog::level::debug);
    else
      spdlog::warn("ignoring FCGROW_LOG={}; expected error, info or debug", v);
  }
}

struct Common {
  std::string input;
  std::string format;
  std::string out;
  bool json = false;

  std::optional<InputFormat> forced() const {
    if (format.empty()) return std::nullopt;
    return format_from_name(format);
  }
};

void add_common(CLI::App* c, Common& o) {
  c->add_option("-i,--input", o.input, "Input program (.fc, .lare or .loop)")->required();
  c->add_option("--format", o.format, "Override format detection")
      ->check(CLI::IsMember({"fc", "lare", "loop"}));
  c->add_flag("--json", o.json, "Emit JSON");
  c->add_option("-o,--out", o.out, "Write the report here instead of stdout");
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write '" + path + "'");
  f << text;
}

void emit(const Common& o, const std::string& text) {
  if (o.out.empty())
    std::cout << text;
  else
    write_file(o.out, text);
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

int fail(const Common& o) {
  Diagnostic d = diagnose(std::current_exception());
  spdlog::info("failed with {}: {}", d.kind, d.message);
  if (o.json) {
    try {
      emit(o, dump(to_json(d)));
    } catch (...) {
      std::cout << dump(to_json(d));
    }
  } else {
    std::cerr << to_text(d);
  }
  return d.exit_code;
}

std::vector<std::uint64_t> parse_scales(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t comma = s.find(',', pos);
    std::string item = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      if (item.empty() || item[0] == '-') throw std::invalid_argument(item);
      out.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw InputError("--init expects comma-separated non-negative integers, got '" + s + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

// Path for one pair's expression when a flowchart has several pairs.
std::string pair_path(const std::string& base, const PairSummary& p, std::size_t pairs) {
  if (pairs <= 1 || !p.ends) return base;
  auto dot = base.rfind('.');
  auto slash = base.rfind('/');
  std::string tag = "." + p.ends->first + "_" + p.ends->second;
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return base + tag;
  return base.substr(0, dot) + tag + base.substr(dot);
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"fcgrow: polynomial growth analysis of loop-annotated flowcharts"};
  app.require_subcommand(1);

  Common an, cv, orc, dg, ck;
  std::string mode = "fused";
  bool timing = false;
  auto* analyze = app.add_subcommand("analyze", "Classify the growth of every variable");
  add_common(analyze, an);
  analyze->add_option("--mode", mode, "fused (default) or explicit")
      ->check(CLI::IsMember({"fused", "explicit"}));
  analyze->add_flag("--timing", timing, "Add wall-clock time to the report");

  std::size_t budget = 100000;
  std::string emit_lare, emit_dot;
  bool trace_stages = false;
  auto* convert = app.add_subcommand("convert", "Build the explicit expression of a program");
  add_common(convert, cv);
  convert->add_option("--budget", budget, "Largest expression size, in nodes")->check(CLI::PositiveNumber);
  convert->add_option("--emit-lare", emit_lare, "Write each pair's expression to this file");
  convert->add_option("--emit-dot", emit_dot, "Write the working graph in DOT to this file");
  convert->add_flag("--trace-stages", trace_stages, "With --emit-dot, write every stage, not only the last");
  convert->add_flag("--timing", timing, "Add wall-clock time to the report");

  OracleRequest orq;
  std::string init = "1,2,3,4,5";
  std::uint64_t seed = 0;
  auto* oracle = app.add_subcommand("oracle", "Search worst-case values by enumeration");
  add_common(oracle, orc);
  oracle->add_option("--var", orq.var, "Variable index j of x_j")->required();
  oracle->add_option("--init", init, "Input scales N, every variable starts at N");
  oracle->add_option("--huge", orq.caps.huge, "Value assigned by **");
  oracle->add_option("--max-len", orq.caps.max_len, "Longest trace, in steps");
  oracle->add_option("--budget", orq.caps.budget, "Total steps explored");
  auto* seed_opt = oracle->add_option("--seed", seed, "Sample weak choices with this seed");

  bool matrices = false;
  std::string srg;
  auto* diag = app.add_subcommand("diag", "Matrix and size-relation diagnostics");
  add_common(diag, dg);
  diag->add_flag("--matrices", matrices, "List som of each pair (at most 4 variables)");
  diag->add_option("--srg", srg, "Write the size-relation graph in DOT to this file");

  auto* check = app.add_subcommand("check", "Parse and validate only");
  add_common(check, ck);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  if (*analyze) {
    try {
      AnalysisRequest rq;
      rq.input = an.input;
      rq.format = an.forced();
      rq.mode = mode == "explicit" ? Mode::Explicit : Mode::Fused;
      rq.timing = timing;
      spdlog::info("analyzing {} ({} mode)", rq.input, mode);
      auto doc = run_analysis(rq);
      emit(an, an.json ? dump(to_json(doc)) : to_text(doc));
      spdlog::info("exit code {}", doc.exit_code());
      return doc.exit_code();
    } catch (...) {
      return fail(an);
    }
  }

  if (*convert) {
    try {
      AnalysisRequest rq;
      rq.input = cv.input;
      rq.format = cv.forced();
      bool flowchart = detect_format(cv.input, rq.format) == InputFormat::Fc;
      rq.mode = flowchart ? Mode::Explicit : Mode::Fused;
      rq.budget = budget;
      rq.emit_lare = true;
      rq.timing = timing;
      std::string stages;
      if (!emit_dot.empty())
        rq.on_stage = [&](const std::string& stage, const std::string& dot) {
          spdlog::debug("stage {}", stage);
          if (trace_stages || stage == "final") stages += "// stage: " + stage + "\n" + dot;
        };
      auto doc = run_analysis(rq, "convert");
      if (!emit_lare.empty())
        for (auto& p : doc.pairs)
          write_file(pair_path(emit_lare, p, doc.pairs.size()),
                     "vars " + std::to_string(doc.universe.n_user) + "\n" + p.lare.value_or("") + "\n");
      if (!emit_dot.empty()) {
        if (!flowchart) throw InputError("--emit-dot needs a flowchart input");
        write_file(emit_dot, stages);
      }
      emit(cv, cv.json ? dump(to_json(doc)) : to_text(doc));
      return doc.exit_code();
    } catch (...) {
      return fail(cv);
    }
  }

  if (*oracle) {
    try {
      orq.input = orc.input;
      orq.format = orc.forced();
      orq.init = parse_scales(init);
      if (*seed_opt) orq.caps.seed = seed;
      spdlog::info("probing x{} of {} at {} scales", orq.var, orq.input, orq.init.size());
      auto r = run_oracle(orq);
      emit(orc, orc.json ? dump(to_json(r)) : to_text(r));
      return kExitPolynomial;
    } catch (...) {
      return fail(orc);
    }
  }

  if (*diag) {
    try {
      AnalysisRequest rq;
      rq.input = dg.input;
      rq.format = dg.forced();
      rq.matrices = matrices;
      auto doc = run_analysis(rq, "diag");
      if (!srg.empty()) write_file(srg, srg_dot(doc));
      emit(dg, dg.json ? dump(to_json(doc)) : to_text(doc));
      return doc.exit_code();
    } catch (...) {
      return fail(dg);
    }
  }

  try {
    auto r = run_check(ck.input, ck.forced());
    if (ck.json)
      emit(ck, dump({{"schema", kReportSchema},
                     {"tool_version", kToolVersion},
                     {"valid", true},
                     {"format", to_string(r.format)},
                     {"variables", r.n},
                     {"digest", r.digest}}));
    else
      emit(ck, std::string("ok ") + to_string(r.format) + ", " + std::to_string(r.n) + " variables, " +
                   r.digest + "\n");
    return kExitPolynomial;
  } catch (...) {
    return fail(ck);
  }
}
