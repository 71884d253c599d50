#include <gtest/gtest.h>

#include "fcgrow/report.hpp"
#include "support/corpus.hpp"

using namespace fcgrow;
using namespace fcgrow::testing;

namespace {

std::string sample(const std::string& name) { return samples_dir() + "/" + name; }

ReportDocument analyze(const std::string& name, Mode m = Mode::Fused) {
  AnalysisRequest rq;
  rq.input = sample(name);
  rq.mode = m;
  return run_analysis(rq);
}

Diagnostic diagnose_call(const std::function<void()>& f) {
  try {
    f();
  } catch (...) {
    return diagnose(std::current_exception());
  }
  ADD_FAILURE() << "expected an exception";
  return {};
}

}  // namespace

TEST(Report, FormatDetection) {
  EXPECT_EQ(detect_format("a/b.fc", std::nullopt), InputFormat::Fc);
  EXPECT_EQ(detect_format("b.lare", std::nullopt), InputFormat::Lare);
  EXPECT_EQ(detect_format("b.loop", std::nullopt), InputFormat::Loop);
  EXPECT_EQ(detect_format("b.txt", InputFormat::Loop), InputFormat::Loop);
  EXPECT_THROW(detect_format("b.txt", std::nullopt), InputError);
  EXPECT_THROW(detect_format("noext", std::nullopt), InputError);
}

TEST(Report, DoublingInAllThreeLanguages) {
  for (auto name : {"doubling.fc", "doubling.lare", "doubling.loop"}) {
    auto d = analyze(name);
    EXPECT_EQ(d.exit_code(), kExitGrowth) << name;
    EXPECT_EQ(d.report.at(1).growth, Growth::Superpolynomial) << name;
    EXPECT_EQ(d.report.at(1).witnesses, std::vector<VarIdx>{2}) << name;
    EXPECT_EQ(d.report.at(2).growth, Growth::Polynomial) << name;
  }
}

TEST(Report, X5IsPolynomialAsFlowchartAndLoop) {
  auto fc = analyze("x5_loop.fc"), lp = analyze("x5.loop");
  EXPECT_EQ(fc.exit_code(), kExitPolynomial);
  EXPECT_EQ(lp.exit_code(), kExitPolynomial);
  ASSERT_EQ(fc.pairs.size(), 1u);
  ASSERT_EQ(lp.pairs.size(), 1u);
  // The flowchart adds only skip arcs around the loop.
  EXPECT_EQ(fc.pairs[0].deps, lp.pairs[0].deps);
}

TEST(Report, ExplicitAndFusedAgreeOnCorpus) {
  for (auto& [name, p] : fc_corpus()) {
    auto f = analyze(name, Mode::Fused), e = analyze(name, Mode::Explicit);
    ASSERT_EQ(f.pairs.size(), e.pairs.size()) << name;
    for (std::size_t k = 0; k < f.pairs.size(); ++k) {
      EXPECT_EQ(f.pairs[k].ends, e.pairs[k].ends) << name;
      EXPECT_EQ(f.pairs[k].deps, e.pairs[k].deps) << name;
      EXPECT_FALSE(f.pairs[k].lare.has_value());
      ASSERT_TRUE(e.pairs[k].lare.has_value());
    }
    EXPECT_EQ(f.report, e.report) << name;
    EXPECT_EQ(f.warnings, e.warnings) << name;
  }
}

TEST(Report, ExplicitModeNeedsFlowchart) {
  AnalysisRequest rq;
  rq.input = sample("doubling.lare");
  rq.mode = Mode::Explicit;
  EXPECT_THROW(run_analysis(rq), InputError);
}

TEST(Report, HugeIsNamedInWitnesses) {
  auto d = analyze("huge.fc");
  EXPECT_TRUE(d.universe.has_huge);
  auto j = to_json(d);
  bool unbounded = false;
  for (auto& v : j["growth"])
    if (v["growth"] == "Unbounded") {
      unbounded = true;
      EXPECT_EQ(v["witnesses"], nlohmann::json::array({"HUGE"}));
    }
  EXPECT_TRUE(unbounded);
  EXPECT_EQ(d.exit_code(), kExitGrowth);
}

TEST(Report, JsonShape) {
  auto j = to_json(analyze("doubling.fc"));
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["tool_version"], kToolVersion);
  EXPECT_FALSE(j.contains("timing_ms"));
  ASSERT_EQ(j["pairs"].size(), 1u);
  auto& p = j["pairs"][0];
  EXPECT_EQ(p["entry"], "A");
  EXPECT_EQ(p["exit"], "C");
  EXPECT_EQ(p["deps"]["unary_count"], p["deps"]["unary"].size());
  bool found = false;
  for (auto& s : p["deps"]["unary"]) found = found || s == "2 -3-> 1";
  EXPECT_TRUE(found);
  EXPECT_EQ(j["growth"][0]["growth"], "Superpolynomial");
  EXPECT_EQ(j["polynomial"], false);
}

TEST(Report, TimingOnlyWhenAsked) {
  AnalysisRequest rq;
  rq.input = sample("doubling.fc");
  rq.timing = true;
  auto j = to_json(run_analysis(rq));
  ASSERT_TRUE(j.contains("timing_ms"));
  EXPECT_GE(j["timing_ms"].get<double>(), 0.0);
}

TEST(Report, DigestIgnoresLayoutAndComments) {
  auto a = load_text("vars 2\n[x2 (# x1:=x1+x1)*]", InputFormat::Lare);
  auto b = load_text("vars 2 [x2\n  ( #   x1:=x1+x1 )* ]\n", InputFormat::Lare);
  EXPECT_EQ(fnv1a64(a.canonical()), fnv1a64(b.canonical()));
  auto c = load_text("vars 2\n[x2 (# x1:=x1+x2)*]", InputFormat::Lare);
  EXPECT_NE(fnv1a64(a.canonical()), fnv1a64(c.canonical()));
  auto fc1 = load_text(read_file(sample("doubling.fc")), InputFormat::Fc);
  auto fc2 = load_text("vars 2\nentry A\nexit C\narc in A B skip\narc tick B B2 check\n"
                       "arc dbl B2 B add x1 x1 x1\narc out B C skip\n"
                       "loop L parent root bound x2 cut tick arcs dbl\n",
                       InputFormat::Fc);
  EXPECT_EQ(fnv1a64(fc1.canonical()), fnv1a64(fc2.canonical()));
}

TEST(Report, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a64(""), "fnv1a64:cbf29ce484222325");
  EXPECT_EQ(fnv1a64("a"), "fnv1a64:af63dc4c8601ec8c");
}

TEST(Report, MatricesForSmallInputs) {
  AnalysisRequest rq;
  rq.input = sample("choose.lare");
  rq.matrices = true;
  auto d = run_analysis(rq);
  ASSERT_TRUE(d.pairs[0].matrices.has_value());
  EXPECT_EQ(d.pairs[0].matrices->size(), 3u);
  auto j = to_json(d);
  EXPECT_EQ(j["pairs"][0]["matrices"].size(), 3u);
  EXPECT_EQ(j["pairs"][0]["matrices"][0].size(), 4u);
  rq.input = sample("x5.loop");
  EXPECT_THROW(run_analysis(rq), InputError);
}

TEST(Report, SrgDotHasOneGraphPerPair) {
  auto d = analyze("two_exits.fc");
  ASSERT_GE(d.pairs.size(), 2u);
  std::string dot = srg_dot(d);
  std::size_t graphs = 0;
  for (auto pos = dot.find("digraph"); pos != std::string::npos; pos = dot.find("digraph", pos + 1)) ++graphs;
  EXPECT_EQ(graphs, d.pairs.size());
}

TEST(Report, DiagnoseMapsFailures) {
  auto d = diagnose_call([] { load_input(sample("invalid/root_cycle.fc"), std::nullopt); });
  EXPECT_EQ(d.exit_code, kExitInvalid);
  EXPECT_EQ(d.kind, "InvalidProgram");
  ASSERT_EQ(d.items.size(), 1u);
  EXPECT_EQ(d.items[0]["kind"], "RootCycle");

  d = diagnose_call([] { load_input(sample("invalid/syntax.fc"), std::nullopt); });
  EXPECT_EQ(d.exit_code, kExitInvalid);
  EXPECT_EQ(d.kind, "ParseError");
  EXPECT_EQ(d.line, 4);
  EXPECT_EQ(d.column, 11);

  d = diagnose_call([] { load_text("vars 1\n(# x1:=x1)*", InputFormat::Lare); });
  EXPECT_EQ(d.kind, "IllFormedLare");
  EXPECT_EQ(d.items[0]["kind"], "StarOutsideBracket");

  d = diagnose_call([] { load_input(sample("missing.fc"), std::nullopt); });
  EXPECT_EQ(d.kind, "InputError");
  EXPECT_EQ(d.exit_code, kExitInvalid);

  d = diagnose_call([] { throw SizeBudgetExceeded(10, 5); });
  EXPECT_EQ(d.exit_code, kExitInvalid);

  d = diagnose_call([] { throw InternalError("broken"); });
  EXPECT_EQ(d.exit_code, kExitInternal);
  d = diagnose_call([] { throw StarAtRoot("self-loop"); });
  EXPECT_EQ(d.exit_code, kExitInternal);

  auto j = to_json(d);
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["exit_code"], kExitInternal);
  EXPECT_EQ(j["error"]["kind"], "StarAtRoot");
}

TEST(Report, BudgetIsEnforcedInExplicitMode) {
  AnalysisRequest rq;
  rq.input = sample("contract_loop.fc");
  rq.mode = Mode::Explicit;
  rq.budget = 20;
  EXPECT_THROW(run_analysis(rq), SizeBudgetExceeded);
}

TEST(Report, OracleProbe) {
  OracleRequest rq;
  rq.input = sample("doubling.lare");
  rq.var = 1;
  auto r = run_oracle(rq);
  EXPECT_EQ(r.verdict, ProbeVerdict::LooksExp);
  ASSERT_EQ(r.values.size(), 5u);
  EXPECT_EQ(r.values[2], Magnitude::of(24));  // x1 = 3 doubled three times
  auto j = to_json(r);
  for (auto key : {"var", "scales", "values", "verdict", "truncated", "witness"}) EXPECT_TRUE(j.contains(key)) << key;

  rq.init = {3};
  r = run_oracle(rq);
  EXPECT_EQ(r.verdict, ProbeVerdict::Inconclusive);
  EXPECT_EQ(r.values, std::vector<Magnitude>{Magnitude::of(24)});

  rq.var = 7;
  EXPECT_THROW(run_oracle(rq), InputError);
}
