#include "hsm/config.hpp"
#include "hsm/errors.hpp"
#include "hsm/harness.hpp"
#include "hsm/parallel.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace hsm;

namespace {

ExperimentConfig config_from(const std::string& text) { return build_config(parse_config_text(text)); }

// Runs fn with the given worker count and restores a single worker.
template <class Fn>
CommandResult with_threads(int threads, Fn&& fn) {
  set_thread_count(threads);
  CommandResult r = fn();
  set_thread_count(1);
  return r;
}

}  // namespace

TEST(Config, Defaults) {
  const ExperimentConfig cfg = build_config({});
  EXPECT_EQ(cfg.structure, "heisenberg");
  EXPECT_EQ(cfg.n, 2);
  EXPECT_EQ(cfg.p.text(), "2/1");
  EXPECT_EQ(cfg.scales.size(), 3u);
}

TEST(Config, ParsesFileText) {
  const ExperimentConfig cfg = config_from(
      "# comment\n"
      "structure = quaternionic\n"
      "n = 2   # one block\n"
      "m = 3\n"
      "p = 3/2\n"
      "q = inf\n"
      "deltas = 2^-3..2^-6\n"
      "lambda = 0,0,0,0, 0,0,0,0, 0.1,0,0,0\n");
  EXPECT_EQ(cfg.structure, "quaternionic");
  EXPECT_EQ(cfg.m, 3);
  EXPECT_DOUBLE_EQ(cfg.p.value(), 1.5);
  EXPECT_TRUE(std::isinf(cfg.q.value()));
  EXPECT_EQ(cfg.q.text(), "inf");
  EXPECT_EQ(cfg.scales, (std::vector<double>{0.125, 0.0625, 0.03125, 0.015625}));
  const MetivierStructure s = make_structure(cfg);
  EXPECT_EQ(s.m(), 3);
  EXPECT_EQ(s.Lambda()(2, 0), 0.1);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config_text("n = 2\nnot a pair\n"), ConfigError);
  EXPECT_THROW(config_from("colour = red\n"), ConfigError);
  EXPECT_THROW(config_from("p = 1/2\n"), ConfigError);
  EXPECT_THROW(config_from("n = two\n"), ConfigError);
  EXPECT_THROW(config_from("structure = heisenberg\nm = 2\n"), ConfigError);
  EXPECT_THROW(config_from("lambda = 1,2\n"), ConfigError);
  EXPECT_THROW(config_from("deltas = 2^-7..2^-3\n"), ConfigError);
  EXPECT_THROW(config_from("family = cone\n"), ConfigError);
  EXPECT_THROW(parse_override("novalue"), ConfigError);
  try {
    parse_config_text("n = 2\n\nbroken line\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos);
  }
  EXPECT_EQ(parse_override("seed=7"), (std::pair<std::string, std::string>{"seed", "7"}));
  EXPECT_EQ(parse_scales("0.5, 0.25"), (std::vector<double>{0.5, 0.25}));
  EXPECT_EQ(parse_scales("2^-4"), (std::vector<double>{0.0625}));
}

TEST(Harness, GroupCheckDefaultsPass) {
  ExperimentConfig cfg = build_config({});
  cfg.samples = 200;
  const CommandResult r = run_group_check(cfg);
  EXPECT_EQ(r.exit_code, kExitOk);
  EXPECT_EQ(r.output.rfind("# schema=1\n", 0), 0u);
  EXPECT_NE(r.output.find("associativity,200,"), std::string::npos);
}

TEST(Harness, GroupCheckLargeLambdaWarns) {
  ExperimentConfig cfg = config_from("n = 1\nlambda = 3,0\nsamples = 100\n");
  const CommandResult r = run_group_check(cfg);
  EXPECT_EQ(r.exit_code, kExitOk);
  EXPECT_NE(r.output.find("smallness_margin,2,-2.5,0,warning"), std::string::npos);
  EXPECT_NE(r.diagnostics.find("warning"), std::string::npos);
}

TEST(Harness, GeometryCertifiesH2) {
  ExperimentConfig cfg = config_from("seed = 7\npoints = 40\nfold_points = 20\n");
  const CommandResult r = run_geometry(cfg);
  EXPECT_EQ(r.exit_code, kExitOk);
  EXPECT_NE(r.output.find("deviations=0"), std::string::npos);
  EXPECT_NE(r.output.find("status=certified"), std::string::npos);
}

TEST(Harness, GeometryLargeLambdaIsUncertified) {
  ExperimentConfig cfg = config_from("n = 1\nlambda = 4,0\npoints = 20\nfold_points = 10\n");
  const CommandResult r = run_geometry(cfg);
  EXPECT_EQ(r.exit_code, kExitOk);
  EXPECT_NE(r.output.find("status=uncertified"), std::string::npos);
}

TEST(Harness, CounterexampleValidation) {
  EXPECT_THROW(run_counterexample(config_from("structure = quaternionic\nn = 2\nm = 2\nfamily = knapp\n")),
               ConfigError);
  EXPECT_THROW(run_counterexample(config_from("n = 2\nfamily = moment\n")), ConfigError);
  EXPECT_THROW(run_counterexample(config_from("n = 3\nfamily = ball\n")), ConfigError);
  EXPECT_THROW(run_counterexample(config_from("n = 1\nfamily = ball\ndeltas = 0.5,0.25\n")), ConfigError);
  EXPECT_THROW(run_counterexample(config_from("n = 1\nfamily = ball\ndeltas = 0.25,0.5,0.125\n")), ConfigError);
  EXPECT_THROW(run_counterexample(config_from("n = 1\nfamily = stein\nalpha = 0.3\n")), ConfigError);
}

TEST(Harness, MomentCounterexamplePasses) {
  const CommandResult r = run_counterexample(config_from("n = 1\nfamily = moment\ndeltas = 2^-3..2^-6\n"));
  EXPECT_EQ(r.exit_code, kExitOk);
  EXPECT_NE(r.output.find("predicted_exact=1/1"), std::string::npos);
  EXPECT_NE(r.output.find("status=pass"), std::string::npos);
}

TEST(Harness, RegionOutputs) {
  const CommandResult csv = run_region(config_from("n = 2\n"), ExportFormat::Csv);
  EXPECT_NE(csv.output.find("vertex,Q3,2/3,1/3,"), std::string::npos);
  const CommandResult avg = run_region(config_from("n = 1\nregion_kind = averaging\n"), ExportFormat::Csv);
  EXPECT_NE(avg.output.find(",1/2,1/3,"), std::string::npos);
  EXPECT_NE(avg.output.find(",2/3,1/2,"), std::string::npos);
}

TEST(Harness, LemmaCheckPasses) {
  const CommandResult r = run_lemma_check(build_config({}));
  EXPECT_EQ(r.exit_code, kExitOk);
  EXPECT_NE(r.output.find("# summary cases=200"), std::string::npos);
}

TEST(Parallel, MapKeepsIndexOrder) {
  for (int threads : {1, 3, 8}) {
    set_thread_count(threads);
    const std::vector<std::size_t> v = parallel_map(1000, [](std::size_t i) { return i * i; });
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], i * i);
    EXPECT_THROW(parallel_map(100, [](std::size_t i) -> int {
                   if (i == 57) throw DomainError("boom");
                   return 0;
                 }),
                 DomainError);
  }
  set_thread_count(1);
}

TEST(Determinism, OutputsIndependentOfThreadCount) {
  const ExperimentConfig geo = config_from("seed = 3\npoints = 20\nfold_points = 10\n");
  EXPECT_EQ(with_threads(1, [&] { return run_geometry(geo); }).output,
            with_threads(4, [&] { return run_geometry(geo); }).output);
  const ExperimentConfig ladder = config_from("n = 1\nfamily = ball\np = 1\nq = inf\ndeltas = 2^-3..2^-5\n");
  EXPECT_EQ(with_threads(1, [&] { return run_counterexample(ladder); }).output,
            with_threads(4, [&] { return run_counterexample(ladder); }).output);
  const ExperimentConfig group = config_from("seed = 9\nsamples = 100\n");
  EXPECT_EQ(run_group_check(group).output, run_group_check(group).output);
  const ExperimentConfig stein = config_from("n = 1\nfamily = stein\nstein_j_min = 10\nstein_j_max = 14\n");
  EXPECT_EQ(with_threads(1, [&] { return run_counterexample(stein); }).output,
            with_threads(3, [&] { return run_counterexample(stein); }).output);
}
