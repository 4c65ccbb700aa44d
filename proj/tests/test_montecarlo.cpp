#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "ccg/dgp.hpp"
#include "ccg/error.hpp"
#include "ccg/montecarlo.hpp"
#include "ccg/report.hpp"

using namespace ccg;

TEST_CASE("estimand kinds parse") {
  for (auto k : {EstimandKind::att, EstimandKind::oracle, EstimandKind::tau_mr, EstimandKind::tau_th,
                 EstimandKind::placebo})
    CHECK(parse_estimand_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_estimand_kind("median"), Error);
}

TEST_CASE("summaries do not depend on threads and repeat exactly") {
  auto spec = preset("separated");
  McOptions opts;
  opts.reps = 60;
  opts.master_seed = 11;
  opts.n_per_group = 300;
  opts.keep_per_rep = true;
  std::vector<EstimandSpec> est = default_estimands(spec);
  est.push_back({"tau_mr", EstimandKind::tau_mr, {}, 0});
  est.push_back({"tau_th", EstimandKind::tau_th, {}, 0});

  opts.threads = 1;
  const auto a = to_json(run_mc(spec, PipelineConfig{}, est, opts));
  opts.threads = 4;
  const auto b = to_json(run_mc(spec, PipelineConfig{}, est, opts));
  const auto c = to_json(run_mc(spec, PipelineConfig{}, est, opts));
  CHECK(a.dump() == b.dump());
  CHECK(b.dump() == c.dump());
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);

  opts.master_seed = 12;
  CHECK(to_json(run_mc(spec, PipelineConfig{}, est, opts)).dump() != a.dump());
}

TEST_CASE("matched additive design is unbiased") {
  auto spec = preset("did_matched");
  McOptions opts;
  opts.reps = 2000;
  opts.n_per_group = 1000;
  opts.master_seed = 1;
  auto s = run_mc(spec, PipelineConfig{}, default_estimands(spec), opts);
  const auto& att = s.at("att");
  CAPTURE(att.bias);
  CAPTURE(att.mc_se);
  CHECK(att.ok == 2000);
  CHECK(att.unbiased());
  CHECK(std::abs(att.bias) < 3 * att.mc_se);
  CHECK(att.mc_se == doctest::Approx(att.sd_estimate / std::sqrt(2000.0)));
  CHECK(att.coverage > 0.9);
  CHECK(att.coverage <= 1.0);
  REQUIRE(s.selection_exact_rate.has_value());
  CHECK(*s.selection_exact_rate >= 0.95);
  CHECK(s.at("oracle").unbiased());
}

TEST_CASE("factor counterexample bias") {
  auto spec = preset("ife_thm1iv");
  McOptions opts;
  opts.reps = 500;
  opts.n_per_group = 1000;
  auto s = run_mc(spec, PipelineConfig{}, default_estimands(spec), opts);
  const auto& att = s.at("att");
  CHECK(std::abs(att.bias - (-1.0)) < 3 * att.mc_se);
  CHECK(att.analytic_bias == doctest::Approx(-1.0));
  CHECK_FALSE(att.unbiased());
}

TEST_CASE("declared groups, periods and placebo p-values") {
  auto spec = preset("mr_case1");
  McOptions opts;
  opts.reps = 300;
  opts.n_per_group = 500;
  std::vector<EstimandSpec> est{{"mr", EstimandKind::tau_mr, {"comparison"}, 0},
                                {"th", EstimandKind::tau_th, {}, 2},
                                {"close", EstimandKind::oracle, {"comparison"}, 0}};
  auto s = run_mc(spec, PipelineConfig{}, est, opts);
  CHECK(s.at("mr").unbiased());
  CHECK(s.at("close").unbiased());
  CHECK(std::abs(s.at("th").bias - 1.0) < 3 * s.at("th").mc_se);
  CHECK(s.at("th").analytic_bias == doctest::Approx(1.0));
  CHECK_THROWS(s.at("missing"));

  auto sep = preset("separated");
  std::vector<EstimandSpec> plac{{"placebo", EstimandKind::placebo, {"close1", "close2"}, 0}};
  auto p = run_mc(sep, PipelineConfig{}, plac, opts);
  CHECK(p.at("placebo").ok == 300);
  CHECK(p.at("placebo").mean_estimate > 0.3);
  CHECK(p.at("placebo").mean_estimate < 0.7);
}

TEST_CASE("failure budget") {
  auto spec = preset("separated");
  PipelineConfig cfg;
  cfg.bandwidth = 1e-9;
  McOptions opts;
  opts.reps = 20;
  opts.n_per_group = 100;
  try {
    run_mc(spec, cfg, {{"att", EstimandKind::att, {}, 0}}, opts);
    FAIL("expected FailureBudgetExceeded");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FailureBudgetExceeded);
    CHECK(e.detail().dump().find("NoCloseComparisonGroups") != std::string::npos);
  }
  opts.failure_budget = 1.0;
  auto s = run_mc(spec, cfg, {{"att", EstimandKind::att, {}, 0}}, opts);
  CHECK(s.at("att").failed == 20);
  CHECK(s.failures.size() == 20);
  CHECK(s.failures.front().rep == 0);
}

TEST_CASE("robustness table rendering") {
  TableOptions opts;
  opts.reps = 300;
  opts.n_per_group = 1000;
  auto t = robustness_table("prop3", opts);
  CHECK(t.columns.size() == 1);
  CHECK(t.rows.size() == 5);
  CHECK(t.matches_expected());
  const std::string md = render_markdown(t);
  CHECK(md.find("| **DiD** |") != std::string::npos);
  CHECK(md.find("✓") != std::string::npos);
  CHECK(md.find("✗") != std::string::npos);
  CHECK(md.find("Expected pattern reproduced") != std::string::npos);
  CHECK(to_json(t).at("rows").size() == 5);

  CHECK(table_names() == std::vector<std::string>{"prop1", "prop2", "prop3"});
  CHECK_THROWS_AS(robustness_table("prop9", opts), Error);
}
