#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "ccg/error.hpp"
#include "ccg/panel.hpp"

using namespace ccg;

namespace {

// 2 groups x 3 units x T periods; group B is treated from period 2.
std::string minimal_csv(int T = 2) {
  std::ostringstream out;
  out << "unit,group,time,outcome,treated\n";
  for (const char* g : {"A", "B"}) {
    for (int u = 1; u <= 3; ++u) {
      for (int t = 1; t <= T; ++t) {
        int d = (std::string(g) == "B" && t >= 2) ? 1 : 0;
        out << g << u << ',' << g << ',' << t << ',' << (u + 0.5 * t) << ',' << d << '\n';
      }
    }
  }
  return out.str();
}

PanelDataset load_text(const std::string& text, const Schema& schema = {},
                       const std::optional<GroupMetadata>& meta = std::nullopt) {
  std::istringstream in(text);
  return load_panel(in, schema, meta);
}

ErrorKind error_kind_of(const std::string& text, const Schema& schema = {},
                        const std::optional<GroupMetadata>& meta = std::nullopt) {
  try {
    load_text(text, schema, meta);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected load_panel to throw");
  return ErrorKind::InvalidPanel;
}

std::string drop_line(const std::string& text, const std::string& prefix) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(prefix, 0) != 0) out << line << '\n';
  return out.str();
}

std::string replace_line(const std::string& text, const std::string& from, const std::string& to) {
  std::string s = text;
  auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  s.replace(pos, from.size(), to);
  return s;
}

// Panel with explicit per-unit outcome vectors; last group treated at t_star.
PanelDataset make_panel(const std::vector<std::vector<std::vector<double>>>& groups, int t_star) {
  PanelParts parts;
  parts.T = static_cast<int>(groups.front().front().size());
  std::size_t n = 0;
  for (const auto& g : groups) n += g.size();
  parts.outcomes.assign(n * parts.T, 0.0);
  std::size_t i = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    GroupInfo gi;
    gi.label = "g" + std::to_string(g);
    gi.begin = i;
    gi.first_treated = g + 1 == groups.size() ? t_star : 0;
    for (const auto& unit : groups[g]) {
      parts.unit_ids.push_back(gi.label + "-" + std::to_string(i));
      for (int t = 1; t <= parts.T; ++t) parts.outcomes[(t - 1) * n + i] = unit[t - 1];
      ++i;
    }
    gi.end = i;
    parts.groups.push_back(gi);
  }
  return PanelDataset(std::move(parts));
}

}  // namespace

TEST_CASE("minimal valid input loads") {
  auto data = load_text(minimal_csv());
  CHECK(data.periods() == 2);
  CHECK(data.units() == 6);
  CHECK(data.groups().size() == 2);
  CHECK(data.treated_label() == "B");
  CHECK(data.t_star() == 2);
  REQUIRE(data.comparison_groups().size() == 1);
  CHECK(data.group(data.comparison_groups()[0]).label == "A");
  auto b = data.outcomes(2, data.group_index("B"));
  REQUIRE(b.size() == 3);
  CHECK(b[0] == doctest::Approx(2.0));
  CHECK(b[2] == doctest::Approx(4.0));
}

TEST_CASE("rows may arrive in any order") {
  std::string text = minimal_csv();
  std::istringstream in(text);
  std::string header;
  std::getline(in, header);
  std::vector<std::string> rows;
  for (std::string line; std::getline(in, line);) rows.push_back(line);
  std::reverse(rows.begin(), rows.end());
  std::string shuffled = header + "\n";
  for (const auto& r : rows) shuffled += r + "\n";
  auto a = load_text(text);
  auto b = load_text(shuffled);
  for (std::size_t g = 0; g < a.groups().size(); ++g) {
    auto gb = b.group_index(a.group(g).label);
    for (int t = 1; t <= 2; ++t) {
      auto x = a.outcomes(t, g);
      auto y = b.outcomes(t, gb);
      std::vector<double> xs(x.begin(), x.end()), ys(y.begin(), y.end());
      std::sort(xs.begin(), xs.end());
      std::sort(ys.begin(), ys.end());
      CHECK(xs == ys);
    }
  }
}

TEST_CASE("ingestion errors") {
  SUBCASE("missing column") {
    CHECK(error_kind_of("unit,group,time,treated\nA1,A,1,0\n") == ErrorKind::MissingColumn);
    CHECK(error_kind_of("") == ErrorKind::MissingColumn);
  }
  SUBCASE("unbalanced panel lists the unit") {
    std::string text = drop_line(minimal_csv(), "A2,A,2,");
    try {
      load_text(text);
      FAIL("expected UnbalancedPanel");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::UnbalancedPanel);
      CHECK(e.detail().dump().find("A2") != std::string::npos);
    }
  }
  SUBCASE("duplicate observation") {
    std::string text = minimal_csv() + "A1,A,1,9.0,0\n";
    CHECK(error_kind_of(text) == ErrorKind::DuplicateObservation);
  }
  SUBCASE("group treatment mismatch") {
    std::string text = replace_line(minimal_csv(), "A3,A,2,4,0", "A3,A,2,4,1");
    CHECK(error_kind_of(text) == ErrorKind::GroupTreatmentMismatch);
  }
  SUBCASE("treated in the first period") {
    std::string text = minimal_csv();
    for (int u = 1; u <= 3; ++u) {
      std::string from = "B" + std::to_string(u) + ",B,1," + std::to_string(u) + ".5,0";
      text = replace_line(text, from, from.substr(0, from.size() - 1) + "1");
    }
    CHECK(error_kind_of(text) == ErrorKind::InvalidPanel);
  }
  SUBCASE("treatment switches off") {
    std::string text = minimal_csv(3);
    for (int u = 1; u <= 3; ++u) {
      std::string from = "B" + std::to_string(u) + ",B,3," + std::to_string(u + 1) + ".5,1";
      text = replace_line(text, from, from.substr(0, from.size() - 1) + "0");
    }
    CHECK(error_kind_of(text) == ErrorKind::InvalidPanel);
  }
  SUBCASE("non-integer time") {
    std::string text = replace_line(minimal_csv(), "A1,A,1,", "A1,A,1.5,");
    CHECK(error_kind_of(text) == ErrorKind::InvalidPanel);
  }
  SUBCASE("missing outcome") {
    std::string text = replace_line(minimal_csv(), "A1,A,1,1.5,0", "A1,A,1,,0");
    CHECK(error_kind_of(text) == ErrorKind::InvalidPanel);
  }
  SUBCASE("two treated groups need staggered mode") {
    std::ostringstream out;
    out << "unit,group,time,outcome,treated\n";
    for (const char* g : {"A", "B", "C"})
      for (int u = 1; u <= 2; ++u)
        for (int t = 1; t <= 3; ++t) {
          int start = std::string(g) == "B" ? 2 : std::string(g) == "C" ? 3 : 99;
          out << g << u << ',' << g << ',' << t << ',' << t << ',' << (t >= start) << '\n';
        }
    CHECK(error_kind_of(out.str()) == ErrorKind::InvalidPanel);
    Schema schema;
    schema.allow_staggered = true;
    auto data = load_text(out.str(), schema);
    CHECK(data.staggered());
    CHECK(data.treated_groups().size() == 2);
    CHECK(data.treated_label() == "B");
  }
}

TEST_CASE("sidecar metadata replaces the treated column") {
  std::string text = "unit,group,time,outcome\n";
  for (const char* g : {"A", "B"})
    for (int u = 1; u <= 2; ++u)
      for (int t = 1; t <= 3; ++t) text += std::string(g) + std::to_string(u) + "," + g + "," + std::to_string(t) + ",1\n";
  CHECK(error_kind_of(text) == ErrorKind::ConfigError);

  auto meta = GroupMetadata::from_json_text(R"({"treated_group": "A", "t_star": 3})");
  auto data = load_text(text, {}, meta);
  CHECK(data.treated_label() == "A");
  CHECK(data.t_star() == 3);

  auto bad = GroupMetadata::from_json_text(R"({"treated_group": "Z", "t_star": 2})");
  CHECK(error_kind_of(text, {}, bad) == ErrorKind::ConfigError);
  CHECK_THROWS_AS(GroupMetadata::from_json_text("{not json"), Error);
}

TEST_CASE("custom column names") {
  std::string text = "id,cohort,period,y,d\nu1,A,1,0,0\nu1,A,2,1,0\nu2,A,1,0,0\nu2,A,2,1,0\n"
                     "v1,B,1,0,0\nv1,B,2,3,1\nv2,B,1,0,0\nv2,B,2,3,1\n";
  Schema s;
  s.unit = "id";
  s.group = "cohort";
  s.time = "period";
  s.outcome = "y";
  s.treated = "d";
  auto data = load_text(text, s);
  CHECK(data.treated_label() == "B");
  CHECK(data.outcomes(2, data.group_index("B"))[1] == 3.0);
}

TEST_CASE("write and reload round trip") {
  auto a = load_text(minimal_csv(3));
  std::ostringstream out;
  write_panel_csv(out, a);
  auto b = load_text(out.str());
  REQUIRE(a.units() == b.units());
  REQUIRE(a.periods() == b.periods());
  for (std::size_t i = 0; i < a.units(); ++i) {
    CHECK(a.unit_id(i) == b.unit_id(i));
    CHECK(a.group(a.group_of(i)).label == b.group(b.group_of(i)).label);
    for (int t = 1; t <= a.periods(); ++t) {
      CHECK(a.outcome(i, t) == b.outcome(i, t));
      CHECK(a.treated(i, t) == b.treated(i, t));
    }
  }
}

TEST_CASE("grid quantiles use the left-continuous inverse") {
  std::vector<double> three{1, 2, 3};
  CHECK(grid_quantiles(three, 3) == std::vector<double>{1, 2, 3});

  std::vector<double> ten(10);
  std::iota(ten.begin(), ten.end(), 1.0);
  // u = .2,.4,.6,.8 -> ceil(10u) = 2,4,6,8
  CHECK(grid_quantiles(ten, 4) == std::vector<double>{2, 4, 6, 8});

  std::vector<double> four{1, 2, 3, 4};
  // u = .25,.5,.75 -> ceil(4u) = 1,2,3
  CHECK(grid_quantiles(four, 3) == std::vector<double>{1, 2, 3});

  std::vector<double> ties{0, 0, 0, 5, 5};
  auto q = grid_quantiles(ties, 9);
  CHECK(std::is_sorted(q.begin(), q.end()));
  CHECK(q.front() == 0.0);
  CHECK(q.back() == 5.0);
}

TEST_CASE("group profiles") {
  // g0: three units with Y_{t*-1} in {1,2,3}; g1 (treated at 3) has perfectly
  // correlated pre-periods Y_2 = 2 Y_1.
  auto data = make_panel({{{0, 1, 0}, {0, 2, 0}, {0, 3, 0}}, {{1, 2, 0}, {2, 4, 0}, {4, 8, 0}}}, 3);

  SUBCASE("quantiles and S = 1 mean") {
    auto p = profile_group(data, 0, 3, 1, 3);
    CHECK(p.quantiles == std::vector<double>{1, 2, 3});
    REQUIRE(p.means.size() == 1);
    CHECK(p.means[0] == doctest::Approx(2.0));
    CHECK(p.var_last == doctest::Approx(1.0));
    CHECK(p.n_g == 3);
    CHECK(p.p_hat == doctest::Approx(0.5));
  }
  SUBCASE("S = 2 covariance of perfectly correlated periods") {
    auto p = profile_group(data, 1, 3, 2, 3);
    double s1 = std::sqrt(p.cov(0, 0));
    double s2 = std::sqrt(p.cov(1, 1));
    CHECK(p.cov(0, 1) == doctest::Approx(s1 * s2));
    CHECK(p.cov(0, 1) == doctest::Approx(p.cov(1, 0)));
    // var of {1,2,4} = 7/3
    CHECK(p.cov(0, 0) == doctest::Approx(7.0 / 3.0));
    CHECK(p.means[0] == doctest::Approx(7.0 / 3.0));
    CHECK(p.means[1] == doctest::Approx(14.0 / 3.0));
  }
  SUBCASE("shares sum to one") {
    auto ps = profile_groups(data, 2, 9);
    double total = 0;
    for (const auto& p : ps) {
      total += p.p_hat;
      CHECK(std::is_sorted(p.quantiles.begin(), p.quantiles.end()));
    }
    CHECK(total == doctest::Approx(1.0));
  }
  SUBCASE("errors") {
    try {
      profile_groups(data, 3, 9);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InsufficientPrePeriods);
    }
    auto tiny = make_panel({{{0, 1}}, {{0, 1}, {1, 2}}}, 2);
    try {
      profile_groups(tiny, 1, 9);
      FAIL("expected DegenerateGroup");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DegenerateGroup);
    }
  }
}

TEST_CASE("profiles do not depend on unit order") {
  std::vector<std::vector<double>> g0, g1;
  for (int i = 0; i < 40; ++i) {
    g0.push_back({std::sin(i * 1.3), std::cos(i * 0.7), 0});
    g1.push_back({std::sin(i * 2.1) + 1, std::cos(i * 0.3), 0});
  }
  auto a = make_panel({g0, g1}, 3);
  std::reverse(g0.begin(), g0.end());
  std::rotate(g1.begin(), g1.begin() + 7, g1.end());
  auto b = make_panel({g0, g1}, 3);
  auto pa = profile_groups(a, 2, 19);
  auto pb = profile_groups(b, 2, 19);
  for (std::size_t g = 0; g < 2; ++g) {
    CHECK(pa[g].quantiles == pb[g].quantiles);
    for (int s = 0; s < 2; ++s) CHECK(pa[g].means[s] == doctest::Approx(pb[g].means[s]).epsilon(1e-14));
    CHECK((pa[g].cov - pb[g].cov).cwiseAbs().maxCoeff() < 1e-12);
  }
}
