#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

class Sandbox {
 public:
  Sandbox() {
    dir_ = fs::temp_directory_path() / ("ccg_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Sandbox() { fs::remove_all(dir_); }

  fs::path operator/(const std::string& name) const { return dir_ / name; }

  Result run(const std::string& args) const {
    const fs::path out = dir_ / ".stdout", err = dir_ / ".stderr";
    const std::string cmd = "cd '" + dir_.string() + "' && '" + std::string(CCG_CLI_PATH) + "' " + args + " > '" +
                            out.string() + "' 2> '" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  std::size_t count_files(const std::string& prefix) const {
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(dir_))
      if (e.path().filename().string().rfind(prefix, 0) == 0) ++n;
    return n;
  }

 private:
  fs::path dir_;
  static inline int counter_ = 0;
};

}  // namespace

TEST_CASE("simulate is reproducible") {
  Sandbox box;
  REQUIRE(box.run("simulate --preset ife_thm1iv --seed 7 -o a.csv").code == 0);
  REQUIRE(box.run("simulate --preset ife_thm1iv --seed 7 -o b.csv").code == 0);
  CHECK(slurp(box / "a.csv") == slurp(box / "b.csv"));
  CHECK(slurp(box / "a.truth.json") == slurp(box / "b.truth.json"));
  CHECK(box.run("simulate --preset ife_thm1iv --seed 7 --threads 4 -o c.csv").code == 0);
  CHECK(slurp(box / "a.csv") == slurp(box / "c.csv"));
  REQUIRE(box.run("simulate --preset ife_thm1iv --seed 8 -o d.csv").code == 0);
  CHECK(slurp(box / "a.csv") != slurp(box / "d.csv"));

  const json truth = json::parse(slurp(box / "a.truth.json"));
  CHECK(truth.dump().find("tau") != std::string::npos);

  auto list = box.run("simulate --list-presets");
  CHECK(list.code == 0);
  CHECK(list.out.find("separated") != std::string::npos);
  CHECK(box.run("simulate --preset nothing").code == 2);
}

TEST_CASE("existing outputs are kept unless forced") {
  Sandbox box;
  REQUIRE(box.run("simulate --preset mr_case1 --seed 1 -o x.csv").code == 0);
  const std::string first = slurp(box / "x.csv");
  REQUIRE(box.run("simulate --preset mr_case1 --seed 2 -o x.csv").code == 0);
  CHECK(slurp(box / "x.csv") == first);
  CHECK(box.count_files("x.") == 4);  // x.csv, x.truth.json and timestamped copies
  REQUIRE(box.run("simulate --preset mr_case1 --seed 2 -o x.csv --force").code == 0);
  CHECK(slurp(box / "x.csv") != first);
  CHECK(box.count_files("x.") == 4);
}

TEST_CASE("validate exit codes") {
  Sandbox box;
  REQUIRE(box.run("simulate --preset separated --n-per-group 20 -o p.csv").code == 0);
  auto ok = box.run("validate -i p.csv");
  CHECK(ok.code == 0);
  CHECK(json::parse(ok.out).at("valid") == true);

  // drop one row to unbalance the panel
  std::string csv = slurp(box / "p.csv");
  const auto last = csv.rfind('\n', csv.size() - 2);
  spit(box / "bad.csv", csv.substr(0, last + 1));
  auto bad = box.run("validate -i bad.csv");
  CHECK(bad.code == 1);
  const json report = json::parse(bad.out);
  CHECK(report.at("valid") == false);
  CHECK(report.at("violations")[0].at("error") == "UnbalancedPanel");

  auto no_sidecar = box.run("validate -i p.csv --sidecar absent.json");
  CHECK(no_sidecar.code == 2);
  CHECK(json::parse(no_sidecar.err).at("error") == "ConfigError");

  CHECK(box.run("validate -i absent.csv").code != 0);
  CHECK(box.run("validate --no-such-flag").code == 2);
}

TEST_CASE("estimate reports and errors") {
  Sandbox box;
  REQUIRE(box.run("simulate --preset separated --n-per-group 400 --seed 3 -o s.csv").code == 0);

  auto r = box.run("estimate -i s.csv --estimands att,tau_mr,placebo");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  for (const char* key : {"att", "tau_mr", "placebo", "selection", "config", "config_hash", "seed"}) {
    CAPTURE(key);
    CHECK(j.contains(key));
  }
  CHECK(j.at("att").at("std_error").get<double>() > 0.0);
  CHECK(j.at("selection").at("selected").size() == 2);

  auto again = box.run("estimate -i s.csv --estimands att,tau_mr,placebo");
  CHECK(again.out == r.out);

  auto far = box.run("estimate -i s.csv --bandwidth 1e-6");
  CHECK(far.code == 3);
  const json err = json::parse(far.err);
  CHECK(err.at("error") == "NoCloseComparisonGroups");
  CHECK(err.at("detail").at("nearest").size() == 3);

  CHECK(box.run("estimate -i s.csv --kernel gaussian").code == 2);
}

TEST_CASE("config files, with flags taking precedence") {
  Sandbox box;
  REQUIRE(box.run("simulate --preset separated --n-per-group 200 -o s.csv").code == 0);
  spit(box / "run.toml", "kernel = \"triangular\"\nbandwidth_scale = 2.0\nridge = true\n");

  auto from_file = box.run("estimate -i s.csv --config run.toml");
  REQUIRE(from_file.code == 0);
  const json a = json::parse(from_file.out).at("config").at("pipeline");
  CHECK(a.at("kernel") == "triangular");
  CHECK(a.at("bandwidth_scale") == 2.0);
  CHECK(a.at("ridge") == true);

  auto overridden = box.run("estimate -i s.csv --config run.toml --kernel epanechnikov");
  REQUIRE(overridden.code == 0);
  const json b = json::parse(overridden.out).at("config").at("pipeline");
  CHECK(b.at("kernel") == "epanechnikov");
  CHECK(b.at("bandwidth_scale") == 2.0);

  spit(box / "typo.toml", "kernal = \"uniform\"\n");
  CHECK(box.run("estimate -i s.csv --config typo.toml").code == 2);
  CHECK(box.run("estimate -i s.csv --config missing.toml").code == 2);
}

TEST_CASE("montecarlo reports") {
  Sandbox box;
  auto t = box.run("montecarlo --table prop3 --reps 40 --n-per-group 300 --master-seed 5 -o t.json");
  REQUIRE(t.code == 0);
  const json table = json::parse(slurp(box / "t.json"));
  CHECK(table.contains("config_hash"));
  CHECK(table.contains("seed"));
  CHECK(table.at("rows").size() == 5);
  CHECK(table.at("markdown").get<std::string>().find("| **DiD** |") != std::string::npos);

  auto p1 = box.run("montecarlo --preset did_matched --reps 30 --n-per-group 200 --threads 1 -o m1.json");
  auto p4 = box.run("montecarlo --preset did_matched --reps 30 --n-per-group 200 --threads 4 -o m4.json");
  REQUIRE(p1.code == 0);
  REQUIRE(p4.code == 0);
  json m1 = json::parse(slurp(box / "m1.json")), m4 = json::parse(slurp(box / "m4.json"));
  CHECK(m1.at("config_hash") == m4.at("config_hash"));
  m1.erase("config");
  m4.erase("config");
  m1.erase("config_hash");
  m4.erase("config_hash");
  CHECK(m1.dump() == m4.dump());

  CHECK(box.run("montecarlo --reps 10").code == 2);
}
