#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qadapt/common.hpp"
#include "qadapt/csv.hpp"
#include "qadapt/runner.hpp"

using namespace qadapt;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::ConfigError;
}

}  // namespace

TEST_CASE("flat config parsing") {
  std::istringstream is("# comment\n\n  N = 200 \nM_list=10,20\nmajority_rule = strict\n");
  const auto cfg = parse_config(is);
  CHECK(cfg.size() == 3);
  CHECK(cfg.at("N") == "200");
  CHECK(cfg.at("M_list") == "10,20");
  CHECK(cfg.at("majority_rule") == "strict");
  std::istringstream dup("N = 1\nN = 2\n");
  CHECK(kind_of([&] { parse_config(dup); }) == ErrorKind::ConfigError);
  std::istringstream bad("just words\n");
  CHECK(kind_of([&] { parse_config(bad); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { read_config_file("/nonexistent/qadapt.cfg"); }) == ErrorKind::ConfigError);
}

TEST_CASE("experiment registry") {
  const std::vector<std::string> expected = {"attack",    "dp-median",  "pmw",        "threshold",         "subspace",
                                             "ifpc-local", "ifpc-pauli", "povm-concentration", "pauli-bell"};
  for (const auto& id : expected) {
    CHECK(is_experiment_id(id));
    CHECK_FALSE(experiment_defaults(id).empty());
  }
  CHECK(experiment_ids().size() == expected.size());
  CHECK_FALSE(is_experiment_id("bogus"));
  CHECK(experiment_defaults("attack").count("N") == 1);
}

TEST_CASE("config hash") {
  const std::map<std::string, std::string> a = {{"N", "10"}, {"seed", "1"}};
  const std::string h = config_hash("attack", a);
  CHECK(h.size() == 16);
  CHECK(h.find_first_not_of("0123456789abcdef") == std::string::npos);
  CHECK(config_hash("attack", a) == h);
  CHECK(config_hash("pmw", a) != h);
  CHECK(config_hash("attack", {{"N", "10"}, {"seed", "2"}}) != h);
}

TEST_CASE("runner rejects bad specs before doing work") {
  RunSpec s;
  s.id = "bogus";
  CHECK(kind_of([&] { run_experiment(s); }) == ErrorKind::ConfigError);
  s.id = "attack";
  s.overrides = {{"nope", "1"}};
  CHECK(kind_of([&] { run_experiment(s); }) == ErrorKind::ConfigError);
  s.overrides = {{"N", "abc"}};
  CHECK(kind_of([&] { run_experiment(s); }) == ErrorKind::ConfigError);
  s.overrides = {{"majority_rule", "sometimes"}};
  CHECK(kind_of([&] { run_experiment(s); }) == ErrorKind::ConfigError);
}

TEST_CASE("runs are reproducible and carry provenance") {
  RunSpec s;
  s.id = "pauli-bell";
  s.trials = 3;
  const RunResult a = run_experiment(s);
  const RunResult b = run_experiment(s);
  CHECK(to_csv(a.data) == to_csv(b.data));
  for (const char* col : {"seed", "build_id", "config_hash"}) CHECK(a.data.has(col));
  CHECK(a.data.rows.size() == 3);
  CHECK(a.summary["experiment"] == "pauli-bell");
  CHECK(a.summary["build_id"] == build_id());
  CHECK_FALSE(a.criteria.empty());
  s.seed = 2;
  CHECK(to_csv(run_experiment(s).data) != to_csv(a.data));

  const auto dir = std::filesystem::temp_directory_path() / "qadapt_runner_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  write_outputs(a, "pauli-bell", dir.string());
  std::ifstream csv(dir / "pauli-bell.csv");
  CHECK(to_csv(read_csv(csv)) == to_csv(a.data));
  std::ifstream js(dir / "pauli-bell_summary.json");
  const nlohmann::ordered_json j = nlohmann::ordered_json::parse(js);
  CHECK(j["config_hash"] == a.summary["config_hash"]);
  CHECK_FALSE(std::filesystem::exists(dir / "pauli-bell.csv.tmp"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("CSV quoting round trip") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_escape("two\nlines") == "\"two\nlines\"");
  CsvTable t;
  t.header = {"x", "note"};
  t.rows = {{"1", "a,b"}, {"2", "quote \" here"}, {"3", "line\r\nbreak"}};
  const CsvTable back = parse_csv(to_csv(t));
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK(kind_of([] { parse_csv(""); }) == ErrorKind::MalformedCsv);
  CHECK(kind_of([] { parse_csv("a,b\n1\n"); }) == ErrorKind::MalformedCsv);
  CHECK(kind_of([] { parse_csv("a\n\"open\n"); }) == ErrorKind::MalformedCsv);
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1.0 / 3.0) == "0.3333333333");
}

TEST_CASE("plot data reshaping") {
  CsvTable paired = parse_csv("M,mode,error_mean,error_std,seed\n10,adaptive,0.5,0.1,1\n10,nonadaptive,0.2,0.05,1\n");
  const CsvTable a = emit_plot_data(paired);
  CHECK(a.header == std::vector<std::string>{"M", "mode", "mean", "std"});
  CHECK(a.rows.size() == 2);
  CHECK(a.rows[1] == std::vector<std::string>{"10", "nonadaptive", "0.2", "0.05"});

  CsvTable two = parse_csv("n,err_mean,err_std,rep_mean,rep_std\n1,0.1,0.01,0,0\n");
  const CsvTable b = emit_plot_data(two);
  CHECK(b.header == std::vector<std::string>{"n", "metric", "mean", "std"});
  CHECK(b.rows.size() == 2);

  CsvTable wide = parse_csv("trial,max_error,ok,build_id\n0,0.05,1,abc\n");
  const CsvTable c = emit_plot_data(wide);
  CHECK(c.header == std::vector<std::string>{"trial", "variable", "value"});
  CHECK(c.rows.size() == 2);
  CHECK(emit_plot_data(c).rows == c.rows);

  CsvTable already = parse_csv("x,mean,std\n1,2,3\n");
  CHECK(emit_plot_data(already).rows == already.rows);
  CsvTable empty;
  empty.header = {"x"};
  CHECK(kind_of([&] { emit_plot_data(empty); }) == ErrorKind::MalformedCsv);
}
