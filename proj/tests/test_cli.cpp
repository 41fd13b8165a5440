#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"

using namespace sceneryscope;
namespace fs = std::filesystem;

namespace {

fs::path dir() {
  fs::path d = fs::temp_directory_path() / "sceneryscope_test_cli";
  fs::create_directories(d);
  return d;
}

std::string write_config(const std::string& name, const json& cfg) {
  fs::path p = dir() / name;
  std::ofstream(p) << cfg.dump();
  return p.string();
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "sceneryscope");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("simulate writes reproducible streams") {
  const std::string out = (dir() / "sim.jsonl").string();
  const std::string cfg = write_config("sim.json", {{"scenery", {{"coins", {{"0", 0.6}, {"2", 0.3}}}}},
                                                   {"N", 1000000}, {"seed", 7}});
  Result a = run({"simulate", "--config", cfg, "--out", out});
  REQUIRE(a.code == 0);
  json sa = json::parse(a.out);
  CHECK(sa["symbols"] == 1000001);
  CHECK(read_observations(out, ObsFormat::Jsonl).symbols.size() == 1000001);
  Result b = run({"simulate", "--config", cfg, "--out", out, "--format", "bin"});
  REQUIRE(b.code == 0);
  CHECK(json::parse(b.out)["checksum"] == sa["checksum"]);
  Result c = run({"simulate", "--config", cfg, "--out", out, "--seed", "8"});
  CHECK(json::parse(c.out)["checksum"] != sa["checksum"]);

  const std::string bare = write_config("bare.json", json::object());
  Result missing = run({"simulate", "--config", bare, "--out", out});
  CHECK(missing.code == cli::kConfigError);
  CHECK(missing.err.find("scenery") != std::string::npos);
}

TEST_CASE("config validation") {
  CHECK(run({"simulate", "--config", write_config("bad.json", {{"sceneri", 1}})}).code == cli::kConfigError);
  CHECK(run({"oracle"}).code == cli::kConfigError);
  CHECK(run({"frobnicate", "--config", "x"}).code == cli::kConfigError);
  CHECK(run({"oracle", "--config", (dir() / "absent.json").string()}).code == cli::kConfigError);
  CHECK(run({"oracle", "--config", write_config("per.json", {{"q", {{"1", 0.5}, {"-1", 0.5}}}})}).code ==
        cli::kConfigError);
  CHECK(cli::exit_code_for(ErrorCode::NoSignal) == cli::kNoSignal);
  CHECK(cli::exit_code_for(ErrorCode::InsufficientObservations) == cli::kInsufficientData);
  CHECK(cli::exit_code_for(ErrorCode::RankNotReached) == cli::kNumericFailure);
}

TEST_CASE("oracle reports") {
  Result r = run({"oracle", "--config",
                  write_config("o.json", {{"scenery", {{"coins", {{"0", 0.6}, {"1", 0.2}, {"2", 0.5}, {"3", 0.3}}}}}})});
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["verdict"] == "reconstructed");
  CHECK(j["max_abs_error"].get<double>() < 1e-7);
  CHECK(j["reconstruction"]["ell"] == 3);

  Result e = run({"oracle", "--config", write_config("e.json", {{"scenery", {{"coins", json::object()}}}})});
  REQUIRE(e.code == 0);
  CHECK(json::parse(e.out)["verdict"] == "all-alpha");

  Result p = run({"oracle", "--config",
                  write_config("p.json", {{"scenery", {{"coins", {{"0", 0.3}, {"1", 0.5}, {"2", 0.3}}}}}})});
  REQUIRE(p.code == 0);
  json sites = json::parse(p.out)["reconstruction"]["sites"];
  json rev = sites;
  std::reverse(rev.begin(), rev.end());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    CHECK(sites[i][1].get<double>() == doctest::Approx(rev[i][1].get<double>()).epsilon(1e-9));
  }
}

TEST_CASE("reconstruct from observation files") {
  const std::string obs = (dir() / "empty.bin").string();
  REQUIRE(run({"simulate", "--config",
               write_config("se.json", {{"scenery", {{"coins", json::object()}}}, {"N", 200000}, {"seed", 1}}),
               "--out", obs, "--format", "bin"})
              .code == 0);
  Result r = run({"reconstruct", "--config", write_config("re.json", {{"observations", obs}})});
  CHECK(r.code == cli::kNoSignal);
  CHECK(json::parse(r.out)["verdict"] == "all-alpha");

  const std::string coin = (dir() / "coin.jsonl").string();
  REQUIRE(run({"simulate", "--config",
               write_config("sc.json", {{"scenery", {{"coins", {{"0", 0.6}, {"2", 0.3}}}}}, {"N", 200000}, {"seed", 2}}),
               "--out", coin})
              .code == 0);
  Result c = run({"reconstruct", "--config", write_config("rc.json", {{"observations", coin}})});
  CHECK((c.code == 0 || c.code == cli::kNoSignal));
  json rep = json::parse(c.out);
  CHECK(rep["N"] == 200001);
  CHECK(rep.contains("diagnostics"));

  std::ifstream in(coin);
  std::ofstream cut((dir() / "cut.jsonl").string());
  std::string line;
  for (int i = 0; i < 5000 && std::getline(in, line); ++i) cut << line << '\n';
  cut.close();
  Result t = run({"reconstruct", "--config",
                  write_config("rt.json", {{"observations", (dir() / "cut.jsonl").string()}})});
  CHECK(t.code == cli::kInsufficientData);
  CHECK(t.err.find("read_observations") != std::string::npos);
  CHECK(t.err.find("InsufficientObservations") != std::string::npos);
}

TEST_CASE("bench tables") {
  json cfg = {{"scenery", {{"coins", {{"0", 0.6}, {"2", 0.3}}}}},
              {"bench", {{"N_grid", {1000, 2000, 4000}}, {"t_vectors", {{1}, {1, 1}}}}}};
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 32; ++s) seeds.push_back(s);
  cfg["bench"]["seeds"] = seeds;
  Result r = run({"bench", "--config", write_config("b.json", cfg)});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "N,seed,t,estimate,exact,error");
  std::map<std::string, int> rows;
  while (std::getline(lines, line)) {
    if (line.find("\"(1)\"") != std::string::npos) ++rows["(1)"];
    if (line.find("\"(1,1)\"") != std::string::npos) ++rows["(1,1)"];
  }
  CHECK(rows["(1)"] == 96);
  CHECK(rows["(1,1)"] == 96);
  json summary = json::parse(r.err);
  CHECK(summary.size() == 6);

  Result again = run({"bench", "--config", write_config("b.json", cfg)});
  CHECK(again.out == r.out);

  cfg["bench"]["seeds"] = json::array();
  CHECK(run({"bench", "--config", write_config("b0.json", cfg)}).code == cli::kConfigError);
}
