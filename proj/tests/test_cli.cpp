#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("bamsim_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

CmdResult cli(const std::string& args) {
  const char* bin = std::getenv("BAMSIM_CLI");
  REQUIRE(bin != nullptr);
  const fs::path out = work_dir() / "stdout.txt";
  const fs::path err = work_dir() / "stderr.txt";
  const std::string cmd = std::string(bin) + " " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  CmdResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path write_scenario(const std::string& name, const std::string& text) {
  const fs::path p = work_dir() / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

const char* kSmall = R"({
  "schema_version": 1,
  "sim": {"duration": 500, "epoch_length": 100, "warmup_epochs": 1}
})";

}  // namespace

TEST_CASE("validate echoes the effective configuration") {
  const auto path = write_scenario("ok.json", kSmall);
  const auto r = cli("validate " + path.string());
  CHECK(r.exit_code == 0);
  CHECK(r.err.empty());
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc.at("schema_version") == 1);
  CHECK(doc.at("sim").at("duration") == 500.0);
  CHECK(doc.at("bam").at("capacity") == 100);

  // Validating the echo reproduces it byte for byte.
  const auto echo_path = write_scenario("echo.json", r.out);
  const auto again = cli("validate " + echo_path.string());
  CHECK(again.exit_code == 0);
  CHECK(again.out == r.out);
}

TEST_CASE("validate reports every problem with its path") {
  const auto path = write_scenario("bad.json", R"({
    "bam": {"capacity": 0},
    "sim": {"warmup_epochs": -2}
  })");
  const auto r = cli("validate " + path.string());
  CHECK(r.exit_code == 1);
  CHECK(r.out.empty());
  CHECK(r.err.find("bam.capacity") != std::string::npos);
  CHECK(r.err.find("sim.warmup_epochs") != std::string::npos);
  CHECK(r.err.find(path.string()) != std::string::npos);

  const auto missing = cli("validate /nonexistent/path.json");
  CHECK(missing.exit_code == 2);
}

TEST_CASE("run is deterministic for a fixed seed") {
  const auto path = write_scenario("run.json", kSmall);
  const auto a = cli("run " + path.string() + " --seed 7");
  const auto b = cli("run " + path.string() + " --seed 7");
  CHECK(a.exit_code == 0);
  CHECK(a.out == b.out);
  REQUIRE(!a.out.empty());

  const auto doc = nlohmann::json::parse(a.out);
  CHECK(doc.at("seed") == 7);
  CHECK(doc.at("epochs").size() == 5);

  const auto other = cli("run " + path.string() + " --seed 8");
  CHECK(other.out != a.out);
}

TEST_CASE("run writes reports and epoch tables to files") {
  const auto path = write_scenario("run.json", kSmall);
  const fs::path report = work_dir() / "report.json";
  const fs::path table = work_dir() / "epochs.csv";
  const auto r = cli("run " + path.string() + " --seed 3 --out " +
                     report.string() + " --epochs-csv " + table.string());
  CHECK(r.exit_code == 0);
  CHECK(r.out.empty());

  const auto doc = nlohmann::json::parse(slurp(report));
  CHECK(doc.at("seed") == 3);
  const std::string csv = slurp(table);
  CHECK(csv.rfind("epoch,bam,", 0) == 0);

  const auto csv_stdout =
      cli("run " + path.string() + " --seed 3 --format csv");
  CHECK(csv_stdout.exit_code == 0);
  CHECK(csv_stdout.out == csv);
}

TEST_CASE("learned state flows between runs through memory files") {
  const fs::path memory = work_dir() / "qtable.json";
  const std::string timing =
      R"("sim": {"duration": 500, "epoch_length": 100, "warmup_epochs": 1})";

  const auto writer = write_scenario(
      "rl_writer.json",
      R"({"controller": {"mode": "rl", "memory_out": ")" + memory.string() +
          R"("}, )" + timing + "}");
  const auto first = cli("run " + writer.string() + " --seed 5");
  CHECK(first.exit_code == 0);
  REQUIRE(fs::exists(memory));
  const auto table = nlohmann::json::parse(slurp(memory));
  CHECK(table.at("kind") == "qtable");

  const auto reader = write_scenario(
      "rl_reader.json",
      R"({"controller": {"mode": "rl", "memory_in": ")" + memory.string() +
          R"("}, )" + timing + "}");
  const auto second = cli("run " + reader.string() + " --seed 6");
  CHECK(second.exit_code == 0);

  const auto corrupt = work_dir() / "broken_memory.json";
  std::ofstream(corrupt, std::ios::binary) << "{\"kind\":7}";
  const auto breaker = write_scenario(
      "rl_broken.json",
      R"({"controller": {"mode": "rl", "memory_in": ")" + corrupt.string() +
          R"("}, )" + timing + "}");
  const auto bad = cli("run " + breaker.string());
  CHECK(bad.exit_code == 2);
}

TEST_CASE("compare runs each controller over the same seeds") {
  const auto path = write_scenario("cmp.json", kSmall);
  const auto r = cli("compare " + path.string() +
                     " --controllers static:RDM,rules --seeds 2 --format json");
  CHECK(r.exit_code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  REQUIRE(doc.at("controllers").size() == 2);
  const auto& first = doc.at("controllers").at(0);
  CHECK(first.at("controller") == "static:RDM");
  CHECK(first.at("seeds") == nlohmann::json::array({1, 2}));
  CHECK(first.at("per_seed").at("mean_reward").size() == 2);
  // Paired seeds mean both controllers faced identical workloads.
  CHECK(first.at("per_seed").at("workload_digest") ==
        doc.at("controllers").at(1).at("per_seed").at("workload_digest"));

  const auto text = cli("compare " + path.string() +
                        " --controllers static,rules --seeds 2");
  CHECK(text.exit_code == 0);
  CHECK(text.out.find("controller") != std::string::npos);
  CHECK(text.out.find("rules") != std::string::npos);

  const auto unpaired = cli("compare " + path.string() +
                            " --controllers static,rules --seeds 2 "
                            "--unpaired --format json");
  CHECK(unpaired.exit_code == 0);
  const auto udoc = nlohmann::json::parse(unpaired.out);
  CHECK(udoc.at("controllers").at(0).at("per_seed").at("workload_digest") !=
        udoc.at("controllers").at(1).at("per_seed").at("workload_digest"));

  const auto bad = cli("compare " + path.string() + " --controllers warp");
  CHECK(bad.exit_code == 1);
}

TEST_CASE("the shipped example scenarios are valid") {
  const char* dir = std::getenv("BAMSIM_SCENARIO_DIR");
  REQUIRE(dir != nullptr);
  int checked = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    INFO("scenario ", entry.path().string());
    const auto r = cli("validate " + entry.path().string());
    CHECK(r.exit_code == 0);
    ++checked;
  }
  CHECK(checked >= 4);
}
