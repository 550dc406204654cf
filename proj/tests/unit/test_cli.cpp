#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(CCSCP_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace

TEST_CASE("quantile") {
  const Run r = run("quantile --delta 0.05");
  CHECK(r.code == 0);
  CHECK(std::stod(r.out) == doctest::Approx(1.163087).epsilon(1e-6));
}

TEST_CASE("compare writes both policies and classifies them") {
  const fs::path out = fs::temp_directory_path() / "ccscp_cli_compare";
  fs::remove_all(out);
  const Run r = run("compare --scenario canonical --seed 7 --samples 20000 --out " + out.string());
  CHECK(r.code == 0);
  CHECK(r.out.find("fixed") != std::string::npos);
  CHECK(r.out.find("-> failure") != std::string::npos);
  CHECK(r.out.find("-> success") != std::string::npos);
  for (const char* f : {"fixed.json", "fixed.csv", "fixed.svg", "iterative.json", "iterative.csv",
                        "iterative.svg", "comparison.json", "comparison.svg"}) {
    CHECK(fs::exists(out / f));
  }

  const Run v = run("validate --scenario canonical --samples 20000 --trajectory " +
                    (out / "iterative.json").string());
  CHECK(v.code == 0);
  CHECK(v.out.find("within") != std::string::npos);
  fs::remove_all(out);
}

TEST_CASE("failure under solve --policy fixed is a result") {
  const Run r = run("solve --policy fixed --scenario canonical --samples 1000");
  CHECK(r.code == 0);
  CHECK(r.out.find("failure") != std::string::npos);
}

TEST_CASE("scenario file path") {
  const Run r = run(std::string("solve --policy iterative --samples 1000 --scenario ") +
                    CCSCP_SOURCE_DIR + "/scenarios/canonical.json");
  CHECK(r.code == 0);
  CHECK(r.out.find("success") != std::string::npos);
}

TEST_CASE("operational and usage errors") {
  const Run missing = run("solve --policy iterative --scenario missing.json");
  CHECK(missing.code == 1);
  CHECK(missing.out.find("missing.json") != std::string::npos);

  const Run bad_delta = run("quantile --delta 0.7");
  CHECK(bad_delta.code == 2);
  CHECK(bad_delta.out.find("delta") != std::string::npos);

  const Run no_sub = run("");
  CHECK(no_sub.code == 2);
  CHECK(no_sub.out.find("scenario_schema.md") != std::string::npos);

  const Run bad_policy = run("solve --policy compare");
  CHECK(bad_policy.code == 2);

  const Run unwritable = run("solve --policy iterative --samples 1000 --out /proc/ccscp_nope");
  CHECK(unwritable.code == 1);
  CHECK(unwritable.out.find("/proc/ccscp_nope") != std::string::npos);
}
