// Exit-code contract of the command-line tool, exercised end to end via
// std::system on the built binary (path injected as IDPR_BIN).

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <doctest.h>

using namespace std::string_literals;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("idpr-cli-test-" + std::to_string(std::rand()) + "-" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args) {
  const std::string cmd = IDPR_BIN " "s + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help exits cleanly") {
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("synth --help") == 0);
}

TEST_CASE("usage errors exit with the config code") {
  CHECK(run_cli("no-such-command") == 2);
  CHECK(run_cli("synth --bogus-flag") == 2);
  CHECK(run_cli("infer --out preds.jsonl") == 2);  // missing required --model
}

TEST_CASE("a missing config file exits with the config code") {
  CHECK(run_cli("--config /nonexistent/idpr.json synth") == 2);
}

TEST_CASE("missing data exits with the data code") {
  TempDir dir;
  const std::string out = (dir.path / "preds.jsonl").string();
  CHECK(run_cli("infer --model " + (dir.path / "absent.json").string() +
                " --image x.png --out " + out) == 3);
  CHECK(run_cli("eval --predictions " + (dir.path / "none.jsonl").string() +
                " --truth " + (dir.path / "none2.jsonl").string()) == 3);
}

TEST_CASE("synth writes the dataset and exits zero") {
  TempDir dir;
  const fs::path cfg = dir.path / "cfg.json";
  const std::string out_dir = (dir.path / "run").string();
  std::ofstream(cfg) << R"({"out_dir": ")" << out_dir << R"(",
    "synth": {"num_positives": 3, "num_negatives": 1, "test_positives": 2,
              "width": 20, "height": 20, "num_parts": 3}})";
  CHECK(run_cli("--config " + cfg.string() + " synth") == 0);
  CHECK(fs::exists(fs::path(out_dir) / "data" / "train.jsonl"));
  CHECK(fs::exists(fs::path(out_dir) / "data" / "test.jsonl"));
}

}  // TEST_SUITE
