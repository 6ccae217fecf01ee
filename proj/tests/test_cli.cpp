#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "cfad/bank_io.hpp"
#include "cfad/harness.hpp"
#include "cfad/json_io.hpp"

using namespace cfad;
namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "cfad_test_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct Run {
  int code = 0;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Run run_cli(const std::string& args) {
  const fs::path err = workdir() / "stderr.txt";
  const std::string cmd = std::string(CFAD_CLI_PATH) + " " + args + " > " + (workdir() / "stdout.txt").string() +
                          " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return {WEXITSTATUS(status), slurp(err)};
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

// Small fixed corpus shared by the tests below.
void ensure_corpus() {
  static bool done = false;
  if (done) return;
  REQUIRE(run_cli("synth --out " + path("corpus") + " --n-train 24 --n-test 6 --seed 7").code == 0);
  REQUIRE(run_cli("train --data " + path("corpus/train.csv") + " --out " + path("two.cfad") +
               " --octaves 4.25 4.75 --poses FRONTAL")
              .code == 0);
  done = true;
}

}  // namespace

TEST_CASE("cli: detect twice gives byte-identical JSON") {
  ensure_corpus();
  const std::string base = "detect --bank " + path("two.cfad") + " --data " + path("corpus/test.csv") + " -k 2";
  REQUIRE(run_cli(base + " --out " + path("d1.json")).code == 0);
  REQUIRE(run_cli(base + " --out " + path("d2.json") + " --workers 3").code == 0);
  REQUIRE(run_cli(base + " --out " + path("d3.json")).code == 0);
  CHECK(slurp(path("d1.json")) == slurp(path("d3.json")));
  CHECK(slurp(path("d1.json")) == slurp(path("d2.json")));
}

TEST_CASE("cli: library calls reproduce the CLI outputs exactly") {
  ensure_corpus();
  REQUIRE(run_cli("detect --bank " + path("two.cfad") + " --data " + path("corpus/test.csv") +
               " --backend SPATIAL_NCC -k 2 --out " + path("lib.json"))
              .code == 0);
  const Dataset train = load_dataset(path("corpus/train.csv"));
  TrainConfig tc;
  tc.manifest.grid = {{4.25, 4.75}, {PoseBin::Frontal}};
  tc.workers = 1;
  const FilterBank bank = run_train(train, tc, corpus_hash_for(path("corpus/train.csv")));
  CHECK(serialize_bank(bank) == slurp(path("two.cfad")));

  const Dataset test = load_dataset(path("corpus/test.csv"));
  DetectConfig dc;
  dc.options.backend = Backend::SpatialNcc;
  dc.options.k = 2;
  dc.bank_hash = config_hash(to_json(bank.manifest));
  CHECK(detections_json(test, rank_all(test, bank, dc.options), dc).dump(2) + "\n" == slurp(path("lib.json")));

  REQUIRE(run_cli("eval random-baseline --bank " + path("two.cfad") + " --data " + path("corpus/test.csv") +
               " --seed 5 --csv " + path("rb.csv") + " --out " + path("rb.json"))
              .code == 0);
  EvalConfig ec;
  ec.seed = 5;
  ec.bank_hash = dc.bank_hash;
  const CurveReport r = run_random_baseline(test, bank, ec);
  CHECK(to_csv(r.curve) == slurp(path("rb.csv")));
  CHECK(r.to_json().dump(2) + "\n" == slurp(path("rb.json")));
}

TEST_CASE("cli: train, detect, eval cumulative over the 39-filter grid") {
  REQUIRE(run_cli("synth --preset grid --out " + path("grid") + " --n-train 39 --n-test 6 --seed 3").code == 0);
  REQUIRE(run_cli("train --data " + path("grid/train.csv") + " --out " + path("grid.cfad")).code == 0);
  CHECK(load_bank(path("grid.cfad")).size() == 39);
  REQUIRE(run_cli("detect --bank " + path("grid.cfad") + " --data " + path("grid/test.csv") + " -k 39 --out " +
               path("grid_det.json"))
              .code == 0);
  const auto det = nlohmann::json::parse(slurp(path("grid_det.json")));
  CHECK(det.at("images").size() == 6);
  CHECK(det.at("images")[0].at("detections").size() == 39);
  CHECK(det.at("config_hash").get<std::string>().size() == 16);

  REQUIRE(run_cli("eval cumulative --bank " + path("grid.cfad") + " --data " + path("grid/test.csv") +
               " --backend FREQUENCY_PSR --csv " + path("cum.csv") + " --out " + path("cum.json"))
              .code == 0);
  const std::string csv = slurp(path("cum.csv"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 40);
  CHECK(csv.rfind("k,accuracy,hits,total\n", 0) == 0);
  const auto rep = nlohmann::json::parse(slurp(path("cum.json")));
  CHECK(rep.at("points").size() == 39);
  CHECK(rep.at("config").at("backend") == "FREQUENCY_PSR");
}

TEST_CASE("cli: repeated setting report carries accuracy and the config echo") {
  REQUIRE(run_cli("eval repeated-setting --out " + path("rep.json")).code == 0);
  const auto j = nlohmann::json::parse(slurp(path("rep.json")));
  CHECK(j.contains("accuracy"));
  CHECK(j.at("total") == 73);
  CHECK(j.at("config").at("n_train") == 256);
  CHECK(j.at("config").at("corpus").at("width") == 384);
  CHECK(j.at("config_hash") == config_hash(j.at("config")));
  CHECK(j.at("overlap").at("mode") == "IOU");
}

TEST_CASE("cli: config file values are overridden by flags") {
  ensure_corpus();
  {
    std::ofstream cfg(path("run.toml"));
    cfg << "[detect]\ntop = 2\nbackend = \"SPATIAL_NCC\"\n";
  }
  const std::string base = "--config " + path("run.toml") + " detect --bank " + path("two.cfad") + " --data " +
                           path("corpus/test.csv");
  REQUIRE(run_cli(base + " --out " + path("cfg1.json")).code == 0);
  REQUIRE(run_cli(base + " -k 1 --out " + path("cfg2.json")).code == 0);
  const auto a = nlohmann::json::parse(slurp(path("cfg1.json")));
  const auto b = nlohmann::json::parse(slurp(path("cfg2.json")));
  CHECK(a.at("config").at("k") == 2);
  CHECK(a.at("config").at("backend") == "SPATIAL_NCC");
  CHECK(b.at("config").at("k") == 1);
}

TEST_CASE("cli: failures exit non-zero with one machine-parsable line") {
  ensure_corpus();
  auto one_line = [](const std::string& s) { return std::count(s.begin(), s.end(), '\n') == 1; };

  Run r = run_cli("detect --bank " + path("two.cfad") + " --data " + path("nope.csv") + " --out " + path("x.json"));
  CHECK(r.code != 0);
  CHECK(r.err.rfind("error: ", 0) == 0);
  CHECK(one_line(r.err));

  REQUIRE(run_cli("synth --out " + path("other") + " --n-train 2 --n-test 2 --seed 99").code == 0);
  r = run_cli("eval cumulative --bank " + path("two.cfad") + " --data " + path("other/test.csv"));
  CHECK(r.code != 0);
  CHECK(r.err.rfind("error: hash_mismatch: ", 0) == 0);
  CHECK(one_line(r.err));
  CHECK(run_cli("--force eval cumulative --bank " + path("two.cfad") + " --data " + path("other/test.csv")).code == 0);

  r = run_cli("eval scale-sweep --bank " + path("two.cfad") + " --data " + path("corpus/test.csv") + " --octave 4.25");
  CHECK(r.code != 0);
  CHECK(r.err.rfind("error: config_conflict: ", 0) == 0);

  {
    std::ofstream bad(path("bad.cfad"), std::ios::binary);
    bad << "NOPE1234567890";
  }
  r = run_cli("detect --bank " + path("bad.cfad") + " --data " + path("corpus/test.csv") + " --out " + path("x.json"));
  CHECK(r.err.rfind("error: format_version: ", 0) == 0);

  r = run_cli("detect --bank " + path("two.cfad") + " --data " + path("corpus/test.csv") + " --backend FAST --out " +
           path("x.json"));
  CHECK(r.err.rfind("error: invalid_argument: ", 0) == 0);
  CHECK(run_cli("").code != 0);
}
