#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result moss_run(std::vector<std::string> args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = moss::cli::run(args, in, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(MOSS_SCRATCH_DIR) / "cli" / name;
  fs::create_directories(p.parent_path());
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_lines(const fs::path& p) {
  std::ifstream in(p);
  int n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

// A tiny network and one short epoch keep the pipeline fast.
fs::path tiny_config() {
  const fs::path p = scratch("tiny.json");
  std::ofstream(p) << R"({"d_emb": 8, "d_hid": 8, "dropout": 0.0,
    "max_len": {"m": 8, "s": 8, "a": 6, "r": 16}, "train": {"max_epochs": 1, "batch_size": 8}})";
  return p;
}

// Generated once; every case below reads it.
const fs::path& data_dir() {
  static const fs::path d = [] {
    const fs::path dir = scratch("data");
    fs::remove_all(dir);
    auto r = moss_run({"gen-data", "--task", "simple", "--n", "30", "--seed", "1", "--out", dir.string()});
    REQUIRE(r.code == 0);
    return dir;
  }();
  return d;
}

const fs::path& model_dir() {
  static const fs::path m = [] {
    const fs::path dir = scratch("model");
    fs::remove_all(dir);
    auto r = moss_run({"train", "--config", tiny_config().string(), "--data", data_dir().string(), "--out", dir.string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    return dir;
  }();
  return m;
}

}  // namespace

TEST_CASE("gen-data writes the split corpus, KB and schema") {
  const fs::path& d = data_dir();
  for (const char* f : {"train.jsonl", "valid.jsonl", "test.jsonl", "kb.json", "schema.json"}) CHECK(fs::exists(d / f));
  CHECK(count_lines(d / "train.jsonl") == 18);
  CHECK(count_lines(d / "valid.jsonl") == 6);
  CHECK(count_lines(d / "test.jsonl") == 6);

  // Same flags, same bytes.
  const fs::path again = scratch("data_again");
  fs::remove_all(again);
  REQUIRE(moss_run({"gen-data", "--task", "simple", "--n", "30", "--seed", "1", "--out", again.string()}).code == 0);
  CHECK(slurp(again / "train.jsonl") == slurp(d / "train.jsonl"));
}

TEST_CASE("train, eval and error-report end to end") {
  const fs::path& m = model_dir();
  CHECK(count_lines(m / "train_log.jsonl") == 1);
  const auto log = nlohmann::json::parse(slurp(m / "train_log.jsonl"));
  CHECK(log["epoch"] == 1);
  CHECK(log["lr"] == 0.003);

  const fs::path out = scratch("eval");
  auto r = moss_run({"eval", "--model", m.string(), "--data", data_dir().string(), "--out", out.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("Mat") != std::string::npos);
  const auto metrics = nlohmann::json::parse(slurp(out / "metrics.json"));
  CHECK(metrics["n_dialogs"] == 6);
  for (const char* k : {"mat", "succ_f1", "bleu", "nlu_acc", "dst_acc", "dpl_acc"}) {
    REQUIRE(metrics[k].is_number());
    CHECK(metrics[k].get<double>() >= 0.0);
    CHECK(metrics[k].get<double>() <= 1.0);
  }
  CHECK(count_lines(out / "predictions.jsonl") == 6);

  const fs::path errs = scratch("errors.jsonl");
  auto e = moss_run({"error-report", "--model", m.string(), "--data", data_dir().string(), "--out", errs.string()});
  REQUIRE(e.code == 0);
  std::ifstream in(errs);
  for (std::string line; std::getline(in, line);) {
    auto j = nlohmann::json::parse(line);
    CHECK(j.contains("first_wrong_module"));
    CHECK(j["turn"].get<int>() >= 1);
  }
}

TEST_CASE("eval on gold-as-predictions is perfect") {
  auto r = moss_run({"eval", "--model", model_dir().string(), "--data", data_dir().string(), "--gold-as-pred", "--out",
                     scratch("gold_eval").string()});
  REQUIRE(r.code == 0);
  const auto metrics = nlohmann::json::parse(slurp(scratch("gold_eval") / "metrics.json"));
  CHECK(metrics["mat"] == 1.0);
  CHECK(metrics["succ_f1"] == 1.0);
  CHECK(metrics["nlu_acc"] == 1.0);
  CHECK(metrics["bleu"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("sweep emits one row per instance and fraction") {
  const fs::path out = scratch("sweep");
  auto r = moss_run({"sweep", "--config", tiny_config().string(), "--data", data_dir().string(), "--out", out.string(),
                     "--fractions", "0.2,0.4,0.6,0.8,1.0", "--instances", "all,wo_nlu,wo_dpl,wo_nlu_dpl"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  std::ifstream in(out / "results.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "instance,fraction,seed,mat,succ_f1,bleu,nlu_acc,dst_acc,dpl_acc,succ_acc");
  int rows = 0, wo_nlu_empty_acc = 0;
  for (std::string line; std::getline(in, line);) {
    ++rows;
    if (line.rfind("wo_nlu,", 0) == 0 && line.find(",,") != std::string::npos) ++wo_nlu_empty_acc;
  }
  CHECK(rows == 20);
  CHECK(wo_nlu_empty_acc == 5);  // NLU accuracy is not applicable without NLU
}

TEST_CASE("chat shows the modules of the instance") {
  auto r = moss_run({"chat", "--model", model_dir().string()}, "i want thai food\nwhat is the phone ?\nreset\nquit\n");
  REQUIRE(r.code == 0);
  for (const char* m : {"NLU:", "DST:", "DPL:", "NLG:"}) CHECK(r.out.find(m) != std::string::npos);
  CHECK(r.out.find("(new dialog)") != std::string::npos);

  const fs::path m2 = scratch("model_wo_nlu");
  fs::remove_all(m2);
  REQUIRE(moss_run({"train", "--config", tiny_config().string(), "--data", data_dir().string(), "--out", m2.string(),
                    "--instance", "wo_nlu_dpl"})
              .code == 0);
  auto r2 = moss_run({"chat", "--model", m2.string()}, "hello\n");
  CHECK(r2.out.find("NLU:") == std::string::npos);
  CHECK(r2.out.find("DPL:") == std::string::npos);
  CHECK(r2.out.find("DST:") != std::string::npos);
  CHECK(r2.out.find("NLG:") != std::string::npos);
}

TEST_CASE("every run prints its resolved config") {
  const char* saved = std::getenv("MOSS_LOG");
  const std::string keep = saved ? saved : "";
  setenv("MOSS_LOG", "info", 1);
  const fs::path m = scratch("model_resolved");
  auto r = moss_run({"train", "--config", tiny_config().string(), "--data", data_dir().string(), "--out", m.string(),
                     "--seed", "7", "--epochs", "1"});
  auto g = moss_run({"gen-data", "--n", "5", "--out", scratch("data_resolved").string()});
  if (saved) {
    setenv("MOSS_LOG", keep.c_str(), 1);
  } else {
    unsetenv("MOSS_LOG");
  }
  REQUIRE(r.code == 0);
  const auto line = r.err.substr(0, r.err.find('\n'));
  CHECK(line.find("train {") == 0);
  CHECK(line.find("\"instance\":\"all\"") != std::string::npos);
  CHECK(line.find("\"seed\":7") != std::string::npos);
  CHECK(line.find("\"d_hid\":8") != std::string::npos);
  CHECK(line.find("\"max_epochs\":1") != std::string::npos);
  CHECK(g.err.find("gen-data {\"task\":\"simple\",\"n\":5") == 0);
}

TEST_CASE("exit codes") {
  SUBCASE("usage errors") {
    CHECK(moss_run({}).code == moss::cli::usage);
    CHECK(moss_run({"frobnicate"}).code == moss::cli::usage);
    CHECK(moss_run({"gen-data", "--out", scratch("x").string(), "--bogus"}).code == moss::cli::usage);
    CHECK(moss_run({"gen-data", "--out", scratch("x").string(), "--ratios", "3,1"}).code == moss::cli::usage);
    CHECK(moss_run({"gen-data", "--out", scratch("x").string(), "--task", "medium"}).code == moss::cli::usage);
    CHECK(moss_run({"train", "--data", data_dir().string(), "--out", scratch("x").string(), "--instance", "wo_nlg"}).code ==
          moss::cli::usage);
    auto r = moss_run({"eval", "--model", "m"});
    CHECK(r.code == moss::cli::usage);
    CHECK(r.err.find("usage error:") == 0);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  }
  SUBCASE("data errors") {
    auto r = moss_run({"train", "--data", scratch("missing").string(), "--out", scratch("x").string()});
    CHECK(r.code == moss::cli::data);
    CHECK(r.err.find("data error:") == 0);
    CHECK(moss_run({"eval", "--model", scratch("nomodel").string(), "--data", data_dir().string()}).code == moss::cli::data);
    const fs::path bad = scratch("bad_data");
    fs::create_directories(bad);
    fs::copy_file(data_dir() / "kb.json", bad / "kb.json", fs::copy_options::overwrite_existing);
    std::ofstream(bad / "train.jsonl") << "{\"dialog_id\": 3}\n";
    CHECK(moss_run({"train", "--data", bad.string(), "--out", scratch("x").string()}).code == moss::cli::data);
  }
  SUBCASE("runtime errors") {
    // A fraction too small to keep any dialog leaves nothing to train on.
    auto r = moss_run({"train", "--config", tiny_config().string(), "--data", data_dir().string(), "--out",
                       scratch("x").string(), "--fraction", "0.01"});
    CHECK(r.code == moss::cli::runtime);
    CHECK(r.err.find("error:") == 0);
  }
  SUBCASE("help") { CHECK(moss_run({"--help"}).code == moss::cli::ok); }
}
