// Drives the cascade_ee binary end to end.
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cascade/config.h"

namespace cascade {
namespace {

namespace fs = std::filesystem;

const fs::path& Dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "cascade_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int RunCli(const std::string& args) {
  const std::string cmd = std::string(CASCADE_CLI_PATH) + " " + args + " > " +
                          (Dir() / "last.log").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Generates once: 40 sentences plus train/valid/test files.
const fs::path& GeneratedDir() {
  static const fs::path dir = [] {
    const fs::path d = Dir() / "gen";
    const int code = RunCli("generate --split --output-dir " + d.string() +
                         " --set gen_sentences=40 --set gen_p1=0.2 --set gen_p2=0.2 --set gen_normal=0.6");
    EXPECT_EQ(code, 0) << Slurp(Dir() / "last.log");
    return d;
  }();
  return dir;
}

TEST(Cli, EvalOnGoldScoresOne) {
  const fs::path g = GeneratedDir();
  const fs::path out = Dir() / "eval";
  ASSERT_EQ(RunCli("eval --schema " + (g / "schema.json").string() + " --corpus " +
                (g / "corpus.jsonl").string() + " --predictions " + (g / "corpus.jsonl").string() +
                " --output-dir " + out.string()),
            0)
      << Slurp(Dir() / "last.log");
  const auto report = nlohmann::json::parse(Slurp(out / "report.json"));
  for (const char* m : {"TI", "TC", "AI", "AC"}) {
    EXPECT_EQ(report.at("all").at(m).at("f1").get<double>(), 1.0) << m;
  }
  EXPECT_TRUE(fs::exists(out / "report_overlap.json"));
  EXPECT_TRUE(fs::exists(out / "report_normal.json"));
  EXPECT_TRUE(fs::exists(out / "config.snapshot"));
}

TEST(Cli, GradCheckPassesAndCorruptionFails) {
  EXPECT_EQ(RunCli("gradcheck"), 0) << Slurp(Dir() / "last.log");
  EXPECT_EQ(RunCli("gradcheck --corrupt-gradient"), 3);
  EXPECT_NE(Slurp(Dir() / "last.log").find("FAIL"), std::string::npos);
}

TEST(Cli, BadKeyAndMissingFileExitTwo) {
  EXPECT_EQ(RunCli("generate --output-dir " + (Dir() / "x").string() + " --set no_such_key=1"), 2);
  EXPECT_NE(Slurp(Dir() / "last.log").find("no_such_key"), std::string::npos);
  EXPECT_EQ(RunCli("eval --schema /nonexistent/schema.json --corpus /nonexistent/c.jsonl "
                "--predictions /nonexistent/p.jsonl --output-dir " + (Dir() / "y").string()),
            2);
  EXPECT_EQ(RunCli("train --config /nonexistent/run.cfg"), 2);
  EXPECT_EQ(RunCli("frobnicate"), 2);
}

TEST(Cli, TrainWithDefaultsSnapshotsTheDefaults) {
  const fs::path g = GeneratedDir();
  const fs::path out = Dir() / "train";
  ASSERT_EQ(RunCli("train --schema " + (g / "schema.json").string() + " --train " +
                (g / "train.jsonl").string() + " --valid " + (g / "valid.jsonl").string() +
                " --test " + (g / "test.jsonl").string() + " --output-dir " + out.string()),
            0)
      << Slurp(Dir() / "last.log");
  for (const char* f : {"model.ckpt", "history.jsonl", "test_report.json", "test_predictions.jsonl"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const std::set<std::string> paths = {"schema", "corpus", "train_corpus", "valid_corpus",
                                       "test_corpus", "predictions", "checkpoint", "output_dir"};
  RunConfig snapshot;
  std::istringstream in(Slurp(out / "config.snapshot"));
  ParseConfig(in, snapshot);
  const RunConfig defaults;
  for (const std::string& key : ConfigKeys()) {
    if (paths.count(key)) continue;
    EXPECT_EQ(GetConfigValue(snapshot, key), GetConfigValue(defaults, key)) << key;
  }
  std::ifstream history(out / "history.jsonl");
  int lines = 0;
  for (std::string line; std::getline(history, line);) ++lines;
  EXPECT_EQ(lines, defaults.train.epochs);

  // Predict with the checkpoint, then score those predictions.
  const fs::path pred = out / "p.jsonl";
  ASSERT_EQ(RunCli("predict --checkpoint " + (out / "model.ckpt").string() + " --corpus " +
                (g / "test.jsonl").string() + " --predictions " + pred.string()),
            0)
      << Slurp(Dir() / "last.log");
  EXPECT_EQ(RunCli("eval --schema " + (g / "schema.json").string() + " --corpus " +
                (g / "test.jsonl").string() + " --predictions " + pred.string() +
                " --output-dir " + (out / "eval").string()),
            0)
      << Slurp(Dir() / "last.log");
}

TEST(Cli, FlagsReachTheSnapshot) {
  const fs::path out = Dir() / "flags";
  ASSERT_EQ(RunCli("generate --output-dir " + out.string() +
                " --set gen_sentences=5 --fusion gate --pooling maxp --no-indicator "
                "--no-self-attention --no-position-embedding --strict-roles --threshold-3 0.7 "
                "--seed 5"),
            0)
      << Slurp(Dir() / "last.log");
  RunConfig c;
  std::istringstream in(Slurp(out / "config.snapshot"));
  ParseConfig(in, c);
  EXPECT_EQ(GetConfigValue(c, "fusion"), "gate");
  EXPECT_EQ(GetConfigValue(c, "pooling"), "maxp");
  EXPECT_EQ(GetConfigValue(c, "indicator"), "false");
  EXPECT_EQ(GetConfigValue(c, "self_attention"), "false");
  EXPECT_EQ(GetConfigValue(c, "position_embedding"), "false");
  EXPECT_EQ(GetConfigValue(c, "strict_roles"), "true");
  EXPECT_EQ(std::stod(GetConfigValue(c, "threshold_3")), 0.7);
  EXPECT_EQ(GetConfigValue(c, "seed"), "5");
}

}  // namespace
}  // namespace cascade
