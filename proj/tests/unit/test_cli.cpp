#include "clab/archive.hpp"
#include "clab/cli.hpp"
#include "clab/reports.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <filesystem>
#include <sstream>

using namespace clab;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("clab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  static nlohmann::json small_config() {
    return nlohmann::json::parse(R"({
      "geometry": {"nx_prime": 9, "nx_n": 9, "nt": 9},
      "weight": {"D0": [0.5, 1.0], "delta0": 0.7},
      "instance": {"recipe": "worked", "noise_levels": [0.1, 0.01, 0.001, 0.0], "seed": 7},
      "solver": {"mu": 1e-8},
      "verify": {"corpus_size": 4, "s_grid": [2, 5, 10]}
    })");
  }

  std::string write_config(const nlohmann::json& j, const std::string& name = "config.json") const {
    const std::string p = (dir_ / name).string();
    write_text_file(p, j.dump(2));
    return p;
  }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "clab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  std::string out(const std::string& sub) const { return (dir_ / sub).string(); }

  fs::path dir_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST_F(Cli, PlanOnWorkedConfig) {
  const std::string cfg = std::string(CLAB_SOURCE_DIR) + "/config/worked.json";
  ASSERT_EQ(run({"--config", cfg, "--out", out("plan"), "--command", "plan", "--quiet"}), kExitOk) << err_.str();
  EXPECT_TRUE(out_.str().empty());
  const KeyValues kv = parse_key_values(read_text_file(out("plan/plan_report.txt")));
  EXPECT_NEAR(lookup_double(kv, "beta"), 1.00040, 1e-5);
  EXPECT_NEAR(lookup_double(kv, "alpha"), 1.08922, 1e-5);
  EXPECT_NEAR(lookup_double(kv, "gap_ratio"), 1.00985, 1e-5);
  EXPECT_EQ(lookup(kv, "tool_version"), tool_version());
  EXPECT_EQ(lookup(kv, "config_hash").size(), 16u);
}

TEST_F(Cli, Delta0TooLargeIsValidationError) {
  nlohmann::json j = small_config();
  j["weight"]["delta0"] = 0.8;
  EXPECT_EQ(run({"--config", write_config(j), "--out", out("o"), "--command", "plan"}), kExitValidation);
  EXPECT_NE(err_.str().find("delta0"), std::string::npos) << err_.str();
}

TEST_F(Cli, ConfigErrorsAreValidationErrors) {
  nlohmann::json j = small_config();
  j["geometry"]["typo"] = 1;
  EXPECT_EQ(run({"--config", write_config(j), "--out", out("o"), "--command", "plan"}), kExitValidation);
  EXPECT_NE(err_.str().find("geometry.typo"), std::string::npos);
  EXPECT_EQ(run({"--config", write_config(small_config()), "--out", out("o"), "--command", "solve"}),
            kExitValidation);
  EXPECT_EQ(run({"--out", out("o"), "--command", "plan"}), kExitValidation);
  nlohmann::json nosolver = small_config();
  nosolver.erase("solver");
  EXPECT_EQ(run({"--config", write_config(nosolver), "--out", out("o"), "--command", "reconstruct"}),
            kExitValidation);
}

TEST_F(Cli, MissingConfigIsIoError) {
  EXPECT_EQ(run({"--config", out("nope.json"), "--out", out("o"), "--command", "plan"}), kExitIo);
}

TEST_F(Cli, UnwritableOutputIsIoError) {
  write_text_file(out("file"), "");
  EXPECT_EQ(run({"--config", write_config(small_config()), "--out", out("file/sub"), "--command", "plan"}), kExitIo);
}

TEST_F(Cli, NonConvergenceExitCode) {
  nlohmann::json j = small_config();
  j["solver"] = {{"precondition", false}, {"cg_maxit", 2}};
  EXPECT_EQ(run({"--config", write_config(j), "--out", out("o"), "--command", "reconstruct"}), kExitNonConvergence);
}

TEST_F(Cli, SweepShapeAndDeterminism) {
  const std::string cfg = write_config(small_config());
  ASSERT_EQ(run({"--config", cfg, "--out", out("a"), "--command", "sweep"}), kExitOk) << err_.str();
  ASSERT_EQ(run({"--config", cfg, "--out", out("b"), "--command", "sweep"}), kExitOk) << err_.str();
  const std::string a = read_text_file(out("a/sweep.csv"));
  EXPECT_EQ(a, read_text_file(out("b/sweep.csv")));
  const SweepReport r = parse_sweep_csv(a);
  EXPECT_EQ(r.rows.size(), 4u);
  EXPECT_TRUE(r.invariants_ok);
  EXPECT_GT(r.theta_emp, 0.0);

  ASSERT_EQ(run({"--config", cfg, "--out", out("c"), "--command", "sweep", "--seed-override", "8"}), kExitOk);
  const SweepReport c = parse_sweep_csv(read_text_file(out("c/sweep.csv")));
  EXPECT_NE(c.rows[0].D_u, r.rows[0].D_u);
  EXPECT_EQ(c.rows[3].err_region, r.rows[3].err_region);
}

TEST_F(Cli, AllOutputsRoundTrip) {
  nlohmann::json j = small_config();
  j["output"] = out("all");
  ASSERT_EQ(run({"--config", write_config(j), "--command", "all"}), kExitOk) << err_.str();
  const std::string hash = lookup(parse_key_values(read_text_file(out("all/plan_report.txt"))), "config_hash");

  ReportMeta m;
  const CarlemanReport c = parse_carleman_table(read_text_file(out("all/carleman.csv")), &m);
  EXPECT_EQ(m.config_hash, hash);
  EXPECT_EQ(carleman_table(c, m), read_text_file(out("all/carleman.csv")));
  EXPECT_EQ(c.rows.size(), 4u * 3u);

  const Lemma1Study l = parse_lemma1_table(read_text_file(out("all/lemma1.csv")), &m);
  EXPECT_EQ(lemma1_table(l, m), read_text_file(out("all/lemma1.csv")));
  EXPECT_EQ(l.rows.size(), 4u);

  const FieldArchive inst = read_archive(out("all/instance.clab"));
  EXPECT_EQ(inst.metadata.at("config_hash"), hash);
  EXPECT_NO_THROW(instance_from_archive(inst));

  const FieldArchive fh = read_archive(out("all/f_hat.clab"));
  EXPECT_EQ(fh.field("f_hat").kind(), FieldKind::CrossSectionTime);
  const KeyValues summary = parse_key_values(read_text_file(out("all/reconstruct_summary.txt")));
  EXPECT_EQ(lookup(summary, "config_hash"), hash);
  EXPECT_LE(lookup_double(summary, "err_region"), lookup_double(summary, "err_global"));

  const std::string sweep = read_text_file(out("all/sweep.csv"));
  EXPECT_EQ(sweep_csv(parse_sweep_csv(sweep, &m), m), sweep);
  EXPECT_EQ(m.config_hash, hash);

  const KeyValues cor = parse_key_values(read_text_file(out("all/corollary.txt")));
  EXPECT_EQ(lookup(cor, "config_hash"), hash);
  EXPECT_FALSE(out_.str().empty());
}

TEST_F(Cli, MakeInstanceWithoutWeight) {
  nlohmann::json j = small_config();
  j.erase("weight");
  ASSERT_EQ(run({"--config", write_config(j), "--out", out("m"), "--command", "make-instance"}), kExitOk)
      << err_.str();
  EXPECT_TRUE(fs::exists(out("m/instance.clab")));
}

TEST_F(Cli, Help) {
  EXPECT_EQ(run({"--help"}), kExitOk);
  EXPECT_NE(out_.str().find("--seed-override"), std::string::npos);
}
