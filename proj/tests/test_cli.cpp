#include "emsim/commands.hpp"
#include "emsim/csv.hpp"
#include "emsim/error.hpp"
#include "emsim/instance.hpp"
#include "emsim/kpi.hpp"
#include "emsim/results_io.hpp"
#include "emsim/synth.hpp"
#include "tiny.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <string>
#include <sys/wait.h>

using namespace emsim;
using emsim::testing::slurp;
using emsim::testing::TempDir;

#ifndef EMSIM_CLI_PATH
#define EMSIM_CLI_PATH ""
#endif

namespace {

int run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" + EMSIM_CLI_PATH + "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("cli");
    save_instance(make_rieti_like(42), dir_->path() / "inst");
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  void SetUp() override {
    if (std::string(EMSIM_CLI_PATH).empty()) GTEST_SKIP() << "command-line tool not built";
  }

  static std::filesystem::path config() { return dir_->path() / "inst" / "instance.json"; }
  static std::filesystem::path path(const std::string& name) { return dir_->path() / name; }
  static std::string short_run(const std::filesystem::path& out, const std::string& extra = "") {
    return "simulate " + q(config()) + " --out " + q(out) +
           " --replications 3 --horizon 14400 --warmup 1440 " + extra;
  }

  static TempDir* dir_;
};

TempDir* Cli::dir_ = nullptr;

RunManifest without_clock(RunManifest m) {
  m.started_at.clear();
  m.finished_at.clear();
  return m;
}

}  // namespace

TEST_F(Cli, VersionAndUsage) {
  EXPECT_EQ(run_cli("--version"), kExitOk);
  EXPECT_EQ(run_cli("--help"), kExitOk);
  EXPECT_EQ(run_cli(""), kExitSchemaError);
  EXPECT_EQ(run_cli("simulate --bogus"), kExitSchemaError);
}

TEST_F(Cli, SimulateWritesResults) {
  const auto out = path("sim");
  ASSERT_EQ(run_cli(short_run(out)), kExitOk);
  for (const char* f : {"manifest.json", "replications.csv", "summary.csv", "coverage.csv", "base_shares.csv",
                        "events_digest.csv", "zone_slot_calls.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(out / f)) << f;
  }
  const auto m = read_manifest(out / "manifest.json");
  EXPECT_EQ(m.command, "simulate");
  EXPECT_EQ(m.replications, 3u);
  EXPECT_EQ(m.base_seed, 42u);
  EXPECT_FALSE(m.inputs.empty());
}

TEST_F(Cli, OutputsIndependentOfThreadCount) {
  const auto a = path("jobs1"), b = path("jobs3");
  ASSERT_EQ(run_cli(short_run(a, "--jobs 1 --events")), kExitOk);
  ASSERT_EQ(run_cli(short_run(b, "--jobs 3 --events")), kExitOk);
  for (const char* f : {"replications.csv", "summary.csv", "coverage.csv", "events_digest.csv",
                        "events/rep_000.log", "events/rep_002.log"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST_F(Cli, ManifestIsIdempotentApartFromClock) {
  const auto a = path("idem_a"), b = path("idem_b");
  ASSERT_EQ(run_cli(short_run(a)), kExitOk);
  ASSERT_EQ(run_cli(short_run(b)), kExitOk);
  const auto ma = without_clock(read_manifest(a / "manifest.json"));
  const auto mb = without_clock(read_manifest(b / "manifest.json"));
  EXPECT_EQ(ma.instance_hash, mb.instance_hash);
  EXPECT_EQ(ma.inputs.size(), mb.inputs.size());
  for (std::size_t i = 0; i < ma.inputs.size(); ++i) {
    EXPECT_EQ(ma.inputs[i].path, mb.inputs[i].path);
    EXPECT_EQ(ma.inputs[i].sha1, mb.inputs[i].sha1);
  }
  EXPECT_EQ(slurp(a / "replications.csv"), slurp(b / "replications.csv"));
}

TEST_F(Cli, SeedEnvironmentOverridesFlag) {
  const auto env = path("seed_env"), flag = path("seed_flag"), other = path("seed_other");
  ASSERT_EQ(run_cli(short_run(env, "--seed 42"), "EMSIM_SEED=7"), kExitOk);
  ASSERT_EQ(run_cli(short_run(flag, "--seed 7")), kExitOk);
  ASSERT_EQ(run_cli(short_run(other, "--seed 42")), kExitOk);
  EXPECT_EQ(slurp(env / "replications.csv"), slurp(flag / "replications.csv"));
  EXPECT_NE(slurp(env / "replications.csv"), slurp(other / "replications.csv"));
  EXPECT_EQ(read_manifest(env / "manifest.json").base_seed, 7u);
  EXPECT_EQ(run_cli(short_run(path("seed_bad")), "EMSIM_SEED=abc"), kExitSchemaError);
}

TEST_F(Cli, ValidateExitCodes) {
  const auto out = path("val");
  ASSERT_EQ(run_cli(short_run(out)), kExitOk);
  const auto stats = read_summary_csv(out / "summary.csv");
  const double calls = stats.at("calls_urgent").avg;

  write_targets_csv(path("good.csv"), {{"calls_urgent", calls}});
  // Three short replications give a wide interval, hence the loose tolerance.
  EXPECT_EQ(run_cli("validate " + q(out) + " " + q(path("good.csv")) + " --tolerance 50"), kExitOk);
  EXPECT_TRUE(std::filesystem::exists(out / "validation" / "validation.csv"));

  write_targets_csv(path("bad.csv"), {{"calls_urgent", 2.0 * calls}});
  EXPECT_EQ(run_cli("validate " + q(out) + " " + q(path("bad.csv")) + " --tolerance 50"), kExitValidationFailed);
  EXPECT_EQ(run_cli("validate " + q(out) + " " + q(path("good.csv")) + " --kpi calls_total"), kExitSchemaError);
}

TEST_F(Cli, MalformedConfigIsASchemaError) {
  write_text_file(path("broken/instance.json"), "{ not json");
  EXPECT_EQ(run_cli("simulate " + q(path("broken/instance.json")) + " --out " + q(path("broken_out"))),
            kExitSchemaError);
  EXPECT_EQ(run_cli("simulate " + q(path("missing.json")) + " --out " + q(path("missing_out"))), kExitSchemaError);
  EXPECT_EQ(run_cli(short_run(path("unknown_scenario"), "--scenario nowhere")), kExitSchemaError);
}

TEST_F(Cli, CompareProducesScorecard) {
  const auto base = path("cmp_base"), alt = path("cmp_alt"), out = path("cmp_out");
  ASSERT_EQ(run_cli(short_run(base)), kExitOk);
  ASSERT_EQ(run_cli(short_run(alt, "--scenario add-h24-rieti")), kExitOk);
  ASSERT_EQ(run_cli("compare " + q(base) + " " + q(alt) + " --out " + q(out)), kExitOk);
  EXPECT_TRUE(std::filesystem::exists(out / "scorecard.csv"));
  EXPECT_TRUE(std::filesystem::exists(out / "paired_add-h24-rieti.csv"));

  const auto other_seed = path("cmp_seed");
  ASSERT_EQ(run_cli(short_run(other_seed, "--seed 9")), kExitOk);
  EXPECT_NE(run_cli("compare " + q(base) + " " + q(other_seed) + " --out " + q(path("cmp_bad"))), kExitOk);
}

TEST_F(Cli, ExitCodeMapping) {
  EXPECT_EQ(exit_code_for(SchemaViolation("x", "y")), kExitSchemaError);
  EXPECT_EQ(exit_code_for(InternalInvariantBreach("x")), kExitInternalBreach);
}
