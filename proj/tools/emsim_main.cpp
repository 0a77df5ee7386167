#include "emsim/commands.hpp"
#include "emsim/error.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

std::optional<std::uint64_t> seed_from_env() {
  const char* env = std::getenv("EMSIM_SEED");
  if (!env || !*env) return std::nullopt;
  char* end = nullptr;
  const auto v = std::strtoull(env, &end, 10);
  if (*end != '\0') throw emsim::SchemaViolation("EMSIM_SEED", "expected a non-negative integer");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event simulation of an ambulance emergency service"};
  app.set_version_flag("--version", emsim::kVersion);
  app.require_subcommand(1);

  emsim::IngestArgs ingest;
  std::string family = "triangular";
  auto* c_ingest = app.add_subcommand("ingest", "Extract service-time samples, demand counts and travel observations");
  c_ingest->add_option("missions", ingest.missions, "Mission CSV")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--config", ingest.config, "Instance JSON")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--out", ingest.out, "Output directory")->required();
  c_ingest->add_option("--family", family, "Parametric family tried first")
      ->check(CLI::IsMember({"triangular", "exponential"}));
  c_ingest->add_option("--ks-alpha", ingest.ks_alpha, "Level of the goodness-of-fit test");

  emsim::CalibrateArgs calibrate;
  auto* c_cal = app.add_subcommand("calibrate", "Estimate travel-time correction factors");
  c_cal->add_option("observations", calibrate.observations, "Observation CSV")->required()->check(CLI::ExistingFile);
  c_cal->add_option("--config", calibrate.config, "Instance JSON defining the travel slots")
      ->check(CLI::ExistingFile);
  c_cal->add_option("--out", calibrate.out, "Output directory")->required();
  c_cal->add_option("--min-count", calibrate.min_count, "Observations needed per group");
  c_cal->add_option("--ratio-lo", calibrate.ratio_lo, "Lowest kept observed/nominal ratio");
  c_cal->add_option("--ratio-hi", calibrate.ratio_hi, "Highest kept observed/nominal ratio");

  emsim::SimulateArgs sim;
  std::string scenario;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  double horizon = 0.0, warmup = 0.0;
  bool onscene = false;
  auto* c_sim = app.add_subcommand("simulate", "Run independent replications of one scenario");
  c_sim->add_option("config", sim.config, "Instance JSON")->required()->check(CLI::ExistingFile);
  c_sim->add_option("--out", sim.out, "Output directory")->required();
  auto* o_scenario = c_sim->add_option("--scenario", scenario, "Scenario name");
  auto* o_reps = c_sim->add_option("--replications", replications, "Replications (default 30)");
  auto* o_seed = c_sim->add_option("--seed", seed, "Base seed; EMSIM_SEED overrides");
  auto* o_horizon = c_sim->add_option("--horizon", horizon, "Horizon in minutes");
  auto* o_warmup = c_sim->add_option("--warmup", warmup, "Warm-up in minutes");
  c_sim->add_option("--jobs", sim.jobs, "Worker threads (0 = all cores)");
  c_sim->add_flag("--events", sim.keep_events, "Write the event log of every replication");
  c_sim->add_flag("--records", sim.keep_records, "Write the call records of every replication");
  c_sim->add_flag("--check-invariants", sim.check_invariants, "Assert structural invariants while running");
  c_sim->add_flag("--onscene-coverage", onscene, "Classify coverage by the on-scene tag");

  emsim::CompareArgs compare;
  auto* c_cmp = app.add_subcommand("compare", "Paired-t comparison of scenario runs");
  c_cmp->add_option("baseline", compare.baseline, "Baseline results directory")->required()->check(CLI::ExistingDirectory);
  c_cmp->add_option("alternatives", compare.alternatives, "Alternative results directories")
      ->required()
      ->check(CLI::ExistingDirectory);
  c_cmp->add_option("--out", compare.out, "Output directory")->required();

  emsim::SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic instance");
  c_synth->add_option("--profile", synth.profile, "Profile name")->check(CLI::IsMember({"rieti-like"}));
  c_synth->add_option("--seed", synth.seed, "Generator seed");
  c_synth->add_option("--out", synth.out, "Output directory")->required();

  emsim::ValidateArgs validate;
  auto* c_val = app.add_subcommand("validate", "Compare simulated KPIs against historical targets");
  c_val->add_option("results", validate.results, "Results directory")->required()->check(CLI::ExistingDirectory);
  c_val->add_option("targets", validate.targets, "Targets CSV (kpi,mu)")->required()->check(CLI::ExistingFile);
  c_val->add_option("--tolerance", validate.tolerance_pct, "Tolerance in percent");
  c_val->add_option("--kpi", validate.kpis, "KPIs to check (default: every target)");
  c_val->add_option("--out", validate.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return emsim::kExitSchemaError;
  }

  try {
    if (*c_ingest) {
      ingest.family = emsim::parse_fit_family(family);
      return emsim::cmd_ingest(ingest);
    }
    if (*c_cal) return emsim::cmd_calibrate(calibrate);
    if (*c_sim) {
      if (*o_scenario) sim.scenario = scenario;
      if (*o_reps) sim.replications = replications;
      if (*o_seed) sim.seed = seed;
      if (auto env = seed_from_env()) sim.seed = env;
      if (*o_horizon) sim.horizon_minutes = horizon;
      if (*o_warmup) sim.warmup_minutes = warmup;
      if (onscene) sim.basis = emsim::CoverageBasis::OnScene;
      return emsim::cmd_simulate(sim);
    }
    if (*c_cmp) return emsim::cmd_compare(compare);
    if (*c_synth) return emsim::cmd_synth(synth);
    if (*c_val) return emsim::cmd_validate(validate);
  } catch (const std::exception& e) {
    std::cerr << "emsim: " << e.what() << "\n";
    return emsim::exit_code_for(e);
  }
  return emsim::kExitOk;
}
