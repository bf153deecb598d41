// bsl: workload runner and verification harness for the B-skip-list.
#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "bsl/harness.hpp"

namespace {

namespace h = bsl::harness;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;
constexpr int kCapacity = 3;

struct Common {
  std::optional<std::uint64_t> n;
  std::optional<std::uint64_t> capacity;
  std::uint64_t gamma = 16;
  std::uint64_t block_size = 16;
  std::uint64_t slots = 0;
  std::optional<std::uint64_t> seed;
  std::string backend = "mem";
  std::string file;
  std::optional<std::uint64_t> trials;
  std::string csv;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--n", c.n, "Number of elements");
  cmd->add_option("--capacity", c.capacity, "Capacity N (default: 2n, at least 1024)");
  cmd->add_option("--gamma", c.gamma, "Expected partition size")->check(CLI::Range(2, 1 << 30));
  cmd->add_option("--block-size", c.block_size, "Block size B in slots")->check(CLI::Range(2, 1 << 30));
  cmd->add_option("--slots-per-table", c.slots, "Table size p (prime; default: smallest valid)");
  cmd->add_option("--seed", c.seed, "Master seed (falls back to BSL_SEED, then 0)");
  cmd->add_option("--backend", c.backend, "Slot backend")->check(CLI::IsMember({"mem", "file"}));
  cmd->add_option("--file", c.file, "Path for the file backend");
  cmd->add_option("--trials", c.trials, "Number of trials");
  cmd->add_option("--csv", c.csv, "Write CSV here instead of stdout");
}

std::uint64_t resolve_seed(const Common& c) {
  if (c.seed) return *c.seed;
  if (const char* env = std::getenv("BSL_SEED"); env != nullptr && *env != '\0') {
    std::size_t used = 0;
    const std::string text(env);
    const std::uint64_t value = std::stoull(text, &used, 0);
    if (used != text.size()) throw std::invalid_argument("BSL_SEED is not an integer");
    return value;
  }
  return 0;
}

h::Geometry geometry(const Common& c, std::uint64_t n) {
  return {c.capacity.value_or(std::max<std::uint64_t>(2 * n, 1024)), c.gamma, c.block_size, c.slots};
}

/// Sends CSV to --csv or stdout.
template <typename Write>
void emit(const Common& c, Write&& write) {
  if (c.csv.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(c.csv, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + c.csv);
  write(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uniquely represented B-skip-list: workloads, verification and statistics"};
  app.require_subcommand(1);

  Common run_opts;
  std::string mix = "insert=1";
  std::uint64_t ops = 0;
  std::uint64_t range_k = 100;
  bool timing = false;
  auto* run_cmd = app.add_subcommand("run", "Run a workload and print per-op I/O as CSV");
  add_common(run_cmd, run_opts);
  run_cmd->add_option("--ops", ops, "Measured operations after loading n elements");
  run_cmd->add_option("--mix", mix, "Op weights, e.g. insert=1,delete=1,lookup=2,range=0");
  run_cmd->add_option("--range-k", range_k, "Elements spanned by range queries");
  run_cmd->add_flag("--timing", timing, "Fill the wall time column (output is no longer reproducible)");

  Common ur_opts;
  bool vary_seed = false;
  auto* ur_cmd = app.add_subcommand("verify-ur", "Check that different histories give identical images");
  add_common(ur_cmd, ur_opts);
  ur_cmd->add_flag("--vary-seed", vary_seed, "Negative control: different structure seeds per trial");

  Common oracle_opts;
  std::uint64_t oracle_ops = 10000;
  std::string fault = "none";
  auto* oracle_cmd = app.add_subcommand("verify-oracle", "Cross-check random traces against brute-force oracles");
  add_common(oracle_cmd, oracle_opts);
  oracle_cmd->add_option("--ops", oracle_ops, "Operations in the trace");
  oracle_cmd->add_option("--inject-fault", fault, "Negative control")->check(CLI::IsMember({"none", "skip-merge"}));

  Common stats_opts;
  std::string kind = "partitions";
  std::uint64_t lookups = 10000;
  double load = 0.5;
  auto* stats_cmd = app.add_subcommand("stats", "Monte Carlo statistics next to their analytic bounds");
  add_common(stats_cmd, stats_opts);
  stats_cmd->add_option("--kind", kind, "partitions|depth|displacement|io")
      ->check(CLI::IsMember({"partitions", "depth", "displacement", "io"}));
  stats_cmd->add_option("--lookups", lookups, "Probes per trial (io, displacement)");
  stats_cmd->add_option("--load", load, "Allocator load (displacement)")->check(CLI::Range(0.01, 0.9));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (run_cmd->parsed()) {
      h::WorkloadSpec spec;
      spec.mix = h::OpMix::parse(mix);
      spec.n = run_opts.n.value_or(0);
      spec.ops = ops;
      spec.range_k = range_k;
      spec.master_seed = resolve_seed(run_opts);
      spec.geometry = geometry(run_opts, spec.n + ops);
      spec.backend = run_opts.backend == "file" ? h::Backend::file : h::Backend::memory;
      spec.file = run_opts.file;
      spec.timing = timing;
      if (spec.backend == h::Backend::file && spec.file.empty()) throw CLI::ValidationError("--backend file needs --file");
      const h::RunResult result = h::run(spec);
      emit(run_opts, [&](std::ostream& out) { h::write_csv(out, result.rows); });
      return kPass;
    }

    if (ur_cmd->parsed()) {
      h::UrSpec spec;
      spec.n = ur_opts.n.value_or(1000);
      spec.trials = ur_opts.trials.value_or(2);
      spec.master_seed = resolve_seed(ur_opts);
      spec.geometry = geometry(ur_opts, spec.n);
      spec.vary_seed = vary_seed;
      if (spec.trials < 2) throw CLI::ValidationError("--trials must be at least 2");
      const h::UrResult result = h::verify_ur(spec);
      std::cout << (result.pass ? "PASS" : "FAIL") << " verify-ur n=" << spec.n << " trials=" << spec.trials
                << " digest=" << result.digests.front() << '\n';
      return result.pass ? kPass : kFail;
    }

    if (oracle_cmd->parsed()) {
      h::OracleSpec spec;
      spec.n_max = oracle_opts.n.value_or(512);
      spec.ops = oracle_ops;
      spec.master_seed = resolve_seed(oracle_opts);
      spec.geometry = {oracle_opts.capacity.value_or(std::max<std::uint64_t>(spec.n_max, 1)), oracle_opts.gamma,
                       oracle_opts.block_size, oracle_opts.slots};
      spec.fault = fault == "skip-merge" ? bsl::Fault::skip_merge : bsl::Fault::none;
      const h::OracleResult result = h::verify_oracle(spec);
      std::cout << (result.pass ? "PASS" : "FAIL") << " verify-oracle n_max=" << spec.n_max
                << " ops=" << result.ops_run << " mismatches=" << result.mismatches;
      if (!result.first_mismatch.empty()) std::cout << " first: " << result.first_mismatch;
      std::cout << '\n';
      return result.pass ? kPass : kFail;
    }

    if (stats_cmd->parsed()) {
      h::StatsSpec spec;
      spec.kind = *h::parse_stats_kind(kind);
      spec.n = stats_opts.n.value_or(100000);
      spec.trials = stats_opts.trials.value_or(1);
      spec.master_seed = resolve_seed(stats_opts);
      spec.geometry = geometry(stats_opts, spec.n);
      spec.lookups = lookups;
      spec.load = load;
      const auto rows = h::stats(spec);
      emit(stats_opts, [&](std::ostream& out) { h::write_stats_csv(out, rows); });
      return kPass;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "bsl: " << e.what() << '\n';
    return kUsage;
  } catch (const bsl::CapacityError& e) {
    std::cerr << "bsl: capacity: " << e.what() << '\n';
    return kCapacity;
  } catch (const bsl::DomainError& e) {
    std::cerr << "bsl: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "bsl: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "bsl: error: " << e.what() << '\n';
    return kFail;
  }
  return kUsage;
}
