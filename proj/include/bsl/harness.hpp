#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bsl/bskiplist.hpp"

// Workload runner, verification harness and Monte Carlo statistics behind the `bsl` CLI.
namespace bsl::harness {

enum class Backend { memory, file };

/// Reproducible 64-bit stream. Only raw engine output is used, never std distributions,
/// so sequences are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, bound).
  std::uint64_t below(std::uint64_t bound) { return reduce_range(engine_(), bound); }
  /// Uniform in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11U) * 0x1.0p-53; }
  /// Uniform user key in [1, 2^63).
  ElementKey key() { return 1 + below((std::uint64_t{1} << 63) - 1); }

 private:
  std::mt19937_64 engine_;
};

struct Geometry {
  std::uint64_t capacity = 1024;
  std::uint64_t gamma = 16;
  std::uint64_t block_size = 16;
  std::uint64_t slots = 0;  // 0: smallest valid prime

  [[nodiscard]] Params params() const { return Params::make(capacity, gamma, block_size, slots); }
};

struct OpMix {
  double insert = 1.0;
  double erase = 0.0;
  double lookup = 0.0;
  double range = 0.0;

  /// Parses "insert=1,delete=0.5,lookup=2,range=0"; unspecified weights are 0.
  [[nodiscard]] static OpMix parse(const std::string& text);
  void validate() const;
};

struct WorkloadSpec {
  std::string experiment = "run";
  OpMix mix;
  std::uint64_t n = 0;      // elements loaded before measuring
  std::uint64_t ops = 0;    // measured operations
  std::uint64_t range_k = 100;  // target output size of range queries
  std::uint64_t master_seed = 0;
  Geometry geometry;
  Backend backend = Backend::memory;
  std::filesystem::path file;
  bool timing = false;  // wall time stays 0 unless set, keeping output a function of the flags
};

struct CsvRow {
  std::string experiment;
  std::uint64_t n = 0;
  std::uint64_t gamma = 0;
  std::uint64_t block_size = 0;
  std::string op;
  double mean_io = 0.0;
  double p95_io = 0.0;
  std::uint64_t node_count = 0;
  double load = 0.0;
  Level max_level = 0;
  double wall_time = 0.0;
};

struct RunResult {
  std::vector<CsvRow> rows;
  std::uint64_t element_count = 0;
  Digest digest{};
};

[[nodiscard]] RunResult run(const WorkloadSpec& spec);
void write_csv(std::ostream& out, const std::vector<CsvRow>& rows);

struct UrSpec {
  std::uint64_t n = 0;
  std::uint64_t trials = 2;
  std::uint64_t master_seed = 0;
  Geometry geometry;
  /// Negative control: give every trial its own structure seeds.
  bool vary_seed = false;
};

struct UrResult {
  bool pass = false;
  std::vector<std::string> digests;  // hex, one per trial
};

/// Builds the same final n-element set through `trials` different operation sequences
/// and compares the final image digests.
[[nodiscard]] UrResult verify_ur(const UrSpec& spec);

struct OracleSpec {
  std::uint64_t n_max = 512;
  std::uint64_t ops = 10000;
  std::uint64_t master_seed = 0;
  Geometry geometry{512, 4, 16, 0};
  std::uint64_t invariant_every = 50;
  Fault fault = Fault::none;
};

struct OracleResult {
  bool pass = true;
  std::uint64_t ops_run = 0;
  std::uint64_t mismatches = 0;
  std::string first_mismatch;
};

/// Random trace cross-checked after every operation against a sorted set, the
/// from-scratch partitioner, the plain skip-list search path and rebuild_canonical.
[[nodiscard]] OracleResult verify_oracle(const OracleSpec& spec);

// --- statistics ---------------------------------------------------------------

/// Builds a structure holding n random keys drawn from `seed`.
[[nodiscard]] BSkipList build_random(const Geometry& geometry, std::uint64_t n, std::uint64_t seed,
                                     std::vector<ElementKey>* keys = nullptr);

struct TailCount {
  std::uint64_t lambda = 0;
  std::uint64_t at_least = 0;
};

struct PartitionTail {
  std::uint64_t partitions = 0;
  std::vector<TailCount> tails;
};

/// Counts partitions (all levels) of size >= lambda over `trials` seeds.
[[nodiscard]] PartitionTail partition_tail(const Geometry& geometry, std::uint64_t n, std::uint64_t trials,
                                           std::uint64_t master_seed, const std::vector<std::uint64_t>& lambdas);

struct TrialShape {
  Level max_level = 0;
  std::uint64_t node_count = 0;
  double load = 0.0;
  double peak_load = 0.0;
};

/// Per-seed structure shape after inserting n random keys.
[[nodiscard]] std::vector<TrialShape> shape_trials(const Geometry& geometry, std::uint64_t n, std::uint64_t trials,
                                                   std::uint64_t master_seed);

struct IoSample {
  std::uint64_t n = 0;
  double mean = 0.0;
  double p95 = 0.0;
  double max = 0.0;
  std::uint64_t count = 0;
};

/// Lookup I/O at each checkpoint size, growing one structure through the sorted checkpoints.
/// Half of the probes hit stored keys, half are uniform random keys.
[[nodiscard]] std::vector<IoSample> lookup_io(const Geometry& geometry, const std::vector<std::uint64_t>& checkpoints,
                                              std::uint64_t lookups, std::uint64_t master_seed);

struct RangeSample {
  std::uint64_t k = 0;
  double mean = 0.0;
  double max = 0.0;
  std::uint64_t queries = 0;
  bool outputs_match = true;
};

/// Range queries whose outputs hold exactly k elements, checked against the key set.
[[nodiscard]] std::vector<RangeSample> range_io(const Geometry& geometry, std::uint64_t n,
                                                const std::vector<std::uint64_t>& ks, std::uint64_t queries,
                                                std::uint64_t master_seed);

struct AllocatorSample {
  std::uint64_t block_size = 0;
  double mean_io = 0.0;
  double mean_length = 0.0;  // slots per string, END included
  double ratio = 0.0;        // mean_io / (mean_length / B + 1)
  double mean_displacement = 0.0;
  std::uint64_t max_displacement = 0;
  double load = 0.0;
  std::uint64_t ops = 0;
};

/// Steady-state allocator workload: strings with geometric(1/gamma) payload lengths
/// filled to `load`, then `ops` rounds of erase + insert + lookup, measured per op.
[[nodiscard]] AllocatorSample allocator_io(std::uint64_t slots, std::uint64_t block_size, std::uint64_t gamma,
                                           double load, std::uint64_t ops, std::uint64_t master_seed);

/// e^(B/gamma) / (1 - e^(-B/gamma)) * (ceil(log_gamma N) + 2).
[[nodiscard]] double lookup_bound(std::uint64_t block_size, std::uint64_t gamma, std::uint64_t capacity);

enum class StatsKind { partitions, depth, displacement, io };
[[nodiscard]] std::optional<StatsKind> parse_stats_kind(const std::string& text);

struct StatsSpec {
  StatsKind kind = StatsKind::partitions;
  std::uint64_t n = 100000;
  std::uint64_t trials = 1;
  std::uint64_t master_seed = 0;
  Geometry geometry;
  std::uint64_t lookups = 10000;
  double load = 0.5;
};

struct StatsRow {
  std::string kind;
  std::uint64_t gamma = 0;
  std::uint64_t block_size = 0;
  std::uint64_t n = 0;
  std::uint64_t trials = 0;
  std::string parameter;
  double empirical = 0.0;
  std::optional<double> bound;  // empty when the analysis gives no closed form
  double sigma = 0.0;
  std::uint64_t samples = 0;
};

[[nodiscard]] std::vector<StatsRow> stats(const StatsSpec& spec);
void write_stats_csv(std::ostream& out, const std::vector<StatsRow>& rows);

}  // namespace bsl::harness
