// Acceptance suite: one PASS/FAIL line per criterion.
//   bsl_acceptance               run all
//   bsl_acceptance --criterion 4 run one (exit status 1 when it fails)
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bsl/harness.hpp"
#include "bsl/reference.hpp"

using namespace bsl;
using namespace bsl::harness;

namespace {

struct Outcome {
  bool pass = true;
  std::string summary;
};

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// 1. Same final set through 100 different histories: identical images.
Outcome unique_representation() {
  UrSpec spec;
  spec.n = 1000;
  spec.trials = 100;
  spec.master_seed = 1;
  spec.geometry = {2000, 16, 16, 0};
  const UrResult r = verify_ur(spec);
  std::set<std::string> distinct(r.digests.begin(), r.digests.end());

  spec.trials = 3;
  spec.vary_seed = true;
  const bool control_fails = !verify_ur(spec).pass;
  return {r.pass && distinct.size() == 1 && control_fails,
          "trials=100 n=1000 distinct_digests=" + std::to_string(distinct.size()) +
              " negative_control_fails=" + (control_fails ? "yes" : "no")};
}

// 2. Random traces vs sorted set, from-scratch partitioner and rebuild oracle.
Outcome oracle_equivalence() {
  std::uint64_t mismatches = 0;
  std::uint64_t ops = 0;
  std::string first;
  for (std::uint64_t gamma : {4, 16}) {
    OracleSpec spec;
    spec.n_max = 512;
    spec.ops = 10000;
    spec.master_seed = 2;
    spec.geometry = {512, gamma, 16, 0};
    const OracleResult r = verify_oracle(spec);
    mismatches += r.mismatches;
    ops += r.ops_run;
    if (first.empty()) first = r.first_mismatch;
  }
  OracleSpec faulty;
  faulty.n_max = 512;
  faulty.ops = 10000;
  faulty.fault = Fault::skip_merge;
  const bool control_fails = !verify_oracle(faulty).pass;
  return {mismatches == 0 && ops == 20000 && control_fails,
          "n_max=512 ops=" + std::to_string(ops) + " (gamma 4 and 16) mismatches=" + std::to_string(mismatches) +
              " negative_control_fails=" + (control_fails ? "yes" : "no") + (first.empty() ? "" : " first: " + first)};
}

// 3. Allocator alone: 10^4 random string ops up to load 0.9, image == rebuild every 100 ops.
Outcome allocator_canonicity() {
  const std::uint64_t p = 4099;
  const HashSeeds seeds = HashSeeds::from_master(3);
  const LabelHasher hasher = seeded_hasher(seeds, p);
  BlockStore store = BlockStore::in_memory(p, 16);
  Allocator alloc(store, seeds);
  Rng rng(3);
  std::map<PartitionLabel, StoredString> live;
  std::uint64_t checks = 0, failures = 0;
  double peak = 0;
  for (std::uint64_t op = 1; op <= 10000; ++op) {
    const ElementKey base = (1 + rng.below(1200)) << 20;
    const PartitionLabel label{base, static_cast<Level>(1 + rng.below(4))};
    const auto it = live.find(label);
    if (it != live.end()) {
      alloc.erase(label);
      live.erase(it);
    } else {
      StoredString s{label, {}};
      std::uint64_t len = 1;
      while (rng.below(16) != 0) ++len;
      for (std::uint64_t i = 0; i < len; ++i) s.payload.push_back(base + i);
      if (alloc.occupied() + s.length() <= alloc.slot_limit()) {
        alloc.insert(s.label, s.payload);
        live.emplace(label, std::move(s));
      } else if (!live.empty()) {
        // Table is full: delete a random resident instead.
        auto victim = live.begin();
        std::advance(victim, static_cast<std::ptrdiff_t>(rng.below(live.size())));
        alloc.erase(victim->first);
        live.erase(victim);
      }
    }
    peak = std::max(peak, alloc.load());
    if (op % 100 == 0) {
      std::vector<StoredString> all;
      for (const auto& [l, s] : live) all.push_back(s);
      ++checks;
      if (store.image() != rebuild_canonical(all, p, hasher) || !alloc.verify_layout().empty()) ++failures;
    }
  }
  return {failures == 0 && peak <= 0.9 && peak > 0.8,
          "checkpoints=" + std::to_string(checks) + " mismatches=" + std::to_string(failures) +
              " peak_load=" + num(peak)};
}

// 4. Partition-size tail against exp(-lambda/gamma) + 4 sigma.
Outcome partition_tail_bound() {
  const Geometry g{100000, 16, 16, 0};
  const PartitionTail tail = partition_tail(g, 100000, 20, 4000, {16, 32, 48});
  Outcome out;
  out.summary = "partitions=" + std::to_string(tail.partitions);
  for (const TailCount& c : tail.tails) {
    const double bound = std::exp(-static_cast<double>(c.lambda) / 16.0);
    const double sigma = std::sqrt(bound * (1 - bound) / static_cast<double>(tail.partitions));
    const double freq = static_cast<double>(c.at_least) / static_cast<double>(tail.partitions);
    const bool ok = freq <= bound + 4 * sigma;
    out.pass = out.pass && ok;
    out.summary += " | lambda=" + std::to_string(c.lambda) + " empirical=" + num(freq) + " limit=" +
                   num(bound + 4 * sigma) + (ok ? " ok" : " EXCEEDED");
  }
  return out;
}

// 5. Mean lookup blocks vs e^2/(e-1)-style bound, and sub-linear growth in log n / log B.
Outcome lookup_io_bound() {
  Outcome out;
  const std::vector<std::uint64_t> sizes{1000, 10000, 100000};
  const std::uint64_t seeds = 10;
  for (std::uint64_t b : {16, 64}) {
    const Geometry g{1u << 20, b, b, 0};
    const double limit = 4.31 * static_cast<double>(beta_for(g.capacity, b));
    std::vector<double> mean(sizes.size(), 0.0);
    double worst_at_max = 0;
    for (std::uint64_t s = 0; s < seeds; ++s) {
      const auto samples = lookup_io(g, sizes, 10000, 5000 + s);
      for (std::size_t i = 0; i < sizes.size(); ++i) mean[i] += samples[i].mean / seeds;
      worst_at_max = std::max(worst_at_max, samples.back().mean);
    }
    std::vector<double> ratio;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      ratio.push_back(mean[i] / (std::log(static_cast<double>(sizes[i])) / std::log(static_cast<double>(b))));
    }
    const bool bounded = worst_at_max <= limit;
    const bool monotone = ratio[1] <= ratio[0] && ratio[2] <= ratio[1];
    out.pass = out.pass && bounded && monotone;
    out.summary += (out.summary.empty() ? "" : " | ") + std::string("B=gamma=") + std::to_string(b) +
                   " mean@1e5=" + num(mean.back(), 2) + " worst_seed@1e5=" + num(worst_at_max, 2) +
                   " limit=" + num(limit, 2) + " ratio=" + num(ratio[0], 2) + "," + num(ratio[1], 2) + "," +
                   num(ratio[2], 2) + (monotone ? " non-increasing" : " NOT non-increasing");
  }
  return out;
}

// 6. Range query blocks vs lookup bound + k/B + 2.
Outcome range_io_bound() {
  const Geometry g{1u << 20, 16, 16, 0};
  const double lookup_part = 4.31 * static_cast<double>(beta_for(g.capacity, 16));
  Outcome out;
  for (const RangeSample& s : range_io(g, 10000, {10, 100, 1000}, 100, 6)) {
    const double limit = lookup_part + static_cast<double>(s.k) / 16.0 + 2.0;
    const bool ok = s.mean <= limit && s.outputs_match;
    out.pass = out.pass && ok;
    out.summary += (out.summary.empty() ? "" : " | ") + std::string("k=") + std::to_string(s.k) +
                   " mean=" + num(s.mean, 2) + " max=" + num(s.max, 0) + " limit=" + num(limit, 2) +
                   (s.outputs_match ? "" : " WRONG OUTPUT") + (ok ? " ok" : " EXCEEDED");
  }
  return out;
}

// 7. Space: node_count - beta within n*gamma/(gamma-1) + 5 sqrt(n ln n); load <= alpha_max.
Outcome space_bound() {
  const std::uint64_t n = 100000;
  const Geometry g{n, 16, 16, 0};
  const Level beta = beta_for(n, 16);
  const double limit = n * 16.0 / 15.0 + 5.0 * std::sqrt(n * std::log(static_cast<double>(n)));
  double worst = 0, peak = 0;
  bool ok = true;
  for (const TrialShape& t : shape_trials(g, n, 20, 7000)) {
    const double excess = static_cast<double>(t.node_count - beta);
    worst = std::max(worst, excess);
    peak = std::max(peak, t.peak_load);
    ok = ok && excess <= limit && t.peak_load <= 0.9;
  }
  return {ok, "trials=20 worst(node_count-beta)=" + num(worst, 0) + " limit=" + num(limit, 1) +
                  " peak_load=" + num(peak)};
}

// 8. Depth: max level <= 2 log_16 n + 1 in >= 195 of 200 trials, <= beta in all.
Outcome depth_bound() {
  const std::uint64_t n = 10000;
  const Geometry g{n, 16, 16, 0};
  const double soft = 2.0 * std::log(static_cast<double>(n)) / std::log(16.0) + 1.0;
  const Level beta = beta_for(n, 16);
  std::uint64_t within = 0, capped = 0;
  Level deepest = 0;
  for (const TrialShape& t : shape_trials(g, n, 200, 8000)) {
    within += t.max_level <= soft ? 1 : 0;
    capped += t.max_level <= beta ? 1 : 0;
    deepest = std::max(deepest, t.max_level);
  }
  return {within >= 195 && capped == 200, "within_soft=" + std::to_string(within) + "/200 (limit " + num(soft, 2) +
                                              ") within_beta=" + std::to_string(capped) + "/200 deepest=" +
                                              std::to_string(deepest) + " beta=" + std::to_string(beta)};
}

// 9. Allocator I/O per op divided by (mean length / B + 1): bounded and flat across B.
Outcome allocator_io_shape() {
  const std::uint64_t p = next_prime(100000);
  std::vector<double> ratios;
  std::string summary;
  for (std::uint64_t b : {16, 64, 256}) {
    const AllocatorSample s = allocator_io(p, b, 16, 0.5, 10000, 9);
    ratios.push_back(s.ratio);
    summary += (summary.empty() ? "" : " | ") + std::string("B=") + std::to_string(b) + " io/op=" + num(s.mean_io, 3) +
               " mean_len=" + num(s.mean_length, 2) + " ratio=" + num(s.ratio, 3);
  }
  const double hi = *std::max_element(ratios.begin(), ratios.end());
  const double lo = *std::min_element(ratios.begin(), ratios.end());
  return {hi <= 6.0 && hi / lo < 2.0, summary + " | spread=" + num(hi / lo, 3)};
}

// 10. Duplicate insert / absent delete keep the digest; insert+delete restores it.
Outcome idempotence_round_trip() {
  const Params params = Params::make(4000, 16, 16);
  BSkipList list = BSkipList::in_memory(params, HashSeeds::from_master(10));
  Rng rng(10);
  std::vector<ElementKey> present;
  for (int i = 0; i < 1000; ++i) {
    present.push_back(rng.key());
    list.insert(present.back());
  }
  std::uint64_t failures = 0;
  for (int i = 0; i < 1000; ++i) {
    const Digest before = list.digest();
    const ElementKey in = present[rng.below(present.size())];
    list.insert(in);
    if (list.digest() != before) ++failures;
    ElementKey out = rng.key();
    while (list.lookup(out).found) out = rng.key();
    list.erase(out);
    if (list.digest() != before) ++failures;
    list.insert(out);
    list.erase(out);
    if (list.digest() != before) ++failures;
    list.erase(in);
    list.insert(in);
    if (list.digest() != before) ++failures;
  }
  return {failures == 0, "keys=1000 digest_changes=" + std::to_string(failures)};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "Run a single criterion (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {"unique representation", unique_representation},
      {"oracle equivalence", oracle_equivalence},
      {"allocator canonicity", allocator_canonicity},
      {"partition-size tail", partition_tail_bound},
      {"lookup I/O", lookup_io_bound},
      {"range query I/O", range_io_bound},
      {"space", space_bound},
      {"depth", depth_bound},
      {"allocator I/O shape", allocator_io_shape},
      {"idempotence and round trip", idempotence_round_trip},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<std::size_t>(only) != i + 1) continue;
    const auto started = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << i + 1 << " " << criteria[i].name << ": "
              << o.summary << " [" << num(secs, 1) << " s]" << std::endl;
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
