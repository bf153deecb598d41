#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bsl/harness.hpp"

using namespace bsl;
using namespace bsl::harness;

namespace {

std::string csv_of(const WorkloadSpec& spec) {
  std::ostringstream out;
  write_csv(out, run(spec).rows);
  return out.str();
}

}  // namespace

TEST_CASE("op mix parsing") {
  const OpMix m = OpMix::parse("insert=1,delete=0.5,lookup=2");
  CHECK(m.insert == 1.0);
  CHECK(m.erase == 0.5);
  CHECK(m.lookup == 2.0);
  CHECK(m.range == 0.0);
  CHECK_THROWS_AS((void)OpMix::parse("insert=-1"), std::invalid_argument);
  CHECK_THROWS_AS((void)OpMix::parse("insert=0"), std::invalid_argument);
  CHECK_THROWS_AS((void)OpMix::parse("scan=1"), std::invalid_argument);
  CHECK_THROWS_AS((void)OpMix::parse("insert=1x"), std::invalid_argument);
}

TEST_CASE("run: zero ops gives a header-only CSV") {
  WorkloadSpec spec;
  spec.n = 50;
  const std::string csv = csv_of(spec);
  CHECK(csv == "experiment,n,gamma,B,op,mean_io_blocks,p95_io_blocks,node_count,load,max_level,wall_time_s\n");
}

TEST_CASE("run: pure inserts store distinct keys") {
  WorkloadSpec spec;
  spec.ops = 700;
  spec.geometry.capacity = 1000;
  const RunResult r = run(spec);
  CHECK(r.element_count == 700);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].op == "insert");
  CHECK(r.rows[0].mean_io > 0.0);
}

TEST_CASE("run: reproducible byte for byte") {
  WorkloadSpec spec;
  spec.n = 300;
  spec.ops = 400;
  spec.mix = OpMix::parse("insert=1,delete=1,lookup=1,range=1");
  spec.master_seed = 99;
  const std::string a = csv_of(spec);
  CHECK(a == csv_of(spec));
  CHECK(a.find("range") != std::string::npos);
  spec.master_seed = 100;
  CHECK(a != csv_of(spec));
}

TEST_CASE("run: file backend gives the memory image") {
  WorkloadSpec spec;
  spec.n = 200;
  spec.ops = 100;
  spec.mix = OpMix::parse("insert=1,delete=1");
  const RunResult mem = run(spec);
  spec.backend = Backend::file;
  spec.file = std::filesystem::temp_directory_path() / "bsl_harness_run.bsl";
  const RunResult file = run(spec);
  CHECK(mem.digest == file.digest);
  std::filesystem::remove(spec.file);
}

TEST_CASE("verify_ur") {
  UrSpec spec;
  spec.n = 0;
  spec.trials = 2;
  CHECK(verify_ur(spec).pass);

  spec.n = 300;
  spec.trials = 6;
  const UrResult ok = verify_ur(spec);
  CHECK(ok.pass);
  CHECK(ok.digests.size() == 6);

  spec.vary_seed = true;
  CHECK_FALSE(verify_ur(spec).pass);

  spec.trials = 1;
  CHECK_THROWS_AS((void)verify_ur(spec), std::invalid_argument);
}

TEST_CASE("verify_oracle") {
  OracleSpec spec;
  spec.n_max = 0;
  CHECK(verify_oracle(spec).pass);

  spec.n_max = 128;
  spec.ops = 1500;
  const OracleResult ok = verify_oracle(spec);
  CHECK(ok.pass);
  CHECK(ok.ops_run == 1500);

  spec.fault = Fault::skip_merge;
  const OracleResult bad = verify_oracle(spec);
  CHECK_FALSE(bad.pass);
  CHECK_FALSE(bad.first_mismatch.empty());
}

TEST_CASE("stats bound columns come from the closed forms") {
  StatsSpec spec;
  spec.kind = StatsKind::partitions;
  spec.n = 2000;
  spec.geometry.capacity = 2000;
  const auto rows = stats(spec);
  REQUIRE(rows.size() == 3);
  CHECK(*rows[0].bound == doctest::Approx(std::exp(-1.0)));
  CHECK(*rows[1].bound == doctest::Approx(std::exp(-2.0)));
  CHECK(*rows[2].bound == doctest::Approx(std::exp(-3.0)));
  CHECK(rows[0].empirical > rows[1].empirical);

  spec.kind = StatsKind::depth;
  spec.trials = 3;
  const auto depth = stats(spec);
  CHECK(depth.back().parameter == "P[depth>beta]");
  CHECK(depth.back().empirical == 0.0);

  CHECK(lookup_bound(16, 16, 1u << 20) == doctest::Approx(std::exp(2.0) / (std::exp(1.0) - 1) * 7));
  CHECK(parse_stats_kind("io") == StatsKind::io);
  CHECK_FALSE(parse_stats_kind("bogus"));
}
