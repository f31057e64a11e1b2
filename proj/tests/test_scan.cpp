#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "cycloscan/dataset.hpp"
#include "cycloscan/scan.hpp"
#include "doctest.h"

using namespace cycloscan;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cycloscan_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ScanConfig job(i64 a4, i64 a6, u64 conductor, u64 x, u64 q = 1, u64 a = 1) {
  ScanConfig c;
  c.curve = CurveSpec::make(a4, a6, "t", conductor);
  c.x_max = x;
  c.prog = Progression{q, a};
  c.checkpoints = default_checkpoints(x);
  return c;
}

}  // namespace

TEST_CASE("small scans") {
  SUBCASE("x = 10 keeps the good primes 3, 5, 7") {
    const ScanResult r = run_scan(job(1, 1, 496, 10));
    std::vector<u64> ps;
    for (const auto& rec : r.records) ps.push_back(rec.p);
    CHECK(ps == std::vector<u64>{3, 5, 7});
    CHECK(r.snapshots.back().prime_count == 3);
    CHECK(r.snapshots.back().pi_all == 4);
  }
  SUBCASE("q = 4, a = 1, x = 50") {
    const ScanResult r = run_scan(job(1, 1, 496, 50, 4, 1));
    std::vector<u64> ps;
    for (const auto& rec : r.records) ps.push_back(rec.p);
    CHECK(ps == std::vector<u64>{5, 13, 17, 29, 37, 41});
    // 31 = 3 mod 4, so nothing is removed here
    CHECK(r.snapshots.back().prime_count == 6);
  }
  SUBCASE("empty range") {
    const ScanResult r = run_scan(job(1, 1, 496, 2));
    CHECK(r.records.empty());
    const Accumulator& acc = r.snapshots.back();
    CHECK(acc.prime_count == 0);
    CHECK(acc.cyclic_count == 0);
    CHECK(acc.exponent_sum == 0);
    CHECK(pi_E_m(acc, 1) == 0);
  }
}

TEST_CASE("accumulator against a direct recount") {
  const ScanConfig c = job(1, 1, 496, 200000);
  const ScanResult r = run_scan(c);
  REQUIRE(r.snapshots.size() == c.effective_checkpoints().size());
  for (const Accumulator& acc : r.snapshots) {
    u64 count = 0, cyc = 0;
    u128 esum = 0;
    std::vector<u64> split(acc.m_max + 1, 0);
    for (const auto& rec : r.records) {
      if (rec.p > acc.x) break;
      ++count;
      cyc += rec.dp == 1;
      esum += rec.ep;
      for (u64 m = 1; m <= acc.m_max; ++m) split[m] += rec.dp % m == 0;
    }
    CHECK(acc.prime_count == count);
    CHECK(acc.cyclic_count == cyc);
    CHECK(acc.exponent_sum == esum);
    for (u64 m = 1; m <= acc.m_max; ++m) REQUIRE(pi_E_m(acc, m) == split[m]);
    CHECK(acc.pi_all == PrimeSieve(acc.x).count(2, acc.x));
    CHECK_NOTHROW(acc.check());
  }
  CHECK_THROWS_AS(pi_E_m(r.snapshots.back(), 0), std::out_of_range);
  CHECK_THROWS_AS(pi_E_m(r.snapshots.back(), 101), std::out_of_range);
  CHECK(split_bound_constant(r.snapshots.back()) < 10);
}

TEST_CASE("progressions partition the primes") {
  const u64 x = 100000;
  const u64 total = run_scan(job(1, 1, 496, x)).snapshots.back().prime_count;
  for (u64 q : {4ULL, 5ULL, 12ULL}) {
    u64 sum = 0, dividing = 0;
    for (u64 a = 0; a < q; ++a) {
      if (std::gcd(a, q) != 1) continue;
      sum += run_scan(job(1, 1, 496, x, q, a)).snapshots.back().prime_count;
    }
    for (u64 p : {3ULL, 5ULL}) dividing += q % p == 0;
    CHECK(sum + dividing == total);
  }
}

TEST_CASE("x^3 - x: every good prime has even d") {
  const ScanResult r = run_scan(job(-1, 0, 32, 1000));
  const Accumulator& acc = r.snapshots.back();
  CHECK(acc.cyclic_count == 0);
  CHECK(pi_E_m(acc, 2) == acc.prime_count);
  const IdentityReport ie = inclusion_exclusion_check(r, 1000);
  CHECK(ie.pass);
  for (const auto& row : ie.rows) {
    CHECK(row.lhs == 0);
    CHECK(row.rhs == 0);
  }
}

TEST_CASE("identity checks") {
  SUBCASE("x^3 + x + 1 at 10^5") {
    const ScanResult r = run_scan(job(1, 1, 496, 100000));
    const IdentityReport ie = inclusion_exclusion_check(r, 100000);
    CHECK(ie.pass);
    for (const auto& row : ie.rows) {
      CHECK(row.residual == 0);
      if (row.rhs_from_split_counts) CHECK(*row.rhs_from_split_counts == row.lhs);
    }
    CHECK(exponent_identity_check(r.records).pass);
  }
  SUBCASE("all d = 1 gives prime_count on both sides") {
    ScanResult r;
    r.records = {{5, -3, 9, 1, 9}, {7, 3, 5, 1, 5}};
    Accumulator acc = Accumulator::empty(Progression{}, 10);
    for (const auto& rec : r.records) acc.add(rec);
    acc.x = 7;
    r.snapshots = {acc};
    const IdentityReport ie = inclusion_exclusion_check(r, 7);
    REQUIRE(ie.rows.size() == 1);
    CHECK(ie.rows[0].lhs == 2);
    CHECK(ie.rows[0].rhs == 2);
  }
  SUBCASE("exponent examples") {
    const ExponentReport a = exponent_identity_check({{5, -3, 9, 1, 9}});
    CHECK(a.pass);
    CHECK(a.sum_e == Rational(9));
    const ExponentReport b = exponent_identity_check({{5, -2, 8, 2, 4}});
    CHECK(b.pass);
    CHECK(b.expanded == Rational(4));
    CHECK(b.regrouped == Rational(4));
    CHECK(exponent_identity_check({}).pass);
    const ExponentReport bad = exponent_identity_check({{5, -2, 8, 2, 8}});
    CHECK_FALSE(bad.pass);
    CHECK(bad.offending_prime == 5);
  }
}

TEST_CASE("shard count does not change the output") {
  ScanConfig c = job(6, -2, 1728, 300000, 4, 1);
  std::vector<std::string> dumps;
  for (unsigned shards : {1u, 2u, 8u}) {
    c.shards = shards;
    const fs::path dir = fresh_dir("shards" + std::to_string(shards));
    run_scan(c, ScanOptions{dir, false, {}});
    std::string all = slurp(dir / "records.csv");
    for (u64 x : c.effective_checkpoints()) all += slurp(checkpoint_path(dir, x));
    dumps.push_back(all);
  }
  CHECK(dumps[0] == dumps[1]);
  CHECK(dumps[0] == dumps[2]);
}

TEST_CASE("resume after an interrupted scan") {
  ScanConfig c = job(1, 1, 496, 300000);
  const fs::path full = fresh_dir("resume_full");
  const ScanResult want = run_scan(c, ScanOptions{full, false, {}});

  const fs::path cut = fresh_dir("resume_cut");
  struct Killed {};
  ScanOptions opt{cut, false, [](const Accumulator& acc) {
                    if (acc.x >= 20000) throw Killed{};
                  }};
  CHECK_THROWS_AS(run_scan(c, opt), Killed);
  // a torn record line past the last checkpoint must be discarded
  { std::ofstream(cut / "records.csv", std::ios::app) << "299993,1"; }
  const ScanResult got = run_scan(c, ScanOptions{cut, true, {}});
  CHECK(got.snapshots.back() == want.snapshots.back());
  CHECK(slurp(cut / "records.csv") == slurp(full / "records.csv"));
  for (u64 x : c.effective_checkpoints()) {
    CHECK(slurp(checkpoint_path(cut, x)) == slurp(checkpoint_path(full, x)));
  }

  ScanConfig other = c;
  other.seed = 99;
  CHECK_THROWS(run_scan(other, ScanOptions{cut, true, {}}));
}

TEST_CASE("dataset round trip") {
  const ScanConfig c = job(1, 1, 496, 50000, 5, 2);
  const fs::path dir = fresh_dir("roundtrip");
  const ScanResult r = run_scan(c, ScanOptions{dir, false, {}});
  const ScanResult back = load_dataset(dir);
  CHECK(back.records == r.records);
  CHECK(back.snapshots == r.snapshots);
  const Accumulator a = snapshot_from_json(snapshot_to_json(r.snapshots.back()));
  CHECK(a == r.snapshots.back());

  const fs::path bad = dir / "bad.csv";
  { std::ofstream(bad) << "p,ap,n,dp,ep\n5,-3,9,1,9\n"; }
  CHECK_THROWS_AS(read_records_csv(bad), FormatError);
  { std::ofstream(bad) << "# format_version=1\np,ap,n,dp,ep\n7,3,5,1,5\n5,-3,9,1,9\n"; }
  CHECK_THROWS_AS(read_records_csv(bad), FormatError);
  { std::ofstream(bad) << "# format_version=1\np,ap,n,dp,ep\n5,-3,9,3,3\n"; }
  CHECK_THROWS(read_records_csv(bad));
}

TEST_CASE("config validation") {
  ScanConfig c = job(1, 1, 496, 1000);
  c.prog = Progression{4, 2};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = job(1, 1, 496, 1000);
  c.checkpoints = {500, 100};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = job(1, 1, 496, 1000);
  c.m_max = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK(default_checkpoints(1000) == std::vector<u64>{10, 20, 100, 200, 1000});
}
