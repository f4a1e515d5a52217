#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "epmp/bench.hpp"

using namespace epmp;

namespace {

BenchmarkRecord record(std::size_t dim, Method m, double seconds) {
  BenchmarkRecord r;
  r.dim = dim;
  r.method = m;
  r.reps = 12;
  r.mean_seconds = seconds;
  r.converged_fraction = 1.0;
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

class BenchFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("epmp_bench_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

}  // namespace

TEST(ScalingFit, ExactPowerLaws) {
  std::vector<BenchmarkRecord> rs;
  for (std::size_t n : {100u, 200u, 400u, 800u}) {
    const double x = static_cast<double>(n);
    rs.push_back(record(n, Method::power, 1e-6 * x * x));
    rs.push_back(record(n, Method::epmp_seq, 3e-4 * x));
  }
  const auto quad = scaling_fit(rs, Method::power);
  EXPECT_NEAR(quad.slope, 2.0, 1e-9);
  EXPECT_NEAR(quad.r_squared, 1.0, 1e-12);
  EXPECT_NEAR(quad.intercept, std::log(1e-6), 1e-9);
  EXPECT_NEAR(scaling_fit(rs, Method::epmp_seq).slope, 1.0, 1e-9);
}

TEST(ScalingFit, PublishedSequentialTimings) {
  const std::vector<BenchmarkRecord> rs{
      record(5000, Method::epmp_seq, 12.108),  record(10000, Method::epmp_seq, 45.554),
      record(20000, Method::epmp_seq, 200.66), record(30000, Method::epmp_seq, 404.836),
      record(40000, Method::epmp_seq, 834.432),
  };
  const auto fit = scaling_fit(rs, Method::epmp_seq);
  EXPECT_NEAR(fit.slope, 2.02056, 1e-5);
  EXPECT_NEAR(fit.r_squared, 0.99875, 1e-5);
  EXPECT_GE(fit.slope, 1.9);
  EXPECT_LE(fit.slope, 2.2);
}

TEST(ScalingFit, NeedsThreeAvailableRecords) {
  std::vector<BenchmarkRecord> rs{record(10, Method::power, 1.0), record(20, Method::power, 4.0)};
  EXPECT_THROW(scaling_fit(rs, Method::power), Error);
  auto missing = record(40, Method::power, 0.0);
  missing.available = false;
  rs.push_back(missing);
  EXPECT_THROW(scaling_fit(rs, Method::power), Error);
  rs.push_back(record(80, Method::power, 64.0));
  EXPECT_NEAR(scaling_fit(rs, Method::power).slope, 2.0, 1e-12);
}

TEST(Csv, SingleRecordHasHeaderAndOneRow) {
  const std::string text = to_csv({record(64, Method::epmp_par, 0.25)});
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_EQ(text.substr(0, text.find('\n')), csv_header);
  EXPECT_NE(text.find("64,EPMP_PAR,1,12,0.25,"), std::string::npos);
}

TEST(Csv, NullCellsAndRejectedInput) {
  auto r = record(4096, Method::epmp_seq, 0.0);
  r.available = false;
  r.converged_fraction = 0.0;
  const std::string text = to_csv({r});
  EXPECT_NE(text.find("4096,EPMP_SEQ,1,12,NULL,NULL,NULL,NULL"), std::string::npos);
  EXPECT_EQ(parse_csv(text), std::vector<BenchmarkRecord>{r});
  EXPECT_THROW(parse_csv("dim,method\n"), Error);
  EXPECT_THROW(parse_csv(std::string(csv_header) + "\n1,BOGUS,1,1,1,1,1,1\n"), Error);
  EXPECT_THROW(parse_csv(std::string(csv_header) + "\n1,POWER,1,1,x,1,1,1\n"), Error);
}

TEST(Csv, RoundTripProperty) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<BenchmarkRecord> rs;
    for (int i = 0; i < 1 + trial % 7; ++i) {
      BenchmarkRecord r;
      r.dim = 1 + static_cast<std::size_t>(u(rng) * 5000);
      r.method = all_methods[static_cast<std::size_t>(u(rng) * 4) % 4];
      r.workers = 1 + trial % 5;
      r.reps = 1 + i;
      r.available = u(rng) > 0.2;
      if (r.available) {
        r.mean_seconds = u(rng) * std::pow(10.0, trial % 9 - 4);
        r.stddev_seconds = u(rng) / 3.0;
        r.iterations_mean = u(rng) * 1e4;
        r.converged_fraction = u(rng);
      }
      rs.push_back(r);
    }
    EXPECT_EQ(parse_csv(to_csv(rs)), rs) << "trial " << trial;
  }
}

TEST_F(BenchFiles, CsvFileAndPlotData) {
  std::vector<BenchmarkRecord> rs{record(8, Method::power, 0.5), record(16, Method::power, 2.0)};
  auto gap = record(32, Method::power, 0.0);
  gap.available = false;
  gap.converged_fraction = 0.0;
  rs.push_back(gap);
  std::filesystem::create_directories(dir_);
  emit_csv(rs, dir_ / "bench.csv");
  EXPECT_EQ(read_csv(dir_ / "bench.csv"), rs);

  const auto files = emit_plot_data(rs, dir_ / "plots");
  ASSERT_EQ(files.size(), 4u);
  EXPECT_EQ(slurp(dir_ / "plots" / "POWER.dat"),
            "# dim mean_seconds (POWER)\n8 0.5\n16 2\n");
  EXPECT_EQ(slurp(dir_ / "plots" / "ARNOLDI.dat"), "# dim mean_seconds (ARNOLDI)\n");
}

TEST(RunBenchmark, MemoryLimitProducesNullRecords) {
  BenchOptions opt;
  opt.dims = {16, 64};
  opt.reps = 1;
  opt.methods = {Method::power, Method::epmp_seq};
  opt.memory_limit_bytes = estimated_bytes(32);
  const auto rs = run_benchmark(opt);
  ASSERT_EQ(rs.size(), 4u);
  EXPECT_TRUE(rs[0].available);
  EXPECT_TRUE(rs[1].available);
  EXPECT_FALSE(rs[2].available);
  EXPECT_FALSE(rs[3].available);
  EXPECT_EQ(rs[3].dim, 64u);
  EXPECT_NE(to_csv(rs).find("64,EPMP_SEQ,1,1,NULL"), std::string::npos);
}

TEST(RunBenchmark, SmallSweepIsDeterministicAndConverges) {
  BenchOptions opt;
  opt.dims = {20, 40, 60};
  opt.reps = 3;
  opt.workers = 2;
  opt.methods = {Method::power, Method::epmp_seq, Method::epmp_par, Method::arnoldi};
  const auto a = run_benchmark(opt);
  const auto b = run_benchmark(opt);
  ASSERT_EQ(a.size(), 12u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(a[i].available);
    EXPECT_EQ(a[i].converged_fraction, 1.0) << to_string(a[i].method) << " " << a[i].dim;
    EXPECT_EQ(a[i].iterations_mean, b[i].iterations_mean);
    EXPECT_GE(a[i].mean_seconds, 0.0);
    EXPECT_EQ(a[i].workers, a[i].method == Method::epmp_par ? 2u : 1u);
  }
  // Same seeds and bit-identical products: EPMP_PAR does the same iterations.
  for (std::size_t d = 0; d < 3; ++d) EXPECT_EQ(a[4 * d + 1].iterations_mean, a[4 * d + 2].iterations_mean);
}

TEST(RunBenchmark, InvalidOptions) {
  BenchOptions opt;
  EXPECT_THROW(run_benchmark(opt), Error);
  opt.dims = {4};
  opt.reps = 0;
  EXPECT_THROW(run_benchmark(opt), Error);
}

TEST(Methods, NamesRoundTrip) {
  for (Method m : all_methods) EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_EQ(parse_method("epmp"), Method::epmp_seq);
  EXPECT_EQ(parse_method("epmp-par"), Method::epmp_par);
  EXPECT_FALSE(parse_method("lanczos").has_value());
}
