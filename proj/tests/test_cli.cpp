#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "epmp/cli.hpp"

using namespace epmp;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("epmp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  int run(std::vector<std::string> args, std::optional<std::string> env = std::nullopt) {
    out_.str("");
    err_.str("");
    return cli::run_cli(args, out_, err_, std::move(env));
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  /// Value printed after "key: ".
  std::string value(const std::string& key) const {
    std::istringstream in(out_.str());
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind(key + ": ", 0) == 0) return line.substr(key.size() + 2);
    }
    return "<missing " + key + ">";
  }

  /// Output without the workers line.
  std::string without_workers() const {
    std::istringstream in(out_.str());
    std::string line;
    std::string kept;
    while (std::getline(in, line)) {
      if (line.rfind("workers: ", 0) != 0) kept += line + '\n';
    }
    return kept;
  }

  std::filesystem::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

}  // namespace

TEST_F(Cli, GenerateThenOracle) {
  ASSERT_EQ(run({"generate", "--n", "3", "--spectrum", "5,5,5", "--seed", "1", "--out", path("a.mtx")}), 0)
      << err_.str();
  ASSERT_EQ(run({"oracle", "--matrix", path("a.mtx")}), 0) << err_.str();
  EXPECT_EQ(value("n"), "3");
  for (const char* k : {"eigenvalue_1", "eigenvalue_2", "eigenvalue_3"}) {
    EXPECT_NEAR(std::stod(value(k)), 5.0, 1e-12) << k;
  }
}

TEST_F(Cli, SolveDiagonal) {
  ASSERT_EQ(run({"generate", "--n", "4", "--spectrum", "5,1,0.5,0.25", "--out", path("d.mtx")}), 0);
  ASSERT_EQ(run({"solve", "--matrix", path("d.mtx"), "--seed", "3"}), 0) << err_.str();
  EXPECT_EQ(value("lambda"), "5");
  EXPECT_EQ(value("converged"), "true");
  EXPECT_EQ(value("method"), "epmp");
  for (const char* m : {"power", "arnoldi", "epmp-par"}) {
    EXPECT_EQ(run({"solve", "--matrix", path("d.mtx"), "--method", m}), 0) << m;
    EXPECT_EQ(value("lambda"), "5") << m;
  }
}

TEST_F(Cli, WorkerCountDoesNotChangeTheAnswer) {
  ASSERT_EQ(run({"generate", "--n", "60", "--spectrum", "gapped:10,5", "--seed", "2", "--out",
                 path("g.mtx")}),
            0);
  ASSERT_EQ(run({"solve", "--matrix", path("g.mtx"), "--workers", "4", "--seed", "9"}), 0);
  EXPECT_EQ(value("workers"), "4");
  const std::string four = without_workers();
  ASSERT_EQ(run({"solve", "--matrix", path("g.mtx"), "--workers", "1", "--seed", "9"}), 0);
  EXPECT_EQ(value("workers"), "1");
  EXPECT_EQ(without_workers(), four);
}

TEST_F(Cli, WorkersFromEnvironment) {
  ASSERT_EQ(run({"generate", "--n", "10", "--spectrum", "gapped:3,1", "--out", path("e.mtx")}), 0);
  ASSERT_EQ(run({"solve", "--matrix", path("e.mtx"), "--method", "epmp-par"}, "3"), 0);
  EXPECT_EQ(value("workers"), "3");
  ASSERT_EQ(run({"solve", "--matrix", path("e.mtx"), "--method", "epmp-par", "--workers", "2"}, "3"), 0);
  EXPECT_EQ(value("workers"), "2");
  EXPECT_EQ(run({"solve", "--matrix", path("e.mtx"), "--method", "epmp-par"}, "lots"), 64);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({}), 64);
  EXPECT_EQ(run({"solve", "--bogus"}), 64);
  EXPECT_EQ(run({"solve", "--matrix", path("x.mtx"), "--alpha", "1.5"}), 64);
  EXPECT_EQ(run({"generate", "--n", "3", "--spectrum", "1,2", "--out", path("y.mtx")}), 64);
  EXPECT_EQ(run({"bench", "--dims", "8", "--methods", "lanczos"}), 64);
  EXPECT_EQ(run({"--help"}), 0);
  EXPECT_NE(out_.str().find("solve"), std::string::npos);
}

TEST_F(Cli, InputErrors) {
  EXPECT_EQ(run({"solve", "--matrix", path("missing.mtx")}), 66);
  EXPECT_FALSE(err_.str().empty());
  {
    std::ofstream(path("bad.mtx")) << "%%MatrixMarket matrix array real general\n2 3\n1\n2\n3\n4\n5\n6\n";
  }
  EXPECT_EQ(run({"oracle", "--matrix", path("bad.mtx")}), 66);
}

TEST_F(Cli, IterationCapGivesExitTwo) {
  ASSERT_EQ(run({"generate", "--n", "40", "--spectrum", "gapped:10,9.99", "--out", path("h.mtx")}), 0);
  EXPECT_EQ(run({"solve", "--matrix", path("h.mtx"), "--max-iter", "3"}), 2);
  EXPECT_EQ(value("converged"), "false");
  EXPECT_EQ(value("iterations"), "3");
}

TEST_F(Cli, DeflationPrintsSuccessivePairs) {
  ASSERT_EQ(run({"generate", "--n", "30", "--spectrum", "gapped:10,5", "--seed", "4", "--out",
                 path("f.mtx")}),
            0);
  ASSERT_EQ(run({"solve", "--matrix", path("f.mtx"), "--method", "power", "--deflate", "2"}), 0)
      << err_.str();
  EXPECT_NEAR(std::stod(value("lambda_1")), 10.0, 1e-6);
  EXPECT_NEAR(std::stod(value("lambda_2")), 5.0, 1e-6);
}

TEST_F(Cli, DeflatingNonSymmetricInputFails) {
  {
    std::ofstream(path("n.mtx")) << "%%MatrixMarket matrix array real general\n2 2\n3\n0\n1\n1\n";
  }
  EXPECT_EQ(run({"solve", "--matrix", path("n.mtx"), "--method", "power", "--deflate", "2"}), 70);
}

TEST_F(Cli, SmallBenchmark) {
  ASSERT_EQ(run({"bench", "--dims", "16,24,32", "--methods", "power,epmp", "--reps", "1", "--out",
                 path("b")}),
            0)
      << err_.str();
  EXPECT_EQ(value("records"), "6");
  EXPECT_TRUE(std::filesystem::exists(dir_ / "b" / "bench.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "b" / "POWER.dat"));
  EXPECT_EQ(read_csv(dir_ / "b" / "bench.csv").size(), 6u);
  EXPECT_NE(value("slope_POWER"), "<missing slope_POWER>");
}
