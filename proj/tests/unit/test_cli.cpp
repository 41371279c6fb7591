#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "spinmem/config.hpp"
#include "spinmem/experiments.hpp"

using namespace spinmem;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  const fs::path dir = fs::temp_directory_path() / (std::string("spinmem_cli_") + info->name());
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + SPINMEM_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// a 5x5x1 lattice keeps the fig2a and fig2c runs short
const char* small_bath = R"("bath": {"Lx": 2.0, "Ly": 2.0, "Lz": 0.5})";

}  // namespace

TEST(Config, DefaultsValidate) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.samples(), 500);
  EXPECT_EQ(c.sigmas().size(), 13u);
  EXPECT_NEAR(c.sigmas().front(), 0.01, 1e-15);
  EXPECT_NEAR(c.sigmas().back(), 10.0, 1e-12);
  EXPECT_NEAR(c.omegas().back() / c.omegas().front(), 10.0, 1e-12);
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"experimnet": "fig2a"})")), ConfigError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"bath": {"LX": 3}})")), ConfigError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"bath": 3})")), ConfigError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"([1, 2])")), ConfigError);
}

TEST(Config, BadValuesRejected) {
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"seed": "x"})")), ConfigError);
  for (const char* text : {R"({"experiment": "fig3"})", R"({"zeta": [3]})", R"({"polarisation_grid": [1.5]})",
                           R"({"threads": 0})", R"({"bath": {"spin": 1.0}})", R"({"bath": {"B_Q": 60}})",
                           R"({"shift_convention": "other"})", R"({"n_samples": 50})"}) {
    EXPECT_THROW(parse_config(nlohmann::json::parse(text)).validate(), ConfigError) << text;
  }
}

TEST(Config, HashIgnoresThreadsAndOutput) {
  RunConfig a;
  RunConfig b = a;
  b.threads = 8;
  b.output = "elsewhere.csv";
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  b.seed += 1;
  EXPECT_NE(config_hash(a), config_hash(b));
  // explicit defaults hash like implicit ones
  RunConfig c;
  c.n_samples = 500;
  EXPECT_EQ(config_hash(a), config_hash(c));
}

TEST(Csv, HeaderAndRows) {
  SweepResult r;
  r.x_name = "P";
  r.x = {0.0, 0.5};
  r.add_column("a", {1.0, 0.25});
  r.metadata["seed"] = "7";
  std::ostringstream os;
  write_csv(r, os);
  EXPECT_EQ(os.str(), "# seed: 7\nP,a\n0,1\n0.5,0.25\n");
  r.add_column("b", {1.0});
  EXPECT_THROW(write_csv(r, os), Error);
  EXPECT_THROW(r.column("c"), Error);
}

TEST(Cli, PulseSpectrumCsv) {
  const auto dir = scratch();
  ASSERT_EQ(cli("--experiment pulse-spectrum --out " + (dir / "p.csv").string()), 0);
  const auto text = slurp(dir / "p.csv");
  EXPECT_NE(text.find("# config_hash: "), std::string::npos);
  EXPECT_NE(text.find("# seed: "), std::string::npos);
  EXPECT_NE(text.find("# version: "), std::string::npos);
  EXPECT_NE(text.find("\nl,P_l,Q_l\n"), std::string::npos);
  std::istringstream in(text);
  std::string line;
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#' && line[0] != 'l') ++rows;
  EXPECT_EQ(rows, 25);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch();
  write_file(dir / "bad.json", R"({"experiment": "fig2a", "unknown": 1})");
  EXPECT_EQ(cli("--config " + (dir / "bad.json").string()), 2);
  write_file(dir / "broken.json", "{");
  EXPECT_EQ(cli("--config " + (dir / "broken.json").string()), 2);
  EXPECT_EQ(cli("--config " + (dir / "missing.json").string()), 2);
  EXPECT_EQ(cli("--experiment fig9"), 2);
  EXPECT_EQ(cli("--no-such-flag"), 2);
  EXPECT_EQ(cli("--experiment oracle-check --out " + (dir / "o.csv").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "o.csv"));
}

TEST(Cli, TruncationFailureExitsWithThree) {
  const auto dir = scratch();
  write_file(dir / "c.json", std::string(R"({"experiment": "fig2c", "n_samples": 1, "polarisation_grid": [0.3],
                                             "truncation_tol": 1e-300, )") + small_bath + "}");
  EXPECT_EQ(cli("--config " + (dir / "c.json").string()), 3);
}

TEST(Cli, Fig2aColumnsAndDeterminism) {
  const auto dir = scratch();
  write_file(dir / "a.json", std::string(R"({"experiment": "fig2a", "n_samples": 100, )") + small_bath + "}");
  const std::string base = "--config " + (dir / "a.json").string();
  ASSERT_EQ(cli(base + " --out " + (dir / "1.csv").string()), 0);
  ASSERT_EQ(cli(base + " --out " + (dir / "2.csv").string()), 0);
  ASSERT_EQ(cli(base + " --threads 3 --out " + (dir / "3.csv").string()), 0);
  const auto one = slurp(dir / "1.csv");
  EXPECT_EQ(one, slurp(dir / "2.csv"));
  EXPECT_EQ(one, slurp(dir / "3.csv"));
  EXPECT_NE(one.find("\nP,leak_z1_mean,leak_z2_mean,leak_z1_rsd,leak_z2_rsd\n"), std::string::npos);
  ASSERT_EQ(cli(base + " --seed 5 --out " + (dir / "4.csv").string()), 0);
  EXPECT_NE(one, slurp(dir / "4.csv"));
}

TEST(Cli, Fig2dDeterministicAcrossThreads) {
  const auto dir = scratch();
  write_file(dir / "d.json", R"({"experiment": "fig2d", "fig2d_sites": 50, "n_realisations": 8,
                                 "sigma_grid": [0, 0.1, 1]})");
  const std::string base = "--config " + (dir / "d.json").string();
  ASSERT_EQ(cli(base + " --out " + (dir / "1.csv").string()), 0);
  ASSERT_EQ(cli(base + " --threads 4 --out " + (dir / "2.csv").string()), 0);
  EXPECT_EQ(slurp(dir / "1.csv"), slurp(dir / "2.csv"));
}
