//------------------------------------------------------------------------------
//
//   Copyright 2026 The asstat Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "asstat/config.hpp"
#include "asstat/experiments.hpp"
#include "asstat/selftest.hpp"
#include "asstat/svg.hpp"

using namespace asstat;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test
{
protected:
  void SetUp() override
  {
    dir_ = fs::temp_directory_path() /
           ("asstat_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  void TearDown() override
  {
    fs::remove_all(dir_);
  }

  fs::path write(std::string const &name, std::string const &text) const
  {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  int run(std::string const &args) const
  {
    std::string const cmd = std::string(ASSTAT_CLI_PATH) + " " + args + " > " +
                            (dir_ / "stdout.txt").string() + " 2>&1";
    int const status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string output() const
  {
    return slurp(dir_ / "stdout.txt");
  }

  static std::string slurp(fs::path const &p)
  {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  fs::path dir_;
};

constexpr char const *kSmallSweep = R"([sweep]
n = 16, 64
t = 1, 0.5
codes = blind/mdl_fisher/point, blind/quantize_euclid/cell_mixture, visible/quantize_euclid/point
criteria = relative_entropy, variational
[prior]
nodes = 16
)";

}  // namespace

TEST(ConfigTest, parses_every_section_test)
{
  std::istringstream in(R"([family]
k = 3
eps_bd = 0.01
[prior]
kind = jeffreys
lo = 0.05
hi = 0.95
nodes = 32
[sweep]
n = 8, 16
t = 0.5
codes = visible/quantize_euclid/point
criteria = variational
[run]
seed = 42
)");
  auto const c = parse_config(in);
  EXPECT_EQ(c.k, 3u);
  EXPECT_EQ(c.eps_bd, 0.01);
  EXPECT_EQ(c.prior_kind, PriorKind::jeffreys);
  EXPECT_EQ(c.prior_nodes, 32u);
  EXPECT_EQ(c.n_list, (std::vector<std::size_t>{8, 16}));
  ASSERT_EQ(c.codes.size(), 1u);
  EXPECT_EQ(to_string(c.codes[0]), "visible/quantize_euclid/point");
  EXPECT_EQ(c.criteria, (std::vector<Criterion>{Criterion::variational}));
  EXPECT_EQ(c.seed, 42u);
}

TEST(ConfigTest, rejects_bad_input_test)
{
  auto parse = [](std::string const &text) {
    std::istringstream in(text);
    return parse_config(in);
  };
  EXPECT_THROW(parse("[bogus]\nx = 1\n"), ConfigError);
  EXPECT_THROW(parse("[family]\nkk = 2\n"), ConfigError);
  EXPECT_THROW(parse("[family]\nk = two\n"), ConfigError);
  EXPECT_THROW(parse("[sweep]\ncodes = blind/mdl/point\n"), ConfigError);
  EXPECT_THROW(parse("[sweep]\ncriteria = hellinger\n"), ConfigError);
  EXPECT_THROW(parse("[family\nk = 2\n"), ConfigError);
  EXPECT_THROW(validate(parse("[sweep]\nt = -1\n")), ConfigError);
}

TEST(ConfigTest, rate_law_column_approaches_one_half_test)
{
  ExperimentConfig cfg;
  cfg.n_list      = {4096};
  cfg.prior_nodes = 16;
  auto const r = run_rate_sweep(cfg);
  ASSERT_FALSE(r.rate_law.empty());
  EXPECT_NEAR(r.rate_law.front().rate, 0.5, 0.1);
}

TEST(ConfigTest, empty_code_list_is_a_usage_error_test)
{
  ExperimentConfig cfg;
  cfg.codes.clear();
  EXPECT_THROW(run_rate_sweep(cfg), ConfigError);
}

TEST_F(CliTest, empty_code_list_exit_code_test)
{
  auto const cfg = write("empty.ini", "[sweep]\ncodes =\n");
  EXPECT_EQ(run("rate-sweep --config " + cfg.string() + " --out " + (dir_ / "out").string()), 2);
}

TEST_F(CliTest, malformed_config_exit_code_test)
{
  auto const cfg = write("bad.ini", "[converse]\npacking_m = lots\n");
  EXPECT_EQ(run("converse --config " + cfg.string() + " --out " + (dir_ / "out").string()), 2);
  EXPECT_EQ(run("selftest --bogus-flag"), 2);
  EXPECT_EQ(run("rate-sweep --config " + (dir_ / "missing.ini").string()), 2);
}

TEST_F(CliTest, rate_sweep_is_byte_identical_test)
{
  auto const cfg = write("small.ini", kSmallSweep);
  ASSERT_EQ(run("rate-sweep --config " + cfg.string() + " --seed 3 --out " + (dir_ / "a").string()), 0);
  ASSERT_EQ(run("rate-sweep --config " + cfg.string() + " --seed 3 --workers 2 --out " +
                (dir_ / "b").string()),
            0);
  for (char const *f : {"rate_sweep.csv", "rate_law.csv", "error_relative_entropy.svg",
                        "error_variational.svg", "rate.svg"})
  {
    std::string const a = slurp(dir_ / "a" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, slurp(dir_ / "b" / f)) << f;
  }
  std::string const csv = slurp(dir_ / "a" / "rate_sweep.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kErrorCsvHeader);
  // 2 n x 2 t x 3 codes x 2 criteria
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 25);
}

TEST_F(CliTest, converse_default_run_passes_test)
{
  EXPECT_EQ(run("converse --out " + (dir_ / "out").string()), 0) << output();
  std::string const json = slurp(dir_ / "out" / "converse.json");
  EXPECT_NE(json.find("\"certified_bound\": 1.0"), std::string::npos);
  EXPECT_EQ(output().find("FAIL"), std::string::npos);
}

TEST_F(CliTest, report_subcommands_write_outputs_test)
{
  auto const out = (dir_ / "out").string();
  EXPECT_EQ(run("clarke-barron --out " + out), 0) << output();
  EXPECT_TRUE(fs::exists(dir_ / "out" / "clarke_barron.json"));
  EXPECT_EQ(run("quantized-gaussian --out " + out), 0) << output();
  EXPECT_TRUE(fs::exists(dir_ / "out" / "quantized_gaussian.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "quantized_gaussian.svg"));
  EXPECT_EQ(run("pythagoras-check --out " + out), 0) << output();
  EXPECT_NE(slurp(dir_ / "out" / "pythagoras.json").find("\"PASS\""), std::string::npos);
}

TEST_F(CliTest, selftest_passes_test)
{
  EXPECT_EQ(run("selftest"), 0) << output();
  EXPECT_NE(output().find("PASS sequence_equivalence"), std::string::npos);
  EXPECT_EQ(output().find("FAIL"), std::string::npos);
}

TEST(SelfTest, clean_build_passes_test)
{
  auto const checks = selftest();
  EXPECT_GE(checks.size(), 6u);
  for (auto const &c : checks)
  {
    EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
  }
}

TEST(SelfTest, corrupted_multinomial_table_fails_test)
{
  SpaceProvider const faulty = [](std::size_t n, std::size_t k) -> TypeSpacePtr {
    TypeSpace const clean(n, k);
    if (n != 3 || k != 2)
    {
      return std::make_shared<TypeSpace const>(clean);
    }
    std::vector<std::uint32_t> counts;
    for (std::size_t i = 0; i < clean.size(); ++i)
    {
      auto const c = clean.counts(i);
      counts.insert(counts.end(), c.begin(), c.end());
    }
    auto sizes = clean.log_sizes();
    sizes[1] += std::log(2.0);  // C(3,1) recorded as 6
    return std::make_shared<TypeSpace const>(TypeSpace::from_parts(n, k, counts, sizes));
  };
  auto const checks = selftest(faulty);
  bool enumeration_failed = false, equivalence_failed = false;
  for (auto const &c : checks)
  {
    enumeration_failed = enumeration_failed || (c.name == "typespace_enumeration" && !c.passed);
    equivalence_failed = equivalence_failed || (c.name == "sequence_equivalence" && !c.passed);
  }
  EXPECT_TRUE(enumeration_failed);
  EXPECT_TRUE(equivalence_failed);
  EXPECT_FALSE(all_passed(checks));
}

TEST(SvgTest, render_is_deterministic_test)
{
  Chart chart;
  chart.title = "error <nats>";
  chart.log_x = true;
  chart.series.push_back({"a", {16, 64, 256}, {0.3, 0.2, NAN}});
  chart.reference_y = 0.5;
  std::string const a = render_svg(chart);
  EXPECT_EQ(a, render_svg(chart));
  EXPECT_NE(a.find("error &lt;nats&gt;"), std::string::npos);
  EXPECT_NE(a.find("<polyline"), std::string::npos);
  EXPECT_EQ(a.find("nan"), std::string::npos);
}
