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

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "asstat/config.hpp"
#include "asstat/experiments.hpp"
#include "asstat/selftest.hpp"

namespace {

constexpr int kExitPass   = 0;
constexpr int kExitFail   = 1;
constexpr int kExitConfig = 2;

struct Options
{
  std::string config;
  std::string out = "out";
  std::size_t workers = 1;
  std::optional<std::uint64_t> seed;
};

asstat::ExperimentConfig load(Options const &o)
{
  asstat::ExperimentConfig cfg = o.config.empty() ? asstat::ExperimentConfig{} : asstat::load_config(o.config);
  if (o.seed)
  {
    cfg.seed = *o.seed;
  }
  return cfg;
}

int report_checks(std::vector<asstat::Check> const &checks)
{
  for (auto const &c : checks)
  {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
  }
  return asstat::all_passed(checks) ? kExitPass : kExitFail;
}

int rate_sweep(Options const &o)
{
  auto const result = asstat::run_rate_sweep(load(o), o.workers);
  asstat::write_rate_sweep(result, o.out);
  for (auto const &row : result.rate_law)
  {
    std::cout << "n=" << row.n << " t=" << asstat::format_double(row.t) << " M=" << row.size
              << " log M / log n = " << asstat::format_double(row.rate) << '\n';
  }
  std::cout << "wrote " << result.reports.size() << " rows to "
            << (std::filesystem::path(o.out) / "rate_sweep.csv").string() << '\n';
  return kExitPass;
}

int converse(Options const &o)
{
  auto const rep = asstat::run_converse_suite(load(o), o.workers);
  asstat::write_text(std::filesystem::path(o.out) / "converse.json", rep.json.dump(2) + "\n");
  return report_checks(rep.checks);
}

int clarke_barron(Options const &o)
{
  auto const j = asstat::run_clarke_barron_report(load(o), o.workers);
  asstat::write_text(std::filesystem::path(o.out) / "clarke_barron.json", j.dump(2) + "\n");
  for (auto const &t : j["terms"])
  {
    std::cout << "n=" << t["n"] << " I=" << t["lhs_mi"] << " rhs=" << t["rhs"]
              << " discrepancy=" << t["discrepancy"] << '\n';
  }
  return kExitPass;
}

int quantized_gaussian(Options const &o)
{
  auto const rows = asstat::run_quantized_gaussian(load(o), o.workers);
  asstat::write_quantized_gaussian(rows, o.out);
  for (auto const &r : rows)
  {
    std::cout << "t=" << asstat::format_double(r.t) << " sup KL=" << asstat::format_double(r.kl.value)
              << " sup L1=" << asstat::format_double(r.l1.value) << '\n';
  }
  return kExitPass;
}

int pythagoras_check(Options const &o)
{
  auto const cfg = load(o);
  asstat::validate(cfg);
  auto const st  = asstat::pythagoras_sweep(cfg.family(), cfg.support, cfg.pythagoras_n,
                                            cfg.pythagoras_instances, cfg.seed);
  asstat::Check const c{"pythagorean_identity", st.all_finite && st.max_abs_residual < 1e-10,
                        "max |residual| " + asstat::format_double(st.max_abs_residual) + " over " +
                            std::to_string(st.instances) + " instances"};
  asstat::Json const j{{"instances", st.instances},
                       {"max_abs_residual", st.max_abs_residual},
                       {"status", c.passed ? "PASS" : "FAIL"}};
  asstat::write_text(std::filesystem::path(o.out) / "pythagoras.json", j.dump(2) + "\n");
  return report_checks({c});
}

int selftest(Options const &)
{
  return report_checks(asstat::selftest());
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Approximate sufficient statistic codes: exact evaluation and converse checks"};
  app.require_subcommand(1);
  Options opts;

  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", opts.config, "INI experiment config")->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out, "output directory")->capture_default_str();
    sub->add_option("--workers", opts.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", opts.seed, "seed override");
  };

  struct Entry
  {
    char const *name;
    char const *help;
    int (*run)(Options const &);
  };
  Entry const entries[] = {
      {"rate-sweep", "error and code length over n, t and codes (CSV + SVG)", rate_sweep},
      {"converse", "Clarke-Barron, Pythagorean, packing and divergence checks (JSON)", converse},
      {"clarke-barron", "exact mutual information against its expansion (JSON)", clarke_barron},
      {"quantized-gaussian", "sup over alpha of quantised Gaussian distances (CSV + SVG)",
       quantized_gaussian},
      {"pythagoras-check", "Pythagorean identity on random mixtures (JSON)", pythagoras_check},
      {"selftest", "built-in consistency checks", selftest},
  };
  std::vector<std::pair<CLI::App *, int (*)(Options const &)>> subs;
  for (auto const &e : entries)
  {
    auto *sub = app.add_subcommand(e.name, e.help);
    add_common(sub);
    subs.emplace_back(sub, e.run);
  }

  try
  {
    app.parse(argc, argv);
  }
  catch (CLI::CallForHelp const &e)
  {
    return app.exit(e);
  }
  catch (CLI::ParseError const &e)
  {
    app.exit(e);
    return kExitConfig;
  }

  try
  {
    for (auto const &[sub, run] : subs)
    {
      if (sub->parsed())
      {
        return run(opts);
      }
    }
  }
  catch (asstat::ConfigError const &e)
  {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  catch (std::exception const &e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
  return kExitConfig;
}
