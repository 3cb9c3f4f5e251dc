#pragma once
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
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "asstat/asymptotics.hpp"
#include "asstat/codec.hpp"
#include "asstat/config.hpp"
#include "asstat/report.hpp"
#include "asstat/svg.hpp"

namespace asstat {

struct Check
{
  std::string name;
  bool passed = false;
  std::string detail;
};

inline Json to_json(Check const &c)
{
  return Json{{"name", c.name}, {"status", c.passed ? "PASS" : "FAIL"}, {"detail", c.detail}};
}

inline bool all_passed(std::vector<Check> const &checks)
{
  return std::all_of(checks.begin(), checks.end(), [](Check const &c) { return c.passed; });
}

/// Supplies the type space for (n, k); replaced in tests to inject faults.
using SpaceProvider = std::function<TypeSpacePtr(std::size_t, std::size_t)>;

inline SpaceProvider default_space_provider()
{
  return [](std::size_t n, std::size_t k) { return make_type_space(n, k); };
}

inline void write_text(std::filesystem::path const &path, std::string const &text)
{
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << text;
}

/// Uniform draw from the support {z_i >= lo, sum z_i <= hi} by rejection.
inline ParamPoint random_point(std::size_t dim, Support s, std::mt19937_64 &rng)
{
  std::uniform_real_distribution<double> u(s.lo, s.hi);
  while (true)
  {
    ParamPoint z;
    double sum = 0.0;
    for (std::size_t i = 0; i < dim; ++i)
    {
      z.coords.push_back(u(rng));
      sum += z.coords.back();
    }
    if (sum <= s.hi)
    {
      return z;
    }
  }
}

//------------------------------------------------------------------------------
// rate sweep

struct RateLawRow
{
  std::size_t n      = 0;
  double t           = 0.0;
  std::size_t size   = 0;
  double code_length = 0.0;  // nats
  double rate        = 0.0;  // code_length / ln n
};

struct RateSweepResult
{
  std::vector<ErrorReport> reports;
  std::vector<RateLawRow> rate_law;
  std::size_t dim = 1;
};

inline RateSweepResult run_rate_sweep(ExperimentConfig const &cfg, std::size_t workers = 1)
{
  validate(cfg);
  if (cfg.codes.empty())
  {
    throw ConfigError("rate sweep needs at least one code (sweep.codes is empty)");
  }
  if (cfg.criteria.empty())
  {
    throw ConfigError("rate sweep needs at least one criterion");
  }
  Family const family = cfg.family();
  Prior const prior   = cfg.prior();

  struct Task
  {
    CodeEntry code;
    double t;
    std::size_t n;
  };
  std::vector<Task> tasks;
  for (auto const &code : cfg.codes)
  {
    for (double t : cfg.t_list)
    {
      for (std::size_t n : cfg.n_list)
      {
        tasks.push_back({code, t, n});
      }
    }
  }

  std::vector<std::vector<ErrorReport>> results(tasks.size());
  parallel_for(tasks.size(), workers, [&](std::size_t i) {
    auto const &task = tasks[i];
    CodeSpec const spec{task.code.mode, task.code.encoder, task.code.decoder, task.t};
    EvalOptions opts;
    opts.mc_samples = cfg.mc_samples;
    opts.seed       = cfg.seed;
    try
    {
      Code const code(family, spec, task.n, cfg.exact_threshold);
      results[i] = evaluate(code, prior, cfg.criteria, opts);
      for (auto &r : results[i])
      {
        r.nodes.clear();
      }
    }
    catch (SizeError const &)
    {
      // no estimator applies: flagged rows instead of numbers
      double length = std::numeric_limits<double>::quiet_NaN();
      try
      {
        length = Lattice::build(family, task.n, task.t).code_length();
      }
      catch (ConstructionError const &)
      {}
      for (auto c : cfg.criteria)
      {
        ErrorReport r;
        r.criterion        = c;
        r.value            = std::numeric_limits<double>::quiet_NaN();
        r.component_value  = r.value;
        r.code_length_nats = length;
        r.n                = task.n;
        r.k                = family.k();
        r.t                = task.t;
        r.mode             = to_string(spec.mode);
        r.encoder          = to_string(spec.encoder);
        r.decoder          = to_string(spec.decoder);
        r.quadrature_nodes = prior.size();
        r.exact            = false;
        r.feasible         = false;
        r.seed             = cfg.seed;
        results[i].push_back(r);
      }
    }
  });

  RateSweepResult out;
  out.dim = family.dim();
  for (auto &r : results)
  {
    for (auto &e : r)
    {
      out.reports.push_back(std::move(e));
    }
  }
  for (double t : cfg.t_list)
  {
    for (std::size_t n : cfg.n_list)
    {
      RateLawRow row;
      row.n = n;
      row.t = t;
      try
      {
        auto const L    = Lattice::build(family, n, t);
        row.size        = L.size();
        row.code_length = L.code_length();
        row.rate = n > 1 ? row.code_length / std::log(static_cast<double>(n))
                         : std::numeric_limits<double>::quiet_NaN();
      }
      catch (ConstructionError const &)
      {
        row.code_length = std::numeric_limits<double>::quiet_NaN();
        row.rate        = row.code_length;
      }
      out.rate_law.push_back(row);
    }
  }
  return out;
}

inline std::string rate_law_csv(RateSweepResult const &r)
{
  std::string s = "n,t,lattice_size,code_length_nats,code_length_bits,rate,d_half\n";
  for (auto const &row : r.rate_law)
  {
    s += std::to_string(row.n) + ',' + format_double(row.t) + ',' + std::to_string(row.size) + ',' +
         format_double(row.code_length) + ',' + format_double(row.code_length / std::numbers::ln2) +
         ',' + format_double(row.rate) + ',' + format_double(0.5 * static_cast<double>(r.dim)) +
         '\n';
  }
  return s;
}

inline void write_rate_sweep(RateSweepResult const &r, std::filesystem::path const &dir)
{
  std::ostringstream csv;
  write_csv(csv, r.reports);
  write_text(dir / "rate_sweep.csv", csv.str());
  write_text(dir / "rate_law.csv", rate_law_csv(r));

  for (auto crit : {Criterion::relative_entropy, Criterion::variational})
  {
    Chart chart;
    chart.title   = "Average error vs n (" + to_string(crit) + ")";
    chart.x_label = "n";
    chart.y_label = crit == Criterion::relative_entropy ? "error (nats)" : "error (L1)";
    chart.log_x   = true;
    for (auto const &rep : r.reports)
    {
      if (rep.criterion != crit)
      {
        continue;
      }
      std::string const label =
          rep.mode + "/" + rep.encoder + "/" + rep.decoder + " t=" + format_double(rep.t);
      auto it = std::find_if(chart.series.begin(), chart.series.end(),
                             [&](Series const &s) { return s.label == label; });
      if (it == chart.series.end())
      {
        chart.series.push_back({label, {}, {}});
        it = std::prev(chart.series.end());
      }
      it->x.push_back(static_cast<double>(rep.n));
      it->y.push_back(rep.value);
    }
    if (!chart.series.empty())
    {
      write_text(dir / ("error_" + to_string(crit) + ".svg"), render_svg(chart));
    }
  }

  Chart rate;
  rate.title           = "Code length / ln n vs n";
  rate.x_label         = "n";
  rate.y_label         = "log M / log n";
  rate.log_x           = true;
  rate.reference_y     = 0.5 * static_cast<double>(r.dim);
  rate.reference_label = "d/2";
  for (auto const &row : r.rate_law)
  {
    std::string const label = "t=" + format_double(row.t);
    auto it = std::find_if(rate.series.begin(), rate.series.end(),
                           [&](Series const &s) { return s.label == label; });
    if (it == rate.series.end())
    {
      rate.series.push_back({label, {}, {}});
      it = std::prev(rate.series.end());
    }
    it->x.push_back(static_cast<double>(row.n));
    it->y.push_back(row.rate);
  }
  write_text(dir / "rate.svg", render_svg(rate));
}

//------------------------------------------------------------------------------
// converse machinery

struct PythagorasStats
{
  std::size_t instances = 0;
  double max_abs_residual = 0.0;
  bool all_finite         = true;
};

/// Random mixtures of 1 to 5 product distributions against a random product
/// reference, `per_n` instances for each n.
inline PythagorasStats pythagoras_sweep(Family const &family, Support support,
                                        std::span<std::size_t const> ns, std::size_t per_n,
                                        std::uint64_t seed,
                                        SpaceProvider const &spaces = default_space_provider())
{
  PythagorasStats st;
  for (std::size_t n : ns)
  {
    auto const space = spaces(n, family.k());
    std::mt19937_64 rng(seed + n);
    std::uniform_int_distribution<int> count(1, 5);
    std::exponential_distribution<double> gamma1(1.0);
    for (std::size_t i = 0; i < per_n; ++i)
    {
      int const m = count(rng);
      std::vector<ExchDist> comps;
      std::vector<double> w;
      double total = 0.0;
      for (int j = 0; j < m; ++j)
      {
        comps.push_back(product_type_dist(family, random_point(family.dim(), support, rng), space));
        w.push_back(gamma1(rng));
        total += w.back();
      }
      for (auto &x : w)
      {
        x /= total;
      }
      auto const q = product_type_dist(family, random_point(family.dim(), support, rng), space);
      double const r = pythagorean_residual(w, comps, q);
      st.all_finite  = st.all_finite && std::isfinite(r);
      st.max_abs_residual = std::max(st.max_abs_residual, std::abs(r));
      ++st.instances;
    }
  }
  return st;
}

struct DecompositionStats
{
  std::string code;
  std::size_t instances   = 0;
  double max_abs_residual = 0.0;
  double max_cond_mi_excess = -std::numeric_limits<double>::infinity();  // max(cond_mi - ln M)
  std::string failure;
};

inline DecompositionStats decomposition_sweep(Code const &code, Support support,
                                              std::size_t instances, std::uint64_t seed)
{
  DecompositionStats st;
  st.code = to_string(code.spec().mode) + "/" + to_string(code.spec().encoder) + "/" +
            to_string(code.spec().decoder);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < instances; ++i)
  {
    auto const z = random_point(code.family().dim(), support, rng);
    try
    {
      auto const t          = converse_decomposition(code, z);
      st.max_abs_residual   = std::max(st.max_abs_residual, std::abs(t.residual));
      st.max_cond_mi_excess = std::max(st.max_cond_mi_excess, t.cond_mi - t.log_m);
    }
    catch (AccuracyError const &e)
    {
      st.failure = e.what();
      st.max_abs_residual = std::numeric_limits<double>::infinity();
    }
    ++st.instances;
  }
  return st;
}

inline std::size_t undersized_memory(std::size_t n, double exponent)
{
  return static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), exponent) - 1e-12));
}

struct ConverseReport
{
  Json json;
  std::vector<Check> checks;
};

inline ConverseReport run_converse_suite(ExperimentConfig const &cfg, std::size_t workers = 1)
{
  validate(cfg);
  Family const family = cfg.family();
  Prior const prior   = cfg.prior();
  ConverseReport rep;
  Json &j = rep.json;
  auto check = [&](std::string name, bool ok, std::string detail) {
    rep.checks.push_back({std::move(name), ok, std::move(detail)});
  };

  // Clarke-Barron sweep
  {
    Family const cbf(cfg.k, cfg.cb_eps_bd);
    Prior const cbp(cbf, cfg.cb_support, PriorKind::uniform, cfg.prior_nodes);
    Json rows = Json::array();
    std::vector<double> disc;
    for (std::size_t n : cfg.cb_n)
    {
      auto const terms = clarke_barron(cbf, cbp, n, workers);
      rows.push_back(to_json(terms));
      disc.push_back(std::abs(terms.discrepancy));
    }
    j["clarke_barron"] = rows;
    bool decreasing    = true;
    for (std::size_t i = 1; i < disc.size(); ++i)
    {
      decreasing = decreasing && disc[i] < disc[i - 1];
    }
    check("clarke_barron_decreasing", decreasing, "|discrepancy| strictly decreasing over n");
    if (!disc.empty())
    {
      check("clarke_barron_small", disc.back() < 0.05,
            "|discrepancy| at n=" + std::to_string(cfg.cb_n.back()) + " is " +
                format_double(disc.back()) + " (< 0.05)");
    }
    if (cfg.k == 2 && cfg.cb_support.lo == 0.0 && cfg.cb_support.hi == 1.0)
    {
      double const mi1 = mutual_information(cbf, cbp, 1);
      double const ref = std::numbers::ln2 - 0.5;
      j["clarke_barron_n1"] = Json{{"mi", mi1}, {"closed_form", ref}};
      check("clarke_barron_n1", std::abs(mi1 - ref) < 1e-6,
            "I(X;Z) at n=1 is " + format_double(mi1) + ", closed form ln2 - 1/2");
    }
  }

  // Pythagorean identity
  {
    auto const st = pythagoras_sweep(family, cfg.support, cfg.pythagoras_n,
                                     cfg.pythagoras_instances, cfg.seed);
    j["pythagoras"] = Json{{"instances", st.instances}, {"max_abs_residual", st.max_abs_residual}};
    check("pythagorean_identity", st.all_finite && st.max_abs_residual < 1e-10,
          "max |residual| " + format_double(st.max_abs_residual) + " over " +
              std::to_string(st.instances) + " instances (< 1e-10)");
  }

  // converse decomposition
  {
    Json rows = Json::array();
    for (auto dec : {DecoderKind::point, DecoderKind::cell_mixture})
    {
      EncoderKind const enc =
          dec == DecoderKind::point ? EncoderKind::mdl_fisher : EncoderKind::quantize_euclid;
      Code const code(family, {Mode::blind, enc, dec, cfg.decomposition_t}, cfg.decomposition_n,
                      cfg.exact_threshold);
      auto const st = decomposition_sweep(code, cfg.support, cfg.pythagoras_instances, cfg.seed);
      rows.push_back(Json{{"code", st.code},
                          {"n", cfg.decomposition_n},
                          {"instances", st.instances},
                          {"max_abs_residual", json_number(st.max_abs_residual)},
                          {"max_cond_mi_minus_log_m", json_number(st.max_cond_mi_excess)}});
      check("decomposition_identity_" + to_string(dec),
            st.failure.empty() && st.max_abs_residual < 1e-10,
            st.failure.empty() ? "max |residual| " + format_double(st.max_abs_residual)
                               : st.failure);
      check("cond_mi_bounded_" + to_string(dec), st.max_cond_mi_excess <= 1e-12,
            "max(cond_mi - ln M) = " + format_double(st.max_cond_mi_excess));
    }
    j["decomposition"] = rows;
  }

  // packing witness and its confirmation on the best code of that size
  if (family.dim() == 1)
  {
    auto const w = packing_witness(family, cfg.support, cfg.packing_m, cfg.packing_n,
                                   cfg.packing_alpha);
    Json pj      = to_json(w);
    check("packing_certified", w.certified && w.bound >= 2.0 - cfg.packing_alpha,
          "M=" + std::to_string(cfg.packing_m) + " n=" + std::to_string(cfg.packing_n) +
              " alpha=" + format_double(cfg.packing_alpha) + ": " + w.status +
              ", min P(D_i) " + format_double(w.min_probability));
    auto const book      = optimize_codebook(family, prior, cfg.packing_m);
    Criterion const v[]  = {Criterion::variational};
    EvalOptions opts;
    opts.workers         = workers;
    opts.seed            = cfg.seed;
    auto const err       = evaluate(book, cfg.packing_n, prior, v, opts, cfg.exact_threshold).front();
    pj["best_code_variational_error"] = json_number(err.value);
    check("packing_confirmed", err.value >= w.bound - 1e-9,
          "best size-" + std::to_string(cfg.packing_m) + " code has error " +
              format_double(err.value) + " >= bound " + format_double(w.bound));
    j["packing"] = pj;

    Json sweep = Json::array();
    std::vector<double> bounds;
    for (std::size_t n : cfg.packing_sweep_n)
    {
      std::size_t const M = undersized_memory(n, cfg.divergence_exponent);
      auto const sw       = strongest_packing_witness(family, cfg.support, M, n);
      sweep.push_back(to_json(sw));
      bounds.push_back(sw.bound);
    }
    j["packing_sweep"] = sweep;
    bool nondecreasing = true;
    for (std::size_t i = 1; i < bounds.size(); ++i)
    {
      nondecreasing = nondecreasing && bounds[i] >= bounds[i - 1];
    }
    check("packing_sweep_nondecreasing", nondecreasing,
          "strongest certified bound with M = ceil(n^" + format_double(cfg.divergence_exponent) +
              ") is nondecreasing in n");
  }

  // undersized memory: divergence of the best visible point code
  {
    Json rows = Json::array();
    std::vector<double> errs;
    for (std::size_t n : cfg.divergence_n)
    {
      std::size_t const M  = undersized_memory(n, cfg.divergence_exponent);
      auto const book      = optimize_codebook(family, prior, M);
      Criterion const c[]  = {Criterion::relative_entropy, Criterion::variational};
      EvalOptions opts;
      opts.workers         = workers;
      opts.seed            = cfg.seed;
      opts.mc_samples      = cfg.mc_samples;
      auto const r         = evaluate(book, n, prior, c, opts, cfg.exact_threshold);
      rows.push_back(Json{{"n", n},
                          {"m", M},
                          {"relative_entropy", json_number(r[0].value)},
                          {"variational", json_number(r[1].value)},
                          {"exact_or_mc", r[0].exact ? "exact" : "mc"}});
      errs.push_back(r[0].value);
    }
    j["divergence_sweep"] = rows;
    bool increasing       = true;
    for (std::size_t i = 1; i < errs.size(); ++i)
    {
      increasing = increasing && errs[i] > errs[i - 1];
    }
    check("divergence_increasing", increasing,
          "relative-entropy error of the best size-ceil(n^" +
              format_double(cfg.divergence_exponent) + ") code strictly increasing in n");
    if (errs.size() >= 2)
    {
      double const ratio = errs.back() / errs.front();
      check("divergence_ratio", ratio >= 3.0,
            "error ratio last/first n is " + format_double(ratio) + " (>= 3)");
    }
  }

  Json checks = Json::array();
  for (auto const &c : rep.checks)
  {
    checks.push_back(to_json(c));
  }
  j["checks"] = checks;
  j["status"] = all_passed(rep.checks) ? "PASS" : "FAIL";
  return rep;
}

//------------------------------------------------------------------------------
// stand-alone reports

inline Json run_clarke_barron_report(ExperimentConfig const &cfg, std::size_t workers = 1)
{
  validate(cfg);
  Family const cbf(cfg.k, cfg.cb_eps_bd);
  Prior const cbp(cbf, cfg.cb_support, PriorKind::uniform, cfg.prior_nodes);
  Json rows = Json::array();
  for (std::size_t n : cfg.cb_n)
  {
    rows.push_back(to_json(clarke_barron(cbf, cbp, n, workers)));
  }
  return Json{{"family_k", cfg.k},
              {"eps_bd", cfg.cb_eps_bd},
              {"support", Json::array({cfg.cb_support.lo, cfg.cb_support.hi})},
              {"prior", "uniform"},
              {"terms", rows}};
}

struct QuantGaussianRow
{
  double t = 0.0;
  SupResult kl;
  SupResult l1;
};

inline std::vector<QuantGaussianRow> run_quantized_gaussian(ExperimentConfig const &cfg,
                                                            std::size_t workers = 1)
{
  validate(cfg);
  std::vector<QuantGaussianRow> rows(cfg.qg_t.size());
  parallel_for(rows.size(), workers, [&](std::size_t i) {
    rows[i].t  = cfg.qg_t[i];
    rows[i].kl = sup_over_alpha(cfg.qg_t[i], Criterion::relative_entropy);
    rows[i].l1 = sup_over_alpha(cfg.qg_t[i], Criterion::variational);
  });
  return rows;
}

inline void write_quantized_gaussian(std::vector<QuantGaussianRow> const &rows,
                                     std::filesystem::path const &dir)
{
  std::string csv = "t,sup_kl_nats,argmax_alpha_kl,sup_l1,argmax_alpha_l1\n";
  Chart chart;
  chart.title   = "sup over alpha of the quantised Gaussian distance";
  chart.x_label = "t";
  chart.y_label = "distance";
  chart.log_x   = true;
  chart.series  = {{"KL (nats)", {}, {}}, {"L1", {}, {}}};
  for (auto const &r : rows)
  {
    csv += format_double(r.t) + ',' + format_double(r.kl.value) + ',' + format_double(r.kl.alpha) +
           ',' + format_double(r.l1.value) + ',' + format_double(r.l1.alpha) + '\n';
    chart.series[0].x.push_back(r.t);
    chart.series[0].y.push_back(r.kl.value);
    chart.series[1].x.push_back(r.t);
    chart.series[1].y.push_back(r.l1.value);
  }
  write_text(dir / "quantized_gaussian.csv", csv);
  write_text(dir / "quantized_gaussian.svg", render_svg(chart));
}

}  // namespace asstat
