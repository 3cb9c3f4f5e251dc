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
#include <map>
#include <string>
#include <vector>

#include "asstat/experiments.hpp"

namespace asstat {

/// Divergences computed on X^n itself by enumerating all k^n sequences.
struct SequenceDivergences
{
  double kl = 0.0;
  double l1 = 0.0;
};

/// Q is spread uniformly over each type class (class sizes counted by the
/// enumeration, not taken from the type space); P is the i.i.d. law of z.
inline SequenceDivergences sequence_divergences(Family const &family, ExchDist const &q,
                                                ParamPoint const &z)
{
  TypeSpace const &S  = *q.space();
  std::size_t const n = S.n();
  std::size_t const k = S.k();
  auto const p        = family.pmf(z);

  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i)
  {
    total *= k;
  }
  std::map<std::vector<std::uint32_t>, double> class_size;
  std::vector<std::size_t> seq(n, 0);
  auto counts_of = [&] {
    std::vector<std::uint32_t> c(k, 0);
    for (auto s : seq)
    {
      ++c[s];
    }
    return c;
  };
  auto advance = [&] {
    for (std::size_t i = 0; i < n; ++i)
    {
      if (++seq[i] < k)
      {
        return;
      }
      seq[i] = 0;
    }
  };
  for (std::size_t s = 0; s < total; ++s, advance())
  {
    class_size[counts_of()] += 1.0;
  }

  CompensatedSum kl, l1;
  std::fill(seq.begin(), seq.end(), 0);
  for (std::size_t s = 0; s < total; ++s, advance())
  {
    auto const c   = counts_of();
    double pseq    = 1.0;
    for (auto x : seq)
    {
      pseq *= p[x];
    }
    double const qseq = q.weight(S.index_of(TypeIndex{c})) / class_size[c];
    if (qseq > 0.0)
    {
      kl.add(qseq * std::log(qseq / pseq));
    }
    l1.add(std::abs(qseq - pseq));
  }
  return {kl.value(), l1.value()};
}

/// Built-in consistency checks of the exact engine. Every check is named;
/// `spaces` supplies the type spaces under test.
inline std::vector<Check> selftest(SpaceProvider const &spaces = default_space_provider())
{
  std::vector<Check> checks;
  auto guarded = [&](std::string const &name, auto const &body) {
    try
    {
      auto [ok, detail] = body();
      checks.push_back({name, ok, detail});
    }
    catch (std::exception const &e)
    {
      checks.push_back({name, false, std::string("exception: ") + e.what()});
    }
  };

  guarded("typespace_enumeration", [&]() -> std::pair<bool, std::string> {
    for (std::size_t k = 2; k <= 3; ++k)
    {
      for (std::size_t n = 1; n <= 12; ++n)
      {
        auto const S = spaces(n, k);
        if (static_cast<double>(S->size()) != TypeSpace::count_types(n, k))
        {
          return {false, "wrong number of types at n=" + std::to_string(n)};
        }
        LogSumExp acc;
        for (std::size_t t = 0; t < S->size(); ++t)
        {
          acc.add(S->log_size(t));
        }
        double const expect = static_cast<double>(n) * std::log(static_cast<double>(k));
        if (std::abs(acc.value() - expect) > 1e-10)
        {
          return {false, "class sizes do not add up to k^n at n=" + std::to_string(n) +
                             ", k=" + std::to_string(k)};
        }
      }
    }
    return {true, "sizes and class counts for n <= 12, k <= 3"};
  });

  // code-induced pairs for every n <= 4, k <= 3
  std::vector<std::pair<double, double>> pinsker_pairs;
  guarded("sequence_equivalence", [&]() -> std::pair<bool, std::string> {
    double worst = 0.0;
    std::size_t pairs = 0;
    for (std::size_t k = 2; k <= 3; ++k)
    {
      Family const family(k);
      std::vector<ParamPoint> zs = k == 2 ? std::vector<ParamPoint>{{0.13}, {0.5}, {0.77}}
                                          : std::vector<ParamPoint>{{0.2, 0.3}, {0.6, 0.1}};
      for (std::size_t n = 1; n <= 4; ++n)
      {
        auto const S = spaces(n, k);
        for (CodeSpec spec : {CodeSpec{Mode::blind, EncoderKind::mdl_fisher, DecoderKind::point, 0.25},
                              CodeSpec{Mode::blind, EncoderKind::quantize_euclid,
                                       DecoderKind::cell_mixture, 0.25},
                              CodeSpec{Mode::visible, EncoderKind::quantize_euclid,
                                       DecoderKind::point, 0.25}})
        {
          Code const code(family, spec, n);
          for (auto const &z : zs)
          {
            ExchDist const q(S, code.reconstruct(z).log_weights());
            auto const p    = product_type_dist(family, z, S);
            auto const seqd = sequence_divergences(family, q, z);
            double const kl = kl_exch(q, p);
            double const l1 = l1_exch(q, p);
            worst = std::max({worst, std::abs(kl - seqd.kl), std::abs(l1 - seqd.l1)});
            pinsker_pairs.emplace_back(kl, l1);
            ++pairs;
          }
        }
      }
    }
    return {worst <= 1e-12, "max deviation " + format_double(worst) + " over " +
                                std::to_string(pairs) + " pairs (<= 1e-12)"};
  });

  guarded("pinsker", [&]() -> std::pair<bool, std::string> {
    for (auto const &[kl, l1] : pinsker_pairs)
    {
      if (kl < 0.5 * l1 * l1 - 1e-12)
      {
        return {false, "kl " + format_double(kl) + " < l1^2/2 with l1 " + format_double(l1)};
      }
    }
    return {!pinsker_pairs.empty(), std::to_string(pinsker_pairs.size()) + " pairs"};
  });

  guarded("kl_additivity", [&]() -> std::pair<bool, std::string> {
    double worst = 0.0;
    for (std::size_t k = 2; k <= 3; ++k)
    {
      Family const family(k);
      ParamPoint const a = k == 2 ? ParamPoint{0.3} : ParamPoint{0.2, 0.5};
      ParamPoint const b = k == 2 ? ParamPoint{0.45} : ParamPoint{0.3, 0.3};
      for (std::size_t n : {1, 4, 16, 64})
      {
        auto const S = spaces(n, k);
        double const d = kl_exch(product_type_dist(family, a, S), product_type_dist(family, b, S));
        worst = std::max(worst, std::abs(d - static_cast<double>(n) * family.kl(a, b)));
      }
    }
    return {worst <= 1e-10, "max deviation " + format_double(worst) + " (<= 1e-10)"};
  });

  guarded("pythagorean_identity", [&]() -> std::pair<bool, std::string> {
    std::size_t const ns[] = {4, 8, 16};
    auto const st = pythagoras_sweep(Family(2), {0.1, 0.9}, ns, 100, 0, spaces);
    return {st.all_finite && st.max_abs_residual < 1e-10,
            "max |residual| " + format_double(st.max_abs_residual) + " over " +
                std::to_string(st.instances) + " instances"};
  });

  guarded("converse_decomposition", [&]() -> std::pair<bool, std::string> {
    Family const family(2);
    Code const code(family, {Mode::blind, EncoderKind::mdl_fisher, DecoderKind::point, 1.0}, 64);
    auto const st = decomposition_sweep(code, {0.1, 0.9}, 20, 0);
    return {st.failure.empty() && st.max_abs_residual < 1e-10 && st.max_cond_mi_excess <= 1e-12,
            "max |residual| " + format_double(st.max_abs_residual)};
  });

  return checks;
}

}  // namespace asstat
