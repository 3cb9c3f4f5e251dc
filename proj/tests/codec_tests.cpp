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

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "asstat/codec.hpp"
#include "asstat/errors.hpp"
#include "oracles.hpp"

using namespace asstat;

namespace {

Criterion const kBoth[] = {Criterion::relative_entropy, Criterion::variational};

std::size_t at(Code const &code, double x)
{
  for (std::size_t i = 0; i < code.size(); ++i)
  {
    if (std::abs(code.lattice().point(i)[0] - x) < 1e-12)
    {
      return i;
    }
  }
  return code.size();
}

// Bernoulli grid {j h} inside [0.02, 0.98] and its nearest point to the
// clamped empirical frequency, ties to the smaller point. In one dimension
// the Fisher-weighted and Euclidean rules pick the same point.
struct GridOracle
{
  std::vector<double> pts;

  GridOracle(std::size_t n, double t)
  {
    double const h = t / std::sqrt(static_cast<double>(n));
    for (int j = 1; j * h <= 0.98 + 1e-9; ++j)
    {
      if (j * h >= 0.02 - 1e-9)
      {
        pts.push_back(j * h);
      }
    }
  }

  std::size_t nearest(double z) const
  {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
    {
      if (std::abs(pts[i] - z) < std::abs(pts[best] - z) - 1e-12)
      {
        best = i;
      }
    }
    return best;
  }

  std::size_t cell_of_count(std::size_t c, std::size_t n) const
  {
    double const f = std::clamp(static_cast<double>(c) / static_cast<double>(n), 0.02, 0.98);
    return nearest(f);
  }
};

// Type marginal of the blind point code at z, by direct summation.
std::vector<double> blind_point_oracle(std::size_t n, double t, double z)
{
  GridOracle const g(n, t);
  std::vector<double> out(n + 1, 0.0);
  for (std::size_t c = 0; c <= n; ++c)
  {
    double const y = g.pts[g.cell_of_count(c, n)];
    for (std::size_t c2 = 0; c2 <= n; ++c2)
    {
      out[c2] += oracle::binomial_pmf(n, c, z) * oracle::binomial_pmf(n, c2, y);
    }
  }
  return out;
}

// Type marginal of the blind cell-mixture code at z.
std::vector<double> blind_cell_oracle(std::size_t n, double t, double z)
{
  GridOracle const g(n, t);
  std::vector<std::size_t> cell(n + 1), count(g.pts.size(), 0);
  for (std::size_t c = 0; c <= n; ++c)
  {
    cell[c] = g.cell_of_count(c, n);
    ++count[cell[c]];
  }
  std::vector<double> out(n + 1, 0.0);
  for (std::size_t c = 0; c <= n; ++c)
  {
    for (std::size_t c2 = 0; c2 <= n; ++c2)
    {
      if (cell[c2] == cell[c])
      {
        out[c2] += oracle::binomial_pmf(n, c, z) / static_cast<double>(count[cell[c]]);
      }
    }
  }
  return out;
}

// Types of a Bernoulli space are ordered by the count of symbol 1.
double kl_oracle(std::vector<double> const &q, std::size_t n, double z)
{
  double s = 0.0;
  for (std::size_t c = 0; c <= n; ++c)
  {
    if (q[c] > 0)
    {
      s += q[c] * std::log(q[c] / oracle::binomial_pmf(n, c, z));
    }
  }
  return s;
}

}  // namespace

TEST(CodecTest, option_parsing_test)
{
  EXPECT_EQ(parse_mode("visible"), Mode::visible);
  EXPECT_EQ(parse_encoder("mdl_fisher"), EncoderKind::mdl_fisher);
  EXPECT_EQ(parse_decoder("cell_mixture"), DecoderKind::cell_mixture);
  EXPECT_EQ(parse_criterion("variational"), Criterion::variational);
  EXPECT_THROW(parse_mode("sighted"), ConfigError);
  EXPECT_EQ(format_double(0.25), "0.25");
}

TEST(CodecTest, encode_blind_examples_test)
{
  Code const code(Family(2), {Mode::blind, EncoderKind::mdl_fisher, DecoderKind::point, 0.5}, 4);
  ASSERT_EQ(code.size(), 3u);
  EXPECT_EQ(code.encode_blind(TypeIndex{{1, 3}}), at(code, 0.75));
  EXPECT_EQ(code.encode_blind(TypeIndex{{2, 2}}), at(code, 0.5));
  EXPECT_EQ(code.encode_blind(TypeIndex{{0, 4}}), at(code, 0.75));
}

TEST(CodecTest, encode_visible_examples_test)
{
  Code const code(Family(2), {Mode::visible, EncoderKind::quantize_euclid, DecoderKind::point, 1.0},
                  100);
  EXPECT_EQ(code.encode_visible({0.47}), at(code, 0.5));
  EXPECT_EQ(code.encode_visible({0.3}), at(code, 0.3));
}

TEST(CodecTest, decode_point_examples_test)
{
  Code const two(Family(2), {Mode::blind, EncoderKind::mdl_fisher, DecoderKind::point, std::sqrt(0.5)},
                 2);
  ASSERT_EQ(two.size(), 1u);
  auto const w = two.decode_point(0).weights();
  EXPECT_NEAR(w[0], 0.25, 1e-15);
  EXPECT_NEAR(w[1], 0.5, 1e-15);
  EXPECT_NEAR(w[2], 0.25, 1e-15);

  Code const one(Family(2), {Mode::visible, EncoderKind::quantize_euclid, DecoderKind::point, 0.1}, 1);
  auto const v = one.decode_point(at(one, 0.9)).weights();
  EXPECT_NEAR(v[0], 0.1, 1e-15);
  EXPECT_NEAR(v[1], 0.9, 1e-15);
}

TEST(CodecTest, decode_cell_mixture_examples_test)
{
  Code const two(Family(2),
                 {Mode::blind, EncoderKind::quantize_euclid, DecoderKind::cell_mixture, std::sqrt(0.5)}, 2);
  for (double w : two.decode_cell_mixture(0).weights())
  {
    EXPECT_NEAR(w, 1.0 / 3, 1e-15);
  }

  Code const four(Family(2), {Mode::blind, EncoderKind::quantize_euclid, DecoderKind::cell_mixture, 0.5},
                  4);
  auto const d = four.decode_cell_mixture(at(four, 0.5));
  auto const &S = *four.space();
  EXPECT_EQ(d.weight(S.index_of(TypeIndex{{2, 2}})), 1.0);
  EXPECT_EQ(four.cell(at(four, 0.5)).size(), 1u);
}

TEST(CodecTest, cell_mixture_prunes_unreachable_points_test)
{
  // at n = 4 with spacing 0.05 most grid points have no type in their cell
  Code const code(Family(2), {Mode::blind, EncoderKind::quantize_euclid, DecoderKind::cell_mixture, 0.1},
                  4);
  EXPECT_EQ(code.size(), 5u);
  for (std::size_t y = 0; y < code.size(); ++y)
  {
    EXPECT_FALSE(code.cell(y).empty());
  }
}

TEST(CodecTest, visible_on_grid_reconstructs_exactly_test)
{
  Family const ber(2);
  Code const code(ber, {Mode::visible, EncoderKind::quantize_euclid, DecoderKind::point, 1.0}, 100);
  ParamPoint const z = code.lattice().point(2);
  auto const recon   = code.reconstruct(z);
  auto const p       = product_type_dist(ber, z, code.space());
  EXPECT_EQ(kl_exch(recon, p), 0.0);
  EXPECT_EQ(l1_exch(recon, p), 0.0);
}

TEST(CodecTest, blind_single_point_ignores_z_test)
{
  Code const code(Family(2), {Mode::blind, EncoderKind::mdl_fisher, DecoderKind::point, std::sqrt(0.5)},
                  2);
  auto const a = code.reconstruct({0.1}).weights();
  auto const b = code.reconstruct({0.8}).weights();
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    EXPECT_NEAR(a[i], b[i], 1e-15);
  }
}

TEST(CodecTest, blind_cell_mixture_matches_sequence_sum_test)
{
  // n = 2, grid {0.25, 0.5, 0.75}: sum over the four sequences directly
  Family const ber(2);
  Code const code(ber, {Mode::blind, EncoderKind::quantize_euclid, DecoderKind::cell_mixture,
                        0.25 * std::sqrt(2.0)},
                  2);
  auto const w = code.reconstruct({0.5}).weights();
  std::vector<double> expect(3, 0.0);
  oracle::for_each_sequence(2, 2, [&](auto const &s) {
    expect[oracle::counts_of(s, 2)[1]] += oracle::iid_prob(s, {0.5});
  });
  for (std::size_t i = 0; i < 3; ++i)
  {
    EXPECT_NEAR(w[i], expect[i], 1e-15);
  }
}

TEST(CodecTest, blind_reconstruction_matches_direct_sum_test)
{
  Family const ber(2);
  std::size_t const n = 16;
  for (double t : {0.5, 1.0})
  {
    Code const point(ber, {Mode::blind, EncoderKind::mdl_fisher, DecoderKind::point, t}, n);
    Code const cell(ber, {Mode::blind, EncoderKind::quantize_euclid, DecoderKind::cell_mixture, t}, n);
    for (double z : {0.13, 0.5, 0.71})
    {
      auto const a = point.reconstruct({z}).weights();
      auto const b = cell.reconstruct({z}).weights();
      auto const ea = blind_point_oracle(n, t, z);
      auto const eb = blind_cell_oracle(n, t, z);
      for (std::size_t c = 0; c <= n; ++c)
      {
        EXPECT_NEAR(a[c], ea[c], 1e-14);
        EXPECT_NEAR(b[c], eb[c], 1e-14);
      }
      auto const pz = product_type_dist(ber, {z}, point.space());
      EXPECT_NEAR(kl_exch(point.reconstruct({z}), pz), kl_oracle(ea, n, z), 1e-12);
    }
  }
}

TEST(CodecTest, visible_error_within_quadratic_bound_test)
{
  Family const ber(2);
  auto const prior = Prior::uniform(ber, {0.1, 0.9});
  Code const code(ber, {Mode::visible, EncoderKind::quantize_euclid, DecoderKind::point, 0.25}, 1024);
  auto const r = error(code, prior, Criterion::relative_entropy);
  EXPECT_TRUE(r.exact);
  EXPECT_LE(r.value, 0.5 * (1.0 / 0.09) * 0.0625 * 1.5);
  // lattice j / 128; each z in [0.1, 0.9] is sent to the nearest point
  double expect = 0.0;
  for (int j = 12; j <= 116; ++j)
  {
    double const y  = j / 128.0;
    double const lo = std::max(0.1, y - 0.5 / 128.0);
    double const hi = std::min(0.9, y + 0.5 / 128.0);
    if (lo < hi)
    {
      expect += 1024.0 * oracle::bernoulli_kl_integral(y, lo, hi) / 0.8;
    }
  }
  EXPECT_NEAR(r.value, expect, 1e-10);
}

TEST(CodecTest, blind_mdl_error_regression_test)
{
  Family const ber(2);
  auto const prior = Prior::uniform(ber, {0.1, 0.9});
  Code const code(ber, {Mode::blind, EncoderKind::mdl_fisher, DecoderKind::point, 0.25}, 1024);
  auto const r = evaluate(code, prior, kBoth);
  EXPECT_NEAR(r[0].value, 0.161222, 1e-5);
  // the per-codeword average bounds the mixture error from above
  EXPECT_GE(r[0].component_value, r[0].value);
  EXPECT_GE(r[1].component_value, r[1].value);
}

TEST(CodecTest, blind_error_respects_finite_n_bound_test)
{
  Family const ber(2);
  auto const prior   = Prior::uniform(ber, {0.1, 0.9});
  double const j_max = 1.0 / 0.09;
  double const t     = 0.25;
  for (std::size_t n : {64, 256, 1024})
  {
    Code const code(ber, {Mode::blind, EncoderKind::mdl_fisher, DecoderKind::point, t}, n);
    double const e = error(code, prior, Criterion::relative_entropy).value;
    for (double r : {0.5, 1.0, 2.0})
    {
      EXPECT_LE(e, 0.5 * (1 + r) + 0.5 * (1 + 1 / r) * j_max * t * t);
    }
  }
}

TEST(CodecTest, visible_dominates_blind_test)
{
  Family const ber(2);
  auto const prior = Prior::uniform(ber, {0.1, 0.9});
  for (std::size_t n : {64, 256, 1024})
  {
    for (auto enc : {EncoderKind::quantize_euclid, EncoderKind::mdl_fisher})
    {
      Code const v(ber, {Mode::visible, enc, DecoderKind::point, 0.5}, n);
      Code const b(ber, {Mode::blind, enc, DecoderKind::point, 0.5}, n);
      auto const ev = evaluate(v, prior, kBoth);
      auto const eb = evaluate(b, prior, kBoth);
      EXPECT_LE(ev[0].value, eb[0].value);
      EXPECT_LE(ev[1].value, eb[1].value);
    }
  }
}

TEST(CodecTest, blind_code_embeds_as_visible_kernel_test)
{
  // A visible encoder may use the kernel z -> law of the blind encoder under
  // P_z^n; its reconstruction is the blind one, so its error equals the
  // blind error for any decoder.
  Family const ber(2);
  Code const b(ber, {Mode::blind, EncoderKind::quantize_euclid, DecoderKind::cell_mixture, 0.5}, 64);
  ParamPoint const z{0.42};
  auto const pz = product_type_dist(ber, z, b.space());
  auto const lw = b.encoder_log_weights(pz);
  std::vector<double> w(b.size());
  std::vector<ExchDist> parts;
  for (std::size_t y = 0; y < b.size(); ++y)
  {
    w[y] = std::exp(lw[y]);
    parts.push_back(b.decode(y));
  }
  auto const kernel = mixture(w, parts);
  auto const blind  = b.reconstruct(z);
  EXPECT_NEAR(kl_exch(kernel, pz), kl_exch(blind, pz), 1e-13);
  EXPECT_NEAR(l1_exch(kernel, pz), l1_exch(blind, pz), 1e-13);
}

TEST(CodecTest, finer_grid_does_not_hurt_visible_code_test)
{
  Family const ber(2);
  auto const prior = Prior::uniform(ber, {0.1, 0.9});
  for (std::size_t n : {64, 256, 1024})
  {
    double prev = INFINITY;
    for (double t : {1.0, 0.5, 0.25})
    {
      Code const code(ber, {Mode::visible, EncoderKind::quantize_euclid, DecoderKind::point, t}, n);
      double const e = error(code, prior, Criterion::relative_entropy).value;
      EXPECT_LE(e, prev);
      prev = e;
    }
  }
}

TEST(CodecTest, pinsker_on_evaluated_codes_test)
{
  Family const ber(2);
  auto const prior = Prior::uniform(ber, {0.1, 0.9});
  for (auto spec : {CodeSpec{Mode::blind, EncoderKind::mdl_fisher, DecoderKind::point, 1.0},
                    CodeSpec{Mode::blind, EncoderKind::quantize_euclid, DecoderKind::cell_mixture, 1.0},
                    CodeSpec{Mode::visible, EncoderKind::quantize_euclid, DecoderKind::point, 1.0}})
  {
    auto const r = evaluate(Code(ber, spec, 256), prior, kBoth);
    EXPECT_LE(r[1].value, std::sqrt(2 * r[0].value) + 1e-12);
    for (std::size_t i = 0; i < r[0].nodes.size(); ++i)
    {
      EXPECT_LE(r[1].nodes[i].value, std::sqrt(2 * r[0].nodes[i].value) + 1e-12);
    }
  }
}

TEST(CodecTest, quadrature_converges_when_doubled_test)
{
  Family const ber(2);
  auto const coarse = Prior::uniform(ber, {0.1, 0.9}, 64);
  auto const fine   = Prior::uniform(ber, {0.1, 0.9}, 128);
  auto const finer  = Prior::uniform(ber, {0.1, 0.9}, 256);
  for (auto spec : {CodeSpec{Mode::blind, EncoderKind::mdl_fisher, DecoderKind::point, 0.25},
                    CodeSpec{Mode::blind, EncoderKind::quantize_euclid, DecoderKind::cell_mixture, 1.0},
                    CodeSpec{Mode::visible, EncoderKind::quantize_euclid, DecoderKind::point, 0.25}})
  {
    for (std::size_t n : {256, 1024})
    {
      Code const code(ber, spec, n);
      auto const a = evaluate(code, coarse, kBoth);
      auto const b = evaluate(code, fine, kBoth);
      auto const c = evaluate(code, finer, kBoth);
      std::string const tag = to_string(spec.mode) + "/" + to_string(spec.decoder) + " n=" + std::to_string(n);
      EXPECT_LT(std::abs(a[0].value - b[0].value), 1e-6 * b[0].value) << tag;
      // the variational integrand is only Lipschitz in z, so its rule converges algebraically
      double const d1 = std::abs(a[1].value - b[1].value);
      double const d2 = std::abs(b[1].value - c[1].value);
      EXPECT_LT(d1, 5e-3 * b[1].value) << tag;
      EXPECT_LT(d2, 5e-3 * c[1].value) << tag;
    }
  }
}

TEST(CodecTest, visible_rule_splits_at_cell_boundaries_test)
{
  Family const ber(2);
  auto const prior = Prior::uniform(ber, {0.1, 0.9});
  Code const code(ber, {Mode::visible, EncoderKind::quantize_euclid, DecoderKind::point, 1.0}, 100);
  auto const r = error(code, prior, Criterion::relative_entropy);
  // {0.1, ..., 0.9} and the midpoints cut [0.1, 0.9] into 16 pieces of 16 nodes
  EXPECT_EQ(r.quadrature_nodes, 16u * 16u);
  double mass = 0.0;
  for (auto const &node : r.nodes)
  {
    mass += node.weight;
  }
  EXPECT_NEAR(mass, 1.0, 1e-14);
  // D(P_y^n || P_z^n) = n kl(y, z), integrated in closed form over each cell
  double expect = 0.0;
  for (int j = 1; j <= 9; ++j)
  {
    double const y = 0.1 * j;
    expect += 100.0 * oracle::bernoulli_kl_integral(y, std::max(0.1, y - 0.05), std::min(0.9, y + 0.05)) / 0.8;
  }
  EXPECT_NEAR(r.value, expect, 1e-12);
}

TEST(CodecTest, monte_carlo_agrees_with_exact_test)
{
  Family const ber(2);
  auto const prior = Prior::uniform(ber, {0.1, 0.9}, 16);
  CodeSpec const spec{Mode::visible, EncoderKind::quantize_euclid, DecoderKind::point, 0.5};
  Code const exact(ber, spec, 400);
  Code const mc(ber, spec, 400, 100);
  EXPECT_TRUE(exact.exact());
  EXPECT_FALSE(mc.exact());
  EXPECT_THROW((void)mc.space(), SizeError);
  EvalOptions opts;
  opts.seed = 4;
  auto const a = evaluate(exact, prior, kBoth, opts);
  auto const b = evaluate(mc, prior, kBoth, opts);
  EXPECT_GT(b[0].std_error, 0.0);
  EXPECT_NEAR(b[0].value, a[0].value, 5 * b[0].std_error);
  EXPECT_NEAR(b[1].value, a[1].value, 5 * b[1].std_error);
  EXPECT_EQ(evaluate(mc, prior, kBoth, opts)[0].value, b[0].value);
}

TEST(CodecTest, cell_mixture_beyond_threshold_throws_test)
{
  EXPECT_THROW(Code(Family(2), {Mode::blind, EncoderKind::quantize_euclid, DecoderKind::cell_mixture, 1.0},
                    400, 100),
               SizeError);
}

TEST(CodecTest, error_csv_row_test)
{
  Family const ber(2);
  auto const prior = Prior::uniform(ber, {0.1, 0.9}, 8);
  Code const code(ber, {Mode::visible, EncoderKind::quantize_euclid, DecoderKind::point, 1.0}, 16);
  auto const r = error(code, prior, Criterion::variational);
  std::ostringstream os;
  ErrorReport const rows[] = {r};
  write_csv(os, rows);
  std::string const out = os.str();
  EXPECT_EQ(out.substr(0, out.find('\n')), kErrorCsvHeader);
  EXPECT_NE(out.find("16,2,1,visible,quantize_euclid,point,variational,"), std::string::npos);
  // points {0.25, 0.5, 0.75} and midpoints give 6 pieces of 8 nodes
  EXPECT_EQ(r.quadrature_nodes, 48u);
  EXPECT_NE(out.find(",48,exact,0"), std::string::npos);
}

TEST(CodecTest, lloyd_codebook_is_stationary_test)
{
  Family const ber(2);
  auto const prior = Prior::uniform(ber, {0.1, 0.9});
  auto const book  = optimize_codebook(ber, prior, 3);
  ASSERT_EQ(book.size(), 3u);
  EXPECT_TRUE(std::is_sorted(book.points().begin(), book.points().end()));
  // each point is the normalised geometric mean of its cell's pmfs
  for (std::size_t j = 0; j < 3; ++j)
  {
    double mass = 0.0, log0 = 0.0, log1 = 0.0;
    for (std::size_t i = 0; i < prior.size(); ++i)
    {
      if (book.encode(prior.node(i)) == j)
      {
        double const z = prior.node(i)[0];
        mass += prior.weight(i);
        log0 += prior.weight(i) * std::log(1 - z);
        log1 += prior.weight(i) * std::log(z);
      }
    }
    double const g0 = std::exp(log0 / mass), g1 = std::exp(log1 / mass);
    EXPECT_NEAR(book.point(j)[0], g1 / (g0 + g1), 1e-9);
  }
}

TEST(CodecTest, single_point_codebook_matches_direct_error_test)
{
  Family const ber(2);
  auto const prior = Prior::uniform(ber, {0.1, 0.9});
  PointCodebook const book(ber, {ParamPoint{0.4}});
  Criterion const kl[] = {Criterion::relative_entropy};
  auto const r = evaluate(book, 50, prior, kl).front();
  // D(P_y^n || P_z^n) = n D(P_y || P_z)
  EXPECT_NEAR(r.value, 50.0 * oracle::bernoulli_kl_integral(0.4, 0.1, 0.9) / 0.8, 1e-10);
}
