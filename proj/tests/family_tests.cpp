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
#include <vector>

#include <gtest/gtest.h>

#include "asstat/errors.hpp"
#include "asstat/family.hpp"

using namespace asstat;

namespace {

// D(Ber(a) || Ber(b)) summed term by term.
double bernoulli_kl(double a, double b)
{
  return a * std::log(a / b) + (1 - a) * std::log((1 - a) / (1 - b));
}

// Second finite difference of z2 -> kl(z, z2) at z2 = z.
double fd_hessian(Family const &f, ParamPoint const &z, std::size_t i, std::size_t j, double h)
{
  auto shifted = [&](double di, double dj) {
    ParamPoint w = z;
    w[i] += di;
    w[j] += dj;
    return f.kl(z, w);
  };
  return (shifted(h, h) - shifted(h, -h) - shifted(-h, h) + shifted(-h, -h)) / (4 * h * h);
}

}  // namespace

TEST(FamilyTest, pmf_examples_test)
{
  Family const ber(2);
  EXPECT_EQ(ber.pmf({0.5}), (std::vector<double>{0.5, 0.5}));
  auto const p = ber.pmf({0.9});
  EXPECT_NEAR(p[0], 0.1, 1e-15);
  EXPECT_NEAR(p[1], 0.9, 1e-15);

  Family const tri(3);
  for (double x : tri.pmf({1.0 / 3, 1.0 / 3}))
  {
    EXPECT_NEAR(x, 1.0 / 3, 1e-15);
  }
}

TEST(FamilyTest, out_of_domain_throws_test)
{
  Family const ber(2);
  EXPECT_THROW(ber.pmf({0.99}), DomainError);
  EXPECT_THROW(ber.pmf({0.0}), DomainError);
  EXPECT_THROW(Family(3).pmf({0.6, 0.5}), DomainError);
  EXPECT_THROW(Family(1), std::invalid_argument);
}

TEST(FamilyTest, same_distributions_divergence_test)
{
  EXPECT_EQ(Family(2).kl({0.5}, {0.5}), 0.0);
  EXPECT_NEAR(Family(3).kl({1.0 / 3, 1.0 / 3}, {1.0 / 3, 1.0 / 3}), 0.0, 1e-16);
}

TEST(FamilyTest, other_divergence_test)
{
  Family const ber(2);
  EXPECT_NEAR(ber.kl({0.5}, {0.6}), bernoulli_kl(0.5, 0.6), 1e-15);
  EXPECT_NEAR(ber.kl({0.5}, {0.6}), 0.020411, 5e-7);
  EXPECT_NEAR(ber.kl({0.2}, {0.7}), bernoulli_kl(0.2, 0.7), 1e-15);
}

TEST(FamilyTest, fisher_matches_finite_difference_test)
{
  Family const ber(2);
  EXPECT_NEAR(ber.fisher({0.5})(0, 0), 4.0, 1e-14);
  EXPECT_NEAR(ber.fisher({0.2})(0, 0), 6.25, 1e-13);
  EXPECT_NEAR(fd_hessian(ber, {0.2}, 0, 0, 1e-4), 6.25, 1e-5);

  Family const tri(3);
  ParamPoint const u{1.0 / 3, 1.0 / 3};
  auto const J = tri.fisher(u);
  for (std::size_t i = 0; i < 2; ++i)
  {
    for (std::size_t j = 0; j < 2; ++j)
    {
      EXPECT_NEAR(J(i, j), fd_hessian(tri, u, i, j, 1e-4), 1e-5);
    }
  }
  EXPECT_GT(J(0, 0), std::abs(J(0, 1)));
  EXPECT_GT(J.determinant(), 0.0);
}

TEST(FamilyTest, fisher_singular_at_boundary_test)
{
  EXPECT_THROW(Family(2, 0.0).fisher({0.0}), DomainError);
}

TEST(FamilyTest, mle_examples_test)
{
  Family const ber(2);
  EXPECT_NEAR(ber.mle(TypeIndex{{1, 3}})[0], 0.75, 1e-15);
  EXPECT_NEAR(ber.mle(TypeIndex{{0, 4}})[0], 0.98, 1e-15);
  EXPECT_NEAR(ber.mle(TypeIndex{{4, 0}})[0], 0.02, 1e-15);
  EXPECT_NEAR(ber.mle(TypeIndex{{2, 2}})[0], 0.5, 1e-15);

  // projection keeps every cell at the margin and sums to one
  Family const tri(3);
  auto const z = tri.mle(TypeIndex{{0, 0, 5}});
  EXPECT_TRUE(tri.in_domain(z));
  EXPECT_NEAR(z[0], 0.02, 1e-15);
  EXPECT_NEAR(z[1], 0.96, 1e-15);
}

TEST(FamilyTest, natural_moment_round_trip_test)
{
  Family const tri(3);
  ParamPoint const z{0.2, 0.5};
  auto const theta = tri.natural_from_moment(z);
  EXPECT_NEAR(theta[0], std::log(0.2 / 0.3), 1e-15);
  auto const back = tri.moment_from_natural(theta);
  EXPECT_NEAR(back[0], 0.2, 1e-15);
  EXPECT_NEAR(back[1], 0.5, 1e-15);
  // the gradient of the cumulant function is the moment map
  double const h = 1e-6;
  auto up = theta, dn = theta;
  up[1] += h;
  dn[1] -= h;
  EXPECT_NEAR((tri.log_partition(up) - tri.log_partition(dn)) / (2 * h), 0.5, 1e-9);
}

TEST(FamilyTest, euclid_residual_is_third_order_test)
{
  Family const ber(2);
  ParamPoint const z{0.3};
  EXPECT_EQ(ber.euclid_kl_residual(z, z), 0.0);
  // residual at z2 = 0.4 from the two-term oracle
  double const quad = 0.5 * (1.0 / (0.3 * 0.7)) * 0.01;
  EXPECT_NEAR(ber.euclid_kl_residual(z, {0.4}), bernoulli_kl(0.3, 0.4) - quad, 1e-15);
  EXPECT_NEAR(Family(2).euclid_kl_residual({0.5}, {0.6}), 0.000411, 5e-7);
  // halving the step divides the residual by about eight
  double const r1 = std::abs(ber.euclid_kl_residual(z, {0.3 + 0.02}));
  double const r2 = std::abs(ber.euclid_kl_residual(z, {0.3 + 0.01}));
  EXPECT_NEAR(r1 / r2, 8.0, 0.5);
}
