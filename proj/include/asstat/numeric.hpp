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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <stdexcept>
#include <string>
#include <functional>
#include <limits>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace asstat {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kInf    = std::numeric_limits<double>::infinity();

/// Neumaier-compensated running sum. Accumulation order is the call order,
/// so results are reproducible whenever the caller fixes the order.
class CompensatedSum
{
public:
  void add(double x)
  {
    double const t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
    {
      comp_ += (sum_ - t) + x;
    }
    else
    {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  CompensatedSum &operator+=(double x)
  {
    add(x);
    return *this;
  }

  double value() const
  {
    return sum_ + comp_;
  }

private:
  double sum_  = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<double const> xs)
{
  CompensatedSum s;
  for (double x : xs)
  {
    s.add(x);
  }
  return s.value();
}

/// log(exp(a) + exp(b)) without overflow; -inf is the additive identity.
inline double log_add_exp(double a, double b)
{
  if (a == kNegInf)
  {
    return b;
  }
  if (b == kNegInf)
  {
    return a;
  }
  double const hi = std::max(a, b);
  double const lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

/// Two-pass stable log-sum-exp.
inline double log_sum_exp(std::span<double const> xs)
{
  double m = kNegInf;
  for (double x : xs)
  {
    m = std::max(m, x);
  }
  if (m == kNegInf)
  {
    return kNegInf;
  }
  if (m == kInf)
  {
    return kInf;
  }
  CompensatedSum s;
  for (double x : xs)
  {
    s.add(std::exp(x - m));
  }
  return m + std::log(s.value());
}

/// Streaming log-sum-exp accumulator (rescales when a larger term arrives).
class LogSumExp
{
public:
  void add(double x)
  {
    if (x == kNegInf)
    {
      return;
    }
    if (x <= max_)
    {
      acc_ += std::exp(x - max_);
      return;
    }
    acc_ = acc_ * std::exp(max_ - x) + 1.0;
    max_ = x;
  }

  double value() const
  {
    return max_ == kNegInf ? kNegInf : max_ + std::log(acc_);
  }

private:
  double max_ = kNegInf;
  double acc_ = 0.0;
};

/// log of the multinomial coefficient n! / prod(c_i!).
template <typename Counts>
double log_multinomial(Counts const &counts)
{
  double n   = 0.0;
  double acc = 0.0;
  for (auto c : counts)
  {
    n += static_cast<double>(c);
    acc -= std::lgamma(static_cast<double>(c) + 1.0);
  }
  return acc + std::lgamma(n + 1.0);
}

/// Binomial coefficient as a double (exact for the sizes used for counting).
inline double binomial_coefficient(double n, double k)
{
  if (k < 0 || k > n)
  {
    return 0.0;
  }
  return std::round(std::exp(std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1)));
}

/// One-dimensional quadrature rule on [0, 1].
struct Rule1D
{
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

template <unsigned N>
Rule1D gauss_legendre_unit()
{
  using boost::math::quadrature::gauss;
  auto const &abscissa = gauss<double, N>::abscissa();
  auto const &weight   = gauss<double, N>::weights();

  // Boost stores the non-negative half of the symmetric rule.
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < abscissa.size(); ++i)
  {
    double const x = abscissa[i];
    double const w = weight[i];
    if (x == 0.0)
    {
      pts.emplace_back(0.0, w);
    }
    else
    {
      pts.emplace_back(x, w);
      pts.emplace_back(-x, w);
    }
  }
  std::sort(pts.begin(), pts.end());

  Rule1D r;
  for (auto const &[x, w] : pts)
  {
    r.nodes.push_back(0.5 * (x + 1.0));
    r.weights.push_back(0.5 * w);
  }
  return r;
}

}  // namespace detail

/// Gauss-Legendre rule with `n` nodes mapped to [0, 1]. Supported sizes are
/// the ones the experiments use.
inline Rule1D gauss_legendre(std::size_t n)
{
  switch (n)
  {
  case 8:
    return detail::gauss_legendre_unit<8>();
  case 16:
    return detail::gauss_legendre_unit<16>();
  case 32:
    return detail::gauss_legendre_unit<32>();
  case 48:
    return detail::gauss_legendre_unit<48>();
  case 64:
    return detail::gauss_legendre_unit<64>();
  case 96:
    return detail::gauss_legendre_unit<96>();
  case 128:
    return detail::gauss_legendre_unit<128>();
  case 256:
    return detail::gauss_legendre_unit<256>();
  default:
    throw std::invalid_argument("gauss_legendre: unsupported node count " + std::to_string(n) +
                                " (use 8, 16, 32, 48, 64, 96, 128 or 256)");
  }
}

/// Runs body(i) for i in [0, count) on up to `workers` threads. Each index is
/// visited exactly once; callers write into pre-sized slots so that the merge
/// order never depends on scheduling.
inline void parallel_for(std::size_t count, std::size_t workers,
                         std::function<void(std::size_t)> const &body)
{
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1)
  {
    for (std::size_t i = 0; i < count; ++i)
    {
      body(i);
    }
    return;
  }
  std::vector<std::exception_ptr> failures(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
    {
      pool.emplace_back([&, w] {
        try
        {
          for (std::size_t i = w; i < count; i += workers)
          {
            body(i);
          }
        }
        catch (...)
        {
          failures[w] = std::current_exception();
        }
      });
    }
  }
  for (auto const &f : failures)
  {
    if (f)
    {
      std::rethrow_exception(f);
    }
  }
}

}  // namespace asstat
