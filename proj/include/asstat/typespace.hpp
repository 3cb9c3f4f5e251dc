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
#include <functional>
#include <memory>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "asstat/errors.hpp"
#include "asstat/family.hpp"
#include "asstat/numeric.hpp"

namespace asstat {

/// All n-types over k symbols, ordered lexicographically by the sufficient
/// statistic (c_1, ..., c_{k-1}); c_0 = n - sum is implied.
class TypeSpace
{
public:
  static constexpr std::size_t kDefaultExactThreshold = 2'000'000;

  /// Number of n-types over k symbols, C(n + k - 1, k - 1).
  static double count_types(std::size_t n, std::size_t k)
  {
    return binomial_coefficient(static_cast<double>(n + k - 1), static_cast<double>(k - 1));
  }

  TypeSpace(std::size_t n, std::size_t k, std::size_t threshold = kDefaultExactThreshold)
    : n_(n)
    , k_(k)
  {
    if (n < 1 || k < 2)
    {
      throw std::invalid_argument("TypeSpace: need n >= 1 and k >= 2");
    }
    double const expected = count_types(n, k);
    if (expected > static_cast<double>(threshold))
    {
      throw SizeError("TypeSpace: " + std::to_string(static_cast<long long>(expected)) +
                      " types for n=" + std::to_string(n) + ", k=" + std::to_string(k) +
                      " exceed the exact threshold " + std::to_string(threshold) +
                      "; use the Monte Carlo estimator instead");
    }
    enumerate();
  }

  /// Builds a space from explicit tables. Only the shapes are validated; used
  /// to inject faults into the self-test.
  static TypeSpace from_parts(std::size_t n, std::size_t k, std::vector<std::uint32_t> counts,
                              std::vector<double> log_sizes)
  {
    if (counts.size() != log_sizes.size() * k)
    {
      throw std::invalid_argument("TypeSpace::from_parts: inconsistent table sizes");
    }
    TypeSpace ts;
    ts.n_         = n;
    ts.k_         = k;
    ts.counts_    = std::move(counts);
    ts.log_sizes_ = std::move(log_sizes);
    return ts;
  }

  std::size_t n() const
  {
    return n_;
  }
  std::size_t k() const
  {
    return k_;
  }
  std::size_t size() const
  {
    return log_sizes_.size();
  }

  std::span<std::uint32_t const> counts(std::size_t i) const
  {
    return {counts_.data() + i * k_, k_};
  }

  TypeIndex type(std::size_t i) const
  {
    auto c = counts(i);
    return TypeIndex{{c.begin(), c.end()}};
  }

  /// log of the type-class size n! / prod c_i! (nats).
  double log_size(std::size_t i) const
  {
    return log_sizes_[i];
  }
  std::vector<double> const &log_sizes() const
  {
    return log_sizes_;
  }

  /// Position of `type` in the enumeration order.
  std::size_t index_of(TypeIndex const &type) const
  {
    if (type.k() != k_ || type.n() != n_)
    {
      throw std::invalid_argument("TypeSpace::index_of: type does not belong to this space");
    }
    // tuples of m non-negative integers with sum <= s: C(s + m, m)
    auto tuples = [](double s, double m) { return binomial_coefficient(s + m, m); };
    double rank      = 0.0;
    double remaining = static_cast<double>(n_);
    for (std::size_t i = 1; i < k_; ++i)
    {
      double const tail = static_cast<double>(k_ - 1 - i);
      for (std::uint32_t j = 0; j < type.counts[i]; ++j)
      {
        rank += tuples(remaining - j, tail);
      }
      remaining -= type.counts[i];
    }
    return static_cast<std::size_t>(rank);
  }

  friend bool operator==(TypeSpace const &a, TypeSpace const &b)
  {
    return a.n_ == b.n_ && a.k_ == b.k_ && a.counts_ == b.counts_ && a.log_sizes_ == b.log_sizes_;
  }

private:
  TypeSpace() = default;

  void enumerate()
  {
    std::size_t const d = k_ - 1;
    std::vector<std::uint32_t> stat(d, 0);  // (c_1..c_{k-1})
    std::uint32_t used = 0;
    auto const total   = static_cast<std::size_t>(count_types(n_, k_));
    counts_.reserve(total * k_);
    log_sizes_.reserve(total);
    std::vector<std::uint32_t> full(k_);
    while (true)
    {
      full[0] = static_cast<std::uint32_t>(n_) - used;
      std::copy(stat.begin(), stat.end(), full.begin() + 1);
      counts_.insert(counts_.end(), full.begin(), full.end());
      log_sizes_.push_back(log_multinomial(full));

      // lexicographic successor of stat subject to sum <= n
      std::size_t pos = d - 1;
      while (used == n_)
      {
        used -= stat[pos];
        stat[pos] = 0;
        if (pos == 0)
        {
          return;
        }
        --pos;
      }
      ++stat[pos];
      ++used;
    }
  }

  std::size_t n_ = 0;
  std::size_t k_ = 0;
  std::vector<std::uint32_t> counts_;
  std::vector<double> log_sizes_;
};

using TypeSpacePtr = std::shared_ptr<TypeSpace const>;

inline TypeSpacePtr make_type_space(std::size_t n, std::size_t k,
                                    std::size_t threshold = TypeSpace::kDefaultExactThreshold)
{
  return std::make_shared<TypeSpace const>(n, k, threshold);
}

/// The exchangeable distribution on X^n that is uniform within each type
/// class, stored by its type marginal in log domain.
class ExchDist
{
public:
  ExchDist(TypeSpacePtr space, std::vector<double> log_weights)
    : space_(std::move(space))
    , log_w_(std::move(log_weights))
  {
    if (!space_ || log_w_.size() != space_->size())
    {
      throw std::invalid_argument("ExchDist: weight vector does not match the type space");
    }
  }

  static ExchDist from_weights(TypeSpacePtr space, std::span<double const> weights)
  {
    std::vector<double> lw(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i)
    {
      if (weights[i] < 0)
      {
        throw std::invalid_argument("ExchDist: negative weight");
      }
      lw[i] = weights[i] > 0 ? std::log(weights[i]) : kNegInf;
    }
    return ExchDist(std::move(space), std::move(lw));
  }

  static ExchDist point_mass(TypeSpacePtr space, std::size_t index)
  {
    std::vector<double> lw(space->size(), kNegInf);
    lw.at(index) = 0.0;
    return ExchDist(std::move(space), std::move(lw));
  }

  /// Uniform over the given (distinct) type indices.
  static ExchDist uniform_over(TypeSpacePtr space, std::span<std::size_t const> indices)
  {
    if (indices.empty())
    {
      throw std::invalid_argument("ExchDist::uniform_over: empty support");
    }
    std::vector<double> lw(space->size(), kNegInf);
    double const v = -std::log(static_cast<double>(indices.size()));
    for (auto i : indices)
    {
      lw.at(i) = v;
    }
    return ExchDist(std::move(space), std::move(lw));
  }

  TypeSpacePtr const &space() const
  {
    return space_;
  }
  std::size_t size() const
  {
    return log_w_.size();
  }
  double log_weight(std::size_t i) const
  {
    return log_w_[i];
  }
  double weight(std::size_t i) const
  {
    return std::exp(log_w_[i]);
  }
  std::vector<double> const &log_weights() const
  {
    return log_w_;
  }
  std::vector<double> weights() const
  {
    std::vector<double> w(log_w_.size());
    for (std::size_t i = 0; i < w.size(); ++i)
    {
      w[i] = std::exp(log_w_[i]);
    }
    return w;
  }

  double total_mass() const
  {
    CompensatedSum s;
    for (double lw : log_w_)
    {
      s.add(std::exp(lw));
    }
    return s.value();
  }

  bool is_normalized(double tol = 1e-10) const
  {
    return std::abs(total_mass() - 1.0) <= tol;
  }

private:
  TypeSpacePtr space_;
  std::vector<double> log_w_;
};

namespace detail {

inline void require_same_space(ExchDist const &a, ExchDist const &b, char const *what)
{
  if (a.space() != b.space() && !(*a.space() == *b.space()))
  {
    throw std::invalid_argument(std::string(what) + ": distributions live on different type spaces");
  }
}

}  // namespace detail

/// Type marginal of P_z^n: multinomial(n; c) * prod p_i^{c_i}.
inline ExchDist product_type_dist(Family const &family, ParamPoint const &z, TypeSpacePtr space)
{
  if (space->k() != family.k())
  {
    throw std::invalid_argument("product_type_dist: alphabet size mismatch");
  }
  auto const p = family.pmf(z);
  std::vector<double> logp(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
  {
    logp[i] = std::log(p[i]);
  }
  std::vector<double> lw(space->size());
  for (std::size_t t = 0; t < space->size(); ++t)
  {
    auto const c = space->counts(t);
    double acc   = space->log_size(t);
    for (std::size_t i = 0; i < c.size(); ++i)
    {
      if (c[i] > 0)
      {
        acc += c[i] * logp[i];  // 0 log 0 := 0 is the c_i == 0 branch
      }
    }
    lw[t] = acc;
  }
  return ExchDist(std::move(space), std::move(lw));
}

/// D(Q || P) in nats. Per-sequence factors cancel inside each type class,
/// so the sum over types equals the divergence on X^n. Returns +inf when Q
/// puts mass where P has none.
inline double kl_exch(ExchDist const &q, ExchDist const &p)
{
  detail::require_same_space(q, p, "kl_exch");
  CompensatedSum s;
  for (std::size_t i = 0; i < q.size(); ++i)
  {
    double const lq = q.log_weight(i);
    if (lq == kNegInf)
    {
      continue;
    }
    double const lp = p.log_weight(i);
    if (lp == kNegInf)
    {
      return kInf;
    }
    s.add(std::exp(lq) * (lq - lp));
  }
  return std::max(0.0, s.value());
}

/// ||Q - P||_1 on X^n, in [0, 2].
inline double l1_exch(ExchDist const &q, ExchDist const &p)
{
  detail::require_same_space(q, p, "l1_exch");
  CompensatedSum s;
  for (std::size_t i = 0; i < q.size(); ++i)
  {
    s.add(std::abs(q.weight(i) - p.weight(i)));
  }
  return std::clamp(s.value(), 0.0, 2.0);
}

/// sum_j w_j * components[j], computed type by type in log domain.
inline ExchDist mixture(std::span<double const> weights, std::span<ExchDist const> components)
{
  if (weights.size() != components.size() || components.empty())
  {
    throw std::invalid_argument("mixture: weights and components must be non-empty and aligned");
  }
  auto const &space = components.front().space();
  for (auto const &c : components)
  {
    detail::require_same_space(c, components.front(), "mixture");
  }
  std::vector<double> lw(space->size());
  std::vector<double> logw(weights.size());
  for (std::size_t j = 0; j < weights.size(); ++j)
  {
    logw[j] = weights[j] > 0 ? std::log(weights[j]) : kNegInf;
  }
  for (std::size_t i = 0; i < lw.size(); ++i)
  {
    LogSumExp acc;
    for (std::size_t j = 0; j < components.size(); ++j)
    {
      if (logw[j] != kNegInf)
      {
        acc.add(logw[j] + components[j].log_weight(i));
      }
    }
    lw[i] = acc.value();
  }
  return ExchDist(space, std::move(lw));
}

/// Two-column debugging dump: type-index, weight.
inline void write_csv(std::ostream &os, ExchDist const &q)
{
  auto const old = os.precision(17);
  os << "type_index,weight\n";
  for (std::size_t i = 0; i < q.size(); ++i)
  {
    os << i << ',' << q.weight(i) << '\n';
  }
  os.precision(old);
}

/// Monte Carlo estimate of D(Q || P_z^n) and ||Q - P_z^n||_1 for spaces too
/// large to enumerate. Types are drawn from P_z^n; Q is supplied through its
/// log type-marginal.
struct McEstimate
{
  double kl       = 0.0;
  double kl_se    = 0.0;
  double l1       = 0.0;
  double l1_se    = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed  = 0;
};

inline TypeIndex sample_type(std::vector<double> const &p, std::uint32_t n, std::mt19937_64 &rng)
{
  TypeIndex t{std::vector<std::uint32_t>(p.size(), 0)};
  std::uint32_t left = n;
  double mass        = 1.0;
  for (std::size_t i = 0; i + 1 < p.size() && left > 0; ++i)
  {
    double const prob = mass > 0 ? std::clamp(p[i] / mass, 0.0, 1.0) : 0.0;
    std::binomial_distribution<std::uint32_t> draw(left, prob);
    t.counts[i] = draw(rng);
    left -= t.counts[i];
    mass -= p[i];
  }
  t.counts.back() += left;
  return t;
}

inline McEstimate mc_divergences(Family const &family, ParamPoint const &z, std::uint32_t n,
                                 std::function<double(TypeIndex const &)> const &log_q,
                                 std::size_t samples, std::uint64_t seed)
{
  if (samples < 2)
  {
    throw std::invalid_argument("mc_divergences: need at least two samples");
  }
  auto const p = family.pmf(z);
  std::vector<double> logp(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
  {
    logp[i] = std::log(p[i]);
  }
  std::mt19937_64 rng(seed);
  CompensatedSum kl_sum, kl_sq, l1_sum, l1_sq;
  for (std::size_t s = 0; s < samples; ++s)
  {
    auto const t = sample_type(p, n, rng);
    double lp    = log_multinomial(t.counts);
    for (std::size_t i = 0; i < p.size(); ++i)
    {
      if (t.counts[i] > 0)
      {
        lp += t.counts[i] * logp[i];
      }
    }
    double const lr    = log_q(t) - lp;  // log(Q/P)
    double const ratio = std::exp(lr);
    double const f_kl  = ratio > 0 ? ratio * lr : 0.0;
    double const f_l1  = std::abs(ratio - 1.0);
    kl_sum.add(f_kl);
    kl_sq.add(f_kl * f_kl);
    l1_sum.add(f_l1);
    l1_sq.add(f_l1 * f_l1);
  }
  double const m = static_cast<double>(samples);
  auto se        = [m](double sum, double sq) {
    double const mean = sum / m;
    double const var  = std::max(0.0, (sq / m - mean * mean) * m / (m - 1));
    return std::sqrt(var / m);
  };
  McEstimate out;
  out.kl      = kl_sum.value() / m;
  out.kl_se   = se(kl_sum.value(), kl_sq.value());
  out.l1      = l1_sum.value() / m;
  out.l1_se   = se(l1_sum.value(), l1_sq.value());
  out.samples = samples;
  out.seed    = seed;
  return out;
}

}  // namespace asstat
