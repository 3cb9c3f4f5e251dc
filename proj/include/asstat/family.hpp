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
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "asstat/errors.hpp"
#include "asstat/numeric.hpp"

namespace asstat {

/// A point of the parameter space in moment coordinates: coords[i] is the
/// probability of symbol i + 1. Symbol 0 is the reference symbol and carries
/// the remaining mass.
struct ParamPoint
{
  std::vector<double> coords;

  ParamPoint() = default;
  explicit ParamPoint(std::vector<double> c)
    : coords(std::move(c))
  {}
  ParamPoint(std::initializer_list<double> c)
    : coords(c)
  {}

  std::size_t dim() const
  {
    return coords.size();
  }
  double operator[](std::size_t i) const
  {
    return coords[i];
  }
  double &operator[](std::size_t i)
  {
    return coords[i];
  }

  friend bool operator==(ParamPoint const &, ParamPoint const &) = default;
  friend auto operator<=>(ParamPoint const &a, ParamPoint const &b)
  {
    return a.coords <=> b.coords;
  }
};

inline std::string to_string(ParamPoint const &z)
{
  std::ostringstream os;
  os.precision(10);
  os << '(';
  for (std::size_t i = 0; i < z.dim(); ++i)
  {
    os << (i ? "," : "") << z[i];
  }
  os << ')';
  return os.str();
}

/// Count vector (c_0, ..., c_{k-1}) of an n-sequence over k symbols.
struct TypeIndex
{
  std::vector<std::uint32_t> counts;

  std::uint32_t n() const
  {
    return std::accumulate(counts.begin(), counts.end(), std::uint32_t{0});
  }
  std::size_t k() const
  {
    return counts.size();
  }

  friend bool operator==(TypeIndex const &, TypeIndex const &) = default;
};

/// Fisher information in moment coordinates (nats per squared probability
/// unit). Symmetric positive definite on the open simplex.
struct FisherMatrix
{
  Eigen::MatrixXd entries;

  std::size_t dim() const
  {
    return static_cast<std::size_t>(entries.rows());
  }
  double operator()(std::size_t i, std::size_t j) const
  {
    return entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  /// (a - b)^T J (a - b)
  double quadratic(ParamPoint const &a, ParamPoint const &b) const
  {
    Eigen::VectorXd v(static_cast<Eigen::Index>(a.dim()));
    for (std::size_t i = 0; i < a.dim(); ++i)
    {
      v(static_cast<Eigen::Index>(i)) = a[i] - b[i];
    }
    return v.dot(entries * v);
  }

  double determinant() const
  {
    return entries.determinant();
  }

  /// Largest absolute entry over the lower triangle, i.e. max_{i>=j} |J_ij|.
  double max_abs_entry() const
  {
    return entries.cwiseAbs().maxCoeff();
  }
};

/// The k-nomial exponential family restricted to the margin domain
/// {z : z_i >= eps_bd, 1 - sum z >= eps_bd}.
///
/// Natural parameters are log-odds against the reference symbol,
/// theta_i = log(p_i / p_0), with indicator sufficient statistics; the
/// moment map of that parametrisation is the identity on cell probabilities.
class Family
{
public:
  static constexpr double kDefaultMargin = 0.02;

  explicit Family(std::size_t k = 2, double eps_bd = kDefaultMargin)
    : k_(k)
    , eps_(eps_bd)
  {
    if (k < 2)
    {
      throw std::invalid_argument("Family: alphabet size k must be >= 2");
    }
    if (!(eps_bd >= 0.0) || !(eps_bd * static_cast<double>(k) < 1.0))
    {
      throw std::invalid_argument("Family: eps_bd must lie in [0, 1/k)");
    }
  }

  std::size_t k() const
  {
    return k_;
  }
  std::size_t dim() const
  {
    return k_ - 1;
  }
  double margin() const
  {
    return eps_;
  }

  /// Domain membership with a 1e-12 slack for round-off in grid construction.
  bool in_domain(ParamPoint const &z) const
  {
    if (z.dim() != dim())
    {
      return false;
    }
    constexpr double slack = 1e-12;
    double sum             = 0.0;
    for (double c : z.coords)
    {
      if (!(c >= eps_ - slack))
      {
        return false;
      }
      sum += c;
    }
    return 1.0 - sum >= eps_ - slack;
  }

  void require_domain(ParamPoint const &z, char const *what) const
  {
    if (!in_domain(z))
    {
      throw DomainError(std::string(what) + ": parameter " + to_string(z) +
                        " lies outside the family domain");
    }
  }

  std::vector<double> pmf(ParamPoint const &z) const
  {
    require_domain(z, "pmf");
    return cell_probabilities(z);
  }

  std::vector<double> log_pmf(ParamPoint const &z) const
  {
    auto p = pmf(z);
    for (double &x : p)
    {
      x = std::log(x);
    }
    return p;
  }

  /// Single-letter relative entropy D(P_z || P_z2) in nats.
  double kl(ParamPoint const &z, ParamPoint const &z2) const
  {
    auto const p = pmf(z);
    auto const q = pmf(z2);
    CompensatedSum s;
    for (std::size_t i = 0; i < k_; ++i)
    {
      if (p[i] > 0.0)
      {
        s.add(p[i] * (std::log(p[i]) - std::log(q[i])));
      }
    }
    return std::max(0.0, s.value());
  }

  FisherMatrix fisher(ParamPoint const &z) const
  {
    require_domain(z, "fisher");
    auto const p = cell_probabilities(z);
    for (double x : p)
    {
      if (!(x > 0.0))
      {
        throw DomainError("fisher: singular at boundary point " + to_string(z));
      }
    }
    auto const d = static_cast<Eigen::Index>(dim());
    FisherMatrix J{Eigen::MatrixXd::Constant(d, d, 1.0 / p[0])};
    for (Eigen::Index i = 0; i < d; ++i)
    {
      J.entries(i, i) += 1.0 / p[static_cast<std::size_t>(i) + 1];
    }
    return J;
  }

  /// Empirical frequencies of symbols 1..k-1, projected onto the domain.
  ParamPoint mle(TypeIndex const &type) const
  {
    if (type.k() != k_)
    {
      throw std::invalid_argument("mle: type has wrong alphabet size");
    }
    double const n = static_cast<double>(type.n());
    if (n <= 0)
    {
      throw std::invalid_argument("mle: empty type");
    }
    std::vector<double> p(k_);
    for (std::size_t i = 0; i < k_; ++i)
    {
      p[i] = static_cast<double>(type.counts[i]) / n;
    }
    return from_cell_probabilities(project_to_margin(std::move(p)));
  }

  /// kl(z, z2) - (1/2) (z - z2)^T J_z (z - z2).
  double euclid_kl_residual(ParamPoint const &z, ParamPoint const &z2) const
  {
    return kl(z, z2) - 0.5 * fisher(z).quadratic(z, z2);
  }

  std::vector<double> natural_from_moment(ParamPoint const &z) const
  {
    require_domain(z, "natural_from_moment");
    auto const p = cell_probabilities(z);
    std::vector<double> theta(dim());
    for (std::size_t i = 0; i < dim(); ++i)
    {
      theta[i] = std::log(p[i + 1]) - std::log(p[0]);
    }
    return theta;
  }

  ParamPoint moment_from_natural(std::vector<double> const &theta) const
  {
    if (theta.size() != dim())
    {
      throw std::invalid_argument("moment_from_natural: wrong dimension");
    }
    // softmax with the reference symbol pinned at theta_0 = 0
    std::vector<double> logits(k_, 0.0);
    std::copy(theta.begin(), theta.end(), logits.begin() + 1);
    double const lse = log_sum_exp(logits);
    ParamPoint z;
    z.coords.resize(dim());
    for (std::size_t i = 0; i < dim(); ++i)
    {
      z[i] = std::exp(theta[i] - lse);
    }
    return z;
  }

  /// Cumulant function A(theta) = log(1 + sum exp(theta_i)).
  double log_partition(std::vector<double> const &theta) const
  {
    std::vector<double> logits(k_, 0.0);
    std::copy(theta.begin(), theta.end(), logits.begin() + 1);
    return log_sum_exp(logits);
  }

  /// (p_0, p_1, ..., p_{k-1}) without domain checks.
  std::vector<double> cell_probabilities(ParamPoint const &z) const
  {
    std::vector<double> p(k_);
    double sum = 0.0;
    for (std::size_t i = 0; i < dim(); ++i)
    {
      p[i + 1] = z[i];
      sum += z[i];
    }
    p[0] = 1.0 - sum;
    return p;
  }

  ParamPoint from_cell_probabilities(std::vector<double> const &p) const
  {
    return ParamPoint(std::vector<double>(p.begin() + 1, p.end()));
  }

  /// Euclidean projection of a probability vector onto {p_i >= eps, sum = 1}.
  /// Interior vectors are returned unchanged; for k = 2 this is coordinatewise
  /// clamping into [eps, 1 - eps].
  std::vector<double> project_to_margin(std::vector<double> p) const
  {
    bool inside = true;
    for (double x : p)
    {
      inside = inside && x >= eps_;
    }
    if (inside)
    {
      return p;
    }
    double const budget = 1.0 - eps_ * static_cast<double>(k_);
    std::vector<double> v(p.size());
    for (std::size_t i = 0; i < p.size(); ++i)
    {
      v[i] = p[i] - eps_;
    }
    // sort-based simplex projection onto {v >= 0, sum v = budget}
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0;
    double tau        = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j)
    {
      cumulative += u[j];
      double const candidate = (cumulative - budget) / static_cast<double>(j + 1);
      if (u[j] - candidate > 0)
      {
        tau = candidate;
      }
    }
    for (std::size_t i = 0; i < p.size(); ++i)
    {
      p[i] = std::max(v[i] - tau, 0.0) + eps_;
    }
    return p;
  }

  friend bool operator==(Family const &, Family const &) = default;

private:
  std::size_t k_;
  double eps_;
};

}  // namespace asstat
