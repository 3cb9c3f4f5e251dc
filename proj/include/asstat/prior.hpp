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
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "asstat/family.hpp"
#include "asstat/numeric.hpp"

namespace asstat {

enum class PriorKind
{
  uniform,
  jeffreys,
};

inline std::string to_string(PriorKind k)
{
  return k == PriorKind::uniform ? "uniform" : "jeffreys";
}

/// Support {z : z_i >= lo for all i, sum_i z_i <= hi}. For d = 1 this is the
/// interval [lo, hi]; for d >= 2 it is a shrunken corner simplex.
struct Support
{
  double lo = 0.1;
  double hi = 0.9;
};

/// Tensor Gauss-Legendre rule pushed onto the support through collapsed
/// (Duffy) coordinates. `warp` applies u = sin^2(pi s / 2) per axis, which
/// removes inverse-square-root endpoint singularities.
struct SupportRule
{
  std::vector<ParamPoint> nodes;
  std::vector<double> weights;  // include the Jacobian; integrate dz
};

inline SupportRule support_rule(std::size_t dim, Support s, std::size_t nodes_per_dim, bool warp)
{
  Rule1D const base = gauss_legendre(nodes_per_dim);
  double const S    = s.hi - static_cast<double>(dim) * s.lo;
  if (!(S > 0.0))
  {
    throw std::invalid_argument("support_rule: empty support");
  }
  std::vector<double> u(base.nodes.size()), du(base.nodes.size());
  for (std::size_t i = 0; i < base.nodes.size(); ++i)
  {
    double const x = base.nodes[i];
    if (warp)
    {
      double const sp = std::sin(0.5 * std::numbers::pi * x);
      u[i]            = sp * sp;
      du[i]           = base.weights[i] * 0.5 * std::numbers::pi * std::sin(std::numbers::pi * x);
    }
    else
    {
      u[i]  = x;
      du[i] = base.weights[i];
    }
  }

  SupportRule rule;
  std::vector<std::size_t> idx(dim, 0);
  std::size_t const m = base.nodes.size();
  while (true)
  {
    ParamPoint z;
    z.coords.resize(dim);
    double rem = S;
    double w   = 1.0;
    for (std::size_t i = 0; i < dim; ++i)
    {
      double const wi = rem * u[idx[i]];
      w *= rem * du[idx[i]];
      z[i] = s.lo + wi;
      rem -= wi;
    }
    rule.nodes.push_back(std::move(z));
    rule.weights.push_back(w);

    std::size_t i = dim;
    while (i > 0 && ++idx[i - 1] == m)
    {
      idx[i - 1] = 0;
      --i;
    }
    if (i == 0)
    {
      break;
    }
  }
  return rule;
}

inline double support_volume(std::size_t dim, Support s)
{
  double const S = s.hi - static_cast<double>(dim) * s.lo;
  return std::pow(S, static_cast<double>(dim)) / std::tgamma(static_cast<double>(dim) + 1.0);
}

inline double sqrt_det_fisher(Family const &family, ParamPoint const &z)
{
  // det J = 1 / prod_i p_i for the k-nomial family in moment coordinates
  auto const p = family.cell_probabilities(z);
  double logdet = 0.0;
  for (double x : p)
  {
    logdet -= std::log(x);
  }
  return std::exp(0.5 * logdet);
}

/// Jeffreys normaliser C_J = integral of sqrt(det J_z) over the support.
inline double jeffreys_constant(Family const &family, Support s, std::size_t nodes_per_dim = 64)
{
  auto const rule = support_rule(family.dim(), s, nodes_per_dim, true);
  CompensatedSum acc;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
  {
    acc.add(rule.weights[i] * sqrt_det_fisher(family, rule.nodes[i]));
  }
  return acc.value();
}

/// An absolutely continuous prior on a support inside the family domain,
/// carried as quadrature nodes and weights (weights include the density).
class Prior
{
public:
  static constexpr std::size_t kDefaultNodes = 64;

  Prior(Family family, Support support, PriorKind kind, std::size_t nodes_per_dim = kDefaultNodes)
    : family_(family)
    , support_(support)
    , kind_(kind)
    , nodes_per_dim_(nodes_per_dim)
  {
    std::size_t const d = family_.dim();
    if (!(support.lo >= family.margin() - 1e-12) ||
        !(support.hi <= 1.0 - family.margin() + 1e-12) ||
        !(support.hi - static_cast<double>(d) * support.lo > 0.0))
    {
      throw DomainError("Prior: support must be a non-empty subset of the family domain");
    }
    auto rule = support_rule(d, support_, nodes_per_dim_, kind_ == PriorKind::jeffreys);
    if (kind_ == PriorKind::jeffreys)
    {
      normaliser_ = jeffreys_constant(family_, support_, nodes_per_dim_);
    }
    else
    {
      normaliser_ = support_volume(d, support_);
    }
    nodes_ = std::move(rule.nodes);
    weights_.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i)
    {
      weights_[i] = rule.weights[i] * density(nodes_[i]);
    }
  }

  static Prior uniform(Family family, Support support = {},
                       std::size_t nodes_per_dim = kDefaultNodes)
  {
    return Prior(family, support, PriorKind::uniform, nodes_per_dim);
  }

  static Prior jeffreys(Family family, Support support = {},
                        std::size_t nodes_per_dim = kDefaultNodes)
  {
    return Prior(family, support, PriorKind::jeffreys, nodes_per_dim);
  }

  Family const &family() const
  {
    return family_;
  }
  Support support() const
  {
    return support_;
  }
  PriorKind kind() const
  {
    return kind_;
  }
  std::size_t nodes_per_dim() const
  {
    return nodes_per_dim_;
  }
  std::size_t size() const
  {
    return nodes_.size();
  }
  ParamPoint const &node(std::size_t i) const
  {
    return nodes_[i];
  }
  std::vector<ParamPoint> const &nodes() const
  {
    return nodes_;
  }
  double weight(std::size_t i) const
  {
    return weights_[i];
  }
  std::vector<double> const &weights() const
  {
    return weights_;
  }

  double density(ParamPoint const &z) const
  {
    if (kind_ == PriorKind::uniform)
    {
      return 1.0 / normaliser_;
    }
    return sqrt_det_fisher(family_, z) / normaliser_;
  }

  double total_weight() const
  {
    return compensated_sum(weights_);
  }

  /// |total(N) - total(2N)|; the density integrates to one within this.
  double normalization_drift() const
  {
    Prior doubled(family_, support_, kind_, nodes_per_dim_ * 2);
    return std::abs(total_weight() - doubled.total_weight());
  }

  /// Sum of weight * f(node) in node order.
  double integrate(std::function<double(ParamPoint const &)> const &f) const
  {
    CompensatedSum acc;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
    {
      acc.add(weights_[i] * f(nodes_[i]));
    }
    return acc.value();
  }

private:
  Family family_;
  Support support_;
  PriorKind kind_;
  std::size_t nodes_per_dim_;
  double normaliser_ = 1.0;
  std::vector<ParamPoint> nodes_;
  std::vector<double> weights_;
};

}  // namespace asstat
