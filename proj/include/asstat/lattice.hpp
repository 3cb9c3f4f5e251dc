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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "asstat/errors.hpp"
#include "asstat/family.hpp"
#include "asstat/typespace.hpp"

namespace asstat {

enum class Metric
{
  euclid,
  fisher,
};

inline std::string to_string(Metric m)
{
  return m == Metric::euclid ? "euclid" : "fisher";
}

/// The grid (t / sqrt(n)) Z^d intersected with the family domain. The grid is
/// anchored at the origin; no boundary points are added.
class Lattice
{
public:
  using Index = std::vector<std::int64_t>;

  static Lattice build(Family const &family, std::size_t n, double t)
  {
    if (!(t > 0.0) || n < 1)
    {
      throw std::invalid_argument("Lattice::build: need t > 0 and n >= 1");
    }
    Lattice L;
    L.family_  = family;
    L.n_       = n;
    L.t_       = t;
    L.spacing_ = t / std::sqrt(static_cast<double>(n));
    L.lo_      = static_cast<std::int64_t>(std::ceil(family.margin() / L.spacing_ - kGridSlack));
    L.hi_ = static_cast<std::int64_t>(std::floor((1.0 - family.margin()) / L.spacing_ + kGridSlack));

    std::size_t const d = family.dim();
    Index m(d, L.lo_);
    if (L.lo_ <= L.hi_)
    {
      L.enumerate(m, 0, 0);
    }
    if (L.points_.empty())
    {
      throw ConstructionError("Lattice::build: spacing " + std::to_string(L.spacing_) +
                              " leaves no grid point inside the domain (n=" + std::to_string(n) +
                              ", t=" + std::to_string(t) + ")");
    }
    return L;
  }

  Family const &family() const
  {
    return family_;
  }
  std::size_t n() const
  {
    return n_;
  }
  double span() const
  {
    return t_;
  }
  double spacing() const
  {
    return spacing_;
  }
  std::size_t dim() const
  {
    return family_.dim();
  }
  std::size_t size() const
  {
    return points_.size();
  }
  ParamPoint const &point(std::size_t i) const
  {
    return points_[i];
  }
  std::vector<ParamPoint> const &points() const
  {
    return points_;
  }
  Index const &index(std::size_t i) const
  {
    return indices_[i];
  }

  /// Code length log M in nats.
  double code_length() const
  {
    return std::log(static_cast<double>(size()));
  }

  std::optional<std::size_t> find(Index const &m) const
  {
    auto it = lookup_.find(m);
    if (it == lookup_.end())
    {
      return std::nullopt;
    }
    return it->second;
  }

  /// Position of the lattice point minimising (p - z)^T A (p - z); ties go to
  /// the lexicographically smallest point.
  std::size_t nearest(ParamPoint const &z, Eigen::MatrixXd const &A) const
  {
    std::size_t const d = dim();
    if (z.dim() != d)
    {
      throw std::invalid_argument("Lattice::nearest: dimension mismatch");
    }
    auto dist = [&](Index const &m) {
      Eigen::VectorXd v(static_cast<Eigen::Index>(d));
      for (std::size_t i = 0; i < d; ++i)
      {
        v(static_cast<Eigen::Index>(i)) = static_cast<double>(m[i]) * spacing_ - z[i];
      }
      return v.dot(A * v);
    };

    Index r(d);
    for (std::size_t i = 0; i < d; ++i)
    {
      auto const c = static_cast<std::int64_t>(std::llround(z[i] / spacing_));
      r[i]         = std::clamp(c, lo_, hi_);
    }
    if (!find(r))
    {
      return nearest_exhaustive(z, A);
    }

    // Every better point lies in the box |p_i - z_i| <= sqrt(q * (A^-1)_ii).
    double const q           = dist(r);
    Eigen::MatrixXd const Ai = A.inverse();
    Index box_lo(d), box_hi(d);
    for (std::size_t i = 0; i < d; ++i)
    {
      auto const ii   = static_cast<Eigen::Index>(i);
      double const rr = std::sqrt(std::max(0.0, q * Ai(ii, ii))) * (1.0 + 1e-9) + 1e-12;
      box_lo[i] = std::max(lo_, static_cast<std::int64_t>(std::floor((z[i] - rr) / spacing_)));
      box_hi[i] = std::min(hi_, static_cast<std::int64_t>(std::ceil((z[i] + rr) / spacing_)));
    }

    std::optional<std::size_t> best;
    double best_dist = kInf;
    Index m          = box_lo;
    while (true)
    {
      if (auto pos = find(m))
      {
        consider(*pos, dist(m), best, best_dist);
      }
      std::size_t i = d;
      while (i > 0)
      {
        --i;
        if (m[i] < box_hi[i])
        {
          ++m[i];
          break;
        }
        m[i] = box_lo[i];
        if (i == 0)
        {
          return *best;
        }
      }
    }
  }

  std::size_t nearest_euclid(ParamPoint const &z) const
  {
    auto const d = static_cast<Eigen::Index>(dim());
    return nearest(z, Eigen::MatrixXd::Identity(d, d));
  }

  std::size_t nearest_fisher(ParamPoint const &z, FisherMatrix const &J) const
  {
    Eigen::LLT<Eigen::MatrixXd> llt(J.entries);
    if (llt.info() != Eigen::Success)
    {
      throw DomainError("nearest_fisher: weight matrix is not positive definite");
    }
    return nearest(z, J.entries);
  }

  /// Reference implementation: scan every point.
  std::size_t nearest_exhaustive(ParamPoint const &z, Eigen::MatrixXd const &A) const
  {
    std::optional<std::size_t> best;
    double best_dist = kInf;
    for (std::size_t p = 0; p < size(); ++p)
    {
      Eigen::VectorXd v(static_cast<Eigen::Index>(dim()));
      for (std::size_t i = 0; i < dim(); ++i)
      {
        v(static_cast<Eigen::Index>(i)) = points_[p][i] - z[i];
      }
      consider(p, v.dot(A * v), best, best_dist);
    }
    return *best;
  }

  /// Copy holding only the points with keep[i] set (order preserved).
  Lattice restricted(std::vector<bool> const &keep) const
  {
    if (keep.size() != size())
    {
      throw std::invalid_argument("Lattice::restricted: mask size mismatch");
    }
    Lattice L = *this;
    L.points_.clear();
    L.indices_.clear();
    L.lookup_.clear();
    for (std::size_t i = 0; i < size(); ++i)
    {
      if (keep[i])
      {
        L.lookup_.emplace(indices_[i], L.points_.size());
        L.points_.push_back(points_[i]);
        L.indices_.push_back(indices_[i]);
      }
    }
    if (L.points_.empty())
    {
      throw ConstructionError("Lattice::restricted: no point kept");
    }
    return L;
  }

  /// Quantises z under the chosen metric. For Metric::fisher the weight is
  /// J evaluated at z itself (the MLE, for blind encoders).
  std::size_t quantize(ParamPoint const &z, Metric metric) const
  {
    return metric == Metric::euclid ? nearest_euclid(z) : nearest_fisher(z, family_.fisher(z));
  }

private:
  static constexpr double kGridSlack = 1e-9;

  Lattice() = default;

  // Points are visited in lexicographic index order, so a strict improvement
  // test keeps the lexicographically smallest of (numerically) tied points.
  static void consider(std::size_t pos, double dist, std::optional<std::size_t> &best,
                       double &best_dist)
  {
    double const tol = 1e-9 * std::max(best_dist, 1e-300);
    if (!best || dist < best_dist - tol)
    {
      best      = pos;
      best_dist = dist;
    }
    else if (std::abs(dist - best_dist) <= tol && pos < *best)
    {
      best = pos;
    }
  }

  void enumerate(Index &m, std::size_t i, std::int64_t partial)
  {
    std::size_t const d = m.size();
    double const cap    = (1.0 - family_.margin()) / spacing_ + kGridSlack;
    if (i == d)
    {
      ParamPoint p;
      p.coords.resize(d);
      for (std::size_t j = 0; j < d; ++j)
      {
        p[j] = static_cast<double>(m[j]) * spacing_;
      }
      lookup_.emplace(m, points_.size());
      points_.push_back(std::move(p));
      indices_.push_back(m);
      return;
    }
    for (std::int64_t v = lo_; v <= hi_; ++v)
    {
      // remaining coordinates are at least lo_ each
      auto const rest = static_cast<std::int64_t>(d - i - 1) * lo_;
      if (static_cast<double>(partial + v + rest) > cap)
      {
        break;
      }
      m[i] = v;
      enumerate(m, i + 1, partial + v);
    }
  }

  Family family_;
  std::size_t n_        = 0;
  double t_             = 0.0;
  double spacing_       = 0.0;
  std::int64_t lo_      = 0;
  std::int64_t hi_      = -1;
  std::vector<ParamPoint> points_;
  std::vector<Index> indices_;
  std::map<Index, std::size_t> lookup_;
};

/// For every type, the lattice point its (clamped) MLE quantises to.
inline std::vector<std::size_t> assign_cells(Lattice const &lattice, TypeSpace const &space,
                                             Metric metric)
{
  Family const &family = lattice.family();
  std::vector<std::size_t> cell(space.size());
  for (std::size_t t = 0; t < space.size(); ++t)
  {
    cell[t] = lattice.quantize(family.mle(space.type(t)), metric);
  }
  return cell;
}

/// Types whose clamped MLE maps to lattice point `point` (positions into
/// `space`, ascending).
inline std::vector<std::size_t> cell_types(Lattice const &lattice, std::size_t point,
                                           TypeSpace const &space, Metric metric)
{
  if (point >= lattice.size())
  {
    throw std::out_of_range("cell_types: point is not a lattice point");
  }
  auto const cells = assign_cells(lattice, space, metric);
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < cells.size(); ++t)
  {
    if (cells[t] == point)
    {
      out.push_back(t);
    }
  }
  return out;
}

}  // namespace asstat
