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
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "asstat/codec.hpp"
#include "asstat/errors.hpp"
#include "asstat/family.hpp"
#include "asstat/numeric.hpp"
#include "asstat/prior.hpp"
#include "asstat/typespace.hpp"

namespace asstat {

inline double normal_pdf(double u)
{
  return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double u)
{
  return 0.5 * std::erfc(-u / std::numbers::sqrt2);
}

/// Phi(b) - Phi(a) without cancellation in either tail.
inline double normal_mass(double a, double b)
{
  if (a >= 0.0)
  {
    return 0.5 * (std::erfc(a / std::numbers::sqrt2) - std::erfc(b / std::numbers::sqrt2));
  }
  if (b <= 0.0)
  {
    return 0.5 * (std::erfc(-b / std::numbers::sqrt2) - std::erfc(-a / std::numbers::sqrt2));
  }
  return 1.0 - normal_cdf(a) - (1.0 - normal_cdf(b));
}

/// The standard normal quantised with span t and offset alpha: constant on
/// each cell (alpha + j t, alpha + (j+1) t], equal to the cell's mass / t.
/// Cells meeting [-cutoff, cutoff] are kept; the rest is the tail budget.
class QuantGaussian
{
public:
  static constexpr double kCutoff = 12.0;

  QuantGaussian(double t, double alpha, double cutoff = kCutoff)
    : t_(t)
    , alpha_(alpha)
    , cutoff_(cutoff)
  {
    if (!(t > 0.0))
    {
      throw std::invalid_argument("QuantGaussian: span t must be positive");
    }
    if (!(alpha >= 0.0 && alpha <= t))
    {
      throw std::invalid_argument("QuantGaussian: offset alpha must lie in [0, t]");
    }
    auto const j0 = static_cast<long long>(std::floor((-cutoff - alpha) / t));
    auto const j1 = static_cast<long long>(std::ceil((cutoff - alpha) / t));
    CompensatedSum total;
    for (long long j = j0; j < j1; ++j)
    {
      double const a = alpha + static_cast<double>(j) * t;
      double const b = a + t;
      edges_.push_back(a);
      masses_.push_back(normal_mass(a, b));
      total.add(masses_.back());
    }
    edges_.push_back(alpha + static_cast<double>(j1) * t);
    normalization_ = total.value();
    uncovered_     = normal_cdf(edges_.front()) + normal_cdf(-edges_.back());
  }

  double span() const
  {
    return t_;
  }
  double offset() const
  {
    return alpha_;
  }
  std::size_t cells() const
  {
    return masses_.size();
  }
  double cell_lo(std::size_t j) const
  {
    return edges_[j];
  }
  double cell_hi(std::size_t j) const
  {
    return edges_[j + 1];
  }
  double cell_mass(std::size_t j) const
  {
    return masses_[j];
  }

  /// Integral of the density over the kept cells.
  double normalization() const
  {
    return normalization_;
  }

  /// Gaussian mass outside the kept cells.
  double uncovered_mass() const
  {
    return uncovered_;
  }

  double density(double u) const
  {
    if (u <= edges_.front() || u > edges_.back())
    {
      return 0.0;
    }
    auto const it = std::lower_bound(edges_.begin(), edges_.end(), u);
    auto const j  = static_cast<std::size_t>(it - edges_.begin()) - 1;
    return masses_[j] / t_;
  }

  /// D(phi_{t,alpha} || phi) in nats, integrated cell by cell with adaptive
  /// Gauss-Kronrod; the tail budget is added.
  double kl() const
  {
    CompensatedSum s;
    for (std::size_t j = 0; j < cells(); ++j)
    {
      double const q = masses_[j] / t_;
      if (q <= 0.0)
      {
        continue;
      }
      double const lq = std::log(q);
      s.add(integrate([&](double u) { return q * (lq - log_pdf(u)); }, cell_lo(j), cell_hi(j)));
    }
    return std::max(0.0, s.value()) + kl_tail_bound();
  }

  /// ||phi_{t,alpha} - phi||_1, split at the crossings phi(u) = q_j.
  double l1() const
  {
    CompensatedSum s;
    for (std::size_t j = 0; j < cells(); ++j)
    {
      double const q = masses_[j] / t_;
      std::vector<double> cuts{cell_lo(j)};
      double const arg = -2.0 * std::log(q * std::sqrt(2.0 * std::numbers::pi));
      if (q > 0.0 && arg > 0.0)
      {
        double const r = std::sqrt(arg);
        for (double c : {-r, r})
        {
          if (c > cell_lo(j) && c < cell_hi(j))
          {
            cuts.push_back(c);
          }
        }
      }
      cuts.push_back(cell_hi(j));
      for (std::size_t p = 0; p + 1 < cuts.size(); ++p)
      {
        s.add(integrate([&](double u) { return std::abs(q - normal_pdf(u)); }, cuts[p],
                        cuts[p + 1]));
      }
    }
    return std::clamp(s.value() + uncovered_, 0.0, 2.0);
  }

  /// Upper bound on the divergence contribution of the dropped tails.
  double kl_tail_bound() const
  {
    double const reach = std::max(std::abs(edges_.front()), std::abs(edges_.back())) + t_;
    return uncovered_ * (1.0 + reach * t_);
  }

private:
  static double log_pdf(double u)
  {
    return -0.5 * u * u - 0.5 * std::log(2.0 * std::numbers::pi);
  }

  template <typename F>
  static double integrate(F const &f, double a, double b)
  {
    using boost::math::quadrature::gauss_kronrod;
    double err       = 0.0;
    double const val = gauss_kronrod<double, 15>::integrate(f, a, b, 10, 1e-10, &err);
    if (!(err <= 1e-14 + 1e-8 * std::abs(val)))
    {
      throw AccuracyError("QuantGaussian: integration did not converge on [" + std::to_string(a) +
                          ", " + std::to_string(b) + "]");
    }
    return val;
  }

  double t_;
  double alpha_;
  double cutoff_;
  std::vector<double> edges_;
  std::vector<double> masses_;
  double normalization_ = 0.0;
  double uncovered_     = 0.0;
};

inline double quant_gaussian_kl(double t, double alpha)
{
  return QuantGaussian(t, alpha).kl();
}

inline double quant_gaussian_l1(double t, double alpha)
{
  return QuantGaussian(t, alpha).l1();
}

struct SupResult
{
  double value = 0.0;
  double alpha = 0.0;
};

/// sup over alpha in [0, t] of the chosen distance between phi_{t,alpha}
/// and phi: the maximum over a 64-point grid, refined by Brent's method on
/// the bracket around the best grid point.
inline SupResult sup_over_alpha(double t, Criterion criterion, std::size_t grid = 64)
{
  if (!(t > 0.0))
  {
    throw std::invalid_argument("sup_over_alpha: t must be positive");
  }
  auto f = [&](double a) {
    a = std::clamp(a, 0.0, t);
    return criterion == Criterion::relative_entropy ? quant_gaussian_kl(t, a)
                                                     : quant_gaussian_l1(t, a);
  };
  std::vector<double> vals(grid);
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid; ++i)
  {
    vals[i] = f(t * static_cast<double>(i) / static_cast<double>(grid - 1));
    if (vals[i] > vals[best])
    {
      best = i;
    }
  }
  double const step = t / static_cast<double>(grid - 1);
  double const lo   = std::max(0.0, step * (static_cast<double>(best) - 1.0));
  double const hi   = std::min(t, step * (static_cast<double>(best) + 1.0));
  auto const [x, negv] =
      boost::math::tools::brent_find_minima([&](double a) { return -f(a); }, lo, hi, 40);
  SupResult r{vals[best], step * static_cast<double>(best)};
  if (-negv > r.value)
  {
    r = {-negv, x};
  }
  return r;
}

/// Terms of the Clarke-Barron expansion of I(X^n; Z) with nu = mu:
/// lhs_mi ~ rhs_main + d_mu_nu - d_mu_jeffreys + log_cj.
struct CBTerms
{
  std::size_t n        = 0;
  double lhs_mi        = 0.0;
  double rhs_main      = 0.0;
  double d_mu_nu       = 0.0;
  double d_mu_jeffreys = 0.0;
  double log_cj        = 0.0;
  double discrepancy   = 0.0;

  double rhs() const
  {
    return rhs_main + d_mu_nu - d_mu_jeffreys + log_cj;
  }
};

/// Exact I(X^n; Z) = int D(P_z^n || int P_z'^n mu(dz')) mu(dz) on type space.
inline double mutual_information(Family const &family, Prior const &prior, std::size_t n,
                                 std::size_t workers = 1)
{
  auto const space = make_type_space(n, family.k());
  auto const mix   = bayes_mixture(family, prior, space);
  std::vector<double> terms(prior.size());
  parallel_for(prior.size(), workers, [&](std::size_t i) {
    terms[i] = prior.weight(i) * kl_exch(product_type_dist(family, prior.node(i), space), mix);
  });
  return compensated_sum(terms);
}

/// D(mu || mu_J) with mu_J the Jeffreys prior restricted to the support of mu.
inline double divergence_to_jeffreys(Prior const &prior)
{
  Family const &family = prior.family();
  double const cj      = jeffreys_constant(family, prior.support(), prior.nodes_per_dim());
  // the log-ratio is singular where the support meets the boundary; the
  // warped rule clusters nodes there
  auto const rule = support_rule(family.dim(), prior.support(), prior.nodes_per_dim(), true);
  CompensatedSum acc;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
  {
    double const mu = prior.density(rule.nodes[i]);
    double const mj = sqrt_det_fisher(family, rule.nodes[i]) / cj;
    acc.add(rule.weights[i] * mu * (std::log(mu) - std::log(mj)));
  }
  return acc.value();
}

inline CBTerms clarke_barron(Family const &family, Prior const &prior, std::size_t n,
                             std::size_t workers = 1)
{
  CBTerms r;
  double const d  = static_cast<double>(family.dim());
  r.n             = n;
  r.lhs_mi        = mutual_information(family, prior, n, workers);
  r.rhs_main      = 0.5 * d * std::log(static_cast<double>(n) / (2.0 * std::numbers::pi * std::numbers::e));
  r.d_mu_nu       = 0.0;
  r.d_mu_jeffreys = divergence_to_jeffreys(prior);
  r.log_cj        = std::log(jeffreys_constant(family, prior.support(), prior.nodes_per_dim()));
  r.discrepancy   = r.lhs_mi - r.rhs();
  return r;
}

/// sum_i p_i D(P_i||Q) - D(sum p_i P_i || Q) - sum_i p_i D(P_i || sum p_j P_j).
/// Zero up to round-off; +inf when a term diverges.
inline double pythagorean_residual(std::span<double const> weights,
                                   std::span<ExchDist const> components, ExchDist const &q)
{
  auto const m = mixture(weights, components);
  CompensatedSum s;
  for (std::size_t i = 0; i < components.size(); ++i)
  {
    if (weights[i] <= 0.0)
    {
      continue;
    }
    double const dq = kl_exch(components[i], q);
    double const dm = kl_exch(components[i], m);
    if (std::isinf(dq) || std::isinf(dm))
    {
      return kInf;
    }
    s.add(weights[i] * dq);
    s.add(-weights[i] * dm);
  }
  double const mq = kl_exch(m, q);
  if (std::isinf(mq))
  {
    return kInf;
  }
  s.add(-mq);
  return s.value();
}

struct ConverseTerms
{
  double mixture_error   = 0.0;  // D(sum_y w_y phi(y) || P_z^n)
  double component_error = 0.0;  // sum_y w_y D(phi(y) || P_z^n)
  double cond_mi         = 0.0;  // sum_y w_y D(phi(y) || sum_y' w_y' phi(y'))
  double residual        = 0.0;  // mixture - (component - cond_mi)
  double log_m           = 0.0;  // ln M_n
};

/// Splits the error of a code at z into the component error minus the
/// conditional mutual information between the sample and the code word.
/// Throws AccuracyError when the identity fails beyond 1e-9.
inline ConverseTerms converse_decomposition(Code const &code, ParamPoint const &z)
{
  auto const pz    = product_type_dist(code.family(), z, code.space());
  auto const lw    = code.spec().mode == Mode::blind ? code.encoder_log_weights(pz)
                                                     : code.encoder_log_weights(z);
  auto const recon = code.reconstruct(z, pz);

  ConverseTerms r;
  r.log_m         = code.code_length();
  r.mixture_error = kl_exch(recon, pz);
  CompensatedSum comp, cond;
  for (std::size_t y = 0; y < code.size(); ++y)
  {
    if (lw[y] == kNegInf)
    {
      continue;
    }
    double const w = std::exp(lw[y]);
    auto const dy  = code.decode(y);
    comp.add(w * kl_exch(dy, pz));
    cond.add(w * kl_exch(dy, recon));
  }
  r.component_error = comp.value();
  r.cond_mi         = cond.value();
  r.residual        = r.mixture_error - (r.component_error - r.cond_mi);
  if (!(std::abs(r.residual) <= 1e-9 * std::max(1.0, r.component_error)))
  {
    throw AccuracyError("converse_decomposition: identity violated by " +
                        std::to_string(r.residual) + " at z=" + to_string(z));
  }
  return r;
}

/// Kolmogorov distance between the exact law of sqrt(n) J_z^{1/2} (mle - z)
/// and the standard normal. For d > 1 the maximum over the whitened
/// coordinates is reported.
inline double lan_residual(Family const &family, ParamPoint const &z, std::size_t n)
{
  auto const J      = family.fisher(z);
  auto const space  = make_type_space(n, family.k());
  auto const pz     = product_type_dist(family, z, space);
  std::size_t const d = family.dim();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J.entries);
  Eigen::MatrixXd const root = eig.operatorSqrt();
  double const scale         = std::sqrt(static_cast<double>(n));

  std::vector<std::vector<std::pair<double, double>>> atoms(d);
  for (std::size_t t = 0; t < space->size(); ++t)
  {
    auto const mle = family.mle(space->type(t));
    Eigen::VectorXd dev(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i)
    {
      dev(static_cast<Eigen::Index>(i)) = mle[i] - z[i];
    }
    Eigen::VectorXd const w = scale * (root * dev);
    double const p          = pz.weight(t);
    for (std::size_t i = 0; i < d; ++i)
    {
      atoms[i].emplace_back(w(static_cast<Eigen::Index>(i)), p);
    }
  }

  double worst = 0.0;
  for (auto &a : atoms)
  {
    std::sort(a.begin(), a.end());
    CompensatedSum cdf;
    std::size_t i = 0;
    while (i < a.size())
    {
      double const x    = a[i].first;
      double const left = cdf.value();
      // merge atoms at the same location
      while (i < a.size() && a[i].first - x <= 1e-12 * std::max(1.0, std::abs(x)))
      {
        cdf.add(a[i].second);
        ++i;
      }
      double const phi = normal_cdf(x);
      worst            = std::max({worst, std::abs(left - phi), std::abs(cdf.value() - phi)});
    }
  }
  return std::clamp(worst, 0.0, 1.0);
}

/// Packing certificate for the variational error of every code of size M:
/// K = ceil(5M / alpha) equally spaced parameters with disjoint decision
/// intervals around them. If each P_{z_i}^n(D_i) >= 1 - alpha / 20 then no
/// size-M code reaches average variational error below 2 - alpha.
struct PackingWitness
{
  std::size_t m = 0;
  std::size_t n = 0;
  double alpha  = 0.0;
  std::size_t points      = 0;
  double half_width       = 0.0;
  std::vector<double> centres;
  std::vector<double> probabilities;
  double min_probability  = 0.0;
  double threshold        = 0.0;
  bool feasible           = false;
  bool certified          = false;
  double bound            = 0.0;  // certified lower bound, 0 when none
  std::string status;             // "certified", "not_certified" or "infeasible"
};

inline PackingWitness packing_witness(Family const &family, Support support, std::size_t M,
                                      std::size_t n, double alpha)
{
  if (family.dim() != 1)
  {
    throw std::invalid_argument("packing_witness: implemented for one-parameter families");
  }
  if (M < 1 || n < 1 || !(alpha > 0.0 && alpha < 2.0))
  {
    throw std::invalid_argument("packing_witness: need M >= 1, n >= 1, alpha in (0, 2)");
  }
  PackingWitness w;
  w.m      = M;
  w.n      = n;
  w.alpha  = alpha;
  w.points = static_cast<std::size_t>(std::ceil(5.0 * static_cast<double>(M) / alpha - 1e-12));
  double const lambda = support.hi - support.lo;
  double const gap    = lambda / static_cast<double>(w.points);
  w.half_width        = gap / 3.0;
  w.threshold         = 1.0 - alpha / 20.0;
  w.feasible          = true;
  w.min_probability   = 1.0;

  double const nn = static_cast<double>(n);
  for (std::size_t i = 0; i < w.points; ++i)
  {
    double const c = support.lo + (static_cast<double>(i) + 0.5) * gap;
    w.centres.push_back(c);
    auto const lo_c = static_cast<long long>(std::ceil((c - w.half_width) * nn - 1e-9));
    auto const hi_c = static_cast<long long>(std::floor((c + w.half_width) * nn + 1e-9));
    if (lo_c > hi_c)
    {
      w.feasible = false;
      w.probabilities.push_back(0.0);
      w.min_probability = 0.0;
      continue;
    }
    // binomial mass of [lo_c, hi_c] under Ber(c)^n, in log domain
    LogSumExp acc;
    double const lp1 = std::log(c);
    double const lp0 = std::log1p(-c);
    for (long long x = std::max(0LL, lo_c); x <= std::min<long long>(hi_c, static_cast<long long>(n)); ++x)
    {
      double const xx = static_cast<double>(x);
      acc.add(std::lgamma(nn + 1) - std::lgamma(xx + 1) - std::lgamma(nn - xx + 1) + xx * lp1 +
              (nn - xx) * lp0);
    }
    double const p = std::min(1.0, std::exp(acc.value()));
    w.probabilities.push_back(p);
    w.min_probability = std::min(w.min_probability, p);
  }
  if (!w.feasible)
  {
    w.status = "infeasible";
    return w;
  }
  w.certified = w.min_probability >= w.threshold;
  w.bound     = w.certified ? 2.0 - alpha : 0.0;
  w.status    = w.certified ? "certified" : "not_certified";
  return w;
}

/// The witness at the smallest alpha that certifies, i.e. the strongest
/// bound 2 - alpha this construction proves for size-M codes. Certification
/// is not monotone in alpha (K jumps), so a 400-point scan locates the first
/// certifying alpha and bisection refines it against its left neighbour.
/// Returns the witness at the largest scanned alpha when none certifies.
inline PackingWitness strongest_packing_witness(Family const &family, Support support,
                                                std::size_t M, std::size_t n,
                                                double tol = 1e-6)
{
  constexpr std::size_t kScan = 400;
  auto alpha_at = [](std::size_t i) { return 2.0 * static_cast<double>(i) / (kScan + 1.0); };
  for (std::size_t i = 1; i <= kScan; ++i)
  {
    if (!packing_witness(family, support, M, n, alpha_at(i)).certified)
    {
      continue;
    }
    double lo = alpha_at(i - 1);
    double hi = alpha_at(i);
    while (hi - lo > tol && lo > 0.0)
    {
      double const mid = 0.5 * (lo + hi);
      if (packing_witness(family, support, M, n, mid).certified)
      {
        hi = mid;
      }
      else
      {
        lo = mid;
      }
    }
    return packing_witness(family, support, M, n, hi);
  }
  return packing_witness(family, support, M, n, alpha_at(kScan));
}

}  // namespace asstat
