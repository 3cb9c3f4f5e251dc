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

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "asstat/errors.hpp"
#include "asstat/family.hpp"
#include "asstat/lattice.hpp"
#include "asstat/numeric.hpp"
#include "asstat/prior.hpp"
#include "asstat/typespace.hpp"

namespace asstat {

enum class Mode
{
  blind,
  visible,
};

enum class EncoderKind
{
  mdl_fisher,
  quantize_euclid,
};

enum class DecoderKind
{
  point,
  cell_mixture,
};

enum class Criterion
{
  relative_entropy,
  variational,
};

inline std::string to_string(Mode m)
{
  return m == Mode::blind ? "blind" : "visible";
}

inline std::string to_string(EncoderKind e)
{
  return e == EncoderKind::mdl_fisher ? "mdl_fisher" : "quantize_euclid";
}

inline std::string to_string(DecoderKind d)
{
  return d == DecoderKind::point ? "point" : "cell_mixture";
}

inline std::string to_string(Criterion c)
{
  return c == Criterion::relative_entropy ? "relative_entropy" : "variational";
}

inline Mode parse_mode(std::string const &s)
{
  if (s == "blind")
  {
    return Mode::blind;
  }
  if (s == "visible")
  {
    return Mode::visible;
  }
  throw ConfigError("unknown mode '" + s + "' (blind|visible)");
}

inline EncoderKind parse_encoder(std::string const &s)
{
  if (s == "mdl_fisher")
  {
    return EncoderKind::mdl_fisher;
  }
  if (s == "quantize_euclid")
  {
    return EncoderKind::quantize_euclid;
  }
  throw ConfigError("unknown encoder '" + s + "' (mdl_fisher|quantize_euclid)");
}

inline DecoderKind parse_decoder(std::string const &s)
{
  if (s == "point")
  {
    return DecoderKind::point;
  }
  if (s == "cell_mixture")
  {
    return DecoderKind::cell_mixture;
  }
  throw ConfigError("unknown decoder '" + s + "' (point|cell_mixture)");
}

inline Criterion parse_criterion(std::string const &s)
{
  if (s == "relative_entropy")
  {
    return Criterion::relative_entropy;
  }
  if (s == "variational")
  {
    return Criterion::variational;
  }
  throw ConfigError("unknown criterion '" + s + "' (relative_entropy|variational)");
}

inline Metric metric_of(EncoderKind e)
{
  return e == EncoderKind::mdl_fisher ? Metric::fisher : Metric::euclid;
}

/// Shortest round-trip decimal form; stable across runs and platforms.
inline std::string format_double(double x)
{
  if (std::isnan(x))
  {
    return "nan";
  }
  if (std::isinf(x))
  {
    return x > 0 ? "inf" : "-inf";
  }
  char buf[64];
  auto const res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

struct CodeSpec
{
  Mode mode           = Mode::blind;
  EncoderKind encoder = EncoderKind::quantize_euclid;
  DecoderKind decoder = DecoderKind::point;
  double t            = 1.0;
};

/// One code of the lattice family: encoder, decoder and the grid Z_{n,t}.
/// With an exact type space the cell of every type is precomputed; the
/// cell-mixture decoder drops lattice points whose cell is empty, since no
/// sample can reach them.
class Code
{
public:
  Code(Family family, CodeSpec spec, std::size_t n,
       std::size_t threshold = TypeSpace::kDefaultExactThreshold)
    : family_(family)
    , spec_(spec)
    , n_(n)
    , lattice_(Lattice::build(family, n, spec.t))
  {
    if (TypeSpace::count_types(n, family.k()) <= static_cast<double>(threshold))
    {
      space_ = make_type_space(n, family.k(), threshold);
      cell_of_ = assign_cells(lattice_, *space_, metric());
      if (spec_.decoder == DecoderKind::cell_mixture)
      {
        std::vector<bool> keep(lattice_.size(), false);
        for (auto c : cell_of_)
        {
          keep[c] = true;
        }
        std::vector<std::size_t> remap(lattice_.size(), 0);
        std::size_t next = 0;
        for (std::size_t i = 0; i < keep.size(); ++i)
        {
          remap[i] = keep[i] ? next++ : 0;
        }
        lattice_ = lattice_.restricted(keep);
        for (auto &c : cell_of_)
        {
          c = remap[c];
        }
      }
      cells_.assign(lattice_.size(), {});
      for (std::size_t t = 0; t < cell_of_.size(); ++t)
      {
        cells_[cell_of_[t]].push_back(t);
      }
    }
    else if (spec_.decoder == DecoderKind::cell_mixture)
    {
      throw SizeError("Code: the cell-mixture decoder needs an exact type space");
    }

    point_log_pmf_.reserve(lattice_.size());
    for (auto const &y : lattice_.points())
    {
      point_log_pmf_.push_back(family_.log_pmf(y));
    }
  }

  Family const &family() const
  {
    return family_;
  }
  CodeSpec const &spec() const
  {
    return spec_;
  }
  std::size_t n() const
  {
    return n_;
  }
  Lattice const &lattice() const
  {
    return lattice_;
  }
  Metric metric() const
  {
    return metric_of(spec_.encoder);
  }

  /// Memory size M_n.
  std::size_t size() const
  {
    return lattice_.size();
  }
  double code_length() const
  {
    return lattice_.code_length();
  }

  bool exact() const
  {
    return space_ != nullptr;
  }

  TypeSpacePtr const &space() const
  {
    if (!space_)
    {
      throw SizeError("Code: type space exceeds the exact threshold");
    }
    return space_;
  }

  /// Lattice position the type at `type_pos` is encoded to.
  std::size_t cell_of(std::size_t type_pos) const
  {
    space();
    return cell_of_.at(type_pos);
  }

  /// Type positions in the cell of lattice point `point`, ascending.
  std::vector<std::size_t> const &cell(std::size_t point) const
  {
    space();
    return cells_.at(point);
  }

  std::size_t encode_blind(TypeIndex const &type) const
  {
    if (type.k() != family_.k() || type.n() != n_)
    {
      throw std::invalid_argument("encode_blind: type does not match the code");
    }
    if (space_)
    {
      return cell_of_[space_->index_of(type)];
    }
    return lattice_.quantize(family_.mle(type), metric());
  }

  std::size_t encode_visible(ParamPoint const &z) const
  {
    family_.require_domain(z, "encode_visible");
    return lattice_.quantize(z, metric());
  }

  ExchDist decode_point(std::size_t point) const
  {
    return product_type_dist(family_, lattice_.point(point), space());
  }

  ExchDist decode_cell_mixture(std::size_t point) const
  {
    auto const &members = cell(point);
    if (members.empty())
    {
      throw ConstructionError("decode_cell_mixture: lattice point " + std::to_string(point) +
                              " is unreachable (empty cell)");
    }
    return ExchDist::uniform_over(space(), members);
  }

  ExchDist decode(std::size_t point) const
  {
    return spec_.decoder == DecoderKind::point ? decode_point(point) : decode_cell_mixture(point);
  }

  /// log P(Y = y | z) for every lattice point y. Blind: the P_z^n mass of
  /// the cell of y. Visible: a point mass at encode_visible(z).
  std::vector<double> encoder_log_weights(ParamPoint const &z) const
  {
    if (spec_.mode == Mode::visible)
    {
      std::vector<double> lw(size(), kNegInf);
      lw[encode_visible(z)] = 0.0;
      return lw;
    }
    return encoder_log_weights(product_type_dist(family_, z, space()));
  }

  std::vector<double> encoder_log_weights(ExchDist const &pz) const
  {
    std::vector<LogSumExp> acc(size());
    for (std::size_t t = 0; t < pz.size(); ++t)
    {
      acc[cell_of(t)].add(pz.log_weight(t));
    }
    std::vector<double> lw(size());
    for (std::size_t y = 0; y < size(); ++y)
    {
      lw[y] = acc[y].value();
    }
    return lw;
  }

  /// The reconstructed distribution sum_y P(Y=y|z) decode(y) on type space.
  ExchDist reconstruct(ParamPoint const &z) const
  {
    return reconstruct(z, product_type_dist(family_, z, space()));
  }

  /// Same, reusing pz = P_z^n.
  ExchDist reconstruct(ParamPoint const &z, ExchDist const &pz) const
  {
    if (spec_.mode == Mode::visible)
    {
      return decode(encode_visible(z));
    }
    auto const lw = encoder_log_weights(pz);
    TypeSpace const &S = *space();
    std::vector<double> out(S.size(), kNegInf);
    if (spec_.decoder == DecoderKind::cell_mixture)
    {
      for (std::size_t t = 0; t < S.size(); ++t)
      {
        std::size_t const y = cell_of_[t];
        out[t] = lw[y] - std::log(static_cast<double>(cells_[y].size()));
      }
      return ExchDist(space_, std::move(out));
    }
    std::vector<LogSumExp> acc(S.size());
    for (std::size_t y = 0; y < size(); ++y)
    {
      if (lw[y] == kNegInf)
      {
        continue;
      }
      auto const &lp = point_log_pmf_[y];
      for (std::size_t t = 0; t < S.size(); ++t)
      {
        acc[t].add(lw[y] + S.log_size(t) + dot_counts(S.counts(t), lp));
      }
    }
    for (std::size_t t = 0; t < S.size(); ++t)
    {
      out[t] = acc[t].value();
    }
    return ExchDist(space_, std::move(out));
  }

  /// log P_y^n(type) for the decoder's product distribution at point y.
  double point_log_weight(std::size_t y, TypeIndex const &type) const
  {
    return log_multinomial(type.counts) + dot_counts(type.counts, point_log_pmf_[y]);
  }

private:
  static double dot_counts(std::span<std::uint32_t const> c, std::vector<double> const &lp)
  {
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
    {
      if (c[i] > 0)
      {
        s += static_cast<double>(c[i]) * lp[i];
      }
    }
    return s;
  }

  Family family_;
  CodeSpec spec_;
  std::size_t n_;
  Lattice lattice_;
  TypeSpacePtr space_;
  std::vector<std::size_t> cell_of_;
  std::vector<std::vector<std::size_t>> cells_;
  std::vector<std::vector<double>> point_log_pmf_;
};

/// Pointwise error at one prior node.
struct NodeError
{
  ParamPoint z;
  double weight    = 0.0;
  double value     = 0.0;
  double component = 0.0;  // sum_y P(Y=y|z) F(decode(y), P_z^n)
  double std_error = 0.0;  // Monte Carlo only
};

/// Average error of one code at one n under one criterion.
struct ErrorReport
{
  Criterion criterion = Criterion::relative_entropy;
  double value        = 0.0;
  /// Prior average of the per-node component values: the average error of
  /// the decoder output before mixing over the encoder's randomness. By
  /// convexity it bounds `value` from above.
  double component_value  = 0.0;
  double std_error        = 0.0;
  double code_length_nats = 0.0;
  std::size_t n           = 0;
  std::size_t k           = 0;
  double t                = std::numeric_limits<double>::quiet_NaN();
  std::string mode;
  std::string encoder;
  std::string decoder;
  std::size_t quadrature_nodes = 0;
  bool exact                   = true;
  bool feasible                = true;  // false: no exact or Monte Carlo evaluation applies
  std::uint64_t seed           = 0;
  std::vector<NodeError> nodes;
};

inline constexpr char const *kErrorCsvHeader =
    "n,k,t,mode,encoder,decoder,criterion,error_nats_or_l1,code_length_nats,quadrature_nodes,"
    "exact_or_mc,seed";

inline std::string csv_row(ErrorReport const &r)
{
  return std::to_string(r.n) + ',' + std::to_string(r.k) + ',' + format_double(r.t) + ',' +
         r.mode + ',' + r.encoder + ',' + r.decoder + ',' + to_string(r.criterion) + ',' +
         format_double(r.value) + ',' + format_double(r.code_length_nats) + ',' +
         std::to_string(r.quadrature_nodes) + ',' + (!r.feasible ? "infeasible" : r.exact ? "exact" : "mc") + ',' +
         std::to_string(r.seed);
}

inline void write_csv(std::ostream &os, std::span<ErrorReport const> reports, bool header = true)
{
  if (header)
  {
    os << kErrorCsvHeader << '\n';
  }
  for (auto const &r : reports)
  {
    os << csv_row(r) << '\n';
  }
}

struct EvalOptions
{
  std::size_t workers    = 1;
  std::size_t mc_samples = 20000;
  std::uint64_t seed     = 0;
  bool components        = true;
};

inline double divergence(Criterion c, ExchDist const &q, ExchDist const &p)
{
  return c == Criterion::relative_entropy ? kl_exch(q, p) : l1_exch(q, p);
}

namespace detail {

struct NodeResult
{
  std::vector<double> value;
  std::vector<double> component;
  std::vector<double> std_error;
};

/// Nodes and weights of the prior integral; weights include the density.
struct QuadRule
{
  std::vector<ParamPoint> nodes;
  std::vector<double> weights;

  std::size_t size() const
  {
    return nodes.size();
  }
};

inline QuadRule prior_rule(Prior const &prior)
{
  return {prior.nodes(), prior.weights()};
}

/// Composite Gauss-Legendre rule on a one-dimensional support split at
/// `breaks`. Visible encoders are piecewise constant in z, so the per-node
/// error has kinks at cell boundaries; blind errors are smooth but ripple
/// with the lattice spacing. One piece per cell resolves both.
inline QuadRule piecewise_rule(Prior const &prior, std::vector<double> breaks)
{
  Support const s = prior.support();
  std::vector<double> cuts{s.lo};
  std::sort(breaks.begin(), breaks.end());
  for (double b : breaks)
  {
    if (b > cuts.back() + 1e-12 && b < s.hi - 1e-12)
    {
      cuts.push_back(b);
    }
  }
  cuts.push_back(s.hi);

  // at least a quarter of the prior's node count per piece, and no fewer
  // nodes in total than the prior, rounded up to a supported size
  std::size_t const pieces = cuts.size() - 1;
  std::size_t const want   = std::max((prior.nodes_per_dim() + 3) / 4,
                                      (prior.nodes_per_dim() + pieces - 1) / pieces);
  std::size_t per = 8;
  for (std::size_t m : {8, 16, 32, 48, 64, 96, 128, 256})
  {
    per = m;
    if (m >= want)
    {
      break;
    }
  }
  Rule1D const base = gauss_legendre(per);
  QuadRule r;
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j)
  {
    double const a = cuts[j];
    double const h = cuts[j + 1] - a;
    for (std::size_t i = 0; i < base.nodes.size(); ++i)
    {
      ParamPoint z{a + h * base.nodes[i]};
      r.weights.push_back(h * base.weights[i] * prior.density(z));
      r.nodes.push_back(std::move(z));
    }
  }
  return r;
}

inline std::vector<ErrorReport> aggregate(std::vector<NodeResult> const &res, QuadRule const &rule,
                                          std::span<Criterion const> criteria,
                                          ErrorReport const &proto)
{
  std::vector<ErrorReport> out;
  for (std::size_t c = 0; c < criteria.size(); ++c)
  {
    ErrorReport r = proto;
    r.criterion   = criteria[c];
    CompensatedSum v, comp, var;
    for (std::size_t i = 0; i < res.size(); ++i)
    {
      double const w = rule.weights[i];
      v.add(w * res[i].value[c]);
      comp.add(w * res[i].component[c]);
      var.add(w * w * res[i].std_error[c] * res[i].std_error[c]);
      r.nodes.push_back(NodeError{rule.nodes[i], w, res[i].value[c], res[i].component[c],
                                  res[i].std_error[c]});
    }
    r.value           = v.value();
    r.component_value = comp.value();
    r.std_error       = std::sqrt(std::max(0.0, var.value()));
    if (r.criterion == Criterion::variational)
    {
      r.value = std::clamp(r.value, 0.0, 2.0);
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace detail

/// Evaluates the prior-averaged error of `code` under each criterion by
/// quadrature over the prior nodes, sharing one reconstruction per node.
inline std::vector<ErrorReport> evaluate(Code const &code, Prior const &prior,
                                         std::span<Criterion const> criteria,
                                         EvalOptions const &opts = {})
{
  if (!(prior.family() == code.family()))
  {
    throw std::invalid_argument("evaluate: prior and code use different families");
  }
  ErrorReport proto;
  proto.code_length_nats = code.code_length();
  proto.n                = code.n();
  proto.k                = code.family().k();
  proto.t                = code.spec().t;
  proto.mode             = to_string(code.spec().mode);
  proto.encoder          = to_string(code.spec().encoder);
  proto.decoder          = to_string(code.spec().decoder);
  detail::QuadRule rule = detail::prior_rule(prior);
  if (code.spec().mode == Mode::visible && code.family().dim() == 1)
  {
    std::vector<double> breaks;
    auto const &pts = code.lattice().points();
    for (std::size_t j = 0; j < pts.size(); ++j)
    {
      // the variational error has a |z - y| kink at the point itself
      breaks.push_back(pts[j][0]);
      if (j + 1 < pts.size())
      {
        breaks.push_back(0.5 * (pts[j][0] + pts[j + 1][0]));
      }
    }
    rule = detail::piecewise_rule(prior, std::move(breaks));
  }
  proto.quadrature_nodes = rule.size();
  proto.exact            = code.exact();
  proto.seed             = opts.seed;

  std::size_t const nc = criteria.size();
  std::vector<detail::NodeResult> res(rule.size());

  if (!code.exact())
  {
    if (code.spec().mode != Mode::visible || code.spec().decoder != DecoderKind::point)
    {
      throw SizeError("evaluate: only visible point codes have a Monte Carlo estimator");
    }
    parallel_for(rule.size(), opts.workers, [&](std::size_t i) {
      ParamPoint const &z = rule.nodes[i];
      std::size_t const y = code.encode_visible(z);
      auto const est      = mc_divergences(
          code.family(), z, static_cast<std::uint32_t>(code.n()),
          [&](TypeIndex const &type) { return code.point_log_weight(y, type); }, opts.mc_samples,
          opts.seed + i);
      auto &r = res[i];
      for (auto c : criteria)
      {
        bool const kl = c == Criterion::relative_entropy;
        r.value.push_back(kl ? est.kl : est.l1);
        r.component.push_back(kl ? est.kl : est.l1);
        r.std_error.push_back(kl ? est.kl_se : est.l1_se);
      }
    });
    return detail::aggregate(res, rule, criteria, proto);
  }

  parallel_for(rule.size(), opts.workers, [&](std::size_t i) {
    ParamPoint const &z = rule.nodes[i];
    auto const pz       = product_type_dist(code.family(), z, code.space());
    auto const recon    = code.reconstruct(z, pz);
    auto &r             = res[i];
    r.std_error.assign(nc, 0.0);
    for (auto c : criteria)
    {
      r.value.push_back(divergence(c, recon, pz));
    }
    if (code.spec().mode == Mode::visible || !opts.components)
    {
      r.component = r.value;
      return;
    }
    auto const lw = code.encoder_log_weights(pz);
    std::vector<CompensatedSum> comp(nc);
    for (std::size_t y = 0; y < code.size(); ++y)
    {
      if (lw[y] == kNegInf)
      {
        continue;
      }
      auto const dy  = code.decode(y);
      double const w = std::exp(lw[y]);
      for (std::size_t c = 0; c < nc; ++c)
      {
        comp[c].add(w * divergence(criteria[c], dy, pz));
      }
    }
    for (auto const &s : comp)
    {
      r.component.push_back(s.value());
    }
  });
  return detail::aggregate(res, rule, criteria, proto);
}

inline ErrorReport error(Code const &code, Prior const &prior, Criterion criterion,
                         EvalOptions const &opts = {})
{
  Criterion const c[] = {criterion};
  return evaluate(code, prior, c, opts).front();
}

/// The Bayes mixture sum_j w_j P_{z_j}^n over the prior nodes.
inline ExchDist bayes_mixture(Family const &family, Prior const &prior, TypeSpacePtr space)
{
  std::vector<LogSumExp> acc(space->size());
  for (std::size_t j = 0; j < prior.size(); ++j)
  {
    double const lw = std::log(prior.weight(j));
    auto const pz   = product_type_dist(family, prior.node(j), space);
    for (std::size_t t = 0; t < space->size(); ++t)
    {
      acc[t].add(lw + pz.log_weight(t));
    }
  }
  std::vector<double> out(space->size());
  for (std::size_t t = 0; t < out.size(); ++t)
  {
    out[t] = acc[t].value();
  }
  return ExchDist(std::move(space), std::move(out));
}

/// A visible point code with an arbitrary codebook: the encoder sends the
/// codeword y minimising D(P_y || P_z) and the decoder outputs P_y^n.
class PointCodebook
{
public:
  PointCodebook(Family family, std::vector<ParamPoint> points)
    : family_(family)
    , points_(std::move(points))
  {
    if (points_.empty())
    {
      throw ConstructionError("PointCodebook: empty codebook");
    }
    for (auto const &p : points_)
    {
      family_.require_domain(p, "PointCodebook");
    }
  }

  Family const &family() const
  {
    return family_;
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
  double code_length() const
  {
    return std::log(static_cast<double>(size()));
  }

  /// Smallest index attaining min_y kl(y, z).
  std::size_t encode(ParamPoint const &z) const
  {
    std::size_t best = 0;
    double best_d    = kInf;
    for (std::size_t i = 0; i < points_.size(); ++i)
    {
      double const d = family_.kl(points_[i], z);
      if (d < best_d)
      {
        best   = i;
        best_d = d;
      }
    }
    return best;
  }

private:
  Family family_;
  std::vector<ParamPoint> points_;
};

/// Lloyd iteration for the codebook of size M minimising the prior average
/// of kl(y(z), z), which is 1/n times the visible relative-entropy error of
/// the point decoder at every n. The codeword update is the normalised
/// geometric mean of the cell's pmfs, the exact minimiser of the weighted
/// divergence. Starts from prior quantiles.
inline PointCodebook optimize_codebook(Family const &family, Prior const &prior, std::size_t M,
                                       std::size_t max_iter = 500, double tol = 1e-13)
{
  if (M < 1)
  {
    throw std::invalid_argument("optimize_codebook: M must be >= 1");
  }
  std::size_t const d = family.dim();
  std::size_t const k = family.k();

  std::vector<ParamPoint> cb;
  {
    // quantiles of the first coordinate; remaining coordinates at the prior mean
    std::vector<std::pair<double, double>> mass;
    ParamPoint mean;
    mean.coords.assign(d, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < prior.size(); ++i)
    {
      mass.emplace_back(prior.node(i)[0], prior.weight(i));
      for (std::size_t j = 0; j < d; ++j)
      {
        mean[j] += prior.weight(i) * prior.node(i)[j];
      }
      total += prior.weight(i);
    }
    for (auto &m : mean.coords)
    {
      m /= total;
    }
    std::sort(mass.begin(), mass.end());
    double acc      = 0.0;
    std::size_t pos = 0;
    for (std::size_t m = 0; m < M; ++m)
    {
      double const target = (static_cast<double>(m) + 0.5) / static_cast<double>(M) * total;
      while (pos + 1 < mass.size() && acc + mass[pos].second < target)
      {
        acc += mass[pos].second;
        ++pos;
      }
      ParamPoint p = mean;
      p[0]         = mass[pos].first;
      if (!family.in_domain(p))
      {
        p = mean;
      }
      cb.push_back(p);
    }
  }

  std::vector<std::vector<double>> logp(prior.size());
  for (std::size_t i = 0; i < prior.size(); ++i)
  {
    logp[i] = family.log_pmf(prior.node(i));
  }

  double prev = kInf;
  for (std::size_t iter = 0; iter < max_iter; ++iter)
  {
    PointCodebook book(family, cb);
    std::vector<std::vector<CompensatedSum>> num(M, std::vector<CompensatedSum>(k));
    std::vector<double> den(M, 0.0);
    CompensatedSum distortion;
    for (std::size_t i = 0; i < prior.size(); ++i)
    {
      std::size_t const y = book.encode(prior.node(i));
      double const w      = prior.weight(i);
      distortion.add(w * family.kl(cb[y], prior.node(i)));
      den[y] += w;
      for (std::size_t s = 0; s < k; ++s)
      {
        num[y][s].add(w * logp[i][s]);
      }
    }
    for (std::size_t m = 0; m < M; ++m)
    {
      if (den[m] <= 0.0)
      {
        continue;  // keep an empty codeword where it is
      }
      std::vector<double> g(k);
      for (std::size_t s = 0; s < k; ++s)
      {
        g[s] = num[m][s].value() / den[m];
      }
      double const lse = log_sum_exp(g);
      std::vector<double> p(k);
      for (std::size_t s = 0; s < k; ++s)
      {
        p[s] = std::exp(g[s] - lse);
      }
      cb[m] = family.from_cell_probabilities(family.project_to_margin(std::move(p)));
    }
    double const cur = distortion.value();
    if (std::abs(prev - cur) <= tol * std::max(1.0, cur))
    {
      break;
    }
    prev = cur;
  }
  std::sort(cb.begin(), cb.end());
  return PointCodebook(family, std::move(cb));
}

/// Visible error of a point codebook at sample size n.
inline std::vector<ErrorReport> evaluate(PointCodebook const &book, std::size_t n,
                                         Prior const &prior, std::span<Criterion const> criteria,
                                         EvalOptions const &opts = {},
                                         std::size_t threshold = TypeSpace::kDefaultExactThreshold)
{
  Family const &family = book.family();
  ErrorReport proto;
  proto.code_length_nats = book.code_length();
  proto.n                = n;
  proto.k                = family.k();
  proto.mode             = "visible";
  proto.encoder          = "codebook_kl";
  proto.decoder          = "point";
  // in one dimension the KL cells of y_a < y_b meet where
  // logit z = (H(y_a) - H(y_b)) / (y_b - y_a)
  detail::QuadRule rule = detail::prior_rule(prior);
  if (family.dim() == 1)
  {
    std::vector<double> ys;
    for (auto const &p : book.points())
    {
      ys.push_back(p[0]);
    }
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    auto entropy = [](double y) { return -y * std::log(y) - (1 - y) * std::log1p(-y); };
    std::vector<double> breaks;
    for (std::size_t j = 0; j + 1 < ys.size(); ++j)
    {
      double const logit = (entropy(ys[j]) - entropy(ys[j + 1])) / (ys[j + 1] - ys[j]);
      breaks.push_back(1.0 / (1.0 + std::exp(-logit)));
    }
    breaks.insert(breaks.end(), ys.begin(), ys.end());
    rule = detail::piecewise_rule(prior, std::move(breaks));
  }
  proto.quadrature_nodes = rule.size();
  proto.seed             = opts.seed;

  std::vector<detail::NodeResult> res(rule.size());
  bool const exact = TypeSpace::count_types(n, family.k()) <= static_cast<double>(threshold);
  proto.exact      = exact;
  TypeSpacePtr space = exact ? make_type_space(n, family.k(), threshold) : nullptr;

  parallel_for(rule.size(), opts.workers, [&](std::size_t i) {
    ParamPoint const &z = rule.nodes[i];
    ParamPoint const &y = book.point(book.encode(z));
    auto &r             = res[i];
    if (exact)
    {
      auto const pz = product_type_dist(family, z, space);
      auto const py = product_type_dist(family, y, space);
      for (auto c : criteria)
      {
        r.value.push_back(divergence(c, py, pz));
        r.std_error.push_back(0.0);
      }
    }
    else
    {
      auto const lp = family.log_pmf(y);
      auto const est =
          mc_divergences(family, z, static_cast<std::uint32_t>(n),
                         [&](TypeIndex const &type) {
                           double s = log_multinomial(type.counts);
                           for (std::size_t j = 0; j < lp.size(); ++j)
                           {
                             s += static_cast<double>(type.counts[j]) * lp[j];
                           }
                           return s;
                         },
                         opts.mc_samples, opts.seed + i);
      for (auto c : criteria)
      {
        bool const kl = c == Criterion::relative_entropy;
        r.value.push_back(kl ? est.kl : est.l1);
        r.std_error.push_back(kl ? est.kl_se : est.l1_se);
      }
    }
    r.component = r.value;
  });
  return detail::aggregate(res, rule, criteria, proto);
}

}  // namespace asstat
