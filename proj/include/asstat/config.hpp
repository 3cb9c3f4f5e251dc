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

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/algorithm/string/split.hpp>
#include <boost/algorithm/string/trim.hpp>
#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "asstat/codec.hpp"
#include "asstat/errors.hpp"
#include "asstat/prior.hpp"

namespace asstat {

struct CodeEntry
{
  Mode mode           = Mode::blind;
  EncoderKind encoder = EncoderKind::quantize_euclid;
  DecoderKind decoder = DecoderKind::point;

  friend bool operator==(CodeEntry const &, CodeEntry const &) = default;
};

inline std::string to_string(CodeEntry const &c)
{
  return to_string(c.mode) + "/" + to_string(c.encoder) + "/" + to_string(c.decoder);
}

/// Every experiment knob. Defaults reproduce the reference runs; a config
/// file overrides individual keys (section.key).
struct ExperimentConfig
{
  // [family]
  std::size_t k = 2;
  double eps_bd = Family::kDefaultMargin;

  // [prior]
  PriorKind prior_kind    = PriorKind::uniform;
  Support support         = {0.1, 0.9};
  std::size_t prior_nodes = Prior::kDefaultNodes;

  // [sweep]
  std::vector<std::size_t> n_list = {64, 256, 1024, 4096};
  std::vector<double> t_list      = {1.0};
  std::vector<CodeEntry> codes    = {
      {Mode::blind, EncoderKind::mdl_fisher, DecoderKind::point},
      {Mode::visible, EncoderKind::quantize_euclid, DecoderKind::point},
      {Mode::blind, EncoderKind::quantize_euclid, DecoderKind::cell_mixture},
  };
  std::vector<Criterion> criteria = {Criterion::relative_entropy, Criterion::variational};

  // [run]
  std::uint64_t seed            = 0;
  std::size_t exact_threshold   = TypeSpace::kDefaultExactThreshold;
  std::size_t mc_samples        = 20000;

  // [clarke_barron]
  std::vector<std::size_t> cb_n = {64, 256, 1024};
  double cb_eps_bd              = 0.0;
  Support cb_support            = {0.0, 1.0};

  // [converse]
  std::vector<std::size_t> divergence_n = {64, 256, 1024, 4096};
  double divergence_exponent            = 0.25;
  std::size_t packing_m                 = 1;
  std::size_t packing_n                 = 1024;
  double packing_alpha                  = 1.0;
  std::vector<std::size_t> packing_sweep_n = {256, 1024, 4096};
  std::size_t decomposition_n           = 64;
  double decomposition_t                = 1.0;

  // [pythagoras]
  std::vector<std::size_t> pythagoras_n = {4, 8, 16};
  std::size_t pythagoras_instances      = 100;

  // [quantized_gaussian]
  std::vector<double> qg_t = {0.8, 0.4, 0.2, 0.1};

  Family family() const
  {
    return Family(k, eps_bd);
  }

  Prior prior() const
  {
    return Prior(family(), support, prior_kind, prior_nodes);
  }
};

namespace detail {

inline std::vector<std::string> split_list(std::string const &s)
{
  std::vector<std::string> parts;
  std::string trimmed = boost::algorithm::trim_copy(s);
  if (trimmed.empty())
  {
    return parts;
  }
  boost::algorithm::split(parts, trimmed, [](char c) { return c == ','; });
  for (auto &p : parts)
  {
    boost::algorithm::trim(p);
    if (p.empty())
    {
      throw ConfigError("empty entry in list '" + s + "'");
    }
  }
  return parts;
}

template <typename T>
T parse_value(std::string const &key, std::string const &s)
{
  try
  {
    return boost::lexical_cast<T>(boost::algorithm::trim_copy(s));
  }
  catch (boost::bad_lexical_cast const &)
  {
    throw ConfigError("bad value '" + s + "' for " + key);
  }
}

template <typename T>
std::vector<T> parse_list(std::string const &key, std::string const &s)
{
  std::vector<T> out;
  for (auto const &p : split_list(s))
  {
    out.push_back(parse_value<T>(key, p));
  }
  return out;
}

inline CodeEntry parse_code(std::string const &s)
{
  std::vector<std::string> parts;
  boost::algorithm::split(parts, s, [](char c) { return c == '/'; });
  if (parts.size() != 3)
  {
    throw ConfigError("code '" + s + "' must read mode/encoder/decoder");
  }
  return {parse_mode(parts[0]), parse_encoder(parts[1]), parse_decoder(parts[2])};
}

}  // namespace detail

/// Parses an INI document. Unknown sections or keys are rejected so that a
/// typo never silently falls back to a default.
inline ExperimentConfig parse_config(std::istream &in)
{
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try
  {
    pt::read_ini(in, tree);
  }
  catch (pt::ini_parser_error const &e)
  {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }

  static std::map<std::string, std::set<std::string>> const known = {
      {"family", {"k", "eps_bd"}},
      {"prior", {"kind", "lo", "hi", "nodes"}},
      {"sweep", {"n", "t", "codes", "criteria"}},
      {"run", {"seed", "exact_threshold", "mc_samples"}},
      {"clarke_barron", {"n", "eps_bd", "lo", "hi"}},
      {"converse",
       {"divergence_n", "divergence_exponent", "packing_m", "packing_n", "packing_alpha",
        "packing_sweep_n", "decomposition_n", "decomposition_t"}},
      {"pythagoras", {"n", "instances"}},
      {"quantized_gaussian", {"t"}},
  };
  for (auto const &[section, body] : tree)
  {
    auto const it = known.find(section);
    if (it == known.end())
    {
      throw ConfigError("unknown config section [" + section + "]");
    }
    for (auto const &[key, value] : body)
    {
      if (!it->second.count(key))
      {
        throw ConfigError("unknown config key " + section + "." + key);
      }
    }
  }

  ExperimentConfig c;
  auto get = [&](std::string const &path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(path))
    {
      return *v;
    }
    return std::nullopt;
  };
  using detail::parse_list;
  using detail::parse_value;

  if (auto v = get("family.k"))
  {
    c.k = parse_value<std::size_t>("family.k", *v);
  }
  if (auto v = get("family.eps_bd"))
  {
    c.eps_bd = parse_value<double>("family.eps_bd", *v);
  }
  if (auto v = get("prior.kind"))
  {
    std::string const kind = boost::algorithm::trim_copy(*v);
    if (kind == "uniform")
    {
      c.prior_kind = PriorKind::uniform;
    }
    else if (kind == "jeffreys")
    {
      c.prior_kind = PriorKind::jeffreys;
    }
    else
    {
      throw ConfigError("prior.kind must be uniform or jeffreys");
    }
  }
  if (auto v = get("prior.lo"))
  {
    c.support.lo = parse_value<double>("prior.lo", *v);
  }
  if (auto v = get("prior.hi"))
  {
    c.support.hi = parse_value<double>("prior.hi", *v);
  }
  if (auto v = get("prior.nodes"))
  {
    c.prior_nodes = parse_value<std::size_t>("prior.nodes", *v);
  }
  if (auto v = get("sweep.n"))
  {
    c.n_list = parse_list<std::size_t>("sweep.n", *v);
  }
  if (auto v = get("sweep.t"))
  {
    c.t_list = parse_list<double>("sweep.t", *v);
  }
  if (auto v = get("sweep.codes"))
  {
    c.codes.clear();
    for (auto const &s : detail::split_list(*v))
    {
      c.codes.push_back(detail::parse_code(s));
    }
  }
  if (auto v = get("sweep.criteria"))
  {
    c.criteria.clear();
    for (auto const &s : detail::split_list(*v))
    {
      c.criteria.push_back(parse_criterion(s));
    }
  }
  if (auto v = get("run.seed"))
  {
    c.seed = parse_value<std::uint64_t>("run.seed", *v);
  }
  if (auto v = get("run.exact_threshold"))
  {
    c.exact_threshold = parse_value<std::size_t>("run.exact_threshold", *v);
  }
  if (auto v = get("run.mc_samples"))
  {
    c.mc_samples = parse_value<std::size_t>("run.mc_samples", *v);
  }
  if (auto v = get("clarke_barron.n"))
  {
    c.cb_n = parse_list<std::size_t>("clarke_barron.n", *v);
  }
  if (auto v = get("clarke_barron.eps_bd"))
  {
    c.cb_eps_bd = parse_value<double>("clarke_barron.eps_bd", *v);
  }
  if (auto v = get("clarke_barron.lo"))
  {
    c.cb_support.lo = parse_value<double>("clarke_barron.lo", *v);
  }
  if (auto v = get("clarke_barron.hi"))
  {
    c.cb_support.hi = parse_value<double>("clarke_barron.hi", *v);
  }
  if (auto v = get("converse.divergence_n"))
  {
    c.divergence_n = parse_list<std::size_t>("converse.divergence_n", *v);
  }
  if (auto v = get("converse.divergence_exponent"))
  {
    c.divergence_exponent = parse_value<double>("converse.divergence_exponent", *v);
  }
  if (auto v = get("converse.packing_m"))
  {
    c.packing_m = parse_value<std::size_t>("converse.packing_m", *v);
  }
  if (auto v = get("converse.packing_n"))
  {
    c.packing_n = parse_value<std::size_t>("converse.packing_n", *v);
  }
  if (auto v = get("converse.packing_alpha"))
  {
    c.packing_alpha = parse_value<double>("converse.packing_alpha", *v);
  }
  if (auto v = get("converse.packing_sweep_n"))
  {
    c.packing_sweep_n = parse_list<std::size_t>("converse.packing_sweep_n", *v);
  }
  if (auto v = get("converse.decomposition_n"))
  {
    c.decomposition_n = parse_value<std::size_t>("converse.decomposition_n", *v);
  }
  if (auto v = get("converse.decomposition_t"))
  {
    c.decomposition_t = parse_value<double>("converse.decomposition_t", *v);
  }
  if (auto v = get("pythagoras.n"))
  {
    c.pythagoras_n = parse_list<std::size_t>("pythagoras.n", *v);
  }
  if (auto v = get("pythagoras.instances"))
  {
    c.pythagoras_instances = parse_value<std::size_t>("pythagoras.instances", *v);
  }
  if (auto v = get("quantized_gaussian.t"))
  {
    c.qg_t = parse_list<double>("quantized_gaussian.t", *v);
  }
  return c;
}

inline ExperimentConfig load_config(std::string const &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw ConfigError("cannot open config file " + path);
  }
  return parse_config(in);
}

/// Checks shared by every subcommand: positive sizes and spans and a family
/// and prior that can be constructed.
inline void validate(ExperimentConfig const &c)
{
  auto positive = [](auto const &xs, char const *what) {
    for (auto x : xs)
    {
      if (!(x > 0))
      {
        throw ConfigError(std::string(what) + " entries must be positive");
      }
    }
  };
  positive(c.n_list, "sweep.n");
  positive(c.t_list, "sweep.t");
  positive(c.cb_n, "clarke_barron.n");
  positive(c.divergence_n, "converse.divergence_n");
  positive(c.packing_sweep_n, "converse.packing_sweep_n");
  positive(c.pythagoras_n, "pythagoras.n");
  positive(c.qg_t, "quantized_gaussian.t");
  if (c.packing_m < 1 || c.packing_n < 1 || !(c.packing_alpha > 0.0 && c.packing_alpha < 2.0))
  {
    throw ConfigError("converse.packing_* out of range (m, n >= 1, alpha in (0, 2))");
  }
  if (c.mc_samples < 2)
  {
    throw ConfigError("run.mc_samples must be at least 2");
  }
  try
  {
    (void)c.prior();
    (void)Family(c.k, c.cb_eps_bd);
  }
  catch (std::exception const &e)
  {
    throw ConfigError(std::string("invalid family or prior: ") + e.what());
  }
}

}  // namespace asstat
