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

// JSON records for the asymptotic reports. Field names are part of the
// output format and stay stable.

#include <cmath>

#include <json.hpp>

#include "asstat/asymptotics.hpp"
#include "asstat/codec.hpp"

namespace asstat {

using Json = nlohmann::ordered_json;

/// Non-finite values have no JSON literal; they are written as strings.
inline Json json_number(double x)
{
  if (std::isfinite(x))
  {
    return x;
  }
  return format_double(x);
}

inline Json to_json(CBTerms const &c)
{
  return Json{{"n", c.n},
              {"lhs_mi", json_number(c.lhs_mi)},
              {"rhs_main", json_number(c.rhs_main)},
              {"d_mu_nu", json_number(c.d_mu_nu)},
              {"d_mu_jeffreys", json_number(c.d_mu_jeffreys)},
              {"log_cj", json_number(c.log_cj)},
              {"rhs", json_number(c.rhs())},
              {"discrepancy", json_number(c.discrepancy)}};
}

inline Json to_json(PackingWitness const &w)
{
  Json probs = Json::array();
  for (double p : w.probabilities)
  {
    probs.push_back(json_number(p));
  }
  return Json{{"m", w.m},
              {"n", w.n},
              {"alpha", json_number(w.alpha)},
              {"points", w.points},
              {"half_width", json_number(w.half_width)},
              {"min_probability", json_number(w.min_probability)},
              {"threshold", json_number(w.threshold)},
              {"status", w.status},
              {"certified_bound", json_number(w.bound)},
              {"probabilities", probs}};
}

inline Json to_json(ConverseTerms const &c)
{
  return Json{{"mixture_error", json_number(c.mixture_error)},
              {"component_error", json_number(c.component_error)},
              {"cond_mi", json_number(c.cond_mi)},
              {"residual", json_number(c.residual)},
              {"log_m", json_number(c.log_m)}};
}

inline Json to_json(SupResult const &s)
{
  return Json{{"value", json_number(s.value)}, {"alpha", json_number(s.alpha)}};
}

/// Summary of an error report (no per-node breakdown).
inline Json to_json(ErrorReport const &r)
{
  return Json{{"n", r.n},
              {"k", r.k},
              {"t", json_number(r.t)},
              {"mode", r.mode},
              {"encoder", r.encoder},
              {"decoder", r.decoder},
              {"criterion", to_string(r.criterion)},
              {"value", json_number(r.value)},
              {"component_value", json_number(r.component_value)},
              {"std_error", json_number(r.std_error)},
              {"code_length_nats", json_number(r.code_length_nats)},
              {"quadrature_nodes", r.quadrature_nodes},
              {"exact_or_mc", !r.feasible ? "infeasible" : r.exact ? "exact" : "mc"},
              {"seed", r.seed}};
}

}  // namespace asstat
