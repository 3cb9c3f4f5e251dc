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
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

namespace asstat {

struct Series
{
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// A static line chart. Non-finite points are skipped.
struct Chart
{
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  std::vector<Series> series;
  std::optional<double> reference_y;
  std::string reference_label;
};

namespace detail {

inline std::string fmt(double v, char const *spec = "%.2f")
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

inline std::string escape_xml(std::string const &s)
{
  std::string out;
  for (char c : s)
  {
    switch (c)
    {
    case '<':
      out += "&lt;";
      break;
    case '>':
      out += "&gt;";
      break;
    case '&':
      out += "&amp;";
      break;
    case '"':
      out += "&quot;";
      break;
    default:
      out += c;
    }
  }
  return out;
}

}  // namespace detail

inline std::string render_svg(Chart const &chart)
{
  constexpr double W = 720, H = 440, L = 80, R = 220, T = 40, B = 60;
  static char const *const palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                        "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

  auto tx = [&](double x) { return chart.log_x ? std::log10(x) : x; };
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (auto const &s : chart.series)
  {
    for (std::size_t i = 0; i < s.x.size(); ++i)
    {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || (chart.log_x && s.x[i] <= 0))
      {
        continue;
      }
      xmin = std::min(xmin, tx(s.x[i]));
      xmax = std::max(xmax, tx(s.x[i]));
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (chart.reference_y)
  {
    ymin = std::min(ymin, *chart.reference_y);
    ymax = std::max(ymax, *chart.reference_y);
  }
  if (!std::isfinite(xmin))
  {
    xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  }
  if (xmax - xmin < 1e-12)
  {
    xmin -= 0.5, xmax += 0.5;
  }
  if (ymax - ymin < 1e-12)
  {
    ymin -= 0.5, ymax += 0.5;
  }
  double const pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  auto px = [&](double x) { return L + (tx(x) - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::fmt(W, "%.0f") +
       "\" height=\"" + detail::fmt(H, "%.0f") + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + detail::fmt(W / 2 - R / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
       detail::escape_xml(chart.title) + "</text>\n";
  s += "<line x1=\"" + detail::fmt(L) + "\" y1=\"" + detail::fmt(H - B) + "\" x2=\"" +
       detail::fmt(W - R) + "\" y2=\"" + detail::fmt(H - B) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + detail::fmt(L) + "\" y1=\"" + detail::fmt(T) + "\" x2=\"" + detail::fmt(L) +
       "\" y2=\"" + detail::fmt(H - B) + "\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 4; ++i)
  {
    double const fx = xmin + (xmax - xmin) * i / 4.0;
    double const xv = chart.log_x ? std::pow(10.0, fx) : fx;
    double const X  = L + (W - L - R) * i / 4.0;
    s += "<text x=\"" + detail::fmt(X) + "\" y=\"" + detail::fmt(H - B + 18) +
         "\" text-anchor=\"middle\">" + detail::fmt(xv, "%.4g") + "</text>\n";
    double const yv = ymin + (ymax - ymin) * i / 4.0;
    double const Y  = py(yv);
    s += "<text x=\"" + detail::fmt(L - 6) + "\" y=\"" + detail::fmt(Y + 4) +
         "\" text-anchor=\"end\">" + detail::fmt(yv, "%.4g") + "</text>\n";
    s += "<line x1=\"" + detail::fmt(L) + "\" y1=\"" + detail::fmt(Y) + "\" x2=\"" +
         detail::fmt(W - R) + "\" y2=\"" + detail::fmt(Y) + "\" stroke=\"#eeeeee\"/>\n";
  }
  s += "<text x=\"" + detail::fmt((L + W - R) / 2) + "\" y=\"" + detail::fmt(H - 14) +
       "\" text-anchor=\"middle\">" + detail::escape_xml(chart.x_label) + "</text>\n";
  s += "<text x=\"18\" y=\"" + detail::fmt((T + H - B) / 2) +
       "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " + detail::fmt((T + H - B) / 2) +
       ")\">" + detail::escape_xml(chart.y_label) + "</text>\n";

  double legend_y = T + 10;
  if (chart.reference_y)
  {
    double const Y = py(*chart.reference_y);
    s += "<line x1=\"" + detail::fmt(L) + "\" y1=\"" + detail::fmt(Y) + "\" x2=\"" +
         detail::fmt(W - R) + "\" y2=\"" + detail::fmt(Y) +
         "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
    s += "<text x=\"" + detail::fmt(W - R + 12) + "\" y=\"" + detail::fmt(legend_y) + "\" fill=\"gray\">" +
         detail::escape_xml(chart.reference_label) + "</text>\n";
    legend_y += 18;
  }
  for (std::size_t k = 0; k < chart.series.size(); ++k)
  {
    auto const &ser         = chart.series[k];
    std::string const color = palette[k % (sizeof(palette) / sizeof(palette[0]))];
    std::string pts;
    for (std::size_t i = 0; i < ser.x.size(); ++i)
    {
      if (!std::isfinite(ser.x[i]) || !std::isfinite(ser.y[i]) || (chart.log_x && ser.x[i] <= 0))
      {
        continue;
      }
      pts += detail::fmt(px(ser.x[i])) + "," + detail::fmt(py(ser.y[i])) + " ";
      s += "<circle cx=\"" + detail::fmt(px(ser.x[i])) + "\" cy=\"" + detail::fmt(py(ser.y[i])) +
           "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
    s += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"" + pts +
         "\"/>\n";
    s += "<text x=\"" + detail::fmt(W - R + 12) + "\" y=\"" + detail::fmt(legend_y) + "\" fill=\"" +
         color + "\">" + detail::escape_xml(ser.label) + "</text>\n";
    legend_y += 18;
  }
  s += "</svg>\n";
  return s;
}

}  // namespace asstat
