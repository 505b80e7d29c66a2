#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "hetcause/effects.hpp"

namespace hetcause {

namespace detail {

// Fixed-precision formatting that does not depend on stream state or locale.
inline std::string fmt(double v, int precision = 6) {
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline const std::string& palette(std::size_t k) {
  static const std::array<std::string, 8> colors{"#4c72b0", "#dd8452", "#55a868", "#c44e52",
                                                 "#8172b3", "#937860", "#da8bc3", "#8c8c8c"};
  return colors[k % colors.size()];
}

}  // namespace detail

inline void write_ranked_causes_csv(std::ostream& out, const std::vector<CauseRecord>& ranked) {
  const std::size_t k = ranked.empty() ? 0 : ranked.front().effects.size();
  out << "rank,variable,support,max_effect,min_effect";
  for (std::size_t g = 0; g < k; ++g) out << ",effect_g" << g;
  for (std::size_t g = 0; g < k; ++g) out << ",p_g" << g;
  out << '\n';
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& r = ranked[i];
    out << i + 1 << ',' << r.variable << ',' << detail::fmt(r.support) << ','
        << detail::fmt(r.max_effect()) << ',' << detail::fmt(r.min_effect());
    for (const auto& e : r.effects) out << ',' << detail::fmt(e.ate);
    for (const auto& e : r.effects) out << ',' << (e.present && e.identifiable ? detail::fmt(e.p_value) : "");
    out << '\n';
  }
}

inline void write_modifiers_csv(std::ostream& out, const std::vector<CauseRecord>& ranked) {
  out << "variable,modifier,graph,cate1,cate0,delta,p,significant\n";
  for (const auto& r : ranked)
    for (const auto& m : r.modifiers)
      out << r.variable << ',' << m.estimate.modifier << ',' << m.graph << ','
          << detail::fmt(m.estimate.cate1) << ',' << detail::fmt(m.estimate.cate0) << ','
          << detail::fmt(m.estimate.delta) << ',' << detail::fmt(m.estimate.p_value) << ','
          << (m.significant ? 1 : 0) << '\n';
}

// Horizontal stacked bars: each cause's bar is the multi-set average effect,
// split into one segment per graph (effect / K). Positive segments grow to
// the right of the zero axis and negative ones to the left.
inline void write_ranked_causes_svg(std::ostream& out, const std::vector<CauseRecord>& ranked,
                                    const std::string& title) {
  const std::size_t k = ranked.empty() ? 0 : ranked.front().effects.size();
  double pos_max = 0, neg_max = 0;
  for (const auto& r : ranked) {
    double p = 0, n = 0;
    for (const auto& e : r.effects) (e.ate > 0 ? p : n) += e.ate / double(std::max<std::size_t>(k, 1));
    pos_max = std::max(pos_max, p);
    neg_max = std::max(neg_max, -n);
  }
  const double span = std::max(pos_max + neg_max, 1e-9);
  const double label_w = 160, plot_w = 480, row_h = 22, top = 40;
  const double width = label_w + plot_w + 40, height = top + row_h * double(ranked.size()) + 40 + 18 * double(k);
  const double zero_x = label_w + plot_w * neg_max / span;
  auto sx = [&](double v) { return plot_w * v / span; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::fmt(width, 0) << "\" height=\""
      << detail::fmt(height, 0) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<text x=\"10\" y=\"20\" font-size=\"14\">" << detail::xml_escape(title) << "</text>\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& r = ranked[i];
    const double y = top + row_h * double(i);
    out << "<text x=\"" << detail::fmt(label_w - 6, 1) << "\" y=\"" << detail::fmt(y + 14, 1)
        << "\" text-anchor=\"end\">" << detail::xml_escape(r.variable) << " (" << detail::fmt(r.support, 2)
        << ")</text>\n";
    double pos = 0, neg = 0;
    for (std::size_t g = 0; g < r.effects.size(); ++g) {
      const double v = r.effects[g].ate / double(k);
      if (v == 0.0) continue;
      const double w = sx(std::abs(v));
      const double x = v > 0 ? zero_x + sx(pos) : zero_x - sx(-neg) - w;
      (v > 0 ? pos : neg) += v;
      out << "<rect x=\"" << detail::fmt(x, 2) << "\" y=\"" << detail::fmt(y + 3, 1) << "\" width=\""
          << detail::fmt(w, 2) << "\" height=\"" << detail::fmt(row_h - 6, 1) << "\" fill=\""
          << detail::palette(g) << "\"/>\n";
    }
  }
  const double axis_bottom = top + row_h * double(ranked.size());
  out << "<line x1=\"" << detail::fmt(zero_x, 2) << "\" y1=\"" << detail::fmt(top, 1) << "\" x2=\""
      << detail::fmt(zero_x, 2) << "\" y2=\"" << detail::fmt(axis_bottom, 1) << "\" stroke=\"black\"/>\n";
  for (std::size_t g = 0; g < k; ++g) {
    const double y = axis_bottom + 20 + 18 * double(g);
    out << "<rect x=\"" << detail::fmt(label_w, 1) << "\" y=\"" << detail::fmt(y - 10, 1)
        << "\" width=\"12\" height=\"12\" fill=\"" << detail::palette(g) << "\"/>";
    out << "<text x=\"" << detail::fmt(label_w + 18, 1) << "\" y=\"" << detail::fmt(y, 1) << "\">graph "
        << g << "</text>\n";
  }
  out << "</svg>\n";
}

// One bar per (cause, modifier, graph) showing the CATE difference.
inline void write_modifiers_svg(std::ostream& out, const std::vector<CauseRecord>& ranked,
                                const std::string& title) {
  struct Row {
    std::string label;
    double delta;
    bool significant;
    std::size_t graph;
  };
  std::vector<Row> rows;
  double amax = 1e-9;
  for (const auto& r : ranked)
    for (const auto& m : r.modifiers) {
      rows.push_back({r.variable + " | " + m.estimate.modifier, m.estimate.delta, m.significant, m.graph});
      amax = std::max(amax, std::abs(m.estimate.delta));
    }
  const double label_w = 220, plot_w = 400, row_h = 20, top = 40;
  const double zero_x = label_w + plot_w / 2;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::fmt(label_w + plot_w + 40, 0)
      << "\" height=\"" << detail::fmt(top + row_h * double(rows.size()) + 20, 0)
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<text x=\"10\" y=\"20\" font-size=\"14\">" << detail::xml_escape(title) << "</text>\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double y = top + row_h * double(i);
    const double w = plot_w / 2 * std::abs(r.delta) / amax;
    out << "<text x=\"" << detail::fmt(label_w - 6, 1) << "\" y=\"" << detail::fmt(y + 14, 1)
        << "\" text-anchor=\"end\">" << detail::xml_escape(r.label) << "</text>\n";
    out << "<rect x=\"" << detail::fmt(r.delta >= 0 ? zero_x : zero_x - w, 2) << "\" y=\""
        << detail::fmt(y + 3, 1) << "\" width=\"" << detail::fmt(w, 2) << "\" height=\""
        << detail::fmt(row_h - 6, 1) << "\" fill=\"" << detail::palette(r.graph) << "\" fill-opacity=\""
        << (r.significant ? "1.0" : "0.4") << "\"/>\n";
  }
  out << "<line x1=\"" << detail::fmt(zero_x, 2) << "\" y1=\"" << detail::fmt(top, 1) << "\" x2=\""
      << detail::fmt(zero_x, 2) << "\" y2=\"" << detail::fmt(top + row_h * double(rows.size()), 1)
      << "\" stroke=\"black\"/>\n</svg>\n";
}

struct ReportFiles {
  std::vector<std::string> paths;
  bool empty = false;
};

// Ranked-cause and modifier tables plus SVG renderings for one ranking mode.
// Empty input still produces (empty) files.
inline ReportFiles emit_report(const std::vector<CauseRecord>& records, RankMode mode, std::size_t top_n,
                               const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::string tag = mode == RankMode::risk ? "risk" : "preventive";
  ReportFiles files;
  files.empty = records.empty();
  const auto ranked = records.empty() ? std::vector<CauseRecord>{}
                                      : display_order(rank_causes(records, mode, top_n), mode);
  auto open = [&](const std::string& name) {
    auto p = out_dir / name;
    files.paths.push_back(p.string());
    std::ofstream f(p);
    if (!f) throw error("cannot write " + p.string());
    return f;
  };
  {
    auto f = open("ranked_causes_" + tag + ".csv");
    if (!files.empty) write_ranked_causes_csv(f, ranked);
  }
  {
    auto f = open("ranked_causes_" + tag + ".svg");
    if (!files.empty) write_ranked_causes_svg(f, ranked, "Multi-set average total effect (" + tag + ")");
  }
  {
    auto f = open("modifiers_" + tag + ".csv");
    if (!files.empty) write_modifiers_csv(f, ranked);
  }
  {
    auto f = open("modifiers_" + tag + ".svg");
    if (!files.empty) write_modifiers_svg(f, ranked, "Effect modification: CATE(Z=1) - CATE(Z=0)");
  }
  return files;
}

}  // namespace hetcause
