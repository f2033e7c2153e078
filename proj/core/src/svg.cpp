// SPDX-License-Identifier: Apache-2.0
#include "ftft/svg.hpp"

#include <algorithm>
#include <array>

#include <fmt/format.h>

namespace ftft::svg {

namespace {

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

}  // namespace

std::string line_chart(const std::string& title, const std::vector<double>& x, const std::vector<Series>& series,
                       const std::string& x_label, const std::string& y_label) {
    const double W = 640, H = 400, left = 60, right = 160, top = 40, bottom = 50;
    const double pw = W - left - right, ph = H - top - bottom;
    const double x0 = x.empty() ? 0.0 : x.front();
    const double x1 = x.size() < 2 ? x0 + 1.0 : x.back();
    auto sx = [&](double v) { return left + (v - x0) / (x1 - x0) * pw; };
    auto sy = [&](double v) { return top + (1.0 - std::clamp(v, 0.0, 1.0)) * ph; };

    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n", W, H, W, H);
    out += fmt::format("<text x=\"{}\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n", left + pw / 2,
                       escape(title));
    out += fmt::format("<g stroke=\"#000\" fill=\"none\"><line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\"/>"
                       "<line x1=\"{0}\" y1=\"{2}\" x2=\"{3}\" y2=\"{2}\"/></g>\n",
                       left, top, top + ph, left + pw);
    for (int i = 0; i <= 4; ++i) {
        const double v = i / 4.0;
        out += fmt::format("<text x=\"{}\" y=\"{:.1f}\" font-size=\"11\" text-anchor=\"end\">{:.2f}</text>\n",
                           left - 6, sy(v) + 4, v);
    }
    out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
                       left + pw / 2, H - 12, escape(x_label));
    out += fmt::format("<text x=\"14\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\" "
                       "transform=\"rotate(-90 14 {})\">{}</text>\n",
                       top + ph / 2, top + ph / 2, escape(y_label));

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % kPalette.size()];
        std::string pts;
        const std::size_t n = std::min(series[s].y.size(), x.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (i) pts += ' ';
            pts += fmt::format("{:.1f},{:.1f}", sx(x[i]), sy(series[s].y[i]));
        }
        out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n", color, pts);
        const double ly = top + 14.0 + 18.0 * static_cast<double>(s);
        out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{}\">{}</text>\n", left + pw + 12, ly,
                           color, escape(series[s].name));
    }
    out += "</svg>\n";
    return out;
}

std::string heatmap(const std::string& title, const std::vector<std::string>& labels,
                    const std::vector<std::vector<double>>& values) {
    const std::size_t n = values.size();
    const double cell = 56, left = 140, top = 50;
    const double W = left + cell * static_cast<double>(n) + 20;
    const double H = top + cell * static_cast<double>(n) + 20;
    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n", W, H, W, H);
    out += fmt::format("<text x=\"{}\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n", W / 2,
                       escape(title));
    for (std::size_t i = 0; i < n; ++i) {
        const double y = top + cell * static_cast<double>(i);
        out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n", left - 6,
                           y + cell / 2 + 4, escape(i < labels.size() ? labels[i] : std::to_string(i)));
        for (std::size_t j = 0; j < n; ++j) {
            const double v = std::clamp(values[i][j], 0.0, 1.0);
            // 0 -> light (245), 1 -> dark (40)
            const int shade = static_cast<int>(245.0 - v * 205.0);
            const double x = left + cell * static_cast<double>(j);
            out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"rgb({},{},{})\"/>\n", x, y,
                               cell, cell, shade, shade, 255);
            out += fmt::format(
                "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" fill=\"{}\">{:.2f}</text>\n",
                x + cell / 2, y + cell / 2 + 4, v > 0.5 ? "#fff" : "#000", values[i][j]);
        }
    }
    out += "</svg>\n";
    return out;
}

}  // namespace ftft::svg
