// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace ftft::svg {

struct Series {
    std::string name;
    std::vector<double> y;  // one value per x position, shorter series stop early
};

// One <polyline> per series, y axis fixed to [0, 1].
std::string line_chart(const std::string& title, const std::vector<double>& x, const std::vector<Series>& series,
                       const std::string& x_label, const std::string& y_label);

// One <rect> per cell, 0 light to 1 dark, each cell annotated with its value.
std::string heatmap(const std::string& title, const std::vector<std::string>& labels,
                    const std::vector<std::vector<double>>& values);

}  // namespace ftft::svg
