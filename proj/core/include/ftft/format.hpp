// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace ftft {

// Shortest decimal form that parses back to the identical double.
std::string format_exact(double v);

// Fixed-point with the given number of decimals ("14.47").
std::string format_fixed(double v, int decimals);

// Minimal CSV writer: fields are never quoted, callers pass plain tokens.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> row);
    std::string str() const;
    void save(const std::string& path) const;

    const std::vector<std::vector<std::string>>& rows() const { return rows_; }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// Writes text to path, failing if the file cannot be written.
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace ftft
