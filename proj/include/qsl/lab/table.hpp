// Copyright 2026 The qsl-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Typed result tables written as CSV with a '#'-prefixed metadata header.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qsl/core.hpp"

namespace qsl::lab {

inline constexpr const char* toolkit_version = "qsl-lab 1.0.0";

enum class ColumnType { real, integer, text };

struct Column {
    std::string name;
    ColumnType type = ColumnType::real;
};

using Cell = std::variant<double, std::int64_t, std::string>;

/// Reals print as %.15g; NaN prints as an empty field (missing values, e.g.
/// tau for an unreachable target).
inline std::string format_real(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

class ResultTable {
public:
    explicit ResultTable(std::vector<Column> columns) : columns_(std::move(columns)) {}

    const std::vector<Column>& columns() const { return columns_; }
    const std::vector<std::vector<Cell>>& rows() const { return rows_; }
    const std::vector<std::pair<std::string, std::string>>& metadata() const { return metadata_; }

    void add_metadata(std::string key, std::string value) { metadata_.emplace_back(std::move(key), std::move(value)); }

    void add_row(std::vector<Cell> row) {
        if (row.size() != columns_.size())
            throw Error(ErrorCode::invalid_argument, "row width does not match the column schema");
        for (std::size_t i = 0; i < row.size(); ++i) {
            const bool ok = (columns_[i].type == ColumnType::real && std::holds_alternative<double>(row[i])) ||
                            (columns_[i].type == ColumnType::integer && std::holds_alternative<std::int64_t>(row[i])) ||
                            (columns_[i].type == ColumnType::text && std::holds_alternative<std::string>(row[i]));
            if (!ok) throw Error(ErrorCode::invalid_argument, "cell type does not match column '" + columns_[i].name + "'");
        }
        rows_.push_back(std::move(row));
    }

    std::size_t column_index(const std::string& name) const {
        for (std::size_t i = 0; i < columns_.size(); ++i)
            if (columns_[i].name == name) return i;
        throw Error(ErrorCode::invalid_argument, "no column named '" + name + "'");
    }

    std::vector<double> real_column(const std::string& name) const {
        const std::size_t i = column_index(name);
        std::vector<double> out;
        out.reserve(rows_.size());
        for (const auto& row : rows_) out.push_back(std::get<double>(row[i]));
        return out;
    }

    /// "# key: value" lines, then the header row, then one line per row.
    std::string to_csv() const {
        std::string out;
        for (const auto& [key, value] : metadata_) out += "# " + key + ": " + value + "\n";
        for (std::size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + columns_[i].name;
        out += "\n";
        for (const auto& row : rows_) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) out += ",";
                if (const auto* d = std::get_if<double>(&row[i]))
                    out += format_real(*d);
                else if (const auto* n = std::get_if<std::int64_t>(&row[i]))
                    out += std::to_string(*n);
                else
                    out += std::get<std::string>(row[i]);
            }
            out += "\n";
        }
        return out;
    }

private:
    std::vector<Column> columns_;
    std::vector<std::vector<Cell>> rows_;
    std::vector<std::pair<std::string, std::string>> metadata_;
};

}  // namespace qsl::lab
