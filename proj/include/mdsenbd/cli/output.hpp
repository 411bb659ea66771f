#pragma once

#include "json.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mdsenbd::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Number rounded to 12 significant digits; non-finite values become the
/// strings "inf", "-inf", "nan" (JSON has no literal for them).
[[nodiscard]] nlohmann::json number(double value);
[[nodiscard]] nlohmann::json vector_json(const Eigen::VectorXd& v);
[[nodiscard]] nlohmann::json matrix_json(const Eigen::MatrixXd& m);

/// A CSV table; cells are preformatted strings.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
    [[nodiscard]] std::string to_csv() const;
};

/// Writes `text` to `path` in binary mode, throwing IoError on failure.
void write_file(const std::filesystem::path& path, const std::string& text);

/// Serializes the result document; two-space indentation, sorted keys.
[[nodiscard]] std::string dump(const nlohmann::json& document);

}  // namespace mdsenbd::cli
