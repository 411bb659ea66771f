#pragma once

#include "mdsenbd/estimation.hpp"
#include "mdsenbd/model.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mdsenbd::cli {

/// Flat INI-style configuration: `[section]` headers and `key = value` lines.
/// Every lookup records the resolved value (explicit or default) so the run
/// can echo exactly what it used; keys never looked up are rejected.
class Config {
public:
    Config() = default;

    [[nodiscard]] static Config from_file(const std::filesystem::path& path);
    [[nodiscard]] static Config from_string(const std::string& text);

    /// `section.key=value`; replaces any file value.
    void set_override(const std::string& assignment);

    [[nodiscard]] bool has(const std::string& section, const std::string& key) const;

    [[nodiscard]] std::string get_string(const std::string& section, const std::string& key, const std::string& fallback);
    [[nodiscard]] std::optional<std::string> get_optional(const std::string& section, const std::string& key);
    [[nodiscard]] double get_double(const std::string& section, const std::string& key, double fallback);
    [[nodiscard]] std::int64_t get_int(const std::string& section, const std::string& key, std::int64_t fallback);
    [[nodiscard]] std::size_t get_size(const std::string& section, const std::string& key, std::size_t fallback);
    [[nodiscard]] std::uint64_t get_seed(const std::string& section, const std::string& key, std::uint64_t fallback);
    [[nodiscard]] bool get_bool(const std::string& section, const std::string& key, bool fallback);
    /// Comma-separated reals; "inf" is accepted.
    [[nodiscard]] std::optional<std::vector<double>> get_list(const std::string& section, const std::string& key);
    /// Rows separated by ';', entries by ','.
    [[nodiscard]] std::optional<std::vector<std::vector<double>>> get_matrix(const std::string& section,
                                                                             const std::string& key);

    /// Throws ConfigError naming the first key present in `sections` that no lookup consumed.
    void reject_unused(const std::set<std::string>& sections) const;

    /// Resolved values in lookup order, grouped by section.
    [[nodiscard]] const std::map<std::string, std::map<std::string, std::string>>& resolved() const noexcept {
        return resolved_;
    }

private:
    std::optional<std::string> raw(const std::string& section, const std::string& key) const;
    void record(const std::string& section, const std::string& key, const std::string& value);

    std::map<std::string, std::map<std::string, std::string>> values_;
    std::map<std::string, std::map<std::string, std::string>> resolved_;
};

/// Reads the [model] section into a validated ModelSpec. Either `interaction`
/// (S matrix) or `interaction_scale` (L0 matrix, "inf" for absent) is given.
[[nodiscard]] ModelSpec read_model(Config& config);

/// Sector names from [model] sector_names, or line1..lineD.
[[nodiscard]] std::vector<std::string> read_sector_names(Config& config, std::size_t dimension);

/// Reads bounds and optimizer settings from `section` (defaults from FitConfig).
[[nodiscard]] FitConfig read_fit_config(Config& config,
                                        const std::string& section,
                                        Family family,
                                        std::size_t dimension,
                                        EdgeSelection default_selection);

[[nodiscard]] std::string format_number(double value);

}  // namespace mdsenbd::cli
