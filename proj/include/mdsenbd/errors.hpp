#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mdsenbd {

enum class ErrorCategory {
    domain,
    nonstationary,
    convergence,
    io,
    schema,
    config,
    usage,
};

[[nodiscard]] std::string_view to_string(ErrorCategory category) noexcept;

/// Base of every error raised by the library. The category is what the CLI
/// reports as its machine-parseable failure class.
class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    [[nodiscard]] ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& message) : Error(ErrorCategory::domain, message) {}
};

/// Raised when an operation needs rho(S) < 1 and the spec does not satisfy it.
class StationarityError : public Error {
public:
    StationarityError(double spectral_radius, const std::string& context);

    [[nodiscard]] double spectral_radius() const noexcept { return spectral_radius_; }

private:
    double spectral_radius_;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& message, double residual, std::vector<double> last_iterate = {})
        : Error(ErrorCategory::convergence, message),
          residual_(residual),
          last_iterate_(std::move(last_iterate)) {}

    [[nodiscard]] double residual() const noexcept { return residual_; }
    [[nodiscard]] const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }

private:
    double residual_;
    std::vector<double> last_iterate_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error(ErrorCategory::io, message) {}
};

/// CSV schema violation. Row and column are 1-based file coordinates.
class SchemaError : public Error {
public:
    SchemaError(std::size_t row, std::size_t column, const std::string& message);

    [[nodiscard]] std::size_t row() const noexcept { return row_; }
    [[nodiscard]] std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error(ErrorCategory::config, message) {}
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& message) : Error(ErrorCategory::usage, message) {}
};

}  // namespace mdsenbd
