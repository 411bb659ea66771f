#include "mdsenbd/errors.hpp"

#include <sstream>

namespace mdsenbd {

std::string_view to_string(ErrorCategory category) noexcept {
    switch (category) {
        case ErrorCategory::domain: return "domain";
        case ErrorCategory::nonstationary: return "nonstationary";
        case ErrorCategory::convergence: return "convergence";
        case ErrorCategory::io: return "io";
        case ErrorCategory::schema: return "schema";
        case ErrorCategory::config: return "config";
        case ErrorCategory::usage: return "usage";
    }
    return "unknown";
}

namespace {

std::string stationarity_message(double rho, const std::string& context) {
    std::ostringstream out;
    out.precision(12);
    out << context << ": spectral radius rho(S) = " << rho << " is not below 1";
    return out.str();
}

std::string schema_message(std::size_t row, std::size_t column, const std::string& message) {
    std::ostringstream out;
    out << "row " << row << ", column " << column << ": " << message;
    return out.str();
}

}  // namespace

StationarityError::StationarityError(double spectral_radius, const std::string& context)
    : Error(ErrorCategory::nonstationary, stationarity_message(spectral_radius, context)),
      spectral_radius_(spectral_radius) {}

SchemaError::SchemaError(std::size_t row, std::size_t column, const std::string& message)
    : Error(ErrorCategory::schema, schema_message(row, column, message)), row_(row), column_(column) {}

}  // namespace mdsenbd
