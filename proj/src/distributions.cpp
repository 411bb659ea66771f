#include "mdsenbd/distributions.hpp"

#include "mdsenbd/errors.hpp"

#include <cmath>
#include <limits>

namespace mdsenbd {

namespace {

constexpr std::int64_t kProductTermLimit = 32;

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw DomainError(std::string("nbd_pmf: ") + name + " must be positive and finite");
    }
}

}  // namespace

double log_rising_factorial(double shape, std::int64_t k) {
    if (k <= kProductTermLimit) {
        double sum = 0.0;
        for (std::int64_t j = 0; j < k; ++j) {
            sum += std::log(shape + static_cast<double>(j));
        }
        return sum;
    }
    return std::lgamma(shape + static_cast<double>(k)) - std::lgamma(shape);
}

double nbd_log_pmf(std::int64_t k, double shape, double scale) {
    require_positive(shape, "shape");
    require_positive(scale, "scale");
    if (k < 0) {
        return -std::numeric_limits<double>::infinity();
    }
    const double kd = static_cast<double>(k);
    const double log1p_scale = std::log1p(scale);
    return log_rising_factorial(shape, k) - std::lgamma(kd + 1.0) - shape * log1p_scale +
           kd * (std::log(scale) - log1p_scale);
}

double nbd_pmf(std::int64_t k, double shape, double scale) { return std::exp(nbd_log_pmf(k, shape, scale)); }

double poisson_log_pmf(std::int64_t k, double mean) {
    if (!(mean >= 0.0)) {
        throw DomainError("poisson_pmf: mean must be nonnegative");
    }
    if (k < 0) {
        return -std::numeric_limits<double>::infinity();
    }
    if (mean == 0.0) {
        return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    }
    const double kd = static_cast<double>(k);
    return kd * std::log(mean) - mean - std::lgamma(kd + 1.0);
}

double poisson_pmf(std::int64_t k, double mean) { return std::exp(poisson_log_pmf(k, mean)); }

std::int64_t poisson_quantile(double u, double mean) {
    if (!(mean > 0.0)) {
        return 0;
    }
    // Linear search from 0; exp(-mean) underflows past ~700.
    double p = std::exp(-mean);
    double cdf = p;
    std::int64_t k = 0;
    while (cdf <= u) {
        ++k;
        p *= mean / static_cast<double>(k);
        cdf += p;
        if (p < 1e-300 && static_cast<double>(k) > mean) {
            break;
        }
    }
    return k;
}

std::int64_t nbd_quantile(double u, double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0)) {
        return 0;
    }
    const double q = scale / (1.0 + scale);
    double p = std::exp(-shape * std::log1p(scale));
    double cdf = p;
    std::int64_t k = 0;
    while (cdf <= u) {
        p *= (shape + static_cast<double>(k)) / static_cast<double>(k + 1) * q;
        ++k;
        cdf += p;
        if (p < 1e-300 && static_cast<double>(k) > shape * scale) {
            break;
        }
    }
    return k;
}

}  // namespace mdsenbd
