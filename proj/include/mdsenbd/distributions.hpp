#pragma once

#include <cstdint>

namespace mdsenbd {

/// Negative binomial pmf in the (shape K, scale M/K) parameterization:
/// Gamma(K+k) / (k! Gamma(K)) (1/(1+scale))^K (scale/(1+scale))^k.
/// Mean shape*scale, variance shape*scale*(1+scale). Throws DomainError for
/// nonpositive shape or scale.
[[nodiscard]] double nbd_pmf(std::int64_t k, double shape, double scale);
[[nodiscard]] double nbd_log_pmf(std::int64_t k, double shape, double scale);

[[nodiscard]] double poisson_pmf(std::int64_t k, double mean);
/// log P(k; mean). Mean zero gives 0 at k = 0 and -inf otherwise.
[[nodiscard]] double poisson_log_pmf(std::int64_t k, double mean);

/// log Gamma(shape + k) - log Gamma(shape), evaluated as a finite product for
/// small k so that very large shapes keep full precision.
[[nodiscard]] double log_rising_factorial(double shape, std::int64_t k);

/// Inverse-CDF draws from a single uniform u in [0, 1). Monotone in u and in
/// the mean, which is what makes common-random-number pairing work.
[[nodiscard]] std::int64_t poisson_quantile(double u, double mean);
[[nodiscard]] std::int64_t nbd_quantile(double u, double shape, double scale);

}  // namespace mdsenbd
