#pragma once

#include "mdsenbd/model.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace mdsenbd {

/// Single-line continuous-limit process with kernel g(tau) = a b exp(-b tau).
struct CorrelationSpec {
    double amplitude{0.0};   // a, in [0, 1)
    double rate{1.0};        // b > 0
    double dispersion{0.0};  // omega' >= 0; 0 is the Hawkes case
    double baseline{1.0};    // theta0

    /// v = theta0 / (1 - a).
    [[nodiscard]] double equilibrium_mean() const;
    void validate() const;
};

/// a b (omega' + 1) v / (2 (1 - a)) exp(-b (1 - a) tau).
/// Throws StationarityError when a >= 1.
[[nodiscard]] double autocovariance_closed_form(const CorrelationSpec& spec, double tau);

/// D lines with exponential kernels g_kj(x) = A_kj b_k exp(-b_k x), where
/// A_kj is the expected number of line-k events triggered by one line-j event.
struct ExponentialKernelSystem {
    Eigen::MatrixXd amplitude;  // A
    Eigen::VectorXd rate;       // b, one per target line
    Eigen::VectorXd dispersion; // omega'
    Eigen::VectorXd baseline;   // theta0

    [[nodiscard]] std::size_t dimension() const noexcept { return static_cast<std::size_t>(rate.size()); }
    [[nodiscard]] double kernel(std::size_t k, std::size_t j, double x) const;
    /// (E - A)^-1 theta0.
    [[nodiscard]] Eigen::VectorXd equilibrium_mean() const;
    void validate() const;

    [[nodiscard]] static ExponentialKernelSystem single_line(const CorrelationSpec& spec);
};

struct IntegralSolverOptions {
    double step{0.01};
    /// Non-positive: 20 / (min_k b_k (1 - rho(A))).
    double horizon{0.0};
    double tolerance{1e-8};
    std::size_t max_iterations{10'000};
};

/// C_ik(tau) for tau = 0, h, 2h, ..., on the grid; C_ik(tau) is the covariance
/// density between line i at t and line k at t + tau.
struct CovarianceGrid {
    double step{0.0};
    std::size_t dimension{0};
    std::vector<double> lags;
    std::vector<Eigen::VectorXd> values;  // index i * D + k
    std::size_t iterations{0};
    double last_change{0.0};

    [[nodiscard]] const Eigen::VectorXd& at(std::size_t i, std::size_t k) const { return values[i * dimension + k]; }
    [[nodiscard]] Eigen::VectorXd& at(std::size_t i, std::size_t k) { return values[i * dimension + k]; }
};

/// Solves, for tau > 0,
///   C_ik(tau) = (w'_i + 1) v_i g_ki(tau) + sum_j int_0^tau g_kj(w) C_ij(tau - w) dw
///                                        + sum_j int_0^inf g_kj(tau + w) C_ji(w) dw
/// by fixed-point iteration on [0, T_max] with trapezoid quadrature (C = 0
/// beyond T_max). Throws ConvergenceError carrying the residual.
[[nodiscard]] CovarianceGrid covariance_integral_solve(const ExponentialKernelSystem& system,
                                                       const IntegralSolverOptions& options = {});

/// Sup-norm gap between C and the right-hand side evaluated on C, using direct
/// (non-recursive) trapezoid sums.
[[nodiscard]] double covariance_integral_residual(const ExponentialKernelSystem& system, const CovarianceGrid& grid);

/// Element tau is the D x D matrix Cov[X_t^(i), X_{t+tau}^(j)] for tau = 0..max_lag
/// (sample means, divisor T - tau). Requires T > 10 max_lag.
[[nodiscard]] std::vector<Eigen::MatrixXd> empirical_autocovariance(const EventSeries& series, std::size_t max_lag);

struct DecayFit {
    double rate{0.0};       // C(tau) ~ exp(intercept - rate tau)
    double intercept{0.0};
    std::size_t points{0};
};

/// Least-squares fit of log C(tau) over lags [first, last], skipping nonpositive values.
[[nodiscard]] DecayFit fit_log_linear_decay(const std::vector<double>& values, std::size_t first, std::size_t last);

}  // namespace mdsenbd
