#include "mdsenbd/correlation.hpp"

#include "mdsenbd/errors.hpp"
#include "mdsenbd/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mdsenbd {

double CorrelationSpec::equilibrium_mean() const {
    validate();
    return baseline / (1.0 - amplitude);
}

void CorrelationSpec::validate() const {
    if (!(amplitude >= 0.0)) {
        throw DomainError("correlation amplitude must be nonnegative");
    }
    if (!(amplitude < 1.0)) {
        throw StationarityError(amplitude, "correlation spec");
    }
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw DomainError("correlation kernel rate must be positive");
    }
    if (!(dispersion >= 0.0) || !(baseline >= 0.0)) {
        throw DomainError("correlation dispersion and baseline must be nonnegative");
    }
}

double autocovariance_closed_form(const CorrelationSpec& spec, double tau) {
    spec.validate();
    if (!(tau >= 0.0)) {
        throw DomainError("autocovariance_closed_form: tau must be nonnegative");
    }
    const double a = spec.amplitude;
    const double b = spec.rate;
    return a * b * (spec.dispersion + 1.0) * spec.equilibrium_mean() / (2.0 * (1.0 - a)) * std::exp(-b * (1.0 - a) * tau);
}

double ExponentialKernelSystem::kernel(std::size_t k, std::size_t j, double x) const {
    const auto kk = static_cast<Eigen::Index>(k);
    return amplitude(kk, static_cast<Eigen::Index>(j)) * rate(kk) * std::exp(-rate(kk) * x);
}

Eigen::VectorXd ExponentialKernelSystem::equilibrium_mean() const {
    validate();
    const double rho = spectral_radius(amplitude);
    if (!(rho < 1.0)) {
        throw StationarityError(rho, "exponential kernel system");
    }
    const auto d = amplitude.rows();
    return (Eigen::MatrixXd::Identity(d, d) - amplitude).partialPivLu().solve(baseline);
}

void ExponentialKernelSystem::validate() const {
    const auto d = rate.size();
    if (d == 0 || amplitude.rows() != d || amplitude.cols() != d || dispersion.size() != d || baseline.size() != d) {
        throw DomainError("exponential kernel system has inconsistent dimensions");
    }
    if (!amplitude.allFinite() || (amplitude.array() < 0.0).any()) {
        throw DomainError("kernel amplitudes must be finite and nonnegative");
    }
    if (!rate.allFinite() || (rate.array() <= 0.0).any()) {
        throw DomainError("kernel rates must be positive");
    }
    if ((dispersion.array() < 0.0).any() || (baseline.array() < 0.0).any()) {
        throw DomainError("dispersion and baseline must be nonnegative");
    }
}

ExponentialKernelSystem ExponentialKernelSystem::single_line(const CorrelationSpec& spec) {
    spec.validate();
    ExponentialKernelSystem s;
    s.amplitude = Eigen::MatrixXd::Constant(1, 1, spec.amplitude);
    s.rate = Eigen::VectorXd::Constant(1, spec.rate);
    s.dispersion = Eigen::VectorXd::Constant(1, spec.dispersion);
    s.baseline = Eigen::VectorXd::Constant(1, spec.baseline);
    return s;
}

namespace {

struct Grid {
    double h{0.0};
    std::size_t points{0};  // N + 1
};

Grid make_grid(const ExponentialKernelSystem& system, const IntegralSolverOptions& options) {
    if (!(options.step > 0.0)) {
        throw DomainError("covariance_integral_solve: step must be positive");
    }
    double horizon = options.horizon;
    if (!(horizon > 0.0)) {
        const double rho = spectral_radius(system.amplitude);
        horizon = 20.0 / (system.rate.minCoeff() * (1.0 - rho));
    }
    const auto n = static_cast<std::size_t>(std::ceil(horizon / options.step - 1e-9));
    return {options.step, n + 1};
}

double trapezoid_weight(std::size_t m, std::size_t last, double h) {
    return (m == 0 || m == last) ? 0.5 * h : h;
}

/// Right-hand side of the split equation on `c`, using the exponential
/// structure: the convolution is a first-order recursion and the tail
/// integral factors as exp(-b_k tau) times a constant.
CovarianceGrid apply_operator(const ExponentialKernelSystem& system,
                              const Eigen::VectorXd& mean,
                              const Grid& grid,
                              const CovarianceGrid& c) {
    const auto d = system.dimension();
    const auto n = grid.points;
    const double h = grid.h;
    CovarianceGrid out = c;

    // tail[k][j][i] = trapezoid int_0^T exp(-b_k w) C_ji(w) dw
    std::vector<double> tail(d * d * d, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
        const double b = system.rate(static_cast<Eigen::Index>(k));
        for (std::size_t j = 0; j < d; ++j) {
            for (std::size_t i = 0; i < d; ++i) {
                const auto& cji = c.at(j, i);
                double sum = 0.0;
                for (std::size_t m = 0; m < n; ++m) {
                    sum += trapezoid_weight(m, n - 1, h) * std::exp(-b * static_cast<double>(m) * h) *
                           cji(static_cast<Eigen::Index>(m));
                }
                tail[(k * d + j) * d + i] = sum;
            }
        }
    }

    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            const double b = system.rate(kk);
            const double decay = std::exp(-b * h);
            // y(s) = sum_j A_kj C_ij(s)
            y.setZero();
            double tail_sum = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double a = system.amplitude(kk, static_cast<Eigen::Index>(j));
                if (a != 0.0) {
                    y += a * c.at(i, j);
                    tail_sum += a * tail[(k * d + j) * d + i];
                }
            }
            const double source = (system.dispersion(static_cast<Eigen::Index>(i)) + 1.0) *
                                  mean(static_cast<Eigen::Index>(i)) *
                                  system.amplitude(kk, static_cast<Eigen::Index>(i)) * b;
            auto& target = out.at(i, k);
            double f = 0.0;
            for (std::size_t m = 0; m < n; ++m) {
                const auto mi = static_cast<Eigen::Index>(m);
                const double e = std::exp(-b * static_cast<double>(m) * h);
                f = decay * f + y(mi);
                const double conv = m == 0 ? 0.0 : h * (f - 0.5 * e * y(0) - 0.5 * y(mi));
                target(mi) = source * e + b * conv + b * e * tail_sum;
            }
        }
    }
    return out;
}

double sup_distance(const CovarianceGrid& a, const CovarianceGrid& b) {
    double worst = 0.0;
    for (std::size_t p = 0; p < a.values.size(); ++p) {
        worst = std::max(worst, (a.values[p] - b.values[p]).cwiseAbs().maxCoeff());
    }
    return worst;
}

}  // namespace

CovarianceGrid covariance_integral_solve(const ExponentialKernelSystem& system, const IntegralSolverOptions& options) {
    const Eigen::VectorXd mean = system.equilibrium_mean();
    const Grid grid = make_grid(system, options);
    const auto d = system.dimension();

    CovarianceGrid c;
    c.step = grid.h;
    c.dimension = d;
    c.lags.resize(grid.points);
    for (std::size_t m = 0; m < grid.points; ++m) {
        c.lags[m] = static_cast<double>(m) * grid.h;
    }
    c.values.assign(d * d, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.points)));

    for (std::size_t it = 1; it <= options.max_iterations; ++it) {
        CovarianceGrid next = apply_operator(system, mean, grid, c);
        const double change = sup_distance(next, c);
        c.values = std::move(next.values);
        c.iterations = it;
        c.last_change = change;
        if (change < options.tolerance) {
            return c;
        }
    }
    std::vector<double> last;
    for (const auto& v : c.values) {
        last.insert(last.end(), v.data(), v.data() + v.size());
    }
    throw ConvergenceError("covariance_integral_solve: fixed-point iteration did not converge in " +
                               std::to_string(options.max_iterations) + " iterations",
                           c.last_change, std::move(last));
}

double covariance_integral_residual(const ExponentialKernelSystem& system, const CovarianceGrid& grid) {
    const Eigen::VectorXd mean = system.equilibrium_mean();
    const auto d = system.dimension();
    if (grid.dimension != d || grid.values.size() != d * d) {
        throw DomainError("covariance_integral_residual: grid and system dimensions differ");
    }
    const auto n = grid.lags.size();
    const double h = grid.step;
    double worst = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            for (std::size_t t = 0; t < n; ++t) {
                const double tau = grid.lags[t];
                double rhs = (system.dispersion(static_cast<Eigen::Index>(i)) + 1.0) *
                             mean(static_cast<Eigen::Index>(i)) * system.kernel(k, i, tau);
                for (std::size_t j = 0; j < d; ++j) {
                    const auto& cij = grid.at(i, j);
                    const auto& cji = grid.at(j, i);
                    for (std::size_t m = 0; m <= t && t > 0; ++m) {
                        rhs += trapezoid_weight(m, t, h) * system.kernel(k, j, tau - grid.lags[m]) *
                               cij(static_cast<Eigen::Index>(m));
                    }
                    for (std::size_t m = 0; m < n; ++m) {
                        rhs += trapezoid_weight(m, n - 1, h) * system.kernel(k, j, tau + grid.lags[m]) *
                               cji(static_cast<Eigen::Index>(m));
                    }
                }
                worst = std::max(worst, std::abs(rhs - grid.at(i, k)(static_cast<Eigen::Index>(t))));
            }
        }
    }
    return worst;
}

std::vector<Eigen::MatrixXd> empirical_autocovariance(const EventSeries& series, std::size_t max_lag) {
    series.validate();
    const auto t_len = series.periods();
    if (t_len <= 10 * max_lag || t_len < 2) {
        throw DomainError("empirical_autocovariance: need more than 10 x max_lag periods (have " +
                          std::to_string(t_len) + ", max_lag " + std::to_string(max_lag) + ")");
    }
    const Eigen::MatrixXd x = series.counts.cast<double>();
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - mean;
    std::vector<Eigen::MatrixXd> out;
    out.reserve(max_lag + 1);
    for (std::size_t tau = 0; tau <= max_lag; ++tau) {
        const auto rows = static_cast<Eigen::Index>(t_len - tau);
        const auto lag = static_cast<Eigen::Index>(tau);
        out.push_back(centered.topRows(rows).transpose() * centered.middleRows(lag, rows) /
                      static_cast<double>(rows));
    }
    return out;
}

DecayFit fit_log_linear_decay(const std::vector<double>& values, std::size_t first, std::size_t last) {
    if (last >= values.size() || first > last) {
        throw DomainError("fit_log_linear_decay: lag range outside the data");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (std::size_t t = first; t <= last; ++t) {
        if (!(values[t] > 0.0)) {
            continue;
        }
        const auto x = static_cast<double>(t);
        const double y = std::log(values[t]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) {
        throw DomainError("fit_log_linear_decay: fewer than two positive values");
    }
    const auto nn = static_cast<double>(n);
    const double slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
    return {-slope, (sy - slope * sx) / nn, n};
}

}  // namespace mdsenbd
