#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>

namespace mdsenbd {

struct Box {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    [[nodiscard]] Eigen::VectorXd clamp(const Eigen::VectorXd& x) const {
        return x.cwiseMax(lower).cwiseMin(upper);
    }
};

struct NelderMeadOptions {
    double tolerance{1e-8};           // absolute spread of objective values across the simplex
    std::size_t max_iterations{5000};
    double initial_step{0.1};         // fraction of each box width
    std::size_t restarts{2};          // fresh simplex around the incumbent after convergence
};

struct OptimizationResult {
    Eigen::VectorXd x;
    double value{0.0};
    double initial_value{0.0};
    std::size_t iterations{0};
    std::size_t evaluations{0};
    bool converged{false};
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Box-constrained Nelder-Mead minimizer. Trial points are projected onto the
/// box, so bounds can be attained exactly. Non-finite objective values rank as +inf.
[[nodiscard]] OptimizationResult nelder_mead_minimize(const Objective& objective,
                                                      const Eigen::VectorXd& start,
                                                      const Box& box,
                                                      const NelderMeadOptions& options = {});

}  // namespace mdsenbd
