#include "mdsenbd/optimizer.hpp"

#include "mdsenbd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace mdsenbd {

namespace {

double sanitize(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::infinity(); }

struct Simplex {
    std::vector<Eigen::VectorXd> points;
    std::vector<double> values;

    void sort() {
        std::vector<std::size_t> order(points.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::vector<Eigen::VectorXd> p;
        std::vector<double> v;
        for (auto i : order) {
            p.push_back(points[i]);
            v.push_back(values[i]);
        }
        points = std::move(p);
        values = std::move(v);
    }
};

Simplex initial_simplex(const Objective& f,
                        const Eigen::VectorXd& start,
                        const Box& box,
                        double step_fraction,
                        std::size_t& evaluations) {
    const auto n = start.size();
    Simplex s;
    s.points.push_back(start);
    s.values.push_back(sanitize(f(start)));
    ++evaluations;
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::VectorXd p = start;
        const double width = box.upper(k) - box.lower(k);
        double step = step_fraction * (std::isfinite(width) && width > 0.0 ? width : 1.0);
        // step inward when the start sits on (or near) the upper bound
        if (p(k) + step > box.upper(k)) {
            step = -step;
        }
        p(k) += step;
        p = box.clamp(p);
        s.points.push_back(p);
        s.values.push_back(sanitize(f(p)));
        ++evaluations;
    }
    s.sort();
    return s;
}

}  // namespace

OptimizationResult nelder_mead_minimize(const Objective& f,
                                        const Eigen::VectorXd& start,
                                        const Box& box,
                                        const NelderMeadOptions& options) {
    const auto n = start.size();
    if (box.lower.size() != n || box.upper.size() != n) {
        throw DomainError("nelder_mead_minimize: box and start have different dimensions");
    }
    if ((box.lower.array() > box.upper.array()).any()) {
        throw DomainError("nelder_mead_minimize: lower bound exceeds upper bound");
    }

    OptimizationResult result;
    const Eigen::VectorXd x0 = box.clamp(start);
    result.x = x0;
    result.value = sanitize(f(x0));
    result.initial_value = result.value;
    result.evaluations = 1;
    if (n == 0) {
        result.converged = true;
        return result;
    }

    constexpr double reflect = 1.0;
    constexpr double expand = 2.0;
    constexpr double contract = 0.5;
    constexpr double shrink = 0.5;

    Eigen::VectorXd incumbent = x0;
    double step = options.initial_step;
    for (std::size_t round = 0; round <= options.restarts; ++round) {
        Simplex s = initial_simplex(f, incumbent, box, step, result.evaluations);
        bool round_converged = false;
        while (result.iterations < options.max_iterations) {
            const double spread = s.values.back() - s.values.front();
            if (std::isfinite(spread) && spread <= options.tolerance) {
                round_converged = true;
                break;
            }
            ++result.iterations;

            Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
            for (Eigen::Index k = 0; k < n; ++k) {
                centroid += s.points[static_cast<std::size_t>(k)];
            }
            centroid /= static_cast<double>(n);
            auto& worst = s.points.back();
            double& worst_value = s.values.back();

            const Eigen::VectorXd xr = box.clamp(centroid + reflect * (centroid - worst));
            const double fr = sanitize(f(xr));
            ++result.evaluations;

            if (fr < s.values.front()) {
                const Eigen::VectorXd xe = box.clamp(centroid + expand * (xr - centroid));
                const double fe = sanitize(f(xe));
                ++result.evaluations;
                if (fe < fr) {
                    worst = xe;
                    worst_value = fe;
                } else {
                    worst = xr;
                    worst_value = fr;
                }
            } else if (fr < s.values[s.values.size() - 2]) {
                worst = xr;
                worst_value = fr;
            } else {
                const bool outside = fr < worst_value;
                const Eigen::VectorXd xc = outside ? box.clamp(centroid + contract * (xr - centroid))
                                                   : box.clamp(centroid + contract * (worst - centroid));
                const double fc = sanitize(f(xc));
                ++result.evaluations;
                if (fc < std::min(fr, worst_value)) {
                    worst = xc;
                    worst_value = fc;
                } else {
                    const Eigen::VectorXd best = s.points.front();
                    for (std::size_t k = 1; k < s.points.size(); ++k) {
                        s.points[k] = box.clamp(best + shrink * (s.points[k] - best));
                        s.values[k] = sanitize(f(s.points[k]));
                        ++result.evaluations;
                    }
                }
            }
            s.sort();
        }

        const double previous = result.value;
        if (s.values.front() <= result.value) {
            result.value = s.values.front();
            result.x = s.points.front();
        }
        incumbent = result.x;
        result.converged = round_converged;
        if (!round_converged) {
            break;
        }
        // a restart that no longer moves the optimum ends the search
        if (round > 0 && previous - result.value <= options.tolerance) {
            break;
        }
        step *= 0.5;
    }
    return result;
}

}  // namespace mdsenbd
