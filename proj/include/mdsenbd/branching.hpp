#pragma once

#include "mdsenbd/model.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mdsenbd {

/// Offspring law of the branching representation with a one-period kernel.
/// Each event on a line with (M0, K0, L0) triggers NBD(K0/L0, M0/K0) children
/// (Poisson(M0/L0) on Hawkes lines), so mean = shape * scale = M0/L0.
struct OffspringLaw {
    enum class Kind { nbd, poisson };

    Kind kind{Kind::poisson};
    double shape{0.0};  // NBD only
    double scale{0.0};  // NBD only
    double mean{0.0};

    [[nodiscard]] static OffspringLaw poisson(double mean);
    [[nodiscard]] static OffspringLaw nbd(double shape, double scale);
    /// Law of line `line` of a single-line spec (diagonal L0 only).
    [[nodiscard]] static OffspringLaw from_spec(const ModelSpec& spec, std::size_t line);

    /// Probability generating function f(x) = E[x^Y] and its derivatives.
    [[nodiscard]] double pgf(double x) const;
    [[nodiscard]] double pgf_derivative(double x) const;
    [[nodiscard]] double pgf_second_derivative(double x) const;

    /// Same family with the mean moved to `new_mean`. NBD keeps its shape.
    [[nodiscard]] OffspringLaw with_mean(double new_mean) const;

    void validate() const;
};

/// Smallest root of x = f(x) in [0, 1] by iteration from 0. Exactly 1 when mean <= 1.
[[nodiscard]] double extinction_probability(const OffspringLaw& law);

/// 1 - extinction probability at mean 1 + eps for each eps; eps = 0 gives 0.
[[nodiscard]] std::vector<double> survival_curve(const OffspringLaw& law, std::span<const double> epsilons);

/// Expected number of descendants of one event, mean / (1 - mean).
/// Throws StationarityError for mean >= 1.
[[nodiscard]] double branching_total_progeny_mean(const OffspringLaw& law);

struct TreeSimulationOptions {
    std::size_t trees{1'000'000};
    std::uint64_t seed{0};
    std::size_t threads{1};
    /// Supercritical laws only: a tree whose generation exceeds this size is
    /// counted as surviving (extinction from 200 events has probability q^200).
    std::int64_t population_cap{200};
    std::size_t max_generations{100'000};
};

struct TreeSimulationResult {
    std::size_t trees{0};
    std::size_t extinct{0};
    double extinction_fraction{0.0};
    double extinction_standard_error{0.0};
    /// Descendants excluding the root, over extinct trees only.
    double mean_progeny{0.0};
    double progeny_standard_error{0.0};
};

/// Direct Galton-Watson simulation from a single root event. A generation of n
/// events draws its total offspring at once (NBD(n shape, scale) or
/// Poisson(n mean)). Trees are processed in fixed chunks, chunk c drawing from
/// substream split(c), so results do not depend on `threads`.
[[nodiscard]] TreeSimulationResult simulate_trees(const OffspringLaw& law, const TreeSimulationOptions& options);

}  // namespace mdsenbd
