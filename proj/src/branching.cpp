#include "mdsenbd/branching.hpp"

#include "mdsenbd/errors.hpp"
#include "mdsenbd/parallel.hpp"
#include "mdsenbd/rng.hpp"

#include <cmath>
#include <random>

namespace mdsenbd {

namespace {

constexpr std::size_t kExtinctionIterationCap = 10'000'000;
constexpr std::size_t kTreeChunk = 4096;

std::int64_t draw_poisson(double mean, std::mt19937_64& engine) {
    if (!(mean > 0.0)) {
        return 0;
    }
    std::poisson_distribution<std::int64_t> poisson(mean);
    return poisson(engine);
}

}  // namespace

OffspringLaw OffspringLaw::poisson(double mean) {
    OffspringLaw law;
    law.kind = Kind::poisson;
    law.mean = mean;
    law.validate();
    return law;
}

OffspringLaw OffspringLaw::nbd(double shape, double scale) {
    OffspringLaw law;
    law.kind = Kind::nbd;
    law.shape = shape;
    law.scale = scale;
    law.mean = shape * scale;
    law.validate();
    return law;
}

OffspringLaw OffspringLaw::from_spec(const ModelSpec& spec, std::size_t line) {
    spec.validate();
    if (line >= spec.dimension()) {
        throw DomainError("OffspringLaw::from_spec: line index out of range");
    }
    const auto i = static_cast<Eigen::Index>(line);
    if (spec.decay(i) != 0.0) {
        throw DomainError("OffspringLaw::from_spec: the one-period kernel needs decay r = 0");
    }
    const double l0 = spec.interaction_scale(i, i);
    const double m0 = spec.baseline_mean(i);
    if (spec.is_poisson_line(line)) {
        return poisson(m0 / l0);
    }
    const double k0 = *spec.dispersion_shape[line];
    return nbd(k0 / l0, m0 / k0);
}

void OffspringLaw::validate() const {
    if (!(mean > 0.0) || !std::isfinite(mean)) {
        throw DomainError("offspring mean must be positive and finite");
    }
    if (kind == Kind::nbd) {
        if (!(shape > 0.0) || !(scale > 0.0)) {
            throw DomainError("NBD offspring shape and scale must be positive");
        }
        if (std::abs(shape * scale - mean) > 1e-12 * mean) {
            throw DomainError("NBD offspring mean must equal shape * scale");
        }
    }
}

double OffspringLaw::pgf(double x) const {
    if (kind == Kind::poisson) {
        return std::exp(mean * (x - 1.0));
    }
    return std::pow(1.0 + scale * (1.0 - x), -shape);
}

double OffspringLaw::pgf_derivative(double x) const {
    if (kind == Kind::poisson) {
        return mean * std::exp(mean * (x - 1.0));
    }
    return shape * scale * std::pow(1.0 + scale * (1.0 - x), -shape - 1.0);
}

double OffspringLaw::pgf_second_derivative(double x) const {
    if (kind == Kind::poisson) {
        return mean * mean * std::exp(mean * (x - 1.0));
    }
    return shape * (shape + 1.0) * scale * scale * std::pow(1.0 + scale * (1.0 - x), -shape - 2.0);
}

OffspringLaw OffspringLaw::with_mean(double new_mean) const {
    if (kind == Kind::poisson) {
        return poisson(new_mean);
    }
    return nbd(shape, new_mean / shape);
}

double extinction_probability(const OffspringLaw& law) {
    law.validate();
    if (law.mean <= 1.0) {
        return 1.0;
    }
    // f is increasing and convex on [0, 1]; iterates rise monotonically to the smallest root
    double x = 0.0;
    for (std::size_t n = 0; n < kExtinctionIterationCap; ++n) {
        const double next = law.pgf(x);
        if (std::abs(next - x) < 1e-12) {
            return next;
        }
        x = next;
    }
    throw ConvergenceError("extinction_probability: fixed-point iteration did not converge", std::abs(law.pgf(x) - x),
                           {x});
}

std::vector<double> survival_curve(const OffspringLaw& law, std::span<const double> epsilons) {
    law.validate();
    std::vector<double> out;
    out.reserve(epsilons.size());
    for (double eps : epsilons) {
        if (eps < 0.0 || !std::isfinite(eps)) {
            throw DomainError("survival_curve: epsilon must be nonnegative");
        }
        out.push_back(eps == 0.0 ? 0.0 : 1.0 - extinction_probability(law.with_mean(1.0 + eps)));
    }
    return out;
}

double branching_total_progeny_mean(const OffspringLaw& law) {
    law.validate();
    if (law.mean >= 1.0) {
        throw StationarityError(law.mean, "branching_total_progeny_mean");
    }
    return law.mean / (1.0 - law.mean);
}

TreeSimulationResult simulate_trees(const OffspringLaw& law, const TreeSimulationOptions& options) {
    law.validate();
    if (options.trees == 0) {
        throw DomainError("simulate_trees: need at least one tree");
    }
    const bool capped = law.mean > 1.0;
    const std::size_t chunks = (options.trees + kTreeChunk - 1) / kTreeChunk;

    struct ChunkTotals {
        std::size_t extinct{0};
        double progeny{0.0};
        double progeny_sq{0.0};
    };
    std::vector<ChunkTotals> totals(chunks);
    const RandomStream root(options.seed);

    parallel_for(chunks, options.threads, [&](std::size_t c) {
        RandomStream stream = root.split(c);
        auto& engine = stream.engine();
        ChunkTotals acc;
        const std::size_t first = c * kTreeChunk;
        const std::size_t last = std::min(options.trees, first + kTreeChunk);
        for (std::size_t tree = first; tree < last; ++tree) {
            std::int64_t generation = 1;
            double progeny = 0.0;
            bool extinct = false;
            for (std::size_t g = 0; g < options.max_generations; ++g) {
                std::int64_t children = 0;
                const auto n = static_cast<double>(generation);
                if (law.kind == OffspringLaw::Kind::poisson) {
                    children = draw_poisson(n * law.mean, engine);
                } else {
                    std::gamma_distribution<double> gamma(n * law.shape, law.scale);
                    children = draw_poisson(gamma(engine), engine);
                }
                if (children == 0) {
                    extinct = true;
                    break;
                }
                progeny += static_cast<double>(children);
                generation = children;
                if (capped && generation > options.population_cap) {
                    break;
                }
            }
            if (extinct) {
                ++acc.extinct;
                acc.progeny += progeny;
                acc.progeny_sq += progeny * progeny;
            }
        }
        totals[c] = acc;
    });

    ChunkTotals sum;
    for (const auto& t : totals) {
        sum.extinct += t.extinct;
        sum.progeny += t.progeny;
        sum.progeny_sq += t.progeny_sq;
    }
    TreeSimulationResult out;
    out.trees = options.trees;
    out.extinct = sum.extinct;
    const auto n = static_cast<double>(options.trees);
    out.extinction_fraction = static_cast<double>(sum.extinct) / n;
    out.extinction_standard_error = std::sqrt(out.extinction_fraction * (1.0 - out.extinction_fraction) / n);
    if (sum.extinct > 0) {
        const auto m = static_cast<double>(sum.extinct);
        out.mean_progeny = sum.progeny / m;
        const double var = m > 1.0 ? (sum.progeny_sq - m * out.mean_progeny * out.mean_progeny) / (m - 1.0) : 0.0;
        out.progeny_standard_error = std::sqrt(std::max(var, 0.0) / m);
    }
    return out;
}

}  // namespace mdsenbd
