#include "mdsenbd/process.hpp"

#include "mdsenbd/distributions.hpp"
#include "mdsenbd/errors.hpp"
#include "mdsenbd/network.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace mdsenbd {

namespace {

// inverse_cdf walks the pmf from 0; above this mean it defers to the rejection samplers.
constexpr double kInverseCdfMeanLimit = 200.0;

void require_dimension(const ProcessState& state, const ModelSpec& spec, std::size_t got, const char* what) {
    const auto d = static_cast<Eigen::Index>(spec.dimension());
    if (state.m.size() != d || state.k.size() != d || state.excitation.size() != d ||
        got != static_cast<std::size_t>(d)) {
        throw DomainError(std::string(what) + ": state, spec and counts have inconsistent dimensions");
    }
}

std::int64_t poisson_draw(double mean, std::mt19937_64& engine) {
    if (!(mean > 0.0)) {
        return 0;
    }
    std::poisson_distribution<std::int64_t> dist(mean);
    return dist(engine);
}

}  // namespace

ProcessState ProcessState::initial(const ModelSpec& spec) {
    spec.validate();
    const auto d = static_cast<Eigen::Index>(spec.dimension());
    ProcessState state;
    state.m = spec.baseline_mean;
    state.k.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const auto& k0 = spec.dispersion_shape[static_cast<std::size_t>(i)];
        state.k(i) = k0 ? *k0 : kInfinity;
    }
    state.excitation = Eigen::VectorXd::Zero(d);
    return state;
}

void advance(ProcessState& state, const ModelSpec& spec, std::span<const std::int64_t> counts) {
    require_dimension(state, spec, counts.size(), "advance");
    const auto d = static_cast<Eigen::Index>(spec.dimension());
    for (Eigen::Index i = 0; i < d; ++i) {
        double e = spec.decay(i) * state.excitation(i);
        for (Eigen::Index j = 0; j < d; ++j) {
            const double l0 = spec.interaction_scale(i, j);
            const auto x = counts[static_cast<std::size_t>(j)];
            if (x != 0 && std::isfinite(l0)) {
                e += static_cast<double>(x) / l0;
            }
        }
        state.excitation(i) = e;
        const double factor = 1.0 + e;
        state.m(i) = spec.baseline_mean(i) * factor;
        const auto& k0 = spec.dispersion_shape[static_cast<std::size_t>(i)];
        state.k(i) = k0 ? *k0 * factor : kInfinity;
    }
    ++state.t;
}

std::int64_t draw_count(const ModelSpec& spec,
                        std::size_t line,
                        double mean,
                        double shape,
                        RandomStream& stream,
                        Sampler sampler) {
    if (!(mean > 0.0)) {
        return 0;
    }
    if (spec.is_poisson_line(line)) {
        if (sampler == Sampler::inverse_cdf && mean <= kInverseCdfMeanLimit) {
            return poisson_quantile(stream.uniform(), mean);
        }
        return poisson_draw(mean, stream.engine());
    }
    const double scale = spec.dispersion_ratio(line);
    if (sampler == Sampler::inverse_cdf && mean <= kInverseCdfMeanLimit) {
        return nbd_quantile(stream.uniform(), shape, scale);
    }
    std::gamma_distribution<double> gamma(shape, scale);
    return poisson_draw(gamma(stream.engine()), stream.engine());
}

StepOutcome step(const ProcessState& state,
                 const ModelSpec& spec,
                 std::span<RandomStream> line_streams,
                 Sampler sampler) {
    require_dimension(state, spec, line_streams.size(), "step");
    StepOutcome out;
    const auto d = spec.dimension();
    out.counts.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        out.counts[i] = draw_count(spec, i, state.m(idx), state.k(idx), line_streams[i], sampler);
    }
    out.next = state;
    advance(out.next, spec, out.counts);
    return out;
}

ConditionalMoments conditional_moments(const ProcessState& state, const ModelSpec& spec) {
    const auto d = static_cast<Eigen::Index>(spec.dimension());
    if (state.m.size() != d) {
        throw DomainError("conditional_moments: state and spec have inconsistent dimensions");
    }
    ConditionalMoments out{state.m, state.m};
    for (Eigen::Index i = 0; i < d; ++i) {
        out.variance(i) = state.m(i) * (1.0 + spec.dispersion_ratio(static_cast<std::size_t>(i)));
    }
    return out;
}

double conditional_log_probability(const ProcessState& state,
                                   const ModelSpec& spec,
                                   std::span<const std::int64_t> counts) {
    require_dimension(state, spec, counts.size(), "conditional_log_probability");
    double total = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        const double mean = state.m(idx);
        const auto x = counts[i];
        if (!(mean > 0.0)) {
            if (x != 0) {
                return -std::numeric_limits<double>::infinity();
            }
            continue;
        }
        total += spec.is_poisson_line(i) ? poisson_log_pmf(x, mean)
                                         : nbd_log_pmf(x, state.k(idx), spec.dispersion_ratio(i));
    }
    return total;
}

std::vector<RandomStream> line_streams(std::uint64_t seed, std::size_t dimension) {
    const RandomStream root(seed);
    std::vector<RandomStream> streams;
    streams.reserve(dimension);
    for (std::size_t i = 0; i < dimension; ++i) {
        streams.push_back(root.split(i));
    }
    return streams;
}

SimulatedPath simulate_path(const ModelSpec& spec,
                            std::size_t horizon,
                            std::uint64_t seed,
                            const SimulationOptions& options) {
    spec.validate();
    const auto s = build_s_matrix(spec);
    if (!options.allow_nonstationary) {
        const double rho = spectral_radius(s);
        if (!(rho < 1.0)) {
            throw StationarityError(rho, "simulate");
        }
    }
    const auto d = spec.dimension();
    SimulatedPath path;
    path.series.sector_names = options.sector_names.empty() ? default_sector_names(d) : options.sector_names;
    if (path.series.sector_names.size() != d) {
        throw DomainError("simulate: sector_names size does not match model dimension");
    }
    path.series.counts.resize(static_cast<Eigen::Index>(horizon), static_cast<Eigen::Index>(d));
    path.conditional_means.resize(static_cast<Eigen::Index>(horizon), static_cast<Eigen::Index>(d));

    auto streams = line_streams(seed, d);
    ProcessState state = ProcessState::initial(spec);
    std::vector<std::int64_t> counts(d);
    for (std::size_t t = 0; t < horizon; ++t) {
        const auto row = static_cast<Eigen::Index>(t);
        path.conditional_means.row(row) = state.m.transpose();
        for (std::size_t i = 0; i < d; ++i) {
            const auto idx = static_cast<Eigen::Index>(i);
            counts[i] = draw_count(spec, i, state.m(idx), state.k(idx), streams[i], options.sampler);
            path.series.counts(row, idx) = counts[i];
        }
        advance(state, spec, counts);
    }
    return path;
}

EventSeries simulate(const ModelSpec& spec, std::size_t horizon, std::uint64_t seed, const SimulationOptions& options) {
    return simulate_path(spec, horizon, seed, options).series;
}

}  // namespace mdsenbd
