#include "doctest.h"

#include "mdsenbd/distributions.hpp"
#include "mdsenbd/errors.hpp"
#include "mdsenbd/network.hpp"
#include "mdsenbd/process.hpp"
#include "oracles.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <vector>

using namespace mdsenbd;

namespace {

ModelSpec single_line(std::optional<double> k0, double m0, double l0, double r) {
    ModelSpec spec;
    spec.family = k0 ? Family::se_nbd : Family::hawkes;
    spec.baseline_mean = Eigen::VectorXd::Constant(1, m0);
    spec.dispersion_shape = {k0};
    spec.interaction_scale = Eigen::MatrixXd::Constant(1, 1, l0);
    spec.decay = Eigen::VectorXd::Constant(1, r);
    return spec;
}

std::vector<double> column(const EventSeries& s, Eigen::Index line, std::size_t burn_in) {
    std::vector<double> out;
    for (Eigen::Index t = static_cast<Eigen::Index>(burn_in); t < s.counts.rows(); ++t) {
        out.push_back(static_cast<double>(s.counts(t, line)));
    }
    return out;
}

double mean_of(const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) {
        m += v;
    }
    return m / static_cast<double>(x.size());
}

std::vector<std::vector<std::int64_t>> rows_of(const EventSeries& s) {
    std::vector<std::vector<std::int64_t>> rows(s.periods());
    for (std::size_t t = 0; t < s.periods(); ++t) {
        for (std::size_t j = 0; j < s.dimension(); ++j) {
            rows[t].push_back(s.counts(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)));
        }
    }
    return rows;
}

}  // namespace

TEST_SUITE("process") {
    TEST_CASE("plain NBD line without excitation has mean M0") {
        ModelSpec spec = single_line(1.0, 1.0, kInfinity, 0.0);
        spec.family = Family::nbd;
        const auto series = simulate(spec, 1'000'000, 11);
        const auto x = column(series, 0, 0);
        const double se = std::sqrt(2.0 / static_cast<double>(x.size()));
        CHECK(std::abs(mean_of(x) - 1.0) < 3.0 * se);
    }

    TEST_CASE("single-line SE-NBD long-run mean matches the mean-field value") {
        const ModelSpec spec = single_line(2.0, 1.0, 4.0, 0.5);
        const auto series = simulate(spec, 400'000, 12);
        const auto x = column(series, 0, 1000);
        const double se = oracle::batch_means_standard_error(x, 100);
        const double expected = 1.0 / (1.0 - (1.0 / 4.0) / (1.0 - 0.5));
        CHECK(expected == doctest::Approx(2.0));
        CHECK(std::abs(mean_of(x) - expected) < 3.0 * se);
    }

    TEST_CASE("Hawkes line with zero baseline stays at zero") {
        const ModelSpec spec = single_line(std::nullopt, 0.0, 2.0, 0.5);
        const auto series = simulate(spec, 10'000, 13);
        CHECK(series.counts.cwiseAbs().maxCoeff() == 0);
    }

    TEST_CASE("two-line MD-SE-NBD with Building/Leisure-style parameters") {
        // K0 and M0/K0 from the fitted MD-SE-NBD table for lines 1 and 8, with
        // S_11, S_18, S_88 placed on two lines; r = 0.5 on both lines.
        Eigen::VectorXd k0(2);
        k0 << 0.41, 0.35;
        const Eigen::VectorXd m0 = k0 * 0.82;
        Eigen::MatrixXd s(2, 2);
        s << 0.21, 0.25, 0.0, 0.20;
        const ModelSpec spec = spec_from_interaction(Family::md_se_nbd, m0, {k0(0), k0(1)}, s,
                                                     Eigen::VectorXd::Constant(2, 0.5));
        const auto series = simulate(spec, 400'000, 14);
        const Eigen::VectorXd v = mean_field_equilibrium(spec);
        for (Eigen::Index i = 0; i < 2; ++i) {
            const auto x = column(series, i, 1000);
            const double se = oracle::batch_means_standard_error(x, 100);
            CHECK(std::abs(mean_of(x) - v(i)) < 3.0 * se);
        }
    }

    TEST_CASE("conditional moments") {
        const ModelSpec hawkes = single_line(std::nullopt, 3.0, kInfinity, 0.0);
        auto mh = conditional_moments(ProcessState::initial(hawkes), hawkes);
        CHECK(mh.mean(0) == 3.0);
        CHECK(mh.variance(0) == 3.0);

        const ModelSpec nbd = single_line(3.0, 3.0, kInfinity, 0.0);
        auto mn = conditional_moments(ProcessState::initial(nbd), nbd);
        CHECK(mn.mean(0) == 3.0);
        CHECK(mn.variance(0) == doctest::Approx(6.0));

        const ModelSpec near_poisson = single_line(1e9, 3.0, kInfinity, 0.0);
        auto mp = conditional_moments(ProcessState::initial(near_poisson), near_poisson);
        CHECK(std::abs(mp.variance(0) / mp.mean(0) - 1.0) < 1e-6);
    }

    TEST_CASE("M_t / K_t stays at M0 / K0 along a path") {
        Eigen::MatrixXd s(3, 3);
        s << 0.3, 0.1, 0.0, 0.2, 0.3, 0.1, 0.0, 0.2, 0.3;
        Eigen::VectorXd m0(3), r(3);
        m0 << 0.5, 0.3, 0.4;
        r << 0.5, 0.3, 0.6;
        const ModelSpec spec = spec_from_interaction(Family::md_se_nbd, m0, {1.0, 0.5, 2.0}, s, r);
        const auto series = simulate(spec, 5000, 15);
        ProcessState state = ProcessState::initial(spec);
        double worst = 0.0;
        for (const auto& row : rows_of(series)) {
            advance(state, spec, row);
            for (Eigen::Index i = 0; i < 3; ++i) {
                worst = std::max(worst, std::abs(state.m(i) / state.k(i) - spec.dispersion_ratio(static_cast<std::size_t>(i))));
            }
        }
        CHECK(worst < 1e-12);
    }

    TEST_CASE("recursive state equals the explicit convolution sum") {
        RandomStream params(99);
        for (int trial = 0; trial < 20; ++trial) {
            const Eigen::Index d = 1 + trial % 3;
            Eigen::VectorXd m0(d), r(d);
            Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
            std::vector<std::optional<double>> k0;
            for (Eigen::Index i = 0; i < d; ++i) {
                m0(i) = 0.2 + params.uniform();
                r(i) = 0.9 * params.uniform();
                k0.emplace_back(0.2 + 2.0 * params.uniform());
                for (Eigen::Index j = 0; j < d; ++j) {
                    s(i, j) = params.uniform() < 0.7 ? 0.6 / static_cast<double>(d) * params.uniform() : 0.0;
                }
            }
            const ModelSpec spec = spec_from_interaction(Family::md_se_nbd, m0, k0, s, r);
            const auto series = simulate(spec, 200, 500 + static_cast<std::uint64_t>(trial),
                                         SimulationOptions{.allow_nonstationary = true});
            const auto rows = rows_of(series);
            ProcessState state = ProcessState::initial(spec);
            for (std::size_t t = 0; t < rows.size(); ++t) {
                advance(state, spec, rows[t]);
                for (Eigen::Index i = 0; i < d; ++i) {
                    const double expected =
                        oracle::convolution_mean(spec.baseline_mean, spec.interaction_scale, spec.decay, rows,
                                                 static_cast<std::size_t>(i), t + 1);
                    CHECK(std::abs(state.m(i) - expected) <= 1e-10 * std::abs(expected));
                }
            }
        }
    }

    TEST_CASE("simulate_path records the conditional mean used for every draw") {
        const ModelSpec spec = single_line(0.8, 0.7, 3.0, 0.4);
        const auto path = simulate_path(spec, 300, 16);
        const auto rows = rows_of(path.series);
        for (std::size_t t = 0; t < rows.size(); ++t) {
            const double expected = oracle::convolution_mean(spec.baseline_mean, spec.interaction_scale, spec.decay,
                                                             rows, 0, t);
            CHECK(path.conditional_means(static_cast<Eigen::Index>(t), 0) == doctest::Approx(expected).epsilon(1e-12));
        }
    }

    TEST_CASE("one-step NBD draws pass a chi-square goodness-of-fit test") {
        const ModelSpec spec = single_line(0.7, 1.5, 5.0, 0.5);
        const double mean = 2.4;
        const double shape = mean / spec.dispersion_ratio(0);
        for (auto sampler : {Sampler::gamma_poisson, Sampler::inverse_cdf}) {
            RandomStream stream = RandomStream(17).split(static_cast<std::uint64_t>(sampler));
            const std::int64_t max_bin = 14;
            std::vector<double> observed(static_cast<std::size_t>(max_bin + 1), 0.0);
            const int n = 1'000'000;
            for (int i = 0; i < n; ++i) {
                const auto x = draw_count(spec, 0, mean, shape, stream, sampler);
                observed[static_cast<std::size_t>(std::min(x, max_bin))] += 1.0;
            }
            double stat = 0.0;
            double tail = 1.0;
            for (std::int64_t k = 0; k <= max_bin; ++k) {
                double p = 0.0;
                if (k < max_bin) {
                    p = nbd_pmf(k, shape, spec.dispersion_ratio(0));
                    tail -= p;
                } else {
                    p = tail;
                }
                const double e = p * n;
                stat += (observed[static_cast<std::size_t>(k)] - e) * (observed[static_cast<std::size_t>(k)] - e) / e;
            }
            const boost::math::chi_squared dist(static_cast<double>(max_bin));
            CHECK(stat < boost::math::quantile(dist, 0.999));
        }
    }

    TEST_CASE("simulation is deterministic and handles horizon zero") {
        const ModelSpec spec = single_line(0.5, 1.0, 4.0, 0.5);
        CHECK(simulate(spec, 0, 1).periods() == 0);
        const auto a = simulate(spec, 1000, 42);
        const auto b = simulate(spec, 1000, 42);
        const auto c = simulate(spec, 1000, 43);
        CHECK(a.counts == b.counts);
        CHECK(a.counts != c.counts);
    }

    TEST_CASE("nonstationary specs need the override") {
        const ModelSpec spec = single_line(0.5, 1.2, 2.0, 0.5);  // S = 1.2
        CHECK_THROWS_AS((void)simulate(spec, 10, 1), StationarityError);
        try {
            (void)simulate(spec, 10, 1);
        } catch (const StationarityError& e) {
            CHECK(e.spectral_radius() == doctest::Approx(1.2));
            CHECK(e.category() == ErrorCategory::nonstationary);
        }
        CHECK(simulate(spec, 10, 1, SimulationOptions{.allow_nonstationary = true}).periods() == 10);
    }

    TEST_CASE("step rejects inconsistent dimensions") {
        const ModelSpec spec = single_line(0.5, 1.0, 4.0, 0.5);
        ProcessState state = ProcessState::initial(spec);
        auto streams = line_streams(1, 2);
        CHECK_THROWS_AS((void)step(state, spec, streams), DomainError);
        const std::vector<std::int64_t> counts{1, 2};
        CHECK_THROWS_AS(advance(state, spec, counts), DomainError);
    }

    TEST_CASE("conditional_log_probability of impossible counts") {
        const ModelSpec spec = single_line(std::nullopt, 0.0, kInfinity, 0.0);
        const std::vector<std::int64_t> one{1};
        const std::vector<std::int64_t> zero{0};
        CHECK(std::isinf(conditional_log_probability(ProcessState::initial(spec), spec, one)));
        CHECK(conditional_log_probability(ProcessState::initial(spec), spec, zero) == 0.0);
    }
}
