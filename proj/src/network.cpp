#include "mdsenbd/network.hpp"

#include "mdsenbd/distributions.hpp"
#include "mdsenbd/errors.hpp"
#include "mdsenbd/parallel.hpp"
#include "mdsenbd/process.hpp"
#include "mdsenbd/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace mdsenbd {

InteractionMatrix build_s_matrix(const ModelSpec& spec) {
    spec.validate();
    const auto d = static_cast<Eigen::Index>(spec.dimension());
    InteractionMatrix out{excitation_coefficients(spec)};
    for (Eigen::Index i = 0; i < d; ++i) {
        // validate() already guarantees r < 1
        out.s.row(i) /= (1.0 - spec.decay(i));
    }
    return out;
}

Eigen::MatrixXd interaction_scale_from_s(const Eigen::VectorXd& baseline_mean,
                                         const Eigen::VectorXd& decay,
                                         const Eigen::MatrixXd& s) {
    const auto d = s.rows();
    Eigen::MatrixXd l0 = Eigen::MatrixXd::Constant(d, d, kInfinity);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (!(decay(i) >= 0.0 && decay(i) < 1.0)) {
            throw DomainError("decay must lie in [0, 1)");
        }
        for (Eigen::Index j = 0; j < d; ++j) {
            if (s(i, j) > 0.0) {
                l0(i, j) = baseline_mean(i) / (s(i, j) * (1.0 - decay(i)));
            }
        }
    }
    return l0;
}

namespace {

void require_nonnegative(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) {
        throw DomainError("spectral_radius: matrix must be square");
    }
    if (!m.allFinite() || (m.size() > 0 && m.minCoeff() < 0.0)) {
        throw DomainError("spectral_radius: matrix must be finite and nonnegative");
    }
}

// Tarjan's algorithm on the graph with an edge i -> j whenever m(i, j) > 0.
std::vector<std::vector<Eigen::Index>> strongly_connected_components(const Eigen::MatrixXd& m) {
    const auto n = m.rows();
    std::vector<Eigen::Index> index(static_cast<std::size_t>(n), -1);
    std::vector<Eigen::Index> low(static_cast<std::size_t>(n), 0);
    std::vector<bool> on_stack(static_cast<std::size_t>(n), false);
    std::vector<Eigen::Index> stack;
    std::vector<std::vector<Eigen::Index>> components;
    Eigen::Index counter = 0;

    std::function<void(Eigen::Index)> visit = [&](Eigen::Index v) {
        const auto vi = static_cast<std::size_t>(v);
        index[vi] = low[vi] = counter++;
        stack.push_back(v);
        on_stack[vi] = true;
        for (Eigen::Index w = 0; w < n; ++w) {
            if (!(m(v, w) > 0.0)) {
                continue;
            }
            const auto wi = static_cast<std::size_t>(w);
            if (index[wi] < 0) {
                visit(w);
                low[vi] = std::min(low[vi], low[wi]);
            } else if (on_stack[wi]) {
                low[vi] = std::min(low[vi], index[wi]);
            }
        }
        if (low[vi] == index[vi]) {
            std::vector<Eigen::Index> component;
            Eigen::Index w = -1;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[static_cast<std::size_t>(w)] = false;
                component.push_back(w);
            } while (w != v);
            std::sort(component.begin(), component.end());
            components.push_back(std::move(component));
        }
    };
    for (Eigen::Index v = 0; v < n; ++v) {
        if (index[static_cast<std::size_t>(v)] < 0) {
            visit(v);
        }
    }
    return components;
}

// Perron root of an irreducible nonnegative block. B = A + I is primitive and
// keeps every iterate strictly positive, so the Collatz-Wielandt ratios
// min_i (Bx)_i / x_i <= rho(B) <= max_i (Bx)_i / x_i are always defined.
double irreducible_perron_root(const Eigen::MatrixXd& a, const PowerIterationOptions& options) {
    const auto n = a.rows();
    if (n == 1) {
        return a(0, 0);
    }
    const Eigen::MatrixXd b = a + Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
    double lower = 0.0;
    double upper = 0.0;
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        const Eigen::VectorXd y = b * x;
        const Eigen::ArrayXd ratio = y.array() / x.array();
        lower = ratio.minCoeff();
        upper = ratio.maxCoeff();
        if (upper - lower <= options.tolerance) {
            return 0.5 * (lower + upper) - 1.0;
        }
        x = y / y.maxCoeff();
    }
    throw ConvergenceError("spectral_radius: power iteration did not converge", upper - lower,
                           std::vector<double>(x.data(), x.data() + x.size()));
}

}  // namespace

double spectral_radius(const Eigen::MatrixXd& matrix, const PowerIterationOptions& options) {
    require_nonnegative(matrix);
    double rho = 0.0;
    for (const auto& component : strongly_connected_components(matrix)) {
        const auto n = static_cast<Eigen::Index>(component.size());
        Eigen::MatrixXd block(n, n);
        for (Eigen::Index a = 0; a < n; ++a) {
            for (Eigen::Index b = 0; b < n; ++b) {
                block(a, b) = matrix(component[static_cast<std::size_t>(a)], component[static_cast<std::size_t>(b)]);
            }
        }
        rho = std::max(rho, irreducible_perron_root(block, options));
    }
    return std::max(rho, 0.0);
}

double spectral_radius(const InteractionMatrix& s, const PowerIterationOptions& options) {
    return spectral_radius(s.s, options);
}

StationarityReport classify_stationarity(const InteractionMatrix& s) {
    StationarityReport report;
    report.spectral_radius = spectral_radius(s);
    report.steady = report.spectral_radius < 1.0;
    report.near_critical = std::abs(report.spectral_radius - 1.0) <= 1e-9;
    return report;
}

namespace {

void require_steady(const InteractionMatrix& s, const char* context) {
    const double rho = spectral_radius(s);
    if (!(rho < 1.0)) {
        throw StationarityError(rho, context);
    }
}

void require_source(std::size_t source, std::size_t dimension) {
    if (source >= dimension) {
        throw DomainError("source line " + std::to_string(source + 1) + " is out of range");
    }
}

}  // namespace

Eigen::VectorXd mean_field_equilibrium(const InteractionMatrix& s, const Eigen::VectorXd& baseline_mean) {
    if (baseline_mean.size() != s.s.rows()) {
        throw DomainError("mean_field_equilibrium: dimension mismatch");
    }
    require_steady(s, "mean_field_equilibrium");
    const auto d = s.s.rows();
    const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(d, d) - s.s;
    return system.partialPivLu().solve(baseline_mean);
}

Eigen::VectorXd mean_field_equilibrium(const ModelSpec& spec) {
    return mean_field_equilibrium(build_s_matrix(spec), spec.baseline_mean);
}

Eigen::VectorXd impact_infinite(const InteractionMatrix& s, std::size_t source) {
    require_source(source, s.dimension());
    require_steady(s, "impact_infinite");
    const auto d = s.s.rows();
    const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(d, d) - s.s;
    return system.partialPivLu().solve(s.s.col(static_cast<Eigen::Index>(source)));
}

Eigen::VectorXd impact_infinite(const ModelSpec& spec, std::size_t source) {
    return impact_infinite(build_s_matrix(spec), source);
}

std::vector<Eigen::VectorXd> impact_trajectory(const ModelSpec& spec, std::size_t source, std::size_t horizon) {
    spec.validate();
    require_source(source, spec.dimension());
    const Eigen::MatrixXd direct = excitation_coefficients(spec);
    Eigen::MatrixXd propagate = direct;
    propagate.diagonal() += spec.decay;

    std::vector<Eigen::VectorXd> out;
    out.reserve(horizon);
    // a_{t+1} = (T + S_hat)^t S_hat e_source is the expected extra count in period t+1
    Eigen::VectorXd added = direct.col(static_cast<Eigen::Index>(source));
    Eigen::VectorXd cumulative = Eigen::VectorXd::Zero(direct.rows());
    for (std::size_t t = 0; t < horizon; ++t) {
        cumulative += added;
        out.push_back(cumulative);
        added = propagate * added;
    }
    return out;
}

ImpactResult impact_analysis(const InteractionMatrix& s) {
    const auto d = s.dimension();
    ImpactResult out;
    out.totals.resize(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
        out.per_source.push_back(impact_infinite(s, i));
        out.totals(static_cast<Eigen::Index>(i)) = out.per_source.back().sum();
    }
    out.average_total = d > 0 ? out.totals.sum() / static_cast<double>(d) : 0.0;
    return out;
}

ImpactResult impact_analysis(const ModelSpec& spec, std::size_t trajectory_horizon) {
    ImpactResult out = impact_analysis(build_s_matrix(spec));
    if (trajectory_horizon > 0) {
        for (std::size_t i = 0; i < spec.dimension(); ++i) {
            out.trajectories.push_back(impact_trajectory(spec, i, trajectory_horizon));
        }
    }
    return out;
}

std::vector<SectorImpact> rank_sectors(const ImpactResult& impact) {
    std::vector<SectorImpact> out;
    for (Eigen::Index i = 0; i < impact.totals.size(); ++i) {
        out.push_back({static_cast<std::size_t>(i), impact.totals(i)});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const SectorImpact& a, const SectorImpact& b) { return a.total > b.total; });
    return out;
}

std::vector<NetworkEdge> export_network(const InteractionMatrix& s,
                                        const std::vector<std::string>& names,
                                        double threshold) {
    const auto d = s.dimension();
    const auto name = [&](std::size_t i) { return i < names.size() ? names[i] : "line" + std::to_string(i + 1); };
    std::vector<NetworkEdge> edges;
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < d; ++i) {
            const double w = s.s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (w > threshold) {
                edges.push_back({j, i, name(j), name(i), w});
            }
        }
    }
    return edges;
}

namespace {

constexpr double kQuantileMeanLimit = 700.0;

std::int64_t paired_quantile(const ModelSpec& spec, std::size_t line, double mean, double shape, double u) {
    if (!(mean > 0.0)) {
        return 0;
    }
    if (mean > kQuantileMeanLimit) {
        throw DomainError("simulate_impact: conditional mean exceeds the inverse-CDF sampling range");
    }
    return spec.is_poisson_line(line) ? poisson_quantile(u, mean)
                                      : nbd_quantile(u, shape, spec.dispersion_ratio(line));
}

}  // namespace

ImpactEstimate simulate_impact(const ModelSpec& spec, std::size_t source, const ImpactSimulationOptions& options) {
    spec.validate();
    require_source(source, spec.dimension());
    require_steady(build_s_matrix(spec), "simulate_impact");
    const auto d = spec.dimension();
    const auto paths = options.paths;
    if (paths < 2) {
        throw DomainError("simulate_impact: at least two paths are required");
    }

    Eigen::MatrixXd added(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(paths));
    const RandomStream root = RandomStream(options.seed).split(source);

    parallel_for(paths, options.threads, [&](std::size_t p) {
        const RandomStream path_stream = root.split(p);
        std::vector<RandomStream> streams;
        streams.reserve(d);
        for (std::size_t i = 0; i < d; ++i) {
            streams.push_back(path_stream.split(i));
        }
        ProcessState base = ProcessState::initial(spec);
        ProcessState shocked = base;
        std::vector<std::int64_t> shock(d, 0);
        shock[source] = 1;
        advance(shocked, spec, shock);
        std::fill(shock.begin(), shock.end(), 0);
        advance(base, spec, shock);

        std::vector<std::int64_t> x_base(d);
        std::vector<std::int64_t> x_shocked(d);
        Eigen::VectorXd diff = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
        for (std::size_t t = 0; t < options.horizon; ++t) {
            for (std::size_t i = 0; i < d; ++i) {
                const auto idx = static_cast<Eigen::Index>(i);
                const double u = streams[i].uniform();
                x_base[i] = paired_quantile(spec, i, base.m(idx), base.k(idx), u);
                x_shocked[i] = paired_quantile(spec, i, shocked.m(idx), shocked.k(idx), u);
                diff(idx) += static_cast<double>(x_shocked[i] - x_base[i]);
            }
            advance(base, spec, x_base);
            advance(shocked, spec, x_shocked);
        }
        added.col(static_cast<Eigen::Index>(p)) = diff;
    });

    ImpactEstimate out;
    out.paths = paths;
    const auto n = static_cast<double>(paths);
    out.mean = added.rowwise().sum() / n;
    const Eigen::MatrixXd centered = added.colwise() - out.mean;
    const Eigen::VectorXd variance = centered.array().square().rowwise().sum() / (n - 1.0);
    out.standard_error = (variance / n).array().sqrt();
    return out;
}

}  // namespace mdsenbd
