#include "mdsenbd/estimation.hpp"

#include "mdsenbd/distributions.hpp"
#include "mdsenbd/errors.hpp"
#include "mdsenbd/network.hpp"
#include "mdsenbd/optimizer.hpp"
#include "mdsenbd/parallel.hpp"
#include "mdsenbd/process.hpp"
#include "mdsenbd/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace mdsenbd {

std::string_view to_string(EdgeSelection selection) noexcept {
    switch (selection) {
        case EdgeSelection::diagonal_only: return "DIAGONAL_ONLY";
        case EdgeSelection::full_matrix: return "FULL_MATRIX";
        case EdgeSelection::greedy_aic: return "GREEDY_AIC";
    }
    return "UNKNOWN";
}

EdgeSelection parse_edge_selection(std::string_view name) {
    std::string key;
    for (char c : name) {
        key.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    for (auto s : {EdgeSelection::diagonal_only, EdgeSelection::full_matrix, EdgeSelection::greedy_aic}) {
        if (key == to_string(s)) {
            return s;
        }
    }
    throw DomainError("unknown edge selection '" + std::string(name) + "'");
}

void FitConfig::validate() const {
    const auto check = [](const ParameterBounds& b, const char* name) {
        if (!(b.lower < b.upper) || !std::isfinite(b.lower) || !std::isfinite(b.upper)) {
            throw DomainError(std::string("fit bounds for ") + name + " must satisfy lower < upper");
        }
    };
    if (bounds.baseline_mean) {
        check(*bounds.baseline_mean, "baseline_mean");
        if (!(bounds.baseline_mean->lower > 0.0)) {
            throw DomainError("baseline_mean lower bound must be positive");
        }
    }
    check(bounds.dispersion_shape, "dispersion_shape");
    check(bounds.decay, "decay");
    check(bounds.interaction, "interaction");
    if (!(bounds.dispersion_shape.lower > 0.0)) {
        throw DomainError("dispersion_shape lower bound must be positive");
    }
    if (bounds.decay.lower < 0.0 || !(bounds.decay.upper < 1.0)) {
        throw DomainError("decay bounds must lie in [0, 1)");
    }
    if (bounds.interaction.lower < 0.0) {
        throw DomainError("interaction lower bound must be nonnegative");
    }
    if (multistart < 1) {
        throw DomainError("multistart must be at least 1");
    }
    if (!(tolerance > 0.0)) {
        throw DomainError("tolerance must be positive");
    }
}

std::size_t line_parameter_count(bool poisson_line, bool self_exciting, std::size_t free_edges) {
    std::size_t n = 1;  // M0
    if (!poisson_line) {
        ++n;  // K0
    }
    if (self_exciting) {
        n += 1 + free_edges;  // r and the S_ij
    }
    return n;
}

double log_likelihood(const EventSeries& series, const ModelSpec& spec) {
    spec.validate();
    if (series.dimension() != spec.dimension()) {
        throw DomainError("log_likelihood: series has " + std::to_string(series.dimension()) +
                          " lines but the model has " + std::to_string(spec.dimension()));
    }
    ProcessState state = ProcessState::initial(spec);
    const auto d = spec.dimension();
    std::vector<std::int64_t> counts(d);
    double total = 0.0;
    for (std::size_t t = 0; t < series.periods(); ++t) {
        for (std::size_t i = 0; i < d; ++i) {
            counts[i] = series.counts(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i));
        }
        total += conditional_log_probability(state, spec, counts);
        if (total == -std::numeric_limits<double>::infinity()) {
            return total;
        }
        advance(state, spec, counts);
    }
    return total;
}

namespace {

/// Structure of the fit for one target line.
struct LineStructure {
    bool poisson{false};
    bool self_exciting{true};
    std::vector<std::size_t> sources;  // ascending; free S_ij edges
};

struct LineParameters {
    double m0{0.0};
    std::optional<double> k0;
    double decay{0.0};
    std::vector<double> s;  // aligned with LineStructure::sources
};

struct LineFit {
    LineParameters params;
    double log_likelihood{-std::numeric_limits<double>::infinity()};
    std::vector<double> start_values;  // per start, final log-likelihood
    bool converged{false};
    std::size_t evaluations{0};
};

struct ResolvedBounds {
    ParameterBounds m0;
    ParameterBounds k0;
    ParameterBounds decay;
    ParameterBounds s;
};

/// Fast likelihood for one target line given its free sources.
class LineProblem {
public:
    LineProblem(const EventSeries& series, std::size_t line, LineStructure structure)
        : line_(line), structure_(std::move(structure)), periods_(series.periods()) {
        const auto col = static_cast<Eigen::Index>(line);
        target_.resize(periods_);
        log_factorial_.resize(periods_);
        for (std::size_t t = 0; t < periods_; ++t) {
            target_[t] = series.counts(static_cast<Eigen::Index>(t), col);
            log_factorial_[t] = std::lgamma(static_cast<double>(target_[t]) + 1.0);
        }
        for (auto j : structure_.sources) {
            std::vector<double> column(periods_);
            for (std::size_t t = 0; t < periods_; ++t) {
                column[t] = static_cast<double>(series.counts(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)));
            }
            sources_.push_back(std::move(column));
        }
    }

    [[nodiscard]] const LineStructure& structure() const noexcept { return structure_; }
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

    [[nodiscard]] double log_likelihood(const LineParameters& p) const {
        // combined input sum_j S_ij X_t^(j); the decayed state G then gives
        // M_t = M0 + (1 - r) G_t with G_t = r G_{t-1} + combined_t
        std::vector<double> combined(periods_, 0.0);
        if (structure_.self_exciting) {
            for (std::size_t k = 0; k < sources_.size(); ++k) {
                const double s = p.s[k];
                if (s == 0.0) {
                    continue;
                }
                const auto& col = sources_[k];
                for (std::size_t t = 0; t < periods_; ++t) {
                    combined[t] += s * col[t];
                }
            }
        }
        const double r = structure_.self_exciting ? p.decay : 0.0;
        const double gain = 1.0 - r;
        const double m0 = p.m0;
        double g = 0.0;
        double total = 0.0;
        if (structure_.poisson) {
            for (std::size_t t = 0; t < periods_; ++t) {
                const double mean = m0 + gain * g;
                const auto x = target_[t];
                if (mean > 0.0) {
                    total += static_cast<double>(x) * std::log(mean) - mean - log_factorial_[t];
                } else if (x != 0) {
                    return -std::numeric_limits<double>::infinity();
                }
                g = r * g + combined[t];
            }
            return total;
        }
        const double omega = m0 / *p.k0;
        const double log1p_omega = std::log1p(omega);
        const double log_q = std::log(omega) - log1p_omega;
        const double shape_per_mean = *p.k0 / m0;
        for (std::size_t t = 0; t < periods_; ++t) {
            const double mean = m0 + gain * g;
            const double shape = shape_per_mean * mean;
            const auto x = target_[t];
            total += log_rising_factorial(shape, x) - log_factorial_[t] - shape * log1p_omega +
                     static_cast<double>(x) * log_q;
            g = r * g + combined[t];
        }
        return total;
    }

private:
    std::size_t line_;
    LineStructure structure_;
    std::size_t periods_;
    std::vector<std::int64_t> target_;
    std::vector<double> log_factorial_;
    std::vector<std::vector<double>> sources_;
};

/// Maps optimizer coordinates to line parameters. Positive-bounded
/// parameters (M0, K0) are searched in log space; r and S directly.
class LineParameterization {
public:
    LineParameterization(const LineStructure& structure, const ResolvedBounds& bounds)
        : structure_(structure), bounds_(bounds) {
        const auto n = static_cast<Eigen::Index>(size());
        box_.lower.resize(n);
        box_.upper.resize(n);
        Eigen::Index k = 0;
        box_.lower(k) = std::log(bounds.m0.lower);
        box_.upper(k) = std::log(bounds.m0.upper);
        ++k;
        if (!structure.poisson) {
            box_.lower(k) = std::log(bounds.k0.lower);
            box_.upper(k) = std::log(bounds.k0.upper);
            ++k;
        }
        if (structure.self_exciting) {
            box_.lower(k) = bounds.decay.lower;
            box_.upper(k) = bounds.decay.upper;
            ++k;
            for (std::size_t e = 0; e < structure.sources.size(); ++e, ++k) {
                box_.lower(k) = bounds.s.lower;
                box_.upper(k) = bounds.s.upper;
            }
        }
    }

    [[nodiscard]] std::size_t size() const noexcept {
        return line_parameter_count(structure_.poisson, structure_.self_exciting, structure_.sources.size());
    }
    [[nodiscard]] const Box& box() const noexcept { return box_; }

    [[nodiscard]] LineParameters decode(const Eigen::VectorXd& x) const {
        LineParameters p;
        Eigen::Index k = 0;
        p.m0 = std::clamp(std::exp(x(k++)), bounds_.m0.lower, bounds_.m0.upper);
        if (!structure_.poisson) {
            p.k0 = std::clamp(std::exp(x(k++)), bounds_.k0.lower, bounds_.k0.upper);
        }
        if (structure_.self_exciting) {
            p.decay = std::clamp(x(k++), bounds_.decay.lower, bounds_.decay.upper);
            for (std::size_t e = 0; e < structure_.sources.size(); ++e) {
                p.s.push_back(std::clamp(x(k++), bounds_.s.lower, bounds_.s.upper));
            }
        }
        return p;
    }

    [[nodiscard]] Eigen::VectorXd encode(const LineParameters& p) const {
        Eigen::VectorXd x(static_cast<Eigen::Index>(size()));
        Eigen::Index k = 0;
        x(k++) = std::log(p.m0);
        if (!structure_.poisson) {
            x(k++) = std::log(*p.k0);
        }
        if (structure_.self_exciting) {
            x(k++) = p.decay;
            for (double s : p.s) {
                x(k++) = s;
            }
        }
        return box_.clamp(x);
    }

    [[nodiscard]] Eigen::VectorXd random_point(RandomStream& stream) const {
        Eigen::VectorXd x(box_.lower.size());
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            x(k) = box_.lower(k) + stream.uniform() * (box_.upper(k) - box_.lower(k));
        }
        return x;
    }

private:
    LineStructure structure_;
    ResolvedBounds bounds_;
    Box box_;
};

ResolvedBounds resolve_bounds(const EventSeries& series, const FitBounds& bounds) {
    ResolvedBounds out;
    if (bounds.baseline_mean) {
        out.m0 = *bounds.baseline_mean;
    } else {
        const double max_count =
            series.periods() > 0 && series.dimension() > 0 ? static_cast<double>(series.counts.maxCoeff()) : 0.0;
        out.m0 = {1e-6, std::max(10.0 * max_count, 1.0)};
    }
    out.k0 = bounds.dispersion_shape;
    out.decay = bounds.decay;
    out.s = bounds.interaction;
    return out;
}

bool line_is_poisson(const FitConfig& config, std::size_t line) {
    switch (config.family) {
        case Family::hawkes:
        case Family::md_hawkes: return true;
        case Family::hybrid: return line < config.poisson_lines.size() && config.poisson_lines[line];
        default: return false;
    }
}

LineStructure base_structure(const FitConfig& config, std::size_t line, std::size_t dimension, bool full) {
    LineStructure s;
    s.poisson = line_is_poisson(config, line);
    s.self_exciting = is_self_exciting(config.family);
    if (s.self_exciting) {
        if (full && is_multidimensional(config.family)) {
            for (std::size_t j = 0; j < dimension; ++j) {
                s.sources.push_back(j);
            }
        } else {
            s.sources.push_back(line);
        }
    }
    return s;
}

std::uint64_t structure_key(const EventSeries& series, const LineStructure& structure) {
    std::string key = structure.poisson ? "P" : "N";
    key += structure.self_exciting ? "+" : "-";
    for (auto j : structure.sources) {
        key += '|';
        key += series.sector_names[j];
    }
    return stable_hash(key);
}

struct FitJob {
    std::size_t problem{0};
    std::size_t start{0};
};

/// Optimizes every problem from `multistart` random starts plus an optional
/// warm start; each (problem, start) pair is an independent job.
std::vector<LineFit> fit_lines(const EventSeries& series,
                               const FitConfig& config,
                               const ResolvedBounds& bounds,
                               const std::vector<LineProblem>& problems,
                               const std::vector<std::optional<LineParameters>>& warm_starts) {
    std::vector<LineParameterization> maps;
    maps.reserve(problems.size());
    for (const auto& p : problems) {
        maps.emplace_back(p.structure(), bounds);
    }

    std::vector<FitJob> jobs;
    for (std::size_t p = 0; p < problems.size(); ++p) {
        const std::size_t starts = config.multistart + (warm_starts[p] ? 1 : 0);
        for (std::size_t s = 0; s < starts; ++s) {
            jobs.push_back({p, s});
        }
    }

    NelderMeadOptions nm;
    nm.tolerance = config.tolerance;
    nm.max_iterations = config.max_iterations;

    std::vector<OptimizationResult> results(jobs.size());
    const RandomStream root(config.seed);
    parallel_for(jobs.size(), config.threads, [&](std::size_t j) {
        const auto& job = jobs[j];
        const auto& problem = problems[job.problem];
        const auto& map = maps[job.problem];
        Eigen::VectorXd start;
        if (job.start < config.multistart) {
            RandomStream stream = root.split(stable_hash(series.sector_names[problem.line()]))
                                      .split(structure_key(series, problem.structure()))
                                      .split(job.start);
            start = map.random_point(stream);
        } else {
            start = map.encode(*warm_starts[job.problem]);
        }
        const auto objective = [&](const Eigen::VectorXd& x) { return -problem.log_likelihood(map.decode(x)); };
        results[j] = nelder_mead_minimize(objective, start, map.box(), nm);
    });

    std::vector<LineFit> fits(problems.size());
    std::vector<bool> have_best(problems.size(), false);
    std::vector<double> best_value(problems.size(), std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        const auto& job = jobs[j];
        const auto& res = results[j];
        auto& fit = fits[job.problem];
        fit.evaluations += res.evaluations;
        if (job.start < config.multistart) {
            fit.start_values.push_back(-res.value);
        }
        // strict comparison keeps the lowest start index on ties
        if (!have_best[job.problem] || res.value < best_value[job.problem]) {
            have_best[job.problem] = true;
            best_value[job.problem] = res.value;
            fit.params = maps[job.problem].decode(res.x);
            fit.converged = res.converged;
        }
    }
    for (std::size_t p = 0; p < problems.size(); ++p) {
        fits[p].log_likelihood = problems[p].log_likelihood(fits[p].params);
    }
    return fits;
}

FitResult assemble(const EventSeries& series,
                   const FitConfig& config,
                   const std::vector<LineStructure>& structures,
                   const std::vector<LineFit>& fits) {
    const auto d = series.dimension();
    const auto di = static_cast<Eigen::Index>(d);
    FitResult out;
    out.spec.family = config.family;
    out.spec.baseline_mean.resize(di);
    out.spec.decay = Eigen::VectorXd::Zero(di);
    out.spec.dispersion_shape.resize(d);
    out.interaction = Eigen::MatrixXd::Zero(di, di);
    out.converged = true;
    out.log_likelihood = 0.0;
    out.starts_summary.assign(config.multistart, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        const auto& f = fits[i];
        const auto idx = static_cast<Eigen::Index>(i);
        out.spec.baseline_mean(idx) = f.params.m0;
        out.spec.dispersion_shape[i] = f.params.k0;
        out.spec.decay(idx) = structures[i].self_exciting ? f.params.decay : 0.0;
        for (std::size_t e = 0; e < structures[i].sources.size(); ++e) {
            const auto j = structures[i].sources[e];
            out.interaction(idx, static_cast<Eigen::Index>(j)) = f.params.s[e];
            out.free_edges.insert({i, j});
        }
        out.log_likelihood += f.log_likelihood;
        out.n_params += line_parameter_count(structures[i].poisson, structures[i].self_exciting,
                                             structures[i].sources.size());
        out.converged = out.converged && f.converged;
        out.evaluations += f.evaluations;
        for (std::size_t s = 0; s < config.multistart && s < f.start_values.size(); ++s) {
            out.starts_summary[s] += f.start_values[s];
        }
    }
    out.spec.interaction_scale = interaction_scale_from_s(out.spec.baseline_mean, out.spec.decay, out.interaction);
    out.spec.validate();
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (std::isfinite(out.spec.interaction_scale(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))) {
                out.active_edges.insert({i, j});
            }
        }
    }
    out.aic = 2.0 * static_cast<double>(out.n_params) - 2.0 * out.log_likelihood;
    if (static_cast<double>(series.periods()) < 10.0 * static_cast<double>(out.n_params)) {
        std::ostringstream w;
        w << "series has " << series.periods() << " periods, fewer than 10 x " << out.n_params << " free parameters";
        out.warnings.push_back(w.str());
    }
    return out;
}

void check_inputs(const EventSeries& series, const FitConfig& config) {
    config.validate();
    series.validate();
    if (series.dimension() == 0) {
        throw DomainError("fit: series has no lines");
    }
    if (config.family == Family::hybrid && config.poisson_lines.size() != series.dimension()) {
        throw DomainError("fit: HYBRID needs one poisson_lines flag per line");
    }
}

FitResult fit_structures(const EventSeries& series,
                         const FitConfig& config,
                         const std::vector<LineStructure>& structures) {
    const auto bounds = resolve_bounds(series, config.bounds);
    std::vector<LineProblem> problems;
    problems.reserve(structures.size());
    for (std::size_t i = 0; i < structures.size(); ++i) {
        problems.emplace_back(series, i, structures[i]);
    }
    const std::vector<std::optional<LineParameters>> no_warm(structures.size());
    return assemble(series, config, structures, fit_lines(series, config, bounds, problems, no_warm));
}

}  // namespace

FitResult fit(const EventSeries& series, const FitConfig& config) {
    check_inputs(series, config);
    if (config.edge_selection == EdgeSelection::greedy_aic && is_multidimensional(config.family)) {
        return select_edges_greedy(series, config);
    }
    const bool full = config.edge_selection == EdgeSelection::full_matrix;
    std::vector<LineStructure> structures;
    for (std::size_t i = 0; i < series.dimension(); ++i) {
        structures.push_back(base_structure(config, i, series.dimension(), full));
    }
    return fit_structures(series, config, structures);
}

FitResult select_edges_greedy(const EventSeries& series, const FitConfig& config) {
    check_inputs(series, config);
    if (!is_multidimensional(config.family)) {
        throw DomainError("select_edges_greedy: family must be MD_SE_NBD, MD_HAWKES or HYBRID");
    }
    const auto d = series.dimension();
    const auto bounds = resolve_bounds(series, config.bounds);

    std::vector<LineStructure> structures;
    std::vector<LineProblem> problems;
    for (std::size_t i = 0; i < d; ++i) {
        structures.push_back(base_structure(config, i, d, false));
        problems.emplace_back(series, i, structures.back());
    }
    std::vector<LineFit> current =
        fit_lines(series, config, bounds, problems, std::vector<std::optional<LineParameters>>(d));

    const auto aic_of = [](const LineStructure& s, double ll) {
        return 2.0 * static_cast<double>(line_parameter_count(s.poisson, s.self_exciting, s.sources.size())) -
               2.0 * ll;
    };
    const auto with_edge = [](LineStructure s, std::size_t j) {
        s.sources.insert(std::upper_bound(s.sources.begin(), s.sources.end(), j), j);
        return s;
    };
    const auto warm_with_edge = [](const LineStructure& before, const LineParameters& p, std::size_t j) {
        LineParameters w = p;
        std::vector<double> s;
        bool placed = false;
        for (std::size_t e = 0; e < before.sources.size(); ++e) {
            if (!placed && j < before.sources[e]) {
                s.push_back(0.0);
                placed = true;
            }
            s.push_back(p.s[e]);
        }
        if (!placed) {
            s.push_back(0.0);
        }
        w.s = std::move(s);
        return w;
    };

    struct Candidate {
        std::size_t source{0};
        double delta_aic{std::numeric_limits<double>::infinity()};
        LineStructure structure;
        LineFit fit;
    };
    std::vector<std::optional<Candidate>> best_candidate(d);

    const auto evaluate_candidates = [&](std::size_t i) {
        std::vector<LineProblem> cand_problems;
        std::vector<std::optional<LineParameters>> warm;
        std::vector<std::size_t> cand_sources;
        for (std::size_t j = 0; j < d; ++j) {
            const auto& src = structures[i].sources;
            if (std::find(src.begin(), src.end(), j) != src.end()) {
                continue;
            }
            cand_sources.push_back(j);
            cand_problems.emplace_back(series, i, with_edge(structures[i], j));
            warm.push_back(warm_with_edge(structures[i], current[i].params, j));
        }
        best_candidate[i].reset();
        if (cand_problems.empty()) {
            return;
        }
        auto fits = fit_lines(series, config, bounds, cand_problems, warm);
        const double base_aic = aic_of(structures[i], current[i].log_likelihood);
        for (std::size_t c = 0; c < fits.size(); ++c) {
            const double delta = aic_of(cand_problems[c].structure(), fits[c].log_likelihood) - base_aic;
            if (!best_candidate[i] || delta < best_candidate[i]->delta_aic) {
                best_candidate[i] = Candidate{cand_sources[c], delta, cand_problems[c].structure(), std::move(fits[c])};
            }
        }
    };

    for (std::size_t i = 0; i < d; ++i) {
        evaluate_candidates(i);
    }
    std::size_t extra_evaluations = 0;
    while (true) {
        std::optional<std::size_t> pick;
        for (std::size_t i = 0; i < d; ++i) {
            if (best_candidate[i] && best_candidate[i]->delta_aic < 0.0 &&
                (!pick || best_candidate[i]->delta_aic < best_candidate[*pick]->delta_aic)) {
                pick = i;
            }
        }
        if (!pick) {
            break;
        }
        const auto i = *pick;
        extra_evaluations += current[i].evaluations;
        structures[i] = best_candidate[i]->structure;
        current[i] = std::move(best_candidate[i]->fit);
        evaluate_candidates(i);
    }
    FitResult result = assemble(series, config, structures, current);
    result.evaluations += extra_evaluations;
    return result;
}

std::vector<AicRow> aic_table(const EventSeries& series, std::span<const FitConfig> configs) {
    std::vector<AicRow> rows;
    for (const auto& config : configs) {
        AicRow row;
        row.family = config.family;
        row.edge_selection = config.edge_selection;
        try {
            row.fit = fit(series, config);
            row.aic = row.fit->aic;
            row.log_likelihood = row.fit->log_likelihood;
            row.n_params = row.fit->n_params;
        } catch (const Error& e) {
            row.failed = true;
            row.error = e.what();
            row.aic = std::numeric_limits<double>::quiet_NaN();
            row.log_likelihood = std::numeric_limits<double>::quiet_NaN();
        }
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const AicRow& a, const AicRow& b) {
        if (a.failed != b.failed) {
            return !a.failed;
        }
        if (a.failed) {
            return false;
        }
        if (a.aic != b.aic) {
            return a.aic < b.aic;
        }
        return a.n_params < b.n_params;
    });
    return rows;
}

}  // namespace mdsenbd
