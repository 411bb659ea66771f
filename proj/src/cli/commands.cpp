#include "mdsenbd/cli/commands.hpp"

#include "mdsenbd/branching.hpp"
#include "mdsenbd/cli/config.hpp"
#include "mdsenbd/cli/output.hpp"
#include "mdsenbd/correlation.hpp"
#include "mdsenbd/csv_io.hpp"
#include "mdsenbd/estimation.hpp"
#include "mdsenbd/network.hpp"
#include "mdsenbd/process.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

namespace mdsenbd::cli {

int exit_code(ErrorCategory category) noexcept {
    switch (category) {
        case ErrorCategory::usage: return 2;
        case ErrorCategory::config: return 3;
        case ErrorCategory::io: return 4;
        case ErrorCategory::schema: return 5;
        case ErrorCategory::domain: return 6;
        case ErrorCategory::nonstationary: return 7;
        case ErrorCategory::convergence: return 8;
    }
    return 1;
}

namespace {

using nlohmann::json;

struct Context {
    std::string command;
    Config config;
    std::size_t threads{1};
    std::vector<std::string> warnings;
};

struct Artifacts {
    json result = json::object();
    std::vector<std::pair<std::string, std::string>> files;
};

std::uint64_t require_seed(Context& ctx) {
    if (!ctx.config.has("run", "seed")) {
        throw ConfigError("command '" + ctx.command + "' is stochastic and needs a seed (--seed or [run] seed)");
    }
    return ctx.config.get_seed("run", "seed", 0);
}

EventSeries load_input(Context& ctx, const std::string& section, bool required) {
    const auto path = ctx.config.get_optional(section, "input");
    if (!path) {
        if (required) {
            throw ConfigError("command '" + ctx.command + "' needs an input CSV (--input or [" + section + "] input)");
        }
        return {};
    }
    return ingest_csv(*path);
}

std::string cell(double v) { return format_number(v); }

json shape_json(const std::optional<double>& k0) { return k0 ? number(*k0) : json("inf"); }

json spec_json(const ModelSpec& spec, const std::vector<std::string>& names) {
    json lines = json::array();
    for (std::size_t i = 0; i < spec.dimension(); ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        lines.push_back({{"name", names[i]},
                         {"baseline_mean", number(spec.baseline_mean(idx))},
                         {"dispersion_shape", shape_json(spec.dispersion_shape[i])},
                         {"decay", number(spec.decay(idx))}});
    }
    return {{"family", std::string(to_string(spec.family))},
            {"lines", lines},
            {"interaction", matrix_json(build_s_matrix(spec).s)},
            {"interaction_scale", matrix_json(spec.interaction_scale)}};
}

// simulate ------------------------------------------------------------------

Artifacts cmd_simulate(Context& ctx) {
    auto& cfg = ctx.config;
    const ModelSpec spec = read_model(cfg);
    const auto names = read_sector_names(cfg, spec.dimension());
    const std::size_t horizon = cfg.get_size("simulate", "horizon", 100);
    SimulationOptions opts;
    opts.allow_nonstationary = cfg.get_bool("simulate", "allow_nonstationary", false);
    opts.sector_names = names;
    const std::string sampler = cfg.get_string("simulate", "sampler", "gamma_poisson");
    if (sampler == "inverse_cdf") {
        opts.sampler = Sampler::inverse_cdf;
    } else if (sampler != "gamma_poisson") {
        throw ConfigError("[simulate] sampler must be gamma_poisson or inverse_cdf");
    }
    const auto seed = require_seed(ctx);
    cfg.reject_unused({"model", "simulate", "run"});

    const auto s = build_s_matrix(spec);
    const auto report = classify_stationarity(s);
    EventSeries series = simulate(spec, horizon, seed, opts);
    series.labels.resize(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
        series.labels[t] = std::to_string(t + 1);
    }

    Artifacts a;
    a.result["model"] = spec_json(spec, names);
    a.result["periods"] = horizon;
    a.result["spectral_radius"] = number(report.spectral_radius);
    a.result["steady"] = report.steady;
    if (report.near_critical) {
        ctx.warnings.push_back("spectral radius is within 1e-9 of 1");
    }
    if (horizon > 0) {
        a.result["sample_mean"] = vector_json(series.counts.cast<double>().colwise().mean().transpose());
        a.result["total_events"] = series.counts.sum();
    }
    if (report.steady) {
        a.result["mean_field"] = vector_json(mean_field_equilibrium(spec));
    }
    std::ostringstream csv;
    write_csv(csv, series);
    a.files.emplace_back("series.csv", csv.str());
    return a;
}

// synth ---------------------------------------------------------------------

Artifacts cmd_synth(Context& ctx, const std::optional<std::filesystem::path>& out_dir) {
    auto& cfg = ctx.config;
    const ModelSpec spec = read_model(cfg);
    const auto names = read_sector_names(cfg, spec.dimension());
    const std::size_t horizon = cfg.get_size("synth", "horizon", 100);
    const std::string file = cfg.get_string("synth", "file", "synthetic.csv");
    SimulationOptions opts;
    opts.allow_nonstationary = cfg.get_bool("synth", "allow_nonstationary", false);
    opts.sector_names = names;
    const auto seed = require_seed(ctx);
    cfg.reject_unused({"model", "synth", "run"});
    if (!out_dir) {
        throw UsageError("synth writes a CSV file and needs --out <directory>");
    }
    const auto series = generate_synthetic(spec, horizon, seed, *out_dir / file, opts);
    Artifacts a;
    a.result["model"] = spec_json(spec, names);
    a.result["periods"] = horizon;
    a.result["file"] = file;
    a.result["total_events"] = horizon > 0 ? series.counts.sum() : 0;
    return a;
}

// fit -----------------------------------------------------------------------

json fit_json(const FitResult& f, const std::vector<std::string>& names) {
    json edges = json::array();
    for (const auto& e : f.active_edges) {
        edges.push_back({{"source", names[e.source]},
                         {"target", names[e.target]},
                         {"weight", number(f.interaction(static_cast<Eigen::Index>(e.target),
                                                         static_cast<Eigen::Index>(e.source)))}});
    }
    json starts = json::array();
    for (double v : f.starts_summary) {
        starts.push_back(number(v));
    }
    json out = spec_json(f.spec, names);
    out["log_likelihood"] = number(f.log_likelihood);
    out["aic"] = number(f.aic);
    out["n_params"] = f.n_params;
    out["converged"] = f.converged;
    out["evaluations"] = f.evaluations;
    out["active_edges"] = edges;
    out["starts_summary"] = starts;
    out["spectral_radius"] = number(spectral_radius(InteractionMatrix{f.interaction}));
    return out;
}

Artifacts cmd_fit(Context& ctx) {
    auto& cfg = ctx.config;
    const EventSeries series = load_input(ctx, "fit", true);
    const Family family = parse_family(cfg.get_string("fit", "family", "MD_SE_NBD"));
    FitConfig fc = read_fit_config(cfg, "fit", family, series.dimension(), EdgeSelection::diagonal_only);
    fc.seed = require_seed(ctx);
    fc.threads = ctx.threads;
    cfg.reject_unused({"fit", "run"});

    const FitResult f = fit(series, fc);
    for (const auto& w : f.warnings) {
        ctx.warnings.push_back(w);
    }
    const auto names = series.sector_names;
    Artifacts a;
    a.result["periods"] = series.periods();
    a.result["edge_selection"] = std::string(to_string(fc.edge_selection));
    a.result["fit"] = fit_json(f, names);

    Table params{{"line", "baseline_mean", "dispersion_shape", "decay"}, {}};
    for (std::size_t i = 0; i < f.spec.dimension(); ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        const auto& k0 = f.spec.dispersion_shape[i];
        params.add({names[i], cell(f.spec.baseline_mean(idx)), k0 ? cell(*k0) : "inf", cell(f.spec.decay(idx))});
    }
    Table s{{"target"}, {}};
    s.header.insert(s.header.end(), names.begin(), names.end());
    for (std::size_t i = 0; i < names.size(); ++i) {
        std::vector<std::string> row{names[i]};
        for (std::size_t j = 0; j < names.size(); ++j) {
            row.push_back(cell(f.interaction(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
        }
        s.add(std::move(row));
    }
    a.files.emplace_back("parameters.csv", params.to_csv());
    a.files.emplace_back("interaction.csv", s.to_csv());
    return a;
}

// aic-table -----------------------------------------------------------------

Artifacts cmd_aic_table(Context& ctx) {
    auto& cfg = ctx.config;
    const std::string section = "aic-table";
    const EventSeries series = load_input(ctx, section, true);
    std::vector<Family> families;
    {
        std::stringstream ss(cfg.get_string(section, "families", "NBD,HAWKES,SE_NBD,MD_HAWKES,MD_SE_NBD"));
        std::string item;
        while (std::getline(ss, item, ',')) {
            families.push_back(parse_family(item));
        }
    }
    if (families.empty()) {
        throw ConfigError("[aic-table] families is empty");
    }
    const bool needs_flags = std::find(families.begin(), families.end(), Family::hybrid) != families.end();
    FitConfig base = read_fit_config(cfg, section, needs_flags ? Family::hybrid : Family::md_se_nbd,
                                     series.dimension(), EdgeSelection::full_matrix);
    base.seed = require_seed(ctx);
    base.threads = ctx.threads;
    cfg.reject_unused({section, "run"});

    std::vector<FitConfig> configs;
    for (auto fam : families) {
        FitConfig c = base;
        c.family = fam;
        configs.push_back(c);
    }
    const auto rows = aic_table(series, configs);
    const auto names = series.sector_names;

    Artifacts a;
    Table table{{"rank", "family", "edge_selection", "aic", "log_likelihood", "n_params", "status"}, {}};
    json jrows = json::array();
    std::size_t rank = 0;
    for (const auto& r : rows) {
        ++rank;
        const std::string selection =
            is_multidimensional(r.family) ? std::string(to_string(r.edge_selection)) : "DIAGONAL_ONLY";
        json jr = {{"rank", rank},
                   {"family", std::string(to_string(r.family))},
                   {"edge_selection", selection},
                   {"failed", r.failed}};
        if (r.failed) {
            jr["error"] = r.error;
            table.add({std::to_string(rank), std::string(to_string(r.family)), selection, "", "", "", "failed"});
        } else {
            jr["aic"] = number(r.aic);
            jr["log_likelihood"] = number(r.log_likelihood);
            jr["n_params"] = r.n_params;
            jr["fit"] = fit_json(*r.fit, names);
            table.add({std::to_string(rank), std::string(to_string(r.family)), selection, cell(r.aic),
                       cell(r.log_likelihood), std::to_string(r.n_params), "ok"});
            for (const auto& w : r.fit->warnings) {
                ctx.warnings.push_back(std::string(to_string(r.family)) + ": " + w);
            }
        }
        jrows.push_back(jr);
    }
    a.result["periods"] = series.periods();
    a.result["rows"] = jrows;
    a.files.emplace_back("aic_table.csv", table.to_csv());
    return a;
}

// impact --------------------------------------------------------------------

Artifacts cmd_impact(Context& ctx) {
    auto& cfg = ctx.config;
    const ModelSpec spec = read_model(cfg);
    const auto names = read_sector_names(cfg, spec.dimension());
    const std::size_t horizon = cfg.get_size("impact", "trajectory_horizon", 50);
    const std::size_t mc_paths = cfg.get_size("impact", "mc_paths", 0);
    const std::size_t mc_horizon = cfg.get_size("impact", "mc_horizon", 200);
    std::uint64_t seed = 0;
    if (mc_paths > 0) {
        seed = require_seed(ctx);
    }
    cfg.reject_unused({"model", "impact", "run"});

    const auto s = build_s_matrix(spec);
    const ImpactResult impact = impact_analysis(spec, horizon);
    const auto d = spec.dimension();

    Artifacts a;
    a.result["model"] = spec_json(spec, names);
    a.result["spectral_radius"] = number(spectral_radius(s));
    json per_source = json::array();
    Table vec{{"source"}, {}};
    vec.header.insert(vec.header.end(), names.begin(), names.end());
    vec.header.push_back("total");
    for (std::size_t i = 0; i < d; ++i) {
        per_source.push_back({{"source", names[i]},
                              {"impact", vector_json(impact.per_source[i])},
                              {"total", number(impact.totals(static_cast<Eigen::Index>(i)))}});
        std::vector<std::string> row{names[i]};
        for (Eigen::Index k = 0; k < impact.per_source[i].size(); ++k) {
            row.push_back(cell(impact.per_source[i](k)));
        }
        row.push_back(cell(impact.totals(static_cast<Eigen::Index>(i))));
        vec.add(std::move(row));
    }
    a.result["per_source"] = per_source;
    a.result["average_total"] = number(impact.average_total);

    json ranking = json::array();
    Table rank_table{{"rank", "line", "total"}, {}};
    std::size_t rank = 0;
    for (const auto& r : rank_sectors(impact)) {
        ++rank;
        ranking.push_back({{"rank", rank}, {"line", names[r.line]}, {"total", number(r.total)}});
        rank_table.add({std::to_string(rank), names[r.line], cell(r.total)});
    }
    a.result["ranking"] = ranking;

    Table traj{{"source", "horizon"}, {}};
    traj.header.insert(traj.header.end(), names.begin(), names.end());
    traj.header.push_back("total");
    for (std::size_t i = 0; i < impact.trajectories.size(); ++i) {
        for (std::size_t t = 0; t < impact.trajectories[i].size(); ++t) {
            const auto& v = impact.trajectories[i][t];
            std::vector<std::string> row{names[i], std::to_string(t + 1)};
            for (Eigen::Index k = 0; k < v.size(); ++k) {
                row.push_back(cell(v(k)));
            }
            row.push_back(cell(v.sum()));
            traj.add(std::move(row));
        }
    }

    if (mc_paths > 0) {
        json mc = json::array();
        ImpactSimulationOptions opts;
        opts.paths = mc_paths;
        opts.horizon = mc_horizon;
        opts.seed = seed;
        opts.threads = ctx.threads;
        for (std::size_t i = 0; i < d; ++i) {
            const auto est = simulate_impact(spec, i, opts);
            mc.push_back({{"source", names[i]},
                          {"mean", vector_json(est.mean)},
                          {"standard_error", vector_json(est.standard_error)},
                          {"paths", est.paths}});
        }
        a.result["monte_carlo"] = mc;
    }
    a.files.emplace_back("impact.csv", vec.to_csv());
    a.files.emplace_back("ranking.csv", rank_table.to_csv());
    if (horizon > 0) {
        a.files.emplace_back("impact_trajectories.csv", traj.to_csv());
    }
    return a;
}

// network -------------------------------------------------------------------

Artifacts cmd_network(Context& ctx) {
    auto& cfg = ctx.config;
    const ModelSpec spec = read_model(cfg);
    const auto names = read_sector_names(cfg, spec.dimension());
    const double threshold = cfg.get_double("network", "threshold", 0.0);
    cfg.reject_unused({"model", "network", "run"});

    const auto s = build_s_matrix(spec);
    const auto report = classify_stationarity(s);
    const auto edges = export_network(s, names, threshold);
    Artifacts a;
    a.result["spectral_radius"] = number(report.spectral_radius);
    a.result["steady"] = report.steady;
    a.result["near_critical"] = report.near_critical;
    a.result["interaction"] = matrix_json(s.s);
    json jedges = json::array();
    Table table{{"source", "target", "weight"}, {}};
    for (const auto& e : edges) {
        jedges.push_back({{"source", e.source_name}, {"target", e.target_name}, {"weight", number(e.weight)}});
        table.add({e.source_name, e.target_name, cell(e.weight)});
    }
    a.result["edges"] = jedges;
    a.files.emplace_back("network.csv", table.to_csv());
    return a;
}

// corr ----------------------------------------------------------------------

Artifacts cmd_corr(Context& ctx) {
    auto& cfg = ctx.config;
    const ModelSpec spec = read_model(cfg);
    const auto d = spec.dimension();
    const auto names = read_sector_names(cfg, d);
    const std::size_t max_lag = cfg.get_size("corr", "max_lag", 20);
    const std::size_t line = cfg.get_size("corr", "line", 1);
    const std::size_t partner = cfg.get_size("corr", "partner", line);
    const bool integral = cfg.get_bool("corr", "integral", true);
    IntegralSolverOptions iopts;
    iopts.step = cfg.get_double("corr", "step", iopts.step);
    iopts.horizon = cfg.get_double("corr", "t_max", 0.0);
    EventSeries series = load_input(ctx, "corr", false);
    const bool has_input = series.dimension() > 0;
    const std::size_t periods = has_input ? 0 : cfg.get_size("corr", "periods", 200000);
    std::uint64_t seed = 0;
    if (!has_input && periods > 0) {
        seed = require_seed(ctx);
    }
    cfg.reject_unused({"model", "corr", "run"});

    if (line < 1 || line > d || partner < 1 || partner > d) {
        throw ConfigError("[corr] line and partner must be in 1.." + std::to_string(d));
    }
    const std::size_t li = line - 1;
    const std::size_t pk = partner - 1;

    // continuous-limit mapping: a = S, b = -ln r, omega' = M0/K0, theta0 = M0
    const auto s = build_s_matrix(spec);
    ExponentialKernelSystem system;
    system.amplitude = s.s;
    system.rate.resize(static_cast<Eigen::Index>(d));
    system.dispersion.resize(static_cast<Eigen::Index>(d));
    system.baseline = spec.baseline_mean;
    for (std::size_t i = 0; i < d; ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        const double r = spec.decay(idx);
        if (!(r > 0.0)) {
            throw ConfigError("[model] decay must be positive on every line for the continuous-limit mapping");
        }
        system.rate(idx) = -std::log(r);
        system.dispersion(idx) = spec.dispersion_ratio(i);
    }

    Artifacts a;
    a.result["kernel_amplitude"] = matrix_json(system.amplitude);
    a.result["kernel_rate"] = vector_json(system.rate);
    a.result["dispersion"] = vector_json(system.dispersion);
    a.result["line"] = names[li];
    a.result["partner"] = names[pk];

    std::vector<std::optional<double>> empirical(max_lag + 1), closed(max_lag + 1), solved(max_lag + 1);
    if (!has_input && periods > 0) {
        SimulationOptions opts;
        opts.sector_names = names;
        series = simulate(spec, periods, seed, opts);
    }
    if (series.dimension() > 0) {
        if (series.dimension() != d) {
            throw DomainError("corr: input has " + std::to_string(series.dimension()) + " lines, model has " +
                              std::to_string(d));
        }
        const auto cov = empirical_autocovariance(series, max_lag);
        std::vector<double> values;
        for (std::size_t t = 0; t <= max_lag; ++t) {
            empirical[t] = cov[t](static_cast<Eigen::Index>(li), static_cast<Eigen::Index>(pk));
            values.push_back(*empirical[t]);
        }
        a.result["empirical_periods"] = series.periods();
        if (max_lag >= 2) {
            try {
                const auto decay = fit_log_linear_decay(values, 1, max_lag);
                a.result["empirical_decay_rate"] = number(decay.rate);
            } catch (const DomainError&) {
                ctx.warnings.push_back("empirical autocovariance has too few positive lags for a decay fit");
            }
        }
    }
    if (d == 1) {
        CorrelationSpec cs{system.amplitude(0, 0), system.rate(0), system.dispersion(0), system.baseline(0)};
        for (std::size_t t = 0; t <= max_lag; ++t) {
            closed[t] = autocovariance_closed_form(cs, static_cast<double>(t));
        }
        a.result["closed_form_decay_rate"] = number(cs.rate * (1.0 - cs.amplitude));
    }
    if (integral) {
        const auto grid = covariance_integral_solve(system, iopts);
        const auto& c = grid.at(li, pk);
        for (std::size_t t = 0; t <= max_lag; ++t) {
            const double idx = static_cast<double>(t) / grid.step;
            const auto n = static_cast<std::size_t>(std::llround(idx));
            if (std::abs(idx - static_cast<double>(n)) > 1e-6) {
                throw ConfigError("[corr] step must divide every integer lag");
            }
            solved[t] = n < grid.lags.size() ? c(static_cast<Eigen::Index>(n)) : 0.0;
        }
        a.result["integral_iterations"] = grid.iterations;
        a.result["integral_residual"] = number(grid.last_change);
    }

    Table table{{"lag", "empirical", "closed_form", "integral_equation"}, {}};
    json rows = json::array();
    const auto opt_cell = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    const auto opt_json = [](const std::optional<double>& v) { return v ? number(*v) : json(nullptr); };
    for (std::size_t t = 0; t <= max_lag; ++t) {
        table.add({std::to_string(t), opt_cell(empirical[t]), opt_cell(closed[t]), opt_cell(solved[t])});
        rows.push_back({{"lag", t},
                        {"empirical", opt_json(empirical[t])},
                        {"closed_form", opt_json(closed[t])},
                        {"integral_equation", opt_json(solved[t])}});
    }
    a.result["series"] = rows;
    a.files.emplace_back("correlation.csv", table.to_csv());
    return a;
}

// branching -----------------------------------------------------------------

Artifacts cmd_branching(Context& ctx) {
    auto& cfg = ctx.config;
    const std::string kind = cfg.get_string("branching", "kind", "poisson");
    OffspringLaw law;
    if (kind == "poisson") {
        law = OffspringLaw::poisson(cfg.get_double("branching", "mean", 2.0));
    } else if (kind == "nbd") {
        law = OffspringLaw::nbd(cfg.get_double("branching", "shape", 1.0), cfg.get_double("branching", "scale", 1.0));
    } else {
        throw ConfigError("[branching] kind must be poisson or nbd");
    }
    std::vector<double> epsilons{0.1, 0.01, 0.001, 0.0001};
    if (const auto e = cfg.get_list("branching", "epsilons")) {
        epsilons = *e;
    }
    TreeSimulationOptions topts;
    topts.trees = cfg.get_size("branching", "trees", 0);
    topts.population_cap = cfg.get_int("branching", "population_cap", topts.population_cap);
    if (topts.trees > 0) {
        topts.seed = require_seed(ctx);
        topts.threads = ctx.threads;
    }
    cfg.reject_unused({"branching", "run"});

    Artifacts a;
    const double q = extinction_probability(law);
    a.result["kind"] = kind;
    a.result["mean"] = number(law.mean);
    if (law.kind == OffspringLaw::Kind::nbd) {
        a.result["shape"] = number(law.shape);
        a.result["scale"] = number(law.scale);
    }
    a.result["extinction_probability"] = number(q);
    a.result["fixed_point_residual"] = number(std::abs(law.pgf(q) - q));
    if (law.mean < 1.0) {
        a.result["total_progeny_mean"] = number(branching_total_progeny_mean(law));
    }
    const auto critical = law.with_mean(1.0);
    a.result["critical_ratio_limit"] = number(2.0 / critical.pgf_second_derivative(1.0));

    const auto survival = survival_curve(law, epsilons);
    Table table{{"epsilon", "survival", "survival_over_epsilon"}, {}};
    json curve = json::array();
    for (std::size_t k = 0; k < epsilons.size(); ++k) {
        const double ratio = epsilons[k] > 0.0 ? survival[k] / epsilons[k] : 0.0;
        table.add({cell(epsilons[k]), cell(survival[k]), cell(ratio)});
        curve.push_back({{"epsilon", number(epsilons[k])}, {"survival", number(survival[k])}, {"ratio", number(ratio)}});
    }
    a.result["survival_curve"] = curve;

    if (topts.trees > 0) {
        const auto mc = simulate_trees(law, topts);
        a.result["monte_carlo"] = {{"trees", mc.trees},
                                   {"extinction_fraction", number(mc.extinction_fraction)},
                                   {"extinction_standard_error", number(mc.extinction_standard_error)},
                                   {"mean_progeny", number(mc.mean_progeny)},
                                   {"progeny_standard_error", number(mc.progeny_standard_error)}};
    }
    a.files.emplace_back("survival.csv", table.to_csv());
    return a;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simulation, estimation and network analysis for self-exciting count processes", "mdsenbd"};
    app.require_subcommand(1);
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    std::string out_dir;
    std::string input;
    bool allow_nonstationary = false;

    const std::vector<std::pair<std::string, std::string>> commands{
        {"simulate", "simulate a process from [model]"},
        {"fit", "fit one model family to an event-count CSV"},
        {"aic-table", "fit several families and rank them by AIC"},
        {"impact", "impact analysis and upstream ranking for [model]"},
        {"network", "export the interaction network of [model]"},
        {"corr", "empirical, closed-form and integral-equation correlation functions"},
        {"branching", "extinction probability and survival near criticality"},
        {"synth", "write a synthetic event-count CSV"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("-c,--config", config_path, "INI config file");
        sub->add_option("--set", overrides, "override, section.key=value")->take_all();
        sub->add_option("--seed", seed, "random seed (same as [run] seed)");
        sub->add_option("--threads", threads, "worker threads (results do not depend on it)");
        sub->add_option("-o,--out", out_dir, "output directory for result.json and CSV tables");
        sub->add_option("-i,--input", input, "event-count CSV");
        sub->add_flag("--allow-nonstationary", allow_nonstationary, "simulate even when rho(S) >= 1");
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: usage: " << e.what() << '\n';
        return exit_code(ErrorCategory::usage);
    }

    const auto subs = app.get_subcommands();
    const std::string command = subs.front()->get_name();
    try {
        Context ctx;
        ctx.command = command;
        if (!config_path.empty()) {
            ctx.config = Config::from_file(config_path);
        }
        for (const auto& o : overrides) {
            ctx.config.set_override(o);
        }
        if (seed) {
            ctx.config.set_override("run.seed=" + std::to_string(*seed));
        }
        if (!input.empty()) {
            const std::string section = command == "aic-table" ? "aic-table" : command;
            ctx.config.set_override(section + ".input=" + input);
        }
        if (allow_nonstationary) {
            ctx.config.set_override(command + ".allow_nonstationary=true");
        }
        // thread count is a resource setting and is left out of the echoed configuration
        ctx.threads = ctx.config.get_size("run", "threads", 1);
        if (threads) {
            ctx.threads = *threads;
        }
        if (ctx.threads == 0) {
            throw ConfigError("thread count must be positive");
        }

        std::optional<std::filesystem::path> dir;
        if (!out_dir.empty()) {
            dir = out_dir;
            std::error_code ec;
            std::filesystem::create_directories(*dir, ec);
            if (ec) {
                throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());
            }
        }

        Artifacts artifacts;
        if (command == "simulate") {
            artifacts = cmd_simulate(ctx);
        } else if (command == "synth") {
            artifacts = cmd_synth(ctx, dir);
        } else if (command == "fit") {
            artifacts = cmd_fit(ctx);
        } else if (command == "aic-table") {
            artifacts = cmd_aic_table(ctx);
        } else if (command == "impact") {
            artifacts = cmd_impact(ctx);
        } else if (command == "network") {
            artifacts = cmd_network(ctx);
        } else if (command == "corr") {
            artifacts = cmd_corr(ctx);
        } else {
            artifacts = cmd_branching(ctx);
        }

        json config_echo = json::object();
        for (const auto& [section, keys] : ctx.config.resolved()) {
            if (section == "run") {
                for (const auto& [k, v] : keys) {
                    if (k != "threads") {
                        config_echo[section][k] = v;
                    }
                }
                continue;
            }
            for (const auto& [k, v] : keys) {
                config_echo[section][k] = v;
            }
        }
        json document = {{"command", command},
                         {"version", kVersion},
                         {"config", config_echo},
                         {"result", artifacts.result},
                         {"warnings", ctx.warnings}};
        json files = json::array();
        for (const auto& f : artifacts.files) {
            files.push_back(f.first);
        }
        document["tables"] = files;
        const std::string text = dump(document);
        if (dir) {
            write_file(*dir / "result.json", text);
            for (const auto& [name, content] : artifacts.files) {
                write_file(*dir / name, content);
            }
        }
        out << text;
        return 0;
    } catch (const Error& e) {
        err << "error: " << to_string(e.category()) << ": " << e.what() << '\n';
        return exit_code(e.category());
    } catch (const std::exception& e) {
        err << "error: internal: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace mdsenbd::cli
