#include "mdsenbd/model.hpp"

#include "mdsenbd/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace mdsenbd {

std::string_view to_string(Family family) noexcept {
    switch (family) {
        case Family::md_se_nbd: return "MD_SE_NBD";
        case Family::md_hawkes: return "MD_HAWKES";
        case Family::se_nbd: return "SE_NBD";
        case Family::hawkes: return "HAWKES";
        case Family::nbd: return "NBD";
        case Family::hybrid: return "HYBRID";
    }
    return "UNKNOWN";
}

Family parse_family(std::string_view name) {
    std::string key;
    for (char c : name) {
        if (c == '-' || c == ' ') {
            c = '_';
        }
        key.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    for (Family f : {Family::md_se_nbd, Family::md_hawkes, Family::se_nbd, Family::hawkes, Family::nbd,
                     Family::hybrid}) {
        if (key == to_string(f)) {
            return f;
        }
    }
    throw DomainError("unknown model family '" + std::string(name) + "'");
}

bool is_multidimensional(Family family) noexcept {
    return family == Family::md_se_nbd || family == Family::md_hawkes || family == Family::hybrid;
}

bool is_self_exciting(Family family) noexcept { return family != Family::nbd; }

double ModelSpec::dispersion_ratio(std::size_t line) const {
    const auto& shape = dispersion_shape.at(line);
    return shape ? baseline_mean(static_cast<Eigen::Index>(line)) / *shape : 0.0;
}

void ModelSpec::validate() const {
    const auto d = static_cast<Eigen::Index>(dimension());
    if (d == 0) {
        throw DomainError("model dimension must be positive");
    }
    if (static_cast<Eigen::Index>(dispersion_shape.size()) != d || decay.size() != d ||
        interaction_scale.rows() != d || interaction_scale.cols() != d) {
        std::ostringstream out;
        out << "inconsistent model dimensions: baseline_mean has " << d << " lines, dispersion_shape "
            << dispersion_shape.size() << ", decay " << decay.size() << ", interaction_scale "
            << interaction_scale.rows() << "x" << interaction_scale.cols();
        throw DomainError(out.str());
    }
    for (Eigen::Index i = 0; i < d; ++i) {
        const double m0 = baseline_mean(i);
        if (!std::isfinite(m0) || m0 < 0.0) {
            throw DomainError("baseline_mean must be finite and nonnegative (line " + std::to_string(i + 1) + ")");
        }
        const auto& k0 = dispersion_shape[static_cast<std::size_t>(i)];
        if (k0 && !(std::isfinite(*k0) && *k0 > 0.0)) {
            throw DomainError("dispersion_shape must be positive (line " + std::to_string(i + 1) + ")");
        }
        if (!(decay(i) >= 0.0 && decay(i) < 1.0)) {
            throw DomainError("decay must lie in [0, 1) (line " + std::to_string(i + 1) + ")");
        }
        for (Eigen::Index j = 0; j < d; ++j) {
            const double l0 = interaction_scale(i, j);
            if (std::isnan(l0) || !(l0 > 0.0)) {
                throw DomainError("interaction_scale entries must lie in (0, inf]");
            }
        }
    }

    const auto all_poisson = std::all_of(dispersion_shape.begin(), dispersion_shape.end(),
                                         [](const auto& k) { return !k.has_value(); });
    const auto all_nbd = std::all_of(dispersion_shape.begin(), dispersion_shape.end(),
                                     [](const auto& k) { return k.has_value(); });
    switch (family) {
        case Family::hawkes:
        case Family::md_hawkes:
            if (!all_poisson) {
                throw DomainError(std::string(to_string(family)) + " requires infinite dispersion_shape on every line");
            }
            break;
        case Family::se_nbd:
        case Family::md_se_nbd:
        case Family::nbd:
            if (!all_nbd) {
                throw DomainError(std::string(to_string(family)) + " requires finite dispersion_shape on every line");
            }
            break;
        case Family::hybrid:
            break;
    }
    if (family == Family::nbd && interaction_scale.array().isFinite().any()) {
        throw DomainError("NBD family has no self-excitation: every interaction_scale entry must be inf");
    }
    if (family == Family::se_nbd || family == Family::hawkes) {
        for (Eigen::Index i = 0; i < d; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) {
                if (i != j && std::isfinite(interaction_scale(i, j))) {
                    throw DomainError(std::string(to_string(family)) +
                                      " lines are independent: off-diagonal interaction_scale must be inf");
                }
            }
        }
    }
}

Eigen::MatrixXd excitation_coefficients(const ModelSpec& spec) {
    const auto d = static_cast<Eigen::Index>(spec.dimension());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const double l0 = spec.interaction_scale(i, j);
            if (std::isfinite(l0)) {
                out(i, j) = spec.baseline_mean(i) / l0;
            }
        }
    }
    return out;
}

ModelSpec spec_from_interaction(Family family,
                                const Eigen::VectorXd& baseline_mean,
                                std::vector<std::optional<double>> dispersion_shape,
                                const Eigen::MatrixXd& interaction,
                                const Eigen::VectorXd& decay) {
    const auto d = baseline_mean.size();
    if (interaction.rows() != d || interaction.cols() != d || decay.size() != d) {
        throw DomainError("spec_from_interaction: inconsistent dimensions");
    }
    ModelSpec spec;
    spec.family = family;
    spec.baseline_mean = baseline_mean;
    spec.dispersion_shape = std::move(dispersion_shape);
    spec.decay = decay;
    spec.interaction_scale = Eigen::MatrixXd::Constant(d, d, kInfinity);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const double s = interaction(i, j);
            if (s < 0.0 || !std::isfinite(s)) {
                throw DomainError("interaction entries must be finite and nonnegative");
            }
            if (s > 0.0) {
                if (!(baseline_mean(i) > 0.0)) {
                    throw DomainError("a line with zero baseline cannot carry a finite interaction scale");
                }
                spec.interaction_scale(i, j) = baseline_mean(i) / (s * (1.0 - decay(i)));
            }
        }
    }
    spec.validate();
    return spec;
}

void EventSeries::validate() const {
    const auto t = periods();
    const auto d = dimension();
    if (sector_names.size() != d) {
        throw DomainError("event series has " + std::to_string(d) + " count columns but " +
                          std::to_string(sector_names.size()) + " sector names");
    }
    if (!labels.empty() && labels.size() != t) {
        throw DomainError("event series has " + std::to_string(t) + " periods but " +
                          std::to_string(labels.size()) + " labels");
    }
    if (t > 0 && d > 0 && counts.minCoeff() < 0) {
        throw DomainError("event counts must be nonnegative");
    }
}

std::vector<std::string> default_sector_names(std::size_t dimension) {
    std::vector<std::string> names;
    names.reserve(dimension);
    for (std::size_t i = 0; i < dimension; ++i) {
        names.push_back("line" + std::to_string(i + 1));
    }
    return names;
}

EventSeries head(const EventSeries& series, std::size_t periods) {
    periods = std::min(periods, series.periods());
    EventSeries out;
    out.sector_names = series.sector_names;
    out.counts = series.counts.topRows(static_cast<Eigen::Index>(periods));
    if (!series.labels.empty()) {
        out.labels.assign(series.labels.begin(), series.labels.begin() + static_cast<std::ptrdiff_t>(periods));
    }
    return out;
}

EventSeries permute_lines(const EventSeries& series, const std::vector<std::size_t>& permutation) {
    const auto d = series.dimension();
    if (permutation.size() != d) {
        throw DomainError("permutation size does not match series dimension");
    }
    std::vector<bool> seen(d, false);
    EventSeries out;
    out.labels = series.labels;
    out.counts.resize(series.counts.rows(), series.counts.cols());
    for (std::size_t k = 0; k < d; ++k) {
        const auto src = permutation[k];
        if (src >= d || seen[src]) {
            throw DomainError("invalid permutation");
        }
        seen[src] = true;
        out.counts.col(static_cast<Eigen::Index>(k)) = series.counts.col(static_cast<Eigen::Index>(src));
        out.sector_names.push_back(series.sector_names[src]);
    }
    return out;
}

}  // namespace mdsenbd
