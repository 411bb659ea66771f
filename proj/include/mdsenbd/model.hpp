#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mdsenbd {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Model families: the five fitted families plus the mixed SE-NBD/Hawkes case.
enum class Family {
    md_se_nbd,
    md_hawkes,
    se_nbd,
    hawkes,
    nbd,
    hybrid,
};

[[nodiscard]] std::string_view to_string(Family family) noexcept;
/// Accepts the canonical names ("MD_SE_NBD", "md-se-nbd", ...) case-insensitively.
[[nodiscard]] Family parse_family(std::string_view name);

[[nodiscard]] bool is_multidimensional(Family family) noexcept;
[[nodiscard]] bool is_self_exciting(Family family) noexcept;

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Full parameterization of a discrete self-exciting count process.
///
/// Line i has conditional mean M_t^(i) = M0_i + sum_j (M0_i / L0_ij) sum_s X_s^(j) r_i^(t-s)
/// and, for NBD lines, conditional shape K_t^(i) = K0_i + sum_j (K0_i / L0_ij) (same sum).
/// An infinite interaction_scale entry is an absent edge. A disengaged
/// dispersion_shape (std::nullopt) marks a Poisson (Hawkes) line.
struct ModelSpec {
    Family family{Family::se_nbd};
    Eigen::VectorXd baseline_mean;
    std::vector<std::optional<double>> dispersion_shape;
    Eigen::MatrixXd interaction_scale;
    Eigen::VectorXd decay;

    [[nodiscard]] std::size_t dimension() const noexcept {
        return static_cast<std::size_t>(baseline_mean.size());
    }
    [[nodiscard]] bool is_poisson_line(std::size_t line) const { return !dispersion_shape.at(line).has_value(); }

    /// M0_i / K0_i for NBD lines, 0 for Poisson lines.
    [[nodiscard]] double dispersion_ratio(std::size_t line) const;

    /// Throws DomainError when the spec violates a structural or family invariant.
    void validate() const;
};

/// Direct one-step excitation coefficients M0_i / L0_ij (0 for absent edges).
[[nodiscard]] Eigen::MatrixXd excitation_coefficients(const ModelSpec& spec);

/// Builds a spec from reproduction numbers S_ij instead of interaction scales,
/// inverting S_ij = (M0_i / L0_ij) / (1 - r_i). Zero S entries become absent edges.
[[nodiscard]] ModelSpec spec_from_interaction(Family family,
                                              const Eigen::VectorXd& baseline_mean,
                                              std::vector<std::optional<double>> dispersion_shape,
                                              const Eigen::MatrixXd& interaction,
                                              const Eigen::VectorXd& decay);

/// T x D table of event counts with optional period labels.
struct EventSeries {
    std::vector<std::string> labels;
    CountMatrix counts;
    std::vector<std::string> sector_names;

    [[nodiscard]] std::size_t periods() const noexcept { return static_cast<std::size_t>(counts.rows()); }
    [[nodiscard]] std::size_t dimension() const noexcept { return static_cast<std::size_t>(counts.cols()); }

    void validate() const;
};

[[nodiscard]] std::vector<std::string> default_sector_names(std::size_t dimension);

/// Returns the series restricted to its first `periods` rows.
[[nodiscard]] EventSeries head(const EventSeries& series, std::size_t periods);

/// Reorders lines (columns) so that new line k is old line permutation[k].
[[nodiscard]] EventSeries permute_lines(const EventSeries& series, const std::vector<std::size_t>& permutation);

}  // namespace mdsenbd
