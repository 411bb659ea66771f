#pragma once

#include "mdsenbd/model.hpp"

#include <Eigen/Dense>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace mdsenbd {

/// Parameter estimation under a uniform prior on a box, i.e. bounded maximum
/// likelihood.
///
/// Free parameters per line, which is also the AIC counting convention:
///   NBD                         M0, K0                       2
///   HAWKES                      M0, r, S_ii                  3
///   SE_NBD                      M0, K0, r, S_ii              4
///   MD_HAWKES / Poisson lines   M0, r, S_ij for free edges   2 + edges
///   MD_SE_NBD / NBD lines       M0, K0, r, S_ij              3 + edges
/// The diagonal edge is always free in self-exciting families. Interaction
/// scales are derived as L0_ij = M0_i / (S_ij (1 - r_i)).
///
/// The likelihood factorizes over target lines (each line's parameters only
/// enter that line's conditional probabilities), so every line is optimized
/// separately; the joint optimum is the collection of per-line optima.

enum class EdgeSelection {
    diagonal_only,
    full_matrix,
    greedy_aic,
};

[[nodiscard]] std::string_view to_string(EdgeSelection selection) noexcept;
[[nodiscard]] EdgeSelection parse_edge_selection(std::string_view name);

struct ParameterBounds {
    double lower{0.0};
    double upper{0.0};
};

struct FitBounds {
    /// Unset: [1e-6, max(10 * largest observed count, 1)].
    std::optional<ParameterBounds> baseline_mean;
    ParameterBounds dispersion_shape{1e-3, 1e7};
    ParameterBounds decay{0.0, 0.99};
    ParameterBounds interaction{0.0, 2.0};
};

struct FitConfig {
    Family family{Family::se_nbd};
    FitBounds bounds;
    std::size_t multistart{16};
    double tolerance{1e-8};
    EdgeSelection edge_selection{EdgeSelection::diagonal_only};
    std::size_t max_iterations{5000};
    std::uint64_t seed{0};
    std::size_t threads{1};
    /// HYBRID only: true marks a Poisson (Hawkes) line.
    std::vector<bool> poisson_lines;

    void validate() const;
};

/// Edge (target, source): S_target,source, influence of `source` on `target`. 0-based.
struct Edge {
    std::size_t target{0};
    std::size_t source{0};

    auto operator<=>(const Edge&) const = default;
};

struct FitResult {
    ModelSpec spec;
    Eigen::MatrixXd interaction;  // fitted S
    double log_likelihood{0.0};
    double aic{0.0};
    std::size_t n_params{0};
    bool converged{false};
    /// Per start index: log-likelihood summed over lines at that start's optimum.
    std::vector<double> starts_summary;
    std::set<Edge> active_edges;  // finite L0
    std::set<Edge> free_edges;    // edges that carried a free parameter
    std::vector<std::string> warnings;
    std::size_t evaluations{0};
};

/// sum_t sum_i log P(X_t^(i) | history before t). The first period is scored
/// against (M0, K0). Impossible observations give -inf.
[[nodiscard]] double log_likelihood(const EventSeries& series, const ModelSpec& spec);

[[nodiscard]] FitResult fit(const EventSeries& series, const FitConfig& config);

/// Starts from the diagonal-only fit and repeatedly adds the off-diagonal edge
/// with the largest AIC decrease until none decreases it.
[[nodiscard]] FitResult select_edges_greedy(const EventSeries& series, const FitConfig& config);

struct AicRow {
    Family family{Family::se_nbd};
    EdgeSelection edge_selection{EdgeSelection::diagonal_only};
    std::optional<FitResult> fit;
    double aic{0.0};
    double log_likelihood{0.0};
    std::size_t n_params{0};
    bool failed{false};
    std::string error;
};

/// One row per config, ascending by AIC with ties broken by fewer parameters.
/// Failed fits are kept as marked rows at the end.
[[nodiscard]] std::vector<AicRow> aic_table(const EventSeries& series, std::span<const FitConfig> configs);

[[nodiscard]] std::size_t line_parameter_count(bool poisson_line, bool self_exciting, std::size_t free_edges);

}  // namespace mdsenbd
