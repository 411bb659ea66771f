#pragma once

#include "mdsenbd/model.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mdsenbd {

/// Effective reproduction numbers S_ij = (M0_i / L0_ij) / (1 - r_i): expected
/// events on line i directly triggered by one event on line j.
struct InteractionMatrix {
    Eigen::MatrixXd s;

    [[nodiscard]] std::size_t dimension() const noexcept { return static_cast<std::size_t>(s.rows()); }
};

[[nodiscard]] InteractionMatrix build_s_matrix(const ModelSpec& spec);

/// Inverse of build_s_matrix for the interaction scales: L0_ij = M0_i / (S_ij (1 - r_i)),
/// +inf where S_ij = 0.
[[nodiscard]] Eigen::MatrixXd interaction_scale_from_s(const Eigen::VectorXd& baseline_mean,
                                                       const Eigen::VectorXd& decay,
                                                       const Eigen::MatrixXd& s);

struct PowerIterationOptions {
    double tolerance{1e-10};
    std::size_t max_iterations{100000};
};

/// Dominant eigenvalue modulus of a nonnegative matrix by power iteration from
/// the all-ones vector. Each strongly connected block is iterated separately
/// with the shift S + I, whose Collatz-Wielandt bounds bracket the Perron
/// root and close geometrically. Throws ConvergenceError at the iteration cap.
[[nodiscard]] double spectral_radius(const Eigen::MatrixXd& matrix, const PowerIterationOptions& options = {});
[[nodiscard]] double spectral_radius(const InteractionMatrix& s, const PowerIterationOptions& options = {});

struct StationarityReport {
    double spectral_radius{0.0};
    bool steady{false};        // rho < 1, strict
    bool near_critical{false};  // |rho - 1| <= 1e-9
};

[[nodiscard]] StationarityReport classify_stationarity(const InteractionMatrix& s);

/// Solves (E - S) v = M0. Throws StationarityError when rho(S) >= 1.
[[nodiscard]] Eigen::VectorXd mean_field_equilibrium(const ModelSpec& spec);
[[nodiscard]] Eigen::VectorXd mean_field_equilibrium(const InteractionMatrix& s, const Eigen::VectorXd& baseline_mean);

/// Expected additional events per line caused by one event on `source`:
/// (E - S)^-1 S e_source. Requires rho(S) < 1.
[[nodiscard]] Eigen::VectorXd impact_infinite(const ModelSpec& spec, std::size_t source);
[[nodiscard]] Eigen::VectorXd impact_infinite(const InteractionMatrix& s, std::size_t source);

/// Cumulative impact after t = 1..horizon periods,
///   v_t = sum_{j=0}^{t-1} (T + S_hat)^j S_hat e_source,
/// with S_hat_ij = M0_i / L0_ij and T = diag(r). Element t-1 of the result is v_t.
[[nodiscard]] std::vector<Eigen::VectorXd> impact_trajectory(const ModelSpec& spec,
                                                             std::size_t source,
                                                             std::size_t horizon);

struct ImpactResult {
    std::vector<Eigen::VectorXd> per_source;
    Eigen::VectorXd totals;
    std::vector<std::vector<Eigen::VectorXd>> trajectories;  // empty unless requested
    double average_total{0.0};
};

[[nodiscard]] ImpactResult impact_analysis(const InteractionMatrix& s);
/// As above; with trajectory_horizon > 0 also fills the per-source trajectories.
[[nodiscard]] ImpactResult impact_analysis(const ModelSpec& spec, std::size_t trajectory_horizon = 0);

struct SectorImpact {
    std::size_t line{0};
    double total{0.0};
};

/// Lines by descending total impact (upstream first); ties keep index order.
[[nodiscard]] std::vector<SectorImpact> rank_sectors(const ImpactResult& impact);

struct NetworkEdge {
    std::size_t source{0};
    std::size_t target{0};
    std::string source_name;
    std::string target_name;
    double weight{0.0};
};

/// Directed edges source j -> target i with weight S_ij > threshold, ordered by
/// (source, target).
[[nodiscard]] std::vector<NetworkEdge> export_network(const InteractionMatrix& s,
                                                      const std::vector<std::string>& names,
                                                      double threshold = 0.0);

struct ImpactSimulationOptions {
    std::size_t paths{100000};
    std::size_t horizon{200};
    std::uint64_t seed{0};
    std::size_t threads{1};
};

struct ImpactEstimate {
    Eigen::VectorXd mean;
    Eigen::VectorXd standard_error;
    std::size_t paths{0};
};

/// Monte-Carlo impact: paired paths from the empty history, one of them with an
/// extra event on `source` at t = 0, driven by common random numbers
/// (inverse-CDF draws from one shared uniform per line and period). Returns the
/// mean added count per line over `horizon` periods.
[[nodiscard]] ImpactEstimate simulate_impact(const ModelSpec& spec,
                                             std::size_t source,
                                             const ImpactSimulationOptions& options);

}  // namespace mdsenbd
