#pragma once

#include "mdsenbd/model.hpp"
#include "mdsenbd/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mdsenbd {

/// Conditional state of the process before the draw for period t + 1.
///
/// The exponential kernel makes the decayed sum
///   excitation_i = sum_j sum_{s<=t} X_s^(j) r_i^(t-s) / L0_ij
/// a sufficient summary of the history, so no count buffer is kept. Then
/// M_t = M0 (1 + excitation) and K_t = K0 (1 + excitation), which keeps
/// M_t / K_t = M0 / K0 on every line.
struct ProcessState {
    std::size_t t{0};
    Eigen::VectorXd m;
    Eigen::VectorXd k;  // +inf on Poisson lines
    Eigen::VectorXd excitation;

    [[nodiscard]] static ProcessState initial(const ModelSpec& spec);
};

enum class Sampler {
    gamma_poisson,  // lambda ~ Gamma(K_t, M0/K0), X ~ Poisson(lambda)
    inverse_cdf,    // one uniform per line per period; used for paired simulations
};

struct StepOutcome {
    std::vector<std::int64_t> counts;
    ProcessState next;
};

/// Draws one period of counts (lines conditionally independent given the
/// history) and returns the updated state. `line_streams` holds one substream per line.
[[nodiscard]] StepOutcome step(const ProcessState& state,
                               const ModelSpec& spec,
                               std::span<RandomStream> line_streams,
                               Sampler sampler = Sampler::gamma_poisson);

/// Deterministic part of the update: folds observed counts into the state.
void advance(ProcessState& state, const ModelSpec& spec, std::span<const std::int64_t> counts);

/// Draws a single line's count given its conditional mean and shape.
[[nodiscard]] std::int64_t draw_count(const ModelSpec& spec,
                                      std::size_t line,
                                      double mean,
                                      double shape,
                                      RandomStream& stream,
                                      Sampler sampler);

struct ConditionalMoments {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;
};

/// One-step count moments: mean M_t, variance M_t (1 + M0/K0) on NBD lines and
/// M_t on Poisson lines.
[[nodiscard]] ConditionalMoments conditional_moments(const ProcessState& state, const ModelSpec& spec);

/// Sum over lines of log P(counts_i | state). Impossible outcomes give -inf.
[[nodiscard]] double conditional_log_probability(const ProcessState& state,
                                                 const ModelSpec& spec,
                                                 std::span<const std::int64_t> counts);

struct SimulationOptions {
    bool allow_nonstationary{false};
    Sampler sampler{Sampler::gamma_poisson};
    std::vector<std::string> sector_names;
};

struct SimulatedPath {
    EventSeries series;
    Eigen::MatrixXd conditional_means;  // T x D; row t is the mean used for period t's draw
};

/// Simulates `horizon` periods from the empty history. Requires rho(S) < 1
/// unless options.allow_nonstationary is set (StationarityError otherwise).
[[nodiscard]] EventSeries simulate(const ModelSpec& spec,
                                   std::size_t horizon,
                                   std::uint64_t seed,
                                   const SimulationOptions& options = {});

[[nodiscard]] SimulatedPath simulate_path(const ModelSpec& spec,
                                          std::size_t horizon,
                                          std::uint64_t seed,
                                          const SimulationOptions& options = {});

/// Per-line substreams of the run stream for `seed`.
[[nodiscard]] std::vector<RandomStream> line_streams(std::uint64_t seed, std::size_t dimension);

}  // namespace mdsenbd
