#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "netpanel/data_model.hpp"
#include "netpanel/rng.hpp"

namespace netpanel {

enum class WeightGenerator { ring, random_row_stochastic, from_file };

/// Ring lattice: each unit puts half its weight on each of its two
/// neighbours (all of it on the other unit when N = 2).
Eigen::MatrixXd ring_weights(Index n);

/// Zero diagonal, i.i.d. uniform off-diagonal mass, rows normalized.
Eigen::MatrixXd random_row_stochastic(Index n, Rng& rng);

/// Random-walk coefficient paths theta_t = theta_0 + sqrt(omega) * cumsum(e),
/// one (K+1) x T matrix per unit.
std::vector<Eigen::MatrixXd> random_walk_paths(const Eigen::MatrixXd& theta0, const Eigen::MatrixXd& omega_sqrt,
                                               Index t, Rng& rng);

struct DgpSpec
{
    Index n = 10;
    Index t = 60;
    Index k = 1;
    Eigen::VectorXd rho_path;                // length T, or length 1 for a constant
    std::vector<Eigen::MatrixXd> theta_paths; // N entries, (K+1) x T
    Eigen::VectorXd sigma_sq;                // length N; zero gives noiseless data
    WeightGenerator weights = WeightGenerator::ring;
    std::optional<WeightSequence> weight_file; // used by from_file
    int vintages = 1;                          // distinct random matrices over the sample
    double shock_mean = 0.0;
    double shock_sd = 0.2;
    std::uint64_t seed = 1;
    Date first_event{std::chrono::year{1994}, std::chrono::month{2}, std::chrono::day{1}};
};

struct TruthRecord
{
    Eigen::VectorXd rho_path; // length T
    std::vector<Eigen::MatrixXd> theta_paths;
    Eigen::VectorXd sigma_sq;
    int impact_covariate = 1;
    /// Unit-averaged effects of covariate 1, averaged over periods with
    /// equal weights.
    double avg_direct = 0.0;
    double avg_indirect = 0.0;
    double avg_total = 0.0;
    double share_pct = 0.0;
    Eigen::MatrixXd unit_effects; // N x 2: time-averaged total and network share
};

struct SimulatedData
{
    PanelData panel;
    WeightSequence weights;
    TruthRecord truth;
};

/// Draws shocks and residuals and solves the structural equation period by
/// period. Throws NumericalError when I - rho_t W_t is not invertible with a
/// positive determinant at some t.
SimulatedData simulate(const DgpSpec& spec);

/// Calibration-style DGP: rho a bounded random walk, coefficients random
/// walks with small innovation scales, unit-specific variances.
DgpSpec model_dgp(Index n, Index t, std::uint64_t seed);

} // namespace netpanel
