#pragma once

#include <vector>

#include <Eigen/Dense>

#include "netpanel/data_model.hpp"
#include "netpanel/log_det.hpp"
#include "netpanel/rng.hpp"
#include "netpanel/state_space.hpp"

namespace netpanel {

enum class RhoProposalCase { initial, first, interior, terminal };

struct RhoProposalMoments
{
    double mean = 0.0;
    double variance = 0.0;
    RhoProposalCase kind = RhoProposalCase::interior;
};

/// Proposal for rho_t (0 <= t <= T) given the path as currently updated:
/// entries before t are already new, entries after t still old. For
/// 1 <= t < T this is the conditional random-walk prior given both
/// neighbours; for t = T the one-sided prior; for t = 0 the exact Gaussian
/// conditional combining the N(mu0, varsigma0^2) prior with rho_1.
RhoProposalMoments rho_proposal(Index t, const Eigen::VectorXd& rho_path, double varsigma_sq, const PriorSpec& prior);

/// Gaussian conditional posterior N(precision^{-1} shift, precision^{-1}).
struct GaussianPosterior
{
    Eigen::VectorXd mean;
    Eigen::MatrixXd precision;
};

/// Inverse-gamma shape and rate.
struct InvGammaPosterior
{
    double shape = 0.0;
    double rate = 0.0;
    double mean() const { return rate / (shape - 1.0); }
};

/// Fixed quantities of one estimation problem: data, network lags, parameter
/// tying groups, prior scales and per-matrix log-determinant tables.
class Model
{
public:
    explicit Model(ValidatedInputs inputs);

    const PanelData& panel() const { return inputs_.panel; }
    const ModelConfig& config() const { return inputs_.config; }
    const ValidatedInputs& inputs() const { return inputs_; }
    Index units() const { return inputs_.panel.units(); }
    Index periods() const { return inputs_.panel.periods(); }
    Index coefficient_count() const { return inputs_.panel.covariate_count() + 1; }
    bool has_network() const { return inputs_.config.network != NetworkMode::none; }

    /// Units sharing one set of coefficients and one error variance.
    const std::vector<std::vector<Index>>& groups() const { return groups_; }
    Index group_of(Index unit) const { return group_of_[static_cast<std::size_t>(unit)]; }

    /// (W_t y_t)_i, zero without a network.
    const Eigen::MatrixXd& network_lag() const { return network_lag_; }
    const Eigen::MatrixXd& weight_matrix(Index t) const;
    double log_det(double rho, Index t) const;

    /// Least-squares coefficient variances of a group (diagonal of V).
    const Eigen::VectorXd& ols_variance(Index group) const { return ols_variance_[static_cast<std::size_t>(group)]; }
    const Eigen::VectorXd& ols_coefficients(Index group) const { return ols_coef_[static_cast<std::size_t>(group)]; }

    /// y*_it = y_it - rho_t (W_t y_t)_i for the state's rho path.
    Eigen::MatrixXd pseudo_responses(const ParameterState& state) const;
    /// y_it - z_it' theta_it (network term not removed).
    Eigen::MatrixXd structural_residuals(const ParameterState& state) const;

    /// log det(I - rho W_t) - 1/2 |eps~_t - y~_t(rho)|^2.
    double log_likelihood_rho(double rho, Index t, const ParameterState& state) const;
    /// Full Gaussian data log likelihood of a state.
    double log_likelihood(const ParameterState& state) const;

    /// Starting values: least-squares theta, signed innovation scales at 0.01
    /// (zero without time variation), residual variances, rho = 0 and
    /// varsigma^2 at its prior mean.
    ParameterState initial_state() const;

private:
    ValidatedInputs inputs_;
    std::vector<std::vector<Index>> groups_;
    std::vector<Index> group_of_;
    Eigen::MatrixXd network_lag_;
    std::vector<NetworkLogDet> log_dets_;
    std::vector<Eigen::VectorXd> ols_variance_;
    std::vector<Eigen::VectorXd> ols_coef_;
    std::vector<double> ols_residual_var_;
};

/// State-space form of the time-varying part of one group, conditional on
/// everything else in the state.
RandomWalkStateSpace tvp_state_space(const Model& model, const ParameterState& state, Index group);

/// Step 1: FFBS draw of every theta~ path, group by group.
void draw_tvp_paths(const Model& model, ParameterState& state, Rng& rng);

/// Conditional posterior of (theta_0, signed sqrt(Omega)) for a group, or of
/// theta_0 alone when coefficients are constant over time.
GaussianPosterior base_posterior(const Model& model, const ParameterState& state, Index group);

/// Step 2: joint Gaussian draw of base coefficients and innovation scales.
void draw_base_and_scales(const Model& model, ParameterState& state, Rng& rng);

InvGammaPosterior sigma_posterior(const Model& model, const ParameterState& state, Index group);

/// Step 3: inverse-gamma draw of the measurement variances.
void draw_sigma_sq(const Model& model, ParameterState& state, Rng& rng);

/// Random-walk Metropolis scale for the constant-rho mode, adapted during
/// burn-in only.
struct ConstantRhoTuning
{
    double step = 0.05;
    int batch_accepts = 0;
    int batch_size = 0;
    int batches = 0;
    bool adapt = true;
};

struct RhoSweepResult
{
    Eigen::Array<bool, Eigen::Dynamic, 1> accepted; // per period t = 1..T
};

/// Step 4: Metropolis-Hastings pass over the rho path (a single step on a
/// scalar rho in the constant mode; nothing without a network).
RhoSweepResult draw_rho_path(const Model& model, ParameterState& state, Rng& rng, ConstantRhoTuning* tuning = nullptr);

InvGammaPosterior varsigma_posterior(const Eigen::VectorXd& rho_path, const PriorSpec& prior);

/// Step 5: inverse-gamma draw of the rho innovation variance.
void draw_varsigma_sq(const Model& model, ParameterState& state, Rng& rng);

/// One full sweep of steps 1-5 in order.
RhoSweepResult sweep(const Model& model, ParameterState& state, Rng& rng, ConstantRhoTuning& tuning);

/// Burn-in, then keep sweeps thinned; deterministic given the seed and chain.
PosteriorDraws run_mcmc(const ValidatedInputs& inputs, std::uint64_t chain = 0);

/// Conditional moments of theta_it = theta_i0 + sqrt(Omega_i) theta~_it for
/// each period given the state's innovation scales, variances and rho path,
/// with theta_i0 integrated out under its prior. Index [t] of the result.
FilteredMoments coefficient_moments(const Model& model, const ParameterState& state, Index group);

} // namespace netpanel
