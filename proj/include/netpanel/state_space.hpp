#pragma once

#include <vector>

#include <Eigen/Dense>

#include "netpanel/rng.hpp"

namespace netpanel {

/// Observations of one period: y = H x + e, e ~ N(0, diag(variance)).
struct PeriodObservations
{
    Eigen::MatrixXd loadings; // n_obs x m
    Eigen::VectorXd values;
    Eigen::VectorXd variances;
};

/// Linear Gaussian model with identity transition
///   x_1 ~ N(initial_mean, initial_cov),  x_t = x_{t-1} + u_t,  u_t ~ N(0, diag(innovation_var)).
struct RandomWalkStateSpace
{
    Eigen::VectorXd initial_mean;
    Eigen::MatrixXd initial_cov;
    Eigen::VectorXd innovation_var;
    std::vector<PeriodObservations> periods;

    Eigen::Index state_dim() const { return initial_mean.size(); }
    Eigen::Index length() const { return static_cast<Eigen::Index>(periods.size()); }
};

struct FilteredMoments
{
    std::vector<Eigen::VectorXd> mean;
    std::vector<Eigen::MatrixXd> cov;
};

/// Kalman filter, observations of a period absorbed one scalar at a time.
FilteredMoments kalman_filter(const RandomWalkStateSpace& model);

/// Joint draw of x_1..x_T from their smoothing distribution (forward
/// filtering, backward sampling). Columns of the result are periods.
Eigen::MatrixXd ffbs_draw(const RandomWalkStateSpace& model, Rng& rng);

/// Marginal smoothing moments (Rauch-Tung-Striebel).
FilteredMoments kalman_smoother(const RandomWalkStateSpace& model);

/// mean + L z with L L' = cov; tolerates positive semi-definite cov.
Eigen::VectorXd draw_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng);

} // namespace netpanel
