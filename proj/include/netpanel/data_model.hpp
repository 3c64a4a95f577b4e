#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "netpanel/date.hpp"
#include "netpanel/errors.hpp"

namespace netpanel {

using Index = Eigen::Index;

/// Balanced panel: N unit responses over T events, K exogenous covariates per
/// unit and event. The intercept is implicit and not counted in K.
struct PanelData
{
    Eigen::MatrixXd responses;               // N x T
    std::vector<Eigen::MatrixXd> covariates; // K entries, each N x T
    std::vector<std::string> unit_ids;
    std::vector<Date> event_dates;
    bool common_shock = true; // covariate 1 is the same for every unit at each t

    Index units() const { return responses.rows(); }
    Index periods() const { return responses.cols(); }
    Index covariate_count() const { return static_cast<Index>(covariates.size()); }

    /// z_it = (1, x_it')'
    Eigen::VectorXd design(Index i, Index t) const;
};

struct WeightEntry
{
    Date effective_from;
    Eigen::MatrixXd matrix;
};

/// Dated sequence of row-stochastic network matrices. The matrix in force at
/// a date is the latest one whose effective_from is not after that date.
struct WeightSequence
{
    std::vector<WeightEntry> entries;
    std::vector<std::string> unit_ids;

    bool empty() const { return entries.empty(); }
    std::size_t index_at(const Date& date) const;
    const Eigen::MatrixXd& lookup(const Date& date) const { return entries[index_at(date)].matrix; }
    std::vector<std::size_t> schedule(const std::vector<Date>& dates) const;
};

inline constexpr double kRowSumTolerance = 1e-10;

/// Every violated matrix invariant (shape, sign, row sums), empty when valid.
std::vector<std::string> weight_matrix_issues(const Eigen::MatrixXd& w, Index expected_n,
                                              double tolerance = kRowSumTolerance);

/// Divides each row by its sum. Rows summing to zero are left untouched and
/// reported by weight_matrix_issues afterwards.
Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& w);

enum class Heterogeneity { pooled, cross_section, time, both };
enum class NetworkMode { none, constant, time_varying };
enum class DataShape { aggregate, industries };

std::string_view to_string(Heterogeneity h);
std::string_view to_string(NetworkMode n);
std::string_view to_string(DataShape d);
Heterogeneity parse_heterogeneity(std::string_view text);
NetworkMode parse_network(std::string_view text);
DataShape parse_data_shape(std::string_view text);

struct PriorSpec
{
    double a = 100.0;           // g-prior scale on theta_i0
    double b = 0.1;             // scale on the signed innovation standard deviations
    double mu0 = 0.0;           // rho_0 prior mean
    double varsigma0_sq = 0.1;  // rho_0 prior variance
    double c_varsigma = 3.0;
    double d_varsigma = 0.03;
    double c_sigma = 0.01;
    double d_sigma = 0.01;
};

struct ChainSchedule
{
    int burn_in = 5000;
    int keep = 10000;
    int thin = 2;
    std::uint64_t seed = 1;

    int retained() const { return keep / thin; }
};

struct ModelConfig
{
    std::string variant; // empty for an explicit, unnamed combination
    Heterogeneity heterogeneity = Heterogeneity::both;
    NetworkMode network = NetworkMode::time_varying;
    DataShape data = DataShape::industries;
    PriorSpec priors;
    ChainSchedule chain;
    int impact_covariate = 1; // 1-based covariate index k used for impacts

    bool time_varying_coefficients() const
    {
        return heterogeneity == Heterogeneity::time || heterogeneity == Heterogeneity::both;
    }
    bool pooled_units() const
    {
        return heterogeneity == Heterogeneity::pooled || heterogeneity == Heterogeneity::time;
    }

    static ModelConfig from_variant(std::string_view name);
    static const std::array<std::string_view, 11>& variant_names();
    /// Table position of a variant name (0..10), or 11 for unnamed configs.
    static int variant_rank(std::string_view name);
    /// Named variant matching the three structural choices, if any.
    static std::optional<std::string> variant_of(Heterogeneity h, NetworkMode n, DataShape d);
};

/// One MCMC state. Period t (0-based, t < T) pairs with rho_path(t + 1);
/// rho_path(0) is the initial state.
struct ParameterState
{
    std::vector<Eigen::MatrixXd> theta_tilde; // N entries, each (K+1) x T
    Eigen::MatrixXd theta0;                   // N x (K+1)
    Eigen::MatrixXd omega_sqrt;               // N x (K+1), signed
    Eigen::VectorXd sigma_sq;                 // N
    Eigen::VectorXd rho_path;                 // T+1
    double varsigma_sq = 0.0;

    Index units() const { return theta0.rows(); }
    Index coefficient_count() const { return theta0.cols(); }
    Index periods() const { return rho_path.size() - 1; }

    /// theta_it = theta_i0 + sqrt(Omega_i) theta~_it
    Eigen::VectorXd coefficients(Index i, Index t) const;

    /// Zero-initialized state of the right shape.
    static ParameterState zeros(Index n, Index t, Index k);
};

/// Violations of ParameterState invariants (shapes, positivity, finiteness).
std::vector<std::string> state_issues(const ParameterState& state);

struct PosteriorDraws
{
    ModelConfig config;
    std::vector<ParameterState> draws;
    Eigen::VectorXd rho_accept_rate; // per period, empty when no network
    std::vector<double> loglik_trace;
    std::vector<std::string> warnings;
};

struct ValidatedInputs
{
    PanelData panel;
    WeightSequence weights;
    ModelConfig config;
    std::vector<std::size_t> weight_schedule; // matrix index per period, empty without network
};

/// Checks every panel, weight and configuration invariant and throws a
/// ValidationError listing all of them when any fails.
ValidatedInputs validate_inputs(PanelData panel, WeightSequence weights, ModelConfig config);

} // namespace netpanel
