#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "netpanel/data_model.hpp"

namespace netpanel {

/// Impact matrix S = (I - rho W)^{-1} diag(betas) = d y_t / d x_kt', from an
/// LU solve of (I - rho W) S = diag(betas).
template <typename DerivedW, typename DerivedB>
Eigen::Matrix<typename DerivedW::Scalar, Eigen::Dynamic, Eigen::Dynamic>
impact_matrix(typename DerivedW::Scalar rho, const Eigen::MatrixBase<DerivedW>& w, const Eigen::MatrixBase<DerivedB>& betas)
{
    using Scalar = typename DerivedW::Scalar;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Index n = w.rows();
    if (w.cols() != n || betas.size() != n)
        throw ValidationError("impact matrix: W must be N x N and betas of length N");
    const Matrix system = Matrix::Identity(n, n) - rho * w;
    Eigen::PartialPivLU<Matrix> lu(system);
    if (!(lu.rcond() > Scalar(1e-13)))
        throw NumericalError("I - rho W is singular (rho = " + std::to_string(static_cast<double>(rho)) + ")");
    return lu.solve(Matrix(betas.asDiagonal()));
}

/// Direct, indirect and total effects of one impact matrix.
struct EffectSummary
{
    Eigen::VectorXd direct;   // diag(S)
    Eigen::VectorXd indirect; // total - direct
    Eigen::VectorXd total;    // S * 1
    Eigen::VectorXd share_pct; // 100 * indirect / total per unit, NaN when undefined
    double avg_direct = 0.0;
    double avg_indirect = 0.0;
    double avg_total = 0.0;
    std::optional<double> network_share_pct;
};

/// Totals smaller than this in magnitude leave the network share undefined.
inline constexpr double kShareTotalFloor = 1e-10;

inline double share_pct(double indirect, double total)
{
    return std::abs(total) < kShareTotalFloor ? std::numeric_limits<double>::quiet_NaN() : 100.0 * indirect / total;
}

template <typename Derived>
EffectSummary effect_summary(const Eigen::MatrixBase<Derived>& s)
{
    EffectSummary out;
    out.direct = s.diagonal().template cast<double>();
    out.total = s.rowwise().sum().template cast<double>();
    out.indirect = out.total - out.direct;
    out.share_pct = out.indirect.binaryExpr(out.total, [](double i, double t) { return share_pct(i, t); });
    out.avg_direct = out.direct.mean();
    out.avg_total = out.total.mean();
    out.avg_indirect = out.total.mean() - out.direct.mean();
    const double share = share_pct(out.avg_indirect, out.avg_total);
    if (!std::isnan(share))
        out.network_share_pct = share;
    return out;
}

/// Posterior median with a central credible band.
struct Band
{
    double median = std::numeric_limits<double>::quiet_NaN();
    double lower = std::numeric_limits<double>::quiet_NaN();
    double upper = std::numeric_limits<double>::quiet_NaN();
};

/// Sample quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double p);

/// Median and central `mass` band; NaN entries are ignored.
Band posterior_band(const std::vector<double>& values, double mass = 0.99);

/// Per-draw scalar summaries, averaged over units and periods.
struct DrawScalars
{
    std::vector<double> alpha, beta, sigma_sq, rho;
    std::vector<double> direct, indirect, total, share_pct;
};

struct PeriodProfile
{
    Band direct, indirect, total, share_pct;
};

struct ImpactSummary
{
    bool network = false;
    Band alpha, beta, sigma_sq, rho;
    Band direct, indirect, total, share_pct;
    DrawScalars per_draw;
    std::vector<PeriodProfile> by_period; // unit-averaged effects per period
    std::vector<Band> rho_by_period;      // empty without network
    Eigen::MatrixXd median_direct;        // N x T
    Eigen::MatrixXd median_indirect;      // N x T
    Eigen::MatrixXd median_total;         // N x T
    /// Per draw, N x 2 of time-averaged (total, network share %) per unit;
    /// share NaN when the averaged total is ~0 or the variant has no network.
    std::vector<Eigen::MatrixXd> cluster_inputs;
};

/// Effects of one (draw, period, unit) cell, for long-format export.
using EffectSink = std::function<void(std::size_t draw, Index t, Index unit, double direct, double indirect,
                                      double total, double share)>;

/// Impact effects of covariate k (1-based) for every retained draw and
/// period, with posterior summaries. Averages over periods use equal weights.
ImpactSummary aggregate_draws(const PosteriorDraws& draws, const PanelData& panel, const WeightSequence& weights,
                              int k, double mass = 0.99, const EffectSink& sink = {});

} // namespace netpanel
