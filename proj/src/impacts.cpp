#include "netpanel/impacts.hpp"

#include <algorithm>

namespace netpanel {

double quantile(std::vector<double> values, double p)
{
    if (values.empty())
        return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

Band posterior_band(const std::vector<double>& values, double mass)
{
    std::vector<double> finite;
    finite.reserve(values.size());
    for (double v : values)
        if (!std::isnan(v))
            finite.push_back(v);
    Band b;
    if (finite.empty())
        return b;
    const double tail = 0.5 * (1.0 - mass);
    b.median = quantile(finite, 0.5);
    b.lower = quantile(finite, tail);
    b.upper = quantile(finite, 1.0 - tail);
    return b;
}

ImpactSummary aggregate_draws(const PosteriorDraws& draws, const PanelData& panel, const WeightSequence& weights,
                              int k, double mass, const EffectSink& sink)
{
    const Index n = panel.units();
    const Index t_len = panel.periods();
    const std::size_t n_draws = draws.draws.size();
    if (n_draws == 0)
        throw ValidationError("no posterior draws to aggregate");
    if (k < 1 || k > panel.covariate_count())
        throw ValidationError("impact covariate index out of range 1..K");
    for (const auto& d : draws.draws)
        if (d.units() != n || d.periods() != t_len)
            throw ValidationError("posterior draws do not match the panel dimensions");

    ImpactSummary out;
    out.network = draws.config.network != NetworkMode::none;
    std::vector<std::size_t> schedule;
    if (out.network)
        schedule = weights.schedule(panel.event_dates);

    const double inv_t = 1.0 / static_cast<double>(t_len);
    auto& pd = out.per_draw;
    pd.direct.assign(n_draws, 0.0);
    pd.indirect.assign(n_draws, 0.0);
    pd.total.assign(n_draws, 0.0);
    Eigen::MatrixXd unit_total = Eigen::MatrixXd::Zero(static_cast<Index>(n_draws), n);
    Eigen::MatrixXd unit_indirect = Eigen::MatrixXd::Zero(static_cast<Index>(n_draws), n);
    out.median_direct.resize(n, t_len);
    out.median_indirect.resize(n, t_len);
    out.median_total.resize(n, t_len);

    std::vector<double> avg_dir(n_draws), avg_ind(n_draws), avg_tot(n_draws), avg_share(n_draws);
    std::vector<std::vector<double>> cell_dir(static_cast<std::size_t>(n), std::vector<double>(n_draws));
    auto cell_ind = cell_dir;
    auto cell_tot = cell_dir;
    std::vector<double> rho_t(n_draws);

    Eigen::VectorXd betas(n);
    for (Index t = 0; t < t_len; ++t)
    {
        for (std::size_t d = 0; d < n_draws; ++d)
        {
            const auto& state = draws.draws[d];
            for (Index i = 0; i < n; ++i)
                betas(i) = state.coefficients(i, t)(k);
            EffectSummary eff;
            if (out.network)
            {
                const double rho = state.rho_path(t + 1);
                rho_t[d] = rho;
                eff = effect_summary(impact_matrix(rho, weights.entries[schedule[static_cast<std::size_t>(t)]].matrix, betas));
            }
            else
            {
                eff = effect_summary(Eigen::MatrixXd(betas.asDiagonal()));
            }
            avg_dir[d] = eff.avg_direct;
            avg_ind[d] = eff.avg_indirect;
            avg_tot[d] = eff.avg_total;
            avg_share[d] = share_pct(eff.avg_indirect, eff.avg_total);
            pd.direct[d] += eff.avg_direct * inv_t;
            pd.indirect[d] += eff.avg_indirect * inv_t;
            pd.total[d] += eff.avg_total * inv_t;
            unit_total.row(static_cast<Index>(d)) += eff.total.transpose() * inv_t;
            unit_indirect.row(static_cast<Index>(d)) += eff.indirect.transpose() * inv_t;
            for (Index i = 0; i < n; ++i)
            {
                const auto ui = static_cast<std::size_t>(i);
                cell_dir[ui][d] = eff.direct(i);
                cell_ind[ui][d] = eff.indirect(i);
                cell_tot[ui][d] = eff.total(i);
                if (sink)
                    sink(d, t, i, eff.direct(i), eff.indirect(i), eff.total(i), eff.share_pct(i));
            }
        }
        PeriodProfile prof{posterior_band(avg_dir, mass), posterior_band(avg_ind, mass), posterior_band(avg_tot, mass),
                           posterior_band(avg_share, mass)};
        if (!out.network)
            prof.indirect = prof.share_pct = Band{};
        out.by_period.push_back(prof);
        if (out.network)
            out.rho_by_period.push_back(posterior_band(rho_t, mass));
        for (Index i = 0; i < n; ++i)
        {
            const auto ui = static_cast<std::size_t>(i);
            out.median_direct(i, t) = quantile(cell_dir[ui], 0.5);
            out.median_indirect(i, t) = quantile(cell_ind[ui], 0.5);
            out.median_total(i, t) = quantile(cell_tot[ui], 0.5);
        }
    }

    pd.share_pct.resize(n_draws);
    pd.alpha.resize(n_draws);
    pd.beta.resize(n_draws);
    pd.sigma_sq.resize(n_draws);
    pd.rho.resize(n_draws);
    out.cluster_inputs.reserve(n_draws);
    for (std::size_t d = 0; d < n_draws; ++d)
    {
        const auto& state = draws.draws[d];
        pd.share_pct[d] = share_pct(pd.indirect[d], pd.total[d]);
        double a = 0.0, b = 0.0;
        for (Index i = 0; i < n; ++i)
            for (Index t = 0; t < t_len; ++t)
            {
                const Eigen::VectorXd theta = state.coefficients(i, t);
                a += theta(0);
                b += theta(k);
            }
        const double cells = static_cast<double>(n * t_len);
        pd.alpha[d] = a / cells;
        pd.beta[d] = b / cells;
        pd.sigma_sq[d] = state.sigma_sq.mean();
        pd.rho[d] = state.rho_path.tail(t_len).mean();

        Eigen::MatrixXd pts(n, 2);
        pts.col(0) = unit_total.row(static_cast<Index>(d)).transpose();
        for (Index i = 0; i < n; ++i)
            pts(i, 1) = out.network ? share_pct(unit_indirect(static_cast<Index>(d), i), pts(i, 0))
                                    : std::numeric_limits<double>::quiet_NaN();
        out.cluster_inputs.push_back(std::move(pts));
    }

    out.alpha = posterior_band(pd.alpha, mass);
    out.beta = posterior_band(pd.beta, mass);
    out.sigma_sq = posterior_band(pd.sigma_sq, mass);
    out.direct = posterior_band(pd.direct, mass);
    out.total = posterior_band(pd.total, mass);
    if (out.network)
    {
        out.rho = posterior_band(pd.rho, mass);
        out.indirect = posterior_band(pd.indirect, mass);
        out.share_pct = posterior_band(pd.share_pct, mass);
    }
    return out;
}

} // namespace netpanel
