#include "netpanel/synth.hpp"

#include <cmath>

#include "netpanel/impacts.hpp"
#include "netpanel/log_det.hpp"

namespace netpanel {

Eigen::MatrixXd ring_weights(Index n)
{
    if (n < 2)
        throw ValidationError("ring network needs at least 2 units");
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (Index i = 0; i < n; ++i)
    {
        w(i, (i + 1) % n) += 0.5;
        w(i, (i + n - 1) % n) += 0.5;
    }
    return w;
}

Eigen::MatrixXd random_row_stochastic(Index n, Rng& rng)
{
    if (n < 2)
        throw ValidationError("network needs at least 2 units");
    Eigen::MatrixXd w(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            w(i, j) = i == j ? 0.0 : 0.05 + rng.uniform();
    return normalize_rows(w);
}

std::vector<Eigen::MatrixXd> random_walk_paths(const Eigen::MatrixXd& theta0, const Eigen::MatrixXd& omega_sqrt,
                                               Index t, Rng& rng)
{
    std::vector<Eigen::MatrixXd> paths;
    const Index m = theta0.cols();
    for (Index i = 0; i < theta0.rows(); ++i)
    {
        Eigen::MatrixXd path(m, t);
        Eigen::VectorXd tilde = Eigen::VectorXd::Zero(m);
        for (Index s = 0; s < t; ++s)
        {
            tilde += rng.normal_vector(m);
            path.col(s) = theta0.row(i).transpose() + omega_sqrt.row(i).transpose().cwiseProduct(tilde);
        }
        paths.push_back(std::move(path));
    }
    return paths;
}

namespace {

WeightSequence make_weights(const DgpSpec& spec, const std::vector<Date>& dates, std::vector<std::string> ids, Rng& rng)
{
    if (spec.weights == WeightGenerator::from_file)
    {
        if (!spec.weight_file)
            throw ValidationError("from_file network generator needs a weight sequence");
        WeightSequence w = *spec.weight_file;
        w.unit_ids = std::move(ids);
        return w;
    }
    if (spec.vintages < 1 || spec.vintages > spec.t)
        throw ValidationError("vintages must lie in 1..T");
    WeightSequence w;
    w.unit_ids = std::move(ids);
    for (int v = 0; v < spec.vintages; ++v)
    {
        const auto start = static_cast<std::size_t>(v * spec.t / spec.vintages);
        Eigen::MatrixXd m = spec.weights == WeightGenerator::ring ? ring_weights(spec.n) : random_row_stochastic(spec.n, rng);
        w.entries.push_back({dates[start], std::move(m)});
    }
    return w;
}

} // namespace

SimulatedData simulate(const DgpSpec& spec)
{
    const Index n = spec.n, t_len = spec.t, k = spec.k;
    std::vector<std::string> issues;
    if (n < 1 || t_len < 2 || k < 1)
        issues.push_back("DGP needs N >= 1, T >= 2, K >= 1");
    if (spec.rho_path.size() != 1 && spec.rho_path.size() != t_len)
        issues.push_back("true rho path must have length 1 or T");
    if (static_cast<Index>(spec.theta_paths.size()) != n)
        issues.push_back("need one true coefficient path per unit");
    for (const auto& p : spec.theta_paths)
        if (p.rows() != k + 1 || p.cols() != t_len)
        {
            issues.push_back("true coefficient paths must be (K+1) x T");
            break;
        }
    if (spec.sigma_sq.size() != n || (spec.sigma_sq.array() < 0.0).any())
        issues.push_back("true variances must be N non-negative values");
    if (!(spec.shock_sd >= 0.0))
        issues.push_back("shock sd must be non-negative");
    if (!issues.empty())
        throw ValidationError(std::move(issues));

    Rng rng(spec.seed);
    Rng net_rng(spec.seed, 1);

    SimulatedData out;
    PanelData& panel = out.panel;
    for (Index i = 0; i < n; ++i)
        panel.unit_ids.push_back("u" + std::to_string(i + 1));
    const std::chrono::year_month first{spec.first_event.year(), spec.first_event.month()};
    for (Index s = 0; s < t_len; ++s)
        panel.event_dates.push_back((first + std::chrono::months{static_cast<int>(s)}) / spec.first_event.day());
    // a single unit has no network; its lag term is identically zero
    const bool network = n > 1;
    std::vector<std::size_t> schedule(static_cast<std::size_t>(t_len), 0);
    const Eigen::MatrixXd no_network = Eigen::MatrixXd::Zero(n, n);
    if (network)
    {
        out.weights = make_weights(spec, panel.event_dates, panel.unit_ids, net_rng);
        schedule = out.weights.schedule(panel.event_dates);
    }

    panel.responses.resize(n, t_len);
    panel.covariates.assign(static_cast<std::size_t>(k), Eigen::MatrixXd(n, t_len));
    panel.common_shock = true;
    Eigen::VectorXd rho(t_len);
    for (Index s = 0; s < t_len; ++s)
        rho(s) = spec.rho_path.size() == 1 ? spec.rho_path(0) : spec.rho_path(s);

    TruthRecord& truth = out.truth;
    truth.rho_path = rho;
    truth.theta_paths = spec.theta_paths;
    truth.sigma_sq = spec.sigma_sq;
    truth.unit_effects = Eigen::MatrixXd::Zero(n, 2);
    Eigen::VectorXd unit_indirect = Eigen::VectorXd::Zero(n);
    const double inv_t = 1.0 / static_cast<double>(t_len);

    Eigen::VectorXd rhs(n), betas(n);
    for (Index s = 0; s < t_len; ++s)
    {
        const double v = spec.shock_mean + spec.shock_sd * rng.normal();
        for (Index i = 0; i < n; ++i)
        {
            panel.covariates[0](i, s) = v;
            for (Index c = 1; c < k; ++c)
                panel.covariates[static_cast<std::size_t>(c)](i, s) = rng.normal();
        }
        for (Index i = 0; i < n; ++i)
        {
            const Eigen::VectorXd theta = spec.theta_paths[static_cast<std::size_t>(i)].col(s);
            rhs(i) = panel.design(i, s).dot(theta) + std::sqrt(spec.sigma_sq(i)) * rng.normal();
            betas(i) = theta(1);
        }
        const Eigen::MatrixXd& w =
            network ? out.weights.entries[schedule[static_cast<std::size_t>(s)]].matrix : no_network;
        if (!std::isfinite(log_det_lu(w, rho(s))))
            throw NumericalError("I - rho W has no positive determinant at period " + std::to_string(s + 1) +
                                 " (rho = " + std::to_string(rho(s)) + ")");
        const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - rho(s) * w;
        panel.responses.col(s) = system.partialPivLu().solve(rhs);

        const EffectSummary eff = effect_summary(impact_matrix(rho(s), w, betas));
        truth.avg_direct += eff.avg_direct * inv_t;
        truth.avg_indirect += eff.avg_indirect * inv_t;
        truth.avg_total += eff.avg_total * inv_t;
        truth.unit_effects.col(0) += eff.total * inv_t;
        unit_indirect += eff.indirect * inv_t;
    }
    truth.share_pct = share_pct(truth.avg_indirect, truth.avg_total);
    for (Index i = 0; i < n; ++i)
        truth.unit_effects(i, 1) = share_pct(unit_indirect(i), truth.unit_effects(i, 0));
    return out;
}

DgpSpec model_dgp(Index n, Index t, std::uint64_t seed)
{
    Rng rng(seed, 7);
    DgpSpec spec;
    spec.n = n;
    spec.t = t;
    spec.k = 1;
    spec.seed = seed;
    spec.shock_sd = 0.5;
    spec.weights = WeightGenerator::random_row_stochastic;
    spec.vintages = 3;

    // rho: random walk from 0.3 with step sd 0.05, redrawn until it stays in (-0.85, 0.85)
    spec.rho_path.resize(t);
    for (bool inside = false; !inside;)
    {
        double r = 0.3;
        inside = true;
        for (Index s = 0; s < t; ++s)
        {
            r += 0.05 * rng.normal();
            spec.rho_path(s) = r;
            inside = inside && std::abs(r) < 0.85;
        }
    }

    Eigen::MatrixXd theta0(n, 2), omega(n, 2);
    for (Index i = 0; i < n; ++i)
    {
        theta0(i, 0) = 0.3 * rng.normal();
        theta0(i, 1) = -2.0 + rng.normal();
        omega(i, 0) = 0.02;
        omega(i, 1) = 0.05;
    }
    spec.theta_paths = random_walk_paths(theta0, omega, t, rng);
    spec.sigma_sq.resize(n);
    for (Index i = 0; i < n; ++i)
        spec.sigma_sq(i) = 0.2 + 0.3 * rng.uniform();
    return spec;
}

} // namespace netpanel
