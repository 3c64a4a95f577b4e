#include "netpanel/sampler.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace netpanel {

namespace {

constexpr double kMinusInf = -std::numeric_limits<double>::infinity();
constexpr double kRidge = 1e-8;
constexpr double kVarianceFloor = 1e-12;
constexpr int kTuningBatch = 50;

const std::vector<Index>& members(const Model& model, Index group)
{
    return model.groups()[static_cast<std::size_t>(group)];
}

double condition_number(const Eigen::MatrixXd& m)
{
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    return sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
}

struct RhoQuadratic
{
    double a = 0.0; // sum eps^2 / sigma^2
    double b = 0.0; // sum eps * lag / sigma^2
    double c = 0.0; // sum lag^2 / sigma^2

    double operator()(double rho) const { return a - 2.0 * rho * b + rho * rho * c; }
};

std::vector<RhoQuadratic> rho_quadratics(const Model& model, const ParameterState& state)
{
    const Eigen::MatrixXd res = model.structural_residuals(state);
    const Eigen::ArrayXd inv = state.sigma_sq.array().inverse();
    const auto& lag = model.network_lag();
    std::vector<RhoQuadratic> out(static_cast<std::size_t>(model.periods()));
    for (Index t = 0; t < model.periods(); ++t)
    {
        auto& q = out[static_cast<std::size_t>(t)];
        q.a = (res.col(t).array().square() * inv).sum();
        q.b = (res.col(t).array() * lag.col(t).array() * inv).sum();
        q.c = (lag.col(t).array().square() * inv).sum();
    }
    return out;
}

bool accept(double log_ratio, Rng& rng)
{
    if (std::isnan(log_ratio))
        throw NumericalError("NaN in Metropolis-Hastings acceptance ratio");
    const double zeta = std::exp(std::min(log_ratio, 0.0));
    return rng.uniform() < zeta;
}

} // namespace

RhoProposalMoments rho_proposal(Index t, const Eigen::VectorXd& rho_path, double varsigma_sq, const PriorSpec& prior)
{
    const Index last = rho_path.size() - 1;
    if (t < 0 || t > last)
        throw ValidationError("rho proposal index " + std::to_string(t) + " outside 0.." + std::to_string(last));
    RhoProposalMoments out;
    if (t == 0)
    {
        out.kind = RhoProposalCase::initial;
        out.variance = prior.varsigma0_sq * varsigma_sq / (prior.varsigma0_sq + varsigma_sq);
        out.mean = out.variance * (prior.mu0 / prior.varsigma0_sq + rho_path(1) / varsigma_sq);
    }
    else if (t == last)
    {
        out.kind = RhoProposalCase::terminal;
        out.mean = rho_path(t - 1);
        out.variance = varsigma_sq;
    }
    else
    {
        out.kind = t == 1 ? RhoProposalCase::first : RhoProposalCase::interior;
        out.mean = 0.5 * (rho_path(t - 1) + rho_path(t + 1));
        out.variance = 0.5 * varsigma_sq;
    }
    return out;
}

Model::Model(ValidatedInputs inputs) : inputs_(std::move(inputs))
{
    const Index n = units();
    const Index t_len = periods();
    const Index m = coefficient_count();
    const auto& panel = inputs_.panel;

    group_of_.resize(static_cast<std::size_t>(n));
    if (inputs_.config.pooled_units())
    {
        groups_.emplace_back();
        for (Index i = 0; i < n; ++i)
        {
            groups_.front().push_back(i);
            group_of_[static_cast<std::size_t>(i)] = 0;
        }
    }
    else
    {
        for (Index i = 0; i < n; ++i)
        {
            groups_.push_back({i});
            group_of_[static_cast<std::size_t>(i)] = i;
        }
    }

    network_lag_ = Eigen::MatrixXd::Zero(n, t_len);
    if (has_network())
    {
        for (const auto& entry : inputs_.weights.entries)
            log_dets_.emplace_back(entry.matrix);
        for (Index t = 0; t < t_len; ++t)
            network_lag_.col(t) = weight_matrix(t) * panel.responses.col(t);
    }

    for (const auto& g : groups_)
    {
        Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(m, m);
        Eigen::VectorXd xty = Eigen::VectorXd::Zero(m);
        for (Index i : g)
            for (Index t = 0; t < t_len; ++t)
            {
                const Eigen::VectorXd z = panel.design(i, t);
                xtx.noalias() += z * z.transpose();
                xty.noalias() += z * panel.responses(i, t);
            }
        Eigen::LLT<Eigen::MatrixXd> llt(xtx);
        if (llt.info() != Eigen::Success || llt.rcond() < 1e-12)
        {
            xtx.diagonal().array() += kRidge;
            llt.compute(xtx);
            if (llt.info() != Eigen::Success)
                throw NumericalError("least-squares cross product is singular even after ridge (condition number " +
                                     std::to_string(condition_number(xtx)) + ")");
        }
        const Eigen::VectorXd coef = llt.solve(xty);
        double ssr = 0.0;
        for (Index i : g)
            for (Index t = 0; t < t_len; ++t)
            {
                const double e = panel.responses(i, t) - panel.design(i, t).dot(coef);
                ssr += e * e;
            }
        const Index nobs = static_cast<Index>(g.size()) * t_len;
        const double s2 = nobs > m ? ssr / static_cast<double>(nobs - m) : ssr / static_cast<double>(nobs);
        const Eigen::VectorXd inv_diag = llt.solve(Eigen::MatrixXd::Identity(m, m)).diagonal();
        ols_variance_.push_back((s2 * inv_diag).cwiseMax(kVarianceFloor));
        ols_coef_.push_back(coef);
        ols_residual_var_.push_back(std::max(ssr / static_cast<double>(nobs), 1e-8));
    }
}

const Eigen::MatrixXd& Model::weight_matrix(Index t) const
{
    return inputs_.weights.entries[inputs_.weight_schedule[static_cast<std::size_t>(t)]].matrix;
}

double Model::log_det(double rho, Index t) const
{
    if (!has_network())
        return 0.0;
    return log_dets_[inputs_.weight_schedule[static_cast<std::size_t>(t)]](rho);
}

Eigen::MatrixXd Model::pseudo_responses(const ParameterState& state) const
{
    Eigen::MatrixXd y = inputs_.panel.responses;
    if (has_network())
        for (Index t = 0; t < periods(); ++t)
            y.col(t) -= state.rho_path(t + 1) * network_lag_.col(t);
    return y;
}

Eigen::MatrixXd Model::structural_residuals(const ParameterState& state) const
{
    Eigen::MatrixXd res(units(), periods());
    for (Index i = 0; i < units(); ++i)
        for (Index t = 0; t < periods(); ++t)
            res(i, t) = inputs_.panel.responses(i, t) - inputs_.panel.design(i, t).dot(state.coefficients(i, t));
    return res;
}

double Model::log_likelihood_rho(double rho, Index t, const ParameterState& state) const
{
    const double ld = log_det(rho, t);
    if (ld == kMinusInf)
        return kMinusInf;
    double q = 0.0;
    for (Index i = 0; i < units(); ++i)
    {
        const double eps = inputs_.panel.responses(i, t) - inputs_.panel.design(i, t).dot(state.coefficients(i, t));
        const double d = eps - rho * network_lag_(i, t);
        q += d * d / state.sigma_sq(i);
    }
    return ld - 0.5 * q;
}

double Model::log_likelihood(const ParameterState& state) const
{
    const Eigen::MatrixXd ystar = pseudo_responses(state);
    double ll = 0.0;
    for (Index t = 0; t < periods(); ++t)
    {
        ll += log_det(state.rho_path(t + 1), t);
        for (Index i = 0; i < units(); ++i)
        {
            const double e = ystar(i, t) - inputs_.panel.design(i, t).dot(state.coefficients(i, t));
            ll -= 0.5 * (std::log(2.0 * std::numbers::pi * state.sigma_sq(i)) + e * e / state.sigma_sq(i));
        }
    }
    return ll;
}

ParameterState Model::initial_state() const
{
    const auto& cfg = inputs_.config;
    ParameterState s = ParameterState::zeros(units(), periods(), coefficient_count() - 1);
    const double scale = cfg.time_varying_coefficients() ? 0.01 : 0.0;
    for (Index i = 0; i < units(); ++i)
    {
        const auto g = static_cast<std::size_t>(group_of(i));
        s.theta0.row(i) = ols_coef_[g].transpose();
        s.omega_sqrt.row(i).setConstant(scale);
        s.sigma_sq(i) = ols_residual_var_[g];
    }
    const auto& p = cfg.priors;
    s.varsigma_sq = p.c_varsigma > 1.0 ? p.d_varsigma / (p.c_varsigma - 1.0) : p.d_varsigma / p.c_varsigma;
    return s;
}

RandomWalkStateSpace tvp_state_space(const Model& model, const ParameterState& state, Index group)
{
    const auto& g = members(model, group);
    const Index rep = g.front();
    const Index m = model.coefficient_count();
    const auto& panel = model.panel();
    const Eigen::MatrixXd ystar = model.pseudo_responses(state);
    const Eigen::VectorXd scale = state.omega_sqrt.row(rep).transpose();
    const Eigen::VectorXd base = state.theta0.row(rep).transpose();

    RandomWalkStateSpace ss;
    ss.initial_mean = Eigen::VectorXd::Zero(m);
    ss.initial_cov = Eigen::MatrixXd::Identity(m, m);
    ss.innovation_var = Eigen::VectorXd::Ones(m);
    ss.periods.resize(static_cast<std::size_t>(model.periods()));
    const auto n_obs = static_cast<Index>(g.size());
    for (Index t = 0; t < model.periods(); ++t)
    {
        auto& obs = ss.periods[static_cast<std::size_t>(t)];
        obs.loadings.resize(n_obs, m);
        obs.values.resize(n_obs);
        obs.variances = Eigen::VectorXd::Constant(n_obs, state.sigma_sq(rep));
        for (Index r = 0; r < n_obs; ++r)
        {
            const Index i = g[static_cast<std::size_t>(r)];
            const Eigen::VectorXd z = panel.design(i, t);
            obs.loadings.row(r) = z.cwiseProduct(scale).transpose();
            obs.values(r) = ystar(i, t) - z.dot(base);
        }
    }
    return ss;
}

void draw_tvp_paths(const Model& model, ParameterState& state, Rng& rng)
{
    if (!model.config().time_varying_coefficients())
        return;
    for (Index g = 0; g < static_cast<Index>(model.groups().size()); ++g)
    {
        const auto& who = members(model, g);
        if (!(state.sigma_sq(who.front()) > 0.0))
            throw NumericalError("non-positive sigma^2 in TVP draw");
        const Eigen::MatrixXd path = ffbs_draw(tvp_state_space(model, state, g), rng);
        for (Index i : who)
            state.theta_tilde[static_cast<std::size_t>(i)] = path;
    }
}

GaussianPosterior base_posterior(const Model& model, const ParameterState& state, Index group)
{
    const auto& g = members(model, group);
    const Index rep = g.front();
    const Index m = model.coefficient_count();
    const bool tvp = model.config().time_varying_coefficients();
    const Index dim = tvp ? 2 * m : m;
    const auto& prior = model.config().priors;
    const auto& panel = model.panel();
    const Eigen::MatrixXd ystar = model.pseudo_responses(state);
    const Eigen::VectorXd& v = model.ols_variance(group);
    const double inv_s2 = 1.0 / state.sigma_sq(rep);

    Eigen::VectorXd prior_prec(dim);
    prior_prec.head(m) = (prior.a * v).cwiseInverse();
    if (tvp)
        prior_prec.tail(m) = (prior.b * v).cwiseInverse();

    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd xty = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd r(dim);
    for (Index i : g)
    {
        const auto& path = state.theta_tilde[static_cast<std::size_t>(i)];
        for (Index t = 0; t < model.periods(); ++t)
        {
            const Eigen::VectorXd z = panel.design(i, t);
            r.head(m) = z;
            if (tvp)
                r.tail(m) = z.cwiseProduct(path.col(t));
            xtx.selfadjointView<Eigen::Lower>().rankUpdate(r);
            xty.noalias() += r * ystar(i, t);
        }
    }
    GaussianPosterior post;
    post.precision = xtx.selfadjointView<Eigen::Lower>();
    post.precision *= inv_s2;
    post.precision.diagonal() += prior_prec;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(post.precision);
    post.mean = ldlt.solve(xty * inv_s2);
    return post;
}

void draw_base_and_scales(const Model& model, ParameterState& state, Rng& rng)
{
    const Index m = model.coefficient_count();
    const bool tvp = model.config().time_varying_coefficients();
    for (Index g = 0; g < static_cast<Index>(model.groups().size()); ++g)
    {
        const GaussianPosterior post = base_posterior(model, state, g);
        Eigen::LLT<Eigen::MatrixXd> llt(post.precision);
        if (llt.info() != Eigen::Success)
        {
            std::ostringstream msg;
            msg << "singular posterior precision for group " << g << " (condition number "
                << condition_number(post.precision) << ")";
            throw NumericalError(msg.str());
        }
        const Eigen::VectorXd draw = post.mean + llt.matrixU().solve(rng.normal_vector(post.mean.size()));
        for (Index i : members(model, g))
        {
            state.theta0.row(i) = draw.head(m).transpose();
            if (tvp)
                state.omega_sqrt.row(i) = draw.tail(m).transpose();
            else
                state.omega_sqrt.row(i).setZero();
        }
    }
}

InvGammaPosterior sigma_posterior(const Model& model, const ParameterState& state, Index group)
{
    const auto& g = members(model, group);
    const auto& panel = model.panel();
    const Eigen::MatrixXd ystar = model.pseudo_responses(state);
    double ssr = 0.0;
    for (Index i : g)
        for (Index t = 0; t < model.periods(); ++t)
        {
            const double e = ystar(i, t) - panel.design(i, t).dot(state.coefficients(i, t));
            ssr += e * e;
        }
    const auto& prior = model.config().priors;
    const double n_obs = static_cast<double>(g.size()) * static_cast<double>(model.periods());
    return {prior.c_sigma + 0.5 * n_obs, prior.d_sigma + 0.5 * ssr};
}

void draw_sigma_sq(const Model& model, ParameterState& state, Rng& rng)
{
    for (Index g = 0; g < static_cast<Index>(model.groups().size()); ++g)
    {
        const auto post = sigma_posterior(model, state, g);
        const double draw = rng.inv_gamma(post.shape, post.rate);
        for (Index i : members(model, g))
            state.sigma_sq(i) = draw;
    }
}

RhoSweepResult draw_rho_path(const Model& model, ParameterState& state, Rng& rng, ConstantRhoTuning* tuning)
{
    const Index t_len = model.periods();
    RhoSweepResult out;
    out.accepted = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(t_len, false);
    const auto mode = model.config().network;
    if (mode == NetworkMode::none)
        return out;

    const auto quad = rho_quadratics(model, state);
    auto loglik = [&](double rho, Index t) {
        const double ld = model.log_det(rho, t);
        return ld == kMinusInf ? kMinusInf : ld - 0.5 * quad[static_cast<std::size_t>(t)](rho);
    };
    const auto& prior = model.config().priors;
    auto& path = state.rho_path;

    if (mode == NetworkMode::constant)
    {
        const double step = tuning ? tuning->step : 0.05;
        auto log_target = [&](double rho) {
            double total = -0.5 * (rho - prior.mu0) * (rho - prior.mu0) / prior.varsigma0_sq;
            for (Index t = 0; t < t_len; ++t)
            {
                const double ll = loglik(rho, t);
                if (ll == kMinusInf)
                    return kMinusInf;
                total += ll;
            }
            return total;
        };
        const double current = path(1);
        const double candidate = current + step * rng.normal();
        const double lc = log_target(candidate);
        const double lo = log_target(current);
        const bool ok = lc != kMinusInf && (lo == kMinusInf || accept(lc - lo, rng));
        if (ok)
            path.setConstant(candidate);
        out.accepted.setConstant(ok);
        if (tuning && tuning->adapt)
        {
            tuning->batch_accepts += ok ? 1 : 0;
            if (++tuning->batch_size == kTuningBatch)
            {
                const double rate = static_cast<double>(tuning->batch_accepts) / kTuningBatch;
                ++tuning->batches;
                tuning->step *= std::exp((rate - 0.35) / std::sqrt(static_cast<double>(tuning->batches)));
                tuning->step = std::clamp(tuning->step, 1e-5, 1.0);
                tuning->batch_accepts = 0;
                tuning->batch_size = 0;
            }
        }
        return out;
    }

    // rho_0 has no data term; its conditional is exactly the initial-case proposal
    const auto init = rho_proposal(0, path, state.varsigma_sq, prior);
    path(0) = init.mean + std::sqrt(init.variance) * rng.normal();
    for (Index t = 1; t <= t_len; ++t)
    {
        const auto prop = rho_proposal(t, path, state.varsigma_sq, prior);
        const double candidate = prop.mean + std::sqrt(prop.variance) * rng.normal();
        const double lc = loglik(candidate, t - 1);
        if (lc == kMinusInf)
            continue;
        const double lo = loglik(path(t), t - 1);
        if (lo == kMinusInf || accept(lc - lo, rng))
        {
            path(t) = candidate;
            out.accepted(t - 1) = true;
        }
    }
    return out;
}

InvGammaPosterior varsigma_posterior(const Eigen::VectorXd& rho_path, const PriorSpec& prior)
{
    const Index t_len = rho_path.size() - 1;
    const Eigen::VectorXd inc = rho_path.tail(t_len) - rho_path.head(t_len);
    return {prior.c_varsigma + 0.5 * static_cast<double>(t_len), prior.d_varsigma + 0.5 * inc.squaredNorm()};
}

void draw_varsigma_sq(const Model& model, ParameterState& state, Rng& rng)
{
    if (model.config().network != NetworkMode::time_varying)
        return;
    const auto post = varsigma_posterior(state.rho_path, model.config().priors);
    state.varsigma_sq = rng.inv_gamma(post.shape, post.rate);
}

RhoSweepResult sweep(const Model& model, ParameterState& state, Rng& rng, ConstantRhoTuning& tuning)
{
    draw_tvp_paths(model, state, rng);
    draw_base_and_scales(model, state, rng);
    draw_sigma_sq(model, state, rng);
    auto result = draw_rho_path(model, state, rng, &tuning);
    draw_varsigma_sq(model, state, rng);
    return result;
}

PosteriorDraws run_mcmc(const ValidatedInputs& inputs, std::uint64_t chain)
{
    const Model model(inputs);
    const auto& schedule = inputs.config.chain;
    Rng rng(schedule.seed, chain);
    ParameterState state = model.initial_state();
    ConstantRhoTuning tuning;
    tuning.adapt = schedule.burn_in > 0;

    PosteriorDraws out;
    out.config = inputs.config;
    out.draws.reserve(static_cast<std::size_t>(schedule.retained()));
    Eigen::VectorXd accepts = Eigen::VectorXd::Zero(model.periods());

    const int total = schedule.burn_in + schedule.keep;
    for (int s = 0; s < total; ++s)
    {
        if (s == schedule.burn_in)
            tuning.adapt = false;
        const auto result = sweep(model, state, rng, tuning);
        if (s < schedule.burn_in)
            continue;
        accepts += result.accepted.cast<double>().matrix();
        if ((s - schedule.burn_in + 1) % schedule.thin != 0)
            continue;
        if (auto issues = state_issues(state); !issues.empty())
            throw NumericalError("invalid state at sweep " + std::to_string(s) + ": " + issues.front());
        out.loglik_trace.push_back(model.log_likelihood(state));
        out.draws.push_back(state);
    }

    if (model.has_network())
    {
        out.rho_accept_rate = accepts / static_cast<double>(schedule.keep);
        for (Index t = 0; t < out.rho_accept_rate.size(); ++t)
        {
            const double r = out.rho_accept_rate(t);
            if (r < 0.1 || r > 0.9)
            {
                std::ostringstream msg;
                msg << "rho acceptance rate " << r << " at period " << t + 1 << " outside [0.1, 0.9]";
                out.warnings.push_back(msg.str());
            }
        }
    }
    return out;
}

FilteredMoments coefficient_moments(const Model& model, const ParameterState& state, Index group)
{
    const auto& g = members(model, group);
    const Index rep = g.front();
    const Index m = model.coefficient_count();
    const auto& panel = model.panel();
    const Eigen::MatrixXd ystar = model.pseudo_responses(state);
    const Eigen::VectorXd scale = state.omega_sqrt.row(rep).transpose();

    RandomWalkStateSpace ss;
    ss.initial_mean = Eigen::VectorXd::Zero(2 * m);
    ss.initial_cov = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    ss.initial_cov.diagonal().head(m) = model.config().priors.a * model.ols_variance(group);
    ss.initial_cov.diagonal().tail(m).setOnes();
    ss.innovation_var = Eigen::VectorXd::Zero(2 * m);
    ss.innovation_var.tail(m).setOnes();
    const auto n_obs = static_cast<Index>(g.size());
    ss.periods.resize(static_cast<std::size_t>(model.periods()));
    for (Index t = 0; t < model.periods(); ++t)
    {
        auto& obs = ss.periods[static_cast<std::size_t>(t)];
        obs.loadings.resize(n_obs, 2 * m);
        obs.values.resize(n_obs);
        obs.variances = Eigen::VectorXd::Constant(n_obs, state.sigma_sq(rep));
        for (Index r = 0; r < n_obs; ++r)
        {
            const Index i = g[static_cast<std::size_t>(r)];
            const Eigen::VectorXd z = panel.design(i, t);
            obs.loadings.row(r).head(m) = z.transpose();
            obs.loadings.row(r).tail(m) = z.cwiseProduct(scale).transpose();
            obs.values(r) = ystar(i, t);
        }
    }
    const FilteredMoments smoothed = kalman_smoother(ss);

    Eigen::MatrixXd map(m, 2 * m);
    map << Eigen::MatrixXd::Identity(m, m), Eigen::MatrixXd(scale.asDiagonal());
    FilteredMoments out;
    for (std::size_t t = 0; t < smoothed.mean.size(); ++t)
    {
        out.mean.push_back(map * smoothed.mean[t]);
        out.cov.push_back(map * smoothed.cov[t] * map.transpose());
    }
    return out;
}

} // namespace netpanel
