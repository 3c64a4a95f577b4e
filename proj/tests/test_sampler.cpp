#include "doctest.h"

#include <algorithm>

#include "fixtures.hpp"
#include "netpanel/sampler.hpp"
#include "oracles.hpp"

using namespace netpanel;

namespace {

ValidatedInputs inputs_for(std::string_view variant, const SimulatedData& sim, int burn_in = 200, int keep = 400)
{
    ModelConfig cfg = fixtures::short_chain(variant, burn_in, keep);
    WeightSequence w = cfg.network == NetworkMode::none ? WeightSequence{} : sim.weights;
    return validate_inputs(sim.panel, std::move(w), cfg);
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

} // namespace

TEST_CASE("rho proposal moments")
{
    const PriorSpec prior;
    Eigen::VectorXd path(4);
    path << 0.1, 0.6, 0.75, 0.8;

    const auto interior = rho_proposal(2, path, 0.02, prior);
    CHECK(interior.kind == RhoProposalCase::interior);
    CHECK(interior.mean == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(interior.variance == doctest::Approx(0.01).epsilon(1e-15));

    const auto first = rho_proposal(1, path, 0.02, prior);
    CHECK(first.kind == RhoProposalCase::first);
    CHECK(first.mean == doctest::Approx(0.5 * (0.1 + 0.75)));

    const auto terminal = rho_proposal(3, path, 0.02, prior);
    CHECK(terminal.kind == RhoProposalCase::terminal);
    CHECK(terminal.mean == 0.75);
    CHECK(terminal.variance == 0.02);

    const auto initial = rho_proposal(0, path, 0.02, prior);
    CHECK(initial.kind == RhoProposalCase::initial);
    CHECK(initial.variance == doctest::Approx(1.0 / 60.0).epsilon(1e-14));
    CHECK(initial.mean == doctest::Approx(0.5).epsilon(1e-14));

    CHECK_THROWS_AS(rho_proposal(4, path, 0.02, prior), ValidationError);
}

TEST_CASE("innovation variance posterior")
{
    const PriorSpec prior;
    const Eigen::VectorXd steps = Eigen::VectorXd::LinSpaced(5, 0.0, 0.4);
    const auto post = varsigma_posterior(steps, prior);
    CHECK(post.shape == doctest::Approx(prior.c_varsigma + 2.0));
    CHECK(post.rate == doctest::Approx(prior.d_varsigma + 0.02).epsilon(1e-14));

    const auto flat = varsigma_posterior(Eigen::VectorXd::Constant(7, 0.3), prior);
    CHECK(flat.shape == prior.c_varsigma + 3.0);
    CHECK(flat.rate == prior.d_varsigma);
}

TEST_CASE("noiseless data leave only the prior rate in the variance posterior")
{
    DgpSpec spec;
    spec.n = 4;
    spec.t = 6;
    spec.rho_path = Eigen::VectorXd::Constant(1, 0.3);
    for (Index i = 0; i < 4; ++i)
        spec.theta_paths.push_back((Eigen::MatrixXd(2, 6) << Eigen::RowVectorXd::Constant(6, 0.5),
                                    Eigen::RowVectorXd::Constant(6, -1.0 - 0.2 * static_cast<double>(i)))
                                       .finished());
    spec.sigma_sq = Eigen::VectorXd::Zero(4);
    const auto sim = simulate(spec);
    const Model model(inputs_for("B4", sim));
    ParameterState s = model.initial_state();
    for (Index i = 0; i < 4; ++i)
        s.theta0.row(i) = sim.truth.theta_paths[static_cast<std::size_t>(i)].col(0).transpose();
    s.rho_path.setConstant(0.3);
    const auto post = sigma_posterior(model, s, 2);
    CHECK(post.shape == doctest::Approx(model.config().priors.c_sigma + 3.0));
    CHECK(std::abs(post.rate - model.config().priors.d_sigma) < 1e-12);
}

TEST_CASE("pooled variants tie every unit to one parameter set")
{
    const auto sim = oracles::constant_rho_data(5, 12, 0.3, 4);
    const Model model(inputs_for("B3", sim));
    REQUIRE(model.groups().size() == 1);
    CHECK(model.groups().front().size() == 5);
    ParameterState s = model.initial_state();
    Rng rng(1);
    ConstantRhoTuning tuning;
    for (int k = 0; k < 5; ++k)
        sweep(model, s, rng, tuning);
    for (Index i = 1; i < 5; ++i)
    {
        CHECK(s.theta0.row(i) == s.theta0.row(0));
        CHECK(s.sigma_sq(i) == s.sigma_sq(0));
    }
    CHECK(sigma_posterior(model, s, 0).shape == doctest::Approx(model.config().priors.c_sigma + 30.0));
    // constant mode keeps a flat path
    CHECK((s.rho_path.array() == s.rho_path(0)).all());

    const Model separate(inputs_for("B4", sim));
    CHECK(separate.groups().size() == 5);
}

TEST_CASE("least-squares prior scale matches a direct computation")
{
    const auto sim = oracles::constant_rho_data(3, 9, 0.0, 6);
    const Model b2(inputs_for("B2", sim));
    const Model b1(inputs_for("B1", sim));
    for (Index i = 0; i < 3; ++i)
    {
        const auto v = oracles::ols_variance(oracles::stack(sim.panel, {i}));
        CHECK((b2.ols_variance(i) - v).cwiseAbs().maxCoeff() < 1e-12 * v.maxCoeff());
    }
    const auto pooled = oracles::ols_variance(oracles::stack(sim.panel, {0, 1, 2}));
    CHECK((b1.ols_variance(0) - pooled).cwiseAbs().maxCoeff() < 1e-12 * pooled.maxCoeff());
}

TEST_CASE("coefficient posterior equals the conjugate regression on five observations")
{
    const auto sim = oracles::constant_rho_data(2, 5, 0.0, 12);
    const Model model(inputs_for("B2", sim));
    ParameterState s = model.initial_state();
    s.sigma_sq << 0.37, 0.81;
    for (Index i = 0; i < 2; ++i)
    {
        const auto reg = oracles::stack(sim.panel, {i});
        const auto expect = oracles::static_regression(reg, s.sigma_sq(i), 100.0 * model.ols_variance(i));
        const auto post = base_posterior(model, s, i);
        CHECK((post.mean - expect.mean).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + expect.mean.cwiseAbs().maxCoeff()));
        const Eigen::MatrixXd cov = post.precision.inverse();
        CHECK((cov - expect.cov).cwiseAbs().maxCoeff() < 1e-12 * expect.cov.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("a very diffuse prior reproduces least squares")
{
    const auto sim = oracles::constant_rho_data(3, 20, 0.0, 13);
    ModelConfig cfg = fixtures::short_chain("B2");
    cfg.priors.a = 1e8;
    const Model model(validate_inputs(sim.panel, {}, cfg));
    const ParameterState s = model.initial_state();
    for (Index i = 0; i < 3; ++i)
    {
        const auto post = base_posterior(model, s, i);
        CHECK((post.mean - model.ols_coefficients(i)).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("zero tilde paths return the prior for the innovation scales")
{
    const auto sim = oracles::constant_rho_data(3, 10, 0.0, 14);
    const Model model(inputs_for("C3", sim));
    ParameterState s = model.initial_state();
    for (auto& path : s.theta_tilde)
        path.setZero();
    const Index m = model.coefficient_count();
    for (Index g = 0; g < 3; ++g)
    {
        const auto post = base_posterior(model, s, g);
        REQUIRE(post.mean.size() == 2 * m);
        CHECK(post.mean.tail(m).cwiseAbs().maxCoeff() == 0.0);
        const Eigen::VectorXd prior_prec = (model.config().priors.b * model.ols_variance(g)).cwiseInverse();
        CHECK((post.precision.bottomRightCorner(m, m).diagonal() - prior_prec).cwiseAbs().maxCoeff() <
              1e-12 * prior_prec.maxCoeff());
        CHECK(post.precision.topRightCorner(m, m).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("starting values")
{
    const auto sim = oracles::constant_rho_data(3, 10, 0.2, 15);
    const ParameterState s = Model(inputs_for("C5", sim)).initial_state();
    CHECK((s.omega_sqrt.array() == 0.01).all());
    CHECK(s.rho_path.isZero(0.0));
    CHECK(s.varsigma_sq == doctest::Approx(0.015));
    const ParameterState b = Model(inputs_for("B4", sim)).initial_state();
    CHECK(b.omega_sqrt.isZero(0.0));
}

TEST_CASE("chains are reproducible and chain ids give distinct streams")
{
    const auto sim = oracles::constant_rho_data(4, 12, 0.4, 16);
    const auto in = inputs_for("C5", sim, 50, 60);
    const auto a = run_mcmc(in, 0), b = run_mcmc(in, 0), c = run_mcmc(in, 1);
    REQUIRE(a.draws.size() == 30);
    bool same = true, differs = false;
    for (std::size_t d = 0; d < a.draws.size(); ++d)
    {
        same = same && a.draws[d].rho_path == b.draws[d].rho_path && a.draws[d].theta0 == b.draws[d].theta0 &&
               a.draws[d].sigma_sq == b.draws[d].sigma_sq && a.draws[d].theta_tilde == b.draws[d].theta_tilde;
        differs = differs || a.draws[d].rho_path != c.draws[d].rho_path;
    }
    CHECK(same);
    CHECK(differs);
    CHECK(a.loglik_trace == b.loglik_trace);
}

TEST_CASE("reduced-form covariance of every retained draw is positive definite")
{
    const auto sim = oracles::constant_rho_data(6, 15, 0.5, 17);
    const auto in = inputs_for("C5", sim, 100, 200);
    const auto run = run_mcmc(in, 0);
    const Model model(in);
    for (const auto& d : run.draws)
        for (Index t = 0; t < model.periods(); ++t)
        {
            const Eigen::MatrixXd a =
                Eigen::MatrixXd::Identity(6, 6) - d.rho_path(t + 1) * model.weight_matrix(t);
            const Eigen::MatrixXd inv = a.inverse();
            const Eigen::MatrixXd cov = inv * d.sigma_sq.asDiagonal() * inv.transpose();
            CHECK((cov - cov.transpose()).cwiseAbs().maxCoeff() < 1e-12 * cov.cwiseAbs().maxCoeff());
            CHECK(Eigen::LLT<Eigen::MatrixXd>(cov).info() == Eigen::Success);
        }
}

TEST_CASE("each conditional draw has the analytic conditional mean")
{
    const auto sim = oracles::constant_rho_data(3, 20, 0.4, 18);
    const Model model(inputs_for("C5", sim));
    ParameterState s = model.initial_state();
    for (Index i = 0; i < 3; ++i)
    {
        s.theta0.row(i) = sim.truth.theta_paths[static_cast<std::size_t>(i)].col(0).transpose();
        s.sigma_sq(i) = 0.25;
    }
    s.rho_path.setConstant(0.4);
    s.varsigma_sq = 0.01;
    Rng rng(33);
    const int n = 10000;

    SUBCASE("sigma squared")
    {
        const auto post = sigma_posterior(model, s, 1);
        double sum = 0.0;
        for (int d = 0; d < n; ++d)
        {
            ParameterState copy = s;
            draw_sigma_sq(model, copy, rng);
            sum += copy.sigma_sq(1);
        }
        CHECK(std::abs(sum / n / post.mean() - 1.0) < 0.02);
    }
    SUBCASE("innovation variance of rho")
    {
        s.rho_path = Eigen::VectorXd::LinSpaced(21, 0.2, 0.6);
        const auto post = varsigma_posterior(s.rho_path, model.config().priors);
        double sum = 0.0;
        for (int d = 0; d < n; ++d)
        {
            ParameterState copy = s;
            draw_varsigma_sq(model, copy, rng);
            sum += copy.varsigma_sq;
        }
        CHECK(std::abs(sum / n / post.mean() - 1.0) < 0.02);
    }
    SUBCASE("base coefficients and scales")
    {
        const auto post = base_posterior(model, s, 0);
        const Eigen::MatrixXd cov = post.precision.inverse();
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(post.mean.size());
        for (int d = 0; d < n; ++d)
        {
            ParameterState copy = s;
            draw_base_and_scales(model, copy, rng);
            sum.head(2) += copy.theta0.row(0).transpose();
            sum.tail(2) += copy.omega_sqrt.row(0).transpose();
        }
        for (Index j = 0; j < post.mean.size(); ++j)
            CHECK(std::abs(sum(j) / n - post.mean(j)) < 4.0 * std::sqrt(cov(j, j) / n));
    }
    SUBCASE("tilde paths")
    {
        const auto smooth = kalman_smoother(tvp_state_space(model, s, 2));
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(2);
        for (int d = 0; d < n; ++d)
        {
            ParameterState copy = s;
            draw_tvp_paths(model, copy, rng);
            sum += copy.theta_tilde[2].col(7);
        }
        for (Index j = 0; j < 2; ++j)
            CHECK(std::abs(sum(j) / n - smooth.mean[7](j)) < 4.0 * std::sqrt(smooth.cov[7](j, j) / n));
    }
}

TEST_CASE("rho step targets the grid posterior on a two-unit toy model")
{
    const auto sim = oracles::constant_rho_data(2, 2, 0.4, 19, 0.05);
    const Model model(inputs_for("C1", sim));
    ParameterState s = model.initial_state();
    for (Index i = 0; i < 2; ++i)
    {
        s.theta0.row(i) = sim.truth.theta_paths[static_cast<std::size_t>(i)].col(0).transpose();
        s.omega_sqrt.row(i).setZero();
    }
    s.sigma_sq.setConstant(0.05);
    s.varsigma_sq = 0.01;
    const auto grid = oracles::rho1_grid(sim.panel, model.weight_matrix(0), s, model.config().priors);
    const double grid_mean = grid.grid.dot(grid.prob);

    Rng rng(41);
    std::vector<double> draws;
    for (int d = 0; d < 21000; ++d)
    {
        draw_rho_path(model, s, rng);
        if (d >= 1000)
            draws.push_back(s.rho_path(1));
    }
    double mean = 0.0;
    for (double x : draws)
        mean += x / static_cast<double>(draws.size());
    CHECK(std::abs(mean - grid_mean) < 4.0 * oracles::batch_se(draws));
}

TEST_CASE("static limit of the time-varying coefficients")
{
    const auto sim = oracles::constant_rho_data(3, 30, 0.0, 20);
    const Model model(inputs_for("C3", sim));
    ParameterState s = model.initial_state();
    s.omega_sqrt.setConstant(1e-7);
    for (Index g = 0; g < 3; ++g)
    {
        const auto expect = oracles::static_regression(oracles::stack(sim.panel, {g}), s.sigma_sq(g),
                                                       model.config().priors.a * model.ols_variance(g));
        const auto moments = coefficient_moments(model, s, g);
        for (Index t : {Index{0}, Index{14}, Index{29}})
        {
            const auto tt = static_cast<std::size_t>(t);
            CHECK(((moments.mean[tt] - expect.mean).array() / expect.mean.array()).abs().maxCoeff() < 1e-3);
            CHECK(((moments.cov[tt] - expect.cov).array() / expect.cov.array()).abs().maxCoeff() < 1e-3);
        }
    }
}

TEST_CASE("constant network strength 0.7 is recovered by the time-varying mode")
{
    const auto sim = oracles::constant_rho_data(20, 30, 0.7, 21, 0.1);
    const auto run = run_mcmc(inputs_for("C2", sim, 1000, 2000), 0);
    int inside = 0;
    for (Index t = 1; t <= 30; ++t)
    {
        std::vector<double> path;
        for (const auto& d : run.draws)
            path.push_back(d.rho_path(t));
        inside += std::abs(median(path) - 0.7) <= 0.15 ? 1 : 0;
    }
    CHECK(inside >= 27);
}

TEST_CASE("time-varying coefficients with vanishing innovations nest the static model")
{
    const auto sim = oracles::constant_rho_data(8, 30, 0.5, 22, 0.2);
    ModelConfig c4 = fixtures::short_chain("C4", 1000, 2000);
    c4.priors.b = 1e-10;
    const auto tvp = run_mcmc(validate_inputs(sim.panel, sim.weights, c4), 0);
    const auto fixed = run_mcmc(inputs_for("B4", sim, 1000, 2000), 0);

    auto mean_of = [](const PosteriorDraws& run, auto f) {
        double s = 0.0;
        for (const auto& d : run.draws)
            s += f(d) / static_cast<double>(run.draws.size());
        return s;
    };
    const double rho_tvp = mean_of(tvp, [](const ParameterState& d) { return d.rho_path(1); });
    const double rho_fixed = mean_of(fixed, [](const ParameterState& d) { return d.rho_path(1); });
    CHECK(std::abs(rho_tvp - rho_fixed) < 0.05);
    for (Index i = 0; i < 8; ++i)
    {
        const double beta_tvp = mean_of(tvp, [&](const ParameterState& d) { return d.coefficients(i, 10)(1); });
        const double beta_fixed = mean_of(fixed, [&](const ParameterState& d) { return d.theta0(i, 1); });
        CHECK(std::abs(beta_tvp - beta_fixed) < 0.1);
    }
}
