#include "doctest.h"

#include <algorithm>
#include <numeric>

#include "fixtures.hpp"
#include "netpanel/impacts.hpp"

using namespace netpanel;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd neumann(double rho, const MatrixXd& w, const VectorXd& betas, int terms)
{
    MatrixXd power = MatrixXd::Identity(w.rows(), w.cols());
    MatrixXd sum = MatrixXd::Zero(w.rows(), w.cols());
    for (int m = 0; m < terms; ++m)
    {
        sum += power;
        power = rho * w * power;
    }
    return sum * betas.asDiagonal();
}

} // namespace

TEST_CASE("no network strength leaves only direct effects")
{
    const VectorXd betas = Eigen::Vector3d(-1.0, 0.5, 2.0);
    const MatrixXd s = impact_matrix(0.0, ring_weights(3), betas);
    CHECK(s == MatrixXd(betas.asDiagonal()));
    const auto e = effect_summary(s);
    CHECK(e.indirect.isZero(0.0));
    CHECK(*e.network_share_pct == 0.0);
}

TEST_CASE("two-unit swap network solved by hand")
{
    const MatrixXd s = impact_matrix(0.5, ring_weights(2), Eigen::Vector2d(-1.0, -1.0));
    const MatrixXd expect = (MatrixXd(2, 2) << -1.0, -0.5, -0.5, -1.0).finished() / 0.75;
    CHECK((s - expect).cwiseAbs().maxCoeff() < 1e-15);
    const auto e = effect_summary(s);
    CHECK(e.avg_total == doctest::Approx(-2.0));
    CHECK(*e.network_share_pct == doctest::Approx(100.0 / 3.0));
}

TEST_CASE("solve agrees with a converged Neumann series and with the explicit inverse")
{
    Rng rng(5);
    for (int rep = 0; rep < 30; ++rep)
    {
        const Index n = 6;
        const MatrixXd w = random_row_stochastic(n, rng);
        const double rho = 0.9 * (2.0 * rng.uniform() - 1.0);
        const VectorXd betas = rng.normal_vector(n);
        const MatrixXd s = impact_matrix(rho, w, betas);
        // enough terms for the tail |rho|^m / (1 - |rho|) to drop below 1e-12
        const int terms = static_cast<int>(std::ceil(std::log(1e-12 * (1.0 - std::abs(rho))) / std::log(std::abs(rho)))) + 1;
        CHECK((s - neumann(rho, w, betas, std::max(terms, 1))).cwiseAbs().maxCoeff() < 1e-8);

        const Index big = 2 + rep % 19;
        const MatrixXd w2 = random_row_stochastic(big, rng);
        const VectorXd b2 = rng.normal_vector(big);
        const MatrixXd inv = (MatrixXd::Identity(big, big) - rho * w2).inverse() * b2.asDiagonal();
        CHECK((impact_matrix(rho, w2, b2) - inv).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("singular system is a numerical error")
{
    CHECK_THROWS_AS(impact_matrix(1.0, ring_weights(4), VectorXd::Ones(4)), NumericalError);
    CHECK_THROWS_AS(impact_matrix(0.5, ring_weights(4), VectorXd::Ones(3)), ValidationError);
}

TEST_CASE("printed decomposition arithmetic")
{
    // direct -0.79 and indirect -2.19 on a single unit-averaged row
    MatrixXd two(2, 2);
    two << -0.79, -2.19, -2.19, -0.79;
    const auto f = effect_summary(two);
    CHECK(f.avg_direct == doctest::Approx(-0.79));
    CHECK(f.avg_total == doctest::Approx(-2.98));
    CHECK(std::abs(*f.network_share_pct - 73.5) < 0.1);
}

TEST_CASE("diagonal impact matrix has no network share")
{
    const auto e = effect_summary(MatrixXd(Eigen::Vector3d(1.0, -2.0, 0.5).asDiagonal()));
    CHECK(e.indirect.isZero(0.0));
    CHECK(*e.network_share_pct == 0.0);
    CHECK((e.share_pct.array() == 0.0).all());
}

TEST_CASE("three-unit hand case")
{
    MatrixXd s(3, 3);
    s << -1.0, -0.2, -0.3, -0.1, -2.0, -0.4, 0.0, -0.5, -1.5;
    const auto e = effect_summary(s);
    CHECK(e.direct == Eigen::Vector3d(-1.0, -2.0, -1.5));
    CHECK((e.total - Eigen::Vector3d(-1.5, -2.5, -2.0)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((e.indirect - Eigen::Vector3d(-0.5, -0.5, -0.5)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(e.avg_direct == doctest::Approx(-1.5));
    CHECK(e.avg_total == doctest::Approx(-2.0));
    CHECK(e.avg_indirect == doctest::Approx(-0.5));
    CHECK(*e.network_share_pct == doctest::Approx(25.0));
    CHECK(e.share_pct(0) == doctest::Approx(100.0 / 3.0));
}

TEST_CASE("zero totals leave the share missing")
{
    MatrixXd s(2, 2);
    s << 1.0, -1.0, 0.5, 0.5;
    const auto e = effect_summary(s);
    CHECK(std::isnan(e.share_pct(0)));
    CHECK(e.share_pct(1) == doctest::Approx(50.0));
    CHECK(effect_summary(MatrixXd::Zero(2, 2)).network_share_pct == std::nullopt);
}

TEST_CASE("additivity and monotone shrinkage towards no network")
{
    Rng rng(8);
    const MatrixXd w = random_row_stochastic(5, rng);
    const VectorXd betas = -(rng.normal_vector(5).cwiseAbs().array() + 0.1).matrix();
    double last = -1.0;
    for (double rho : {0.8, 0.6, 0.4, 0.2, 0.1, 0.01, 0.0})
    {
        const auto e = effect_summary(impact_matrix(rho, w, betas));
        CHECK((e.total - e.direct - e.indirect).cwiseAbs().maxCoeff() == 0.0);
        if (last >= 0.0)
            CHECK(*e.network_share_pct < last);
        last = *e.network_share_pct;
    }
    CHECK(last == 0.0);
}

TEST_CASE("permuting units permutes per-unit effects and keeps averages")
{
    Rng rng(9);
    const Index n = 7;
    const MatrixXd w = random_row_stochastic(n, rng);
    const VectorXd betas = rng.normal_vector(n);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng.engine());
    Eigen::PermutationMatrix<Eigen::Dynamic> p(Eigen::Map<Eigen::VectorXi>(order.data(), n));
    const auto a = effect_summary(impact_matrix(0.6, w, betas));
    const auto b = effect_summary(impact_matrix(0.6, MatrixXd(p * w * p.transpose()), VectorXd(p * betas)));
    CHECK((VectorXd(p * a.total) - b.total).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((VectorXd(p * a.direct) - b.direct).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(a.avg_total == doctest::Approx(b.avg_total).epsilon(1e-12));
    CHECK(*a.network_share_pct == doctest::Approx(*b.network_share_pct).epsilon(1e-12));
}

TEST_CASE("quantiles and bands")
{
    CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.5) == 2.5);
    CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.25) == 1.75);
    CHECK(quantile({5.0}, 0.01) == 5.0);
    const Band one = posterior_band({3.5});
    CHECK(one.median == 3.5);
    CHECK(one.lower == 3.5);
    CHECK(one.upper == 3.5);
    const Band gaps = posterior_band({1.0, std::nan(""), 3.0});
    CHECK(gaps.median == 2.0);

    Rng rng(10);
    std::vector<double> x(1000);
    for (auto& v : x)
        v = 1.0 + 2.0 * rng.normal();
    const Band b = posterior_band(x, 0.99);
    // normal 0.995 quantile is 2.5758; the extreme order statistics of 1,000 draws have sd around 0.2
    CHECK(std::abs(b.upper - (1.0 + 2.0 * 2.5758)) < 1.0);
    CHECK(std::abs(b.lower - (1.0 - 2.0 * 2.5758)) < 1.0);
    CHECK(std::abs(b.median - 1.0) < 0.25);
}

TEST_CASE("aggregation over stored draws")
{
    const PanelData panel = fixtures::small_panel(3, 4);
    const WeightSequence w = fixtures::constant_weights(panel, ring_weights(3));
    PosteriorDraws draws;
    draws.config = ModelConfig::from_variant("B4");
    ParameterState s = ParameterState::zeros(3, 4, 1);
    s.theta0.col(1) = Eigen::Vector3d(-1.0, -2.0, -3.0);
    s.sigma_sq.setOnes();
    s.rho_path.setConstant(0.4);
    draws.draws.push_back(s);

    const auto sum = aggregate_draws(draws, panel, w, 1);
    const auto e = effect_summary(impact_matrix(0.4, ring_weights(3), VectorXd(s.theta0.col(1))));
    // constant parameters make time averaging a no-op; a single draw collapses the bands
    CHECK(sum.total.median == doctest::Approx(e.avg_total).epsilon(1e-14));
    CHECK(sum.total.lower == sum.total.upper);
    CHECK(sum.indirect.median == doctest::Approx(e.avg_indirect).epsilon(1e-14));
    CHECK(sum.share_pct.median == doctest::Approx(*e.network_share_pct).epsilon(1e-12));
    CHECK(sum.beta.median == doctest::Approx(-2.0));
    CHECK(sum.rho.median == doctest::Approx(0.4));
    REQUIRE(sum.cluster_inputs.size() == 1);
    CHECK((sum.cluster_inputs[0].col(0) - e.total).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(sum.by_period.size() == 4);

    std::size_t cells = 0;
    aggregate_draws(draws, panel, w, 1, 0.99,
                    [&](std::size_t, Index, Index, double d, double i, double t, double) {
                        ++cells;
                        CHECK(d + i == doctest::Approx(t));
                    });
    CHECK(cells == 12);

    draws.config = ModelConfig::from_variant("B2");
    const auto plain = aggregate_draws(draws, panel, w, 1);
    CHECK(plain.total.median == doctest::Approx(-2.0));
    CHECK(std::isnan(plain.indirect.median));
    CHECK_THROWS_AS(aggregate_draws(draws, panel, w, 2), ValidationError);
}
