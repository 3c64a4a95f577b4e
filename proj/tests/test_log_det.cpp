#include "doctest.h"

#include <cmath>

#include "netpanel/log_det.hpp"
#include "netpanel/rng.hpp"
#include "netpanel/synth.hpp"

using namespace netpanel;

TEST_CASE("two-unit swap network")
{
    const Eigen::Matrix2d w{{0, 1}, {1, 0}};
    CHECK(log_det_lu(w, 0.5) == doctest::Approx(std::log(0.75)).epsilon(1e-14));
    CHECK(NetworkLogDet(w)(0.5) == doctest::Approx(std::log(0.75)).epsilon(1e-14));
    CHECK(log_det_lu(w, 0.0) == 0.0);
    // determinant 1 - rho^2 is zero at 1 and negative beyond
    CHECK(std::isinf(log_det_lu(w, 1.0)));
    CHECK(log_det_lu(w, 2.0) == -std::numeric_limits<double>::infinity());
    CHECK(NetworkLogDet(w)(2.0) == -std::numeric_limits<double>::infinity());
    CHECK(NetworkLogDet(w)(-2.0) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("eigenvalue evaluation agrees with LU on random networks")
{
    Rng rng(21);
    for (int rep = 0; rep < 20; ++rep)
    {
        const Eigen::Index n = 2 + rep;
        const Eigen::MatrixXd w = rep % 3 == 0 ? ring_weights(n) : random_row_stochastic(n, rng);
        const NetworkLogDet table(w);
        for (double rho = -0.95; rho < 0.96; rho += 0.05)
            CHECK(std::abs(table(rho) - log_det_lu(w, rho)) < 1e-10);
    }
}

TEST_CASE("row-stochastic networks keep the determinant positive inside the unit interval")
{
    Rng rng(3);
    const Eigen::MatrixXd w = random_row_stochastic(12, rng);
    const NetworkLogDet table(w);
    for (double rho = -0.99; rho < 1.0; rho += 0.01)
        CHECK(std::isfinite(table(rho)));
    CHECK(table(0.0) == doctest::Approx(0.0));
}
