#include "netpanel/rng.hpp"

namespace netpanel {

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x6e70u};
    engine_.seed(seq);
}

double Rng::gamma(double shape, double rate)
{
    std::gamma_distribution<double> dist(shape, 1.0 / rate);
    return dist(engine_);
}

Eigen::VectorXd Rng::normal_vector(Eigen::Index n)
{
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i)
        z(i) = normal();
    return z;
}

} // namespace netpanel
