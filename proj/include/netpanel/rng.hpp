#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace netpanel {

/// Seeded engine plus the handful of distributions the samplers need.
/// Streams with the same seed and different stream ids are independent.
class Rng
{
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    /// Gamma with shape and rate (mean shape / rate).
    double gamma(double shape, double rate);
    /// Inverse gamma with shape and rate (mean rate / (shape - 1)).
    double inv_gamma(double shape, double rate) { return 1.0 / gamma(shape, rate); }
    Eigen::VectorXd normal_vector(Eigen::Index n);
    std::uint64_t next_seed() { return engine_(); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

} // namespace netpanel
