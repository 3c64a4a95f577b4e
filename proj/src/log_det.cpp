#include "netpanel/log_det.hpp"

#include <cmath>
#include <limits>

namespace netpanel {

namespace {
constexpr double kMinusInf = -std::numeric_limits<double>::infinity();
}

double log_det_lu(const Eigen::MatrixXd& w, double rho)
{
    const Eigen::Index n = w.rows();
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - rho * w;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    const auto& packed = lu.matrixLU();
    double sign = lu.permutationP().determinant();
    double log_abs = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const double u = packed(i, i);
        if (u == 0.0 || !std::isfinite(u))
            return kMinusInf;
        if (u < 0.0)
            sign = -sign;
        log_abs += std::log(std::abs(u));
    }
    return sign > 0.0 ? log_abs : kMinusInf;
}

NetworkLogDet::NetworkLogDet(const Eigen::MatrixXd& w)
{
    Eigen::EigenSolver<Eigen::MatrixXd> solver(w, false);
    eigenvalues_ = solver.eigenvalues();
    real_.resize(eigenvalues_.size());
    for (Eigen::Index k = 0; k < eigenvalues_.size(); ++k)
        real_(k) = eigenvalues_(k).imag() == 0.0;
}

double NetworkLogDet::operator()(double rho) const
{
    double log_abs = 0.0;
    bool negative = false;
    for (Eigen::Index k = 0; k < eigenvalues_.size(); ++k)
    {
        const std::complex<double> f = 1.0 - rho * eigenvalues_(k);
        if (real_(k))
        {
            if (f.real() == 0.0)
                return kMinusInf;
            if (f.real() < 0.0)
                negative = !negative;
            log_abs += std::log(std::abs(f.real()));
        }
        else
        {
            // conjugate partners contribute |f|^2 > 0 together
            log_abs += std::log(std::abs(f));
        }
    }
    return negative ? kMinusInf : log_abs;
}

} // namespace netpanel
