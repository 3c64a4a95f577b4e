#pragma once

#include <Eigen/Dense>

namespace netpanel {

/// log det(I - rho W) via LU with sign tracking. Returns -infinity when the
/// determinant is not strictly positive.
double log_det_lu(const Eigen::MatrixXd& w, double rho);

/// log det(I - rho W) = sum_k log|1 - rho lambda_k| from a one-off eigenvalue
/// decomposition of W, for repeated evaluation at many rho. Returns -infinity
/// when the determinant is not strictly positive.
class NetworkLogDet
{
public:
    NetworkLogDet() = default;
    explicit NetworkLogDet(const Eigen::MatrixXd& w);

    double operator()(double rho) const;
    const Eigen::VectorXcd& eigenvalues() const { return eigenvalues_; }

private:
    Eigen::VectorXcd eigenvalues_;
    Eigen::Array<bool, Eigen::Dynamic, 1> real_;
};

} // namespace netpanel
