#include "netpanel/state_space.hpp"

#include "netpanel/errors.hpp"

namespace netpanel {

namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m)
{
    return 0.5 * (m + m.transpose());
}

} // namespace

Eigen::VectorXd draw_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng)
{
    const Eigen::VectorXd z = rng.normal_vector(mean.size());
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success)
        return mean + llt.matrixL() * z;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrized(cov));
    const Eigen::VectorXd sd = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return mean + eig.eigenvectors() * sd.cwiseProduct(z);
}

FilteredMoments kalman_filter(const RandomWalkStateSpace& model)
{
    const Eigen::Index len = model.length();
    FilteredMoments out;
    out.mean.reserve(static_cast<std::size_t>(len));
    out.cov.reserve(static_cast<std::size_t>(len));

    Eigen::VectorXd m = model.initial_mean;
    Eigen::MatrixXd p = model.initial_cov;
    for (Eigen::Index t = 0; t < len; ++t)
    {
        if (t > 0)
            p.diagonal() += model.innovation_var;
        const auto& obs = model.periods[static_cast<std::size_t>(t)];
        for (Eigen::Index r = 0; r < obs.values.size(); ++r)
        {
            const Eigen::VectorXd h = obs.loadings.row(r).transpose();
            const Eigen::VectorXd ph = p * h;
            const double f = h.dot(ph) + obs.variances(r);
            if (!(f > 0.0))
                throw NumericalError("non-positive innovation variance in Kalman update");
            const Eigen::VectorXd gain = ph / f;
            m += gain * (obs.values(r) - h.dot(m));
            p -= gain * ph.transpose();
        }
        p = symmetrized(p);
        out.mean.push_back(m);
        out.cov.push_back(p);
    }
    return out;
}

Eigen::MatrixXd ffbs_draw(const RandomWalkStateSpace& model, Rng& rng)
{
    const Eigen::Index len = model.length();
    const Eigen::Index dim = model.state_dim();
    const FilteredMoments filt = kalman_filter(model);
    Eigen::MatrixXd path(dim, len);
    if (len == 0)
        return path;

    path.col(len - 1) = draw_gaussian(filt.mean.back(), filt.cov.back(), rng);
    for (Eigen::Index t = len - 2; t >= 0; --t)
    {
        const auto& m = filt.mean[static_cast<std::size_t>(t)];
        const auto& p = filt.cov[static_cast<std::size_t>(t)];
        Eigen::MatrixXd pred = p;
        pred.diagonal() += model.innovation_var;
        // J = P pred^{-1}; pred is symmetric positive definite
        const Eigen::MatrixXd gain = pred.ldlt().solve(p).transpose();
        const Eigen::VectorXd mean = m + gain * (path.col(t + 1) - m);
        const Eigen::MatrixXd cov = symmetrized(p - gain * p);
        path.col(t) = draw_gaussian(mean, cov, rng);
    }
    return path;
}

FilteredMoments kalman_smoother(const RandomWalkStateSpace& model)
{
    FilteredMoments out = kalman_filter(model);
    const Eigen::Index len = model.length();
    for (Eigen::Index t = len - 2; t >= 0; --t)
    {
        const auto ut = static_cast<std::size_t>(t);
        const Eigen::VectorXd m = out.mean[ut];
        const Eigen::MatrixXd p = out.cov[ut];
        Eigen::MatrixXd pred = p;
        pred.diagonal() += model.innovation_var;
        const Eigen::MatrixXd gain = pred.ldlt().solve(p).transpose();
        out.mean[ut] = m + gain * (out.mean[ut + 1] - m);
        out.cov[ut] = symmetrized(p + gain * (out.cov[ut + 1] - pred) * gain.transpose());
    }
    return out;
}

} // namespace netpanel
