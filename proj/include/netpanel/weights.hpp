#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "netpanel/data_model.hpp"

namespace netpanel {

/// Make (industry x commodity) and use (commodity x industry) dollar flows of
/// one input-output vintage.
struct IoTables
{
    Eigen::MatrixXd make; // N x C
    Eigen::MatrixXd use;  // C x N
    std::vector<std::string> industry_ids;
    std::vector<std::string> commodity_ids;
    std::string vintage;
};

namespace detail {
inline std::string label(std::span<const std::string> names, Index i, const char* kind)
{
    if (static_cast<std::size_t>(i) < names.size())
        return std::string(kind) + " '" + names[static_cast<std::size_t>(i)] + "'";
    return std::string(kind) + " " + std::to_string(i + 1);
}
} // namespace detail

/// Share of each commodity produced by each industry; every column sums to 1.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
market_shares(const Eigen::MatrixBase<Derived>& make, std::span<const std::string> commodity_ids = {})
{
    using Scalar = typename Derived::Scalar;
    if ((make.array() < Scalar(0)).any())
        throw ValidationError("make table has negative entries");
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> shares = make;
    std::vector<std::string> bad;
    for (Index c = 0; c < make.cols(); ++c)
    {
        const Scalar total = make.col(c).sum();
        if (!(total > Scalar(0)))
            bad.push_back(detail::label(commodity_ids, c, "commodity") + " has zero total production");
        else
            shares.col(c) /= total;
    }
    if (!bad.empty())
        throw ValidationError(std::move(bad));
    return shares;
}

/// Dollars flowing from industry i (row) to industry j (column):
/// shares (N x C) times use (C x N).
template <typename DerivedS, typename DerivedU>
auto revenue_matrix(const Eigen::MatrixBase<DerivedS>& shares, const Eigen::MatrixBase<DerivedU>& use)
{
    if (shares.cols() != use.rows())
        throw ValidationError("inner dimension mismatch: shares has " + std::to_string(shares.cols()) +
                              " commodities, use has " + std::to_string(use.rows()));
    using Scalar = typename DerivedS::Scalar;
    return Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>(shares * use);
}

template <typename Scalar>
struct InputShares
{
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> weights;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> raw_row_sums; // before renormalization
};

/// w_ij = rev_ij / sum_c use_cj, then rows renormalized to sum to one.
template <typename DerivedR, typename DerivedU>
InputShares<typename DerivedR::Scalar> input_share_weights(const Eigen::MatrixBase<DerivedR>& rev,
                                                           const Eigen::MatrixBase<DerivedU>& use,
                                                           std::span<const std::string> industry_ids = {})
{
    using Scalar = typename DerivedR::Scalar;
    if (rev.rows() != rev.cols() || use.cols() != rev.cols())
        throw ValidationError("dimension mismatch between revenue and use tables");
    const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> inputs = use.colwise().sum();
    std::vector<std::string> bad;
    for (Index j = 0; j < inputs.size(); ++j)
        if (!(inputs(j) > Scalar(0)))
            bad.push_back(detail::label(industry_ids, j, "industry") + " has zero total inputs in the use table");
    if (!bad.empty())
        throw ValidationError(std::move(bad));

    InputShares<Scalar> out;
    out.weights = rev.array().rowwise() / inputs.array();
    out.raw_row_sums = out.weights.rowwise().sum();
    for (Index i = 0; i < out.weights.rows(); ++i)
    {
        if (!(out.raw_row_sums(i) > Scalar(0)))
            bad.push_back(detail::label(industry_ids, i, "industry") + " has zero inputs");
        else
            out.weights.row(i) /= out.raw_row_sums(i);
    }
    if (!bad.empty())
        throw ValidationError(std::move(bad));
    return out;
}

/// Full make/use to W pipeline for one vintage.
InputShares<double> build_weight_matrix(const IoTables& tables);

struct StitchedWeights
{
    WeightSequence sequence;
    std::vector<Eigen::VectorXd> raw_row_sums; // per vintage
};

/// Piecewise-constant sequence: vintage v is in force from cutover_dates[v-1]
/// (the first vintage from the start of time). Industries are aligned to the
/// ordering of the first vintage.
StitchedWeights stitch(const std::vector<IoTables>& vintages, const std::vector<Date>& cutover_dates);

} // namespace netpanel
