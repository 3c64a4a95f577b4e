#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "netpanel/data_model.hpp"

namespace netpanel {

/// Implied futures rates around one announcement.
struct ShockInputs
{
    double ff_pre = 0.0;  // rate 10 minutes before, percent
    double ff_post = 0.0; // rate 20 minutes after, percent
    int days_in_month = 30;
    int day_of_meeting = 1;
};

/// Surprise in percentage points, scaled for the averaging of the monthly
/// futures settlement: D / (D - t) * (ff_post - ff_pre).
double policy_shock(const ShockInputs& s);

/// Maps a series affinely onto [0, 1]: (x - min) / (max - min).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> unit_normalize(const Eigen::MatrixBase<Derived>& x)
{
    using Scalar = typename Derived::Scalar;
    if (x.size() == 0)
        throw ValidationError("cannot normalize an empty series");
    const Scalar lo = x.minCoeff();
    const Scalar hi = x.maxCoeff();
    if (!(hi > lo))
        throw ValidationError("series has zero range");
    return ((x.array() - lo) / (hi - lo)).matrix();
}

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Two-sided p-value of H0: r = 0 from the t statistic with n - 2 degrees of
/// freedom.
double pearson_p_value(double r, Index n);

/// Significance stars at 0.05 / 0.01 / 0.001.
std::string significance_stars(double p);

struct CorrelationTable
{
    std::vector<std::string> labels;
    Eigen::MatrixXd r;
    Eigen::MatrixXd p;

    std::string stars(Index i, Index j) const { return significance_stars(p(i, j)); }
};

CorrelationTable correlation_table(const std::vector<Eigen::VectorXd>& series, std::vector<std::string> labels);

struct DatedValue
{
    Date date;
    double value;
};

/// Arithmetic mean of all observations falling in each calendar month,
/// keyed by the first day of the month, in ascending order.
std::vector<DatedValue> monthly_means(const std::vector<DatedValue>& series);

/// For every event, the monthly value of the closest available month (own
/// month first; ties go to the earlier month).
Eigen::VectorXd match_to_events(const std::vector<DatedValue>& monthly, const std::vector<Date>& events);

} // namespace netpanel
