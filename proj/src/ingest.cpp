#include "netpanel/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <boost/math/distributions/students_t.hpp>

namespace netpanel {

double policy_shock(const ShockInputs& s)
{
    if (s.days_in_month < 28 || s.days_in_month > 31)
        throw ValidationError("days_in_month must lie in 28..31, got " + std::to_string(s.days_in_month));
    if (s.day_of_meeting == s.days_in_month)
        throw ValidationError("meeting on the last day of the month: D / (D - t) divides by zero");
    if (s.day_of_meeting < 1 || s.day_of_meeting > s.days_in_month)
        throw ValidationError("day_of_meeting must lie in 1..D-1, got " + std::to_string(s.day_of_meeting));
    const double d = s.days_in_month;
    return d / (d - s.day_of_meeting) * (s.ff_post - s.ff_pre);
}

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y)
{
    if (x.size() != y.size())
        throw ValidationError("series lengths differ");
    const Eigen::ArrayXd dx = x.array() - x.mean();
    const Eigen::ArrayXd dy = y.array() - y.mean();
    const double sxx = dx.square().sum();
    const double syy = dy.square().sum();
    if (!(sxx > 0.0) || !(syy > 0.0))
        throw ValidationError("zero-variance series");
    const double r = (dx * dy).sum() / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

double pearson_p_value(double r, Index n)
{
    if (n < 3)
        throw ValidationError("at least 3 observations required");
    if (std::abs(r) >= 1.0)
        return 0.0;
    const double df = static_cast<double>(n - 2);
    const double t = r * std::sqrt(df / (1.0 - r * r));
    const boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

std::string significance_stars(double p)
{
    if (p < 0.001)
        return "***";
    if (p < 0.01)
        return "**";
    if (p < 0.05)
        return "*";
    return "";
}

CorrelationTable correlation_table(const std::vector<Eigen::VectorXd>& series, std::vector<std::string> labels)
{
    if (series.size() != labels.size())
        throw ValidationError("one label per series required");
    if (series.empty())
        throw ValidationError("no series given");
    const Index n = series.front().size();
    for (const auto& s : series)
        if (s.size() != n)
            throw ValidationError("series lengths differ");
    if (n < 3)
        throw ValidationError("at least 3 observations required");

    const auto m = static_cast<Index>(series.size());
    CorrelationTable out{std::move(labels), Eigen::MatrixXd::Identity(m, m), Eigen::MatrixXd::Zero(m, m)};
    for (Index i = 0; i < m; ++i)
    {
        for (Index j = 0; j < i; ++j)
        {
            const double r = pearson(series[static_cast<std::size_t>(i)], series[static_cast<std::size_t>(j)]);
            out.r(i, j) = out.r(j, i) = r;
            out.p(i, j) = out.p(j, i) = pearson_p_value(r, n);
        }
        // self-correlation; also rejects a constant series
        pearson(series[static_cast<std::size_t>(i)], series[static_cast<std::size_t>(i)]);
    }
    return out;
}

std::vector<DatedValue> monthly_means(const std::vector<DatedValue>& series)
{
    std::map<std::chrono::year_month, std::pair<double, int>> acc;
    for (const auto& obs : series)
    {
        auto& cell = acc[std::chrono::year_month{obs.date.year(), obs.date.month()}];
        cell.first += obs.value;
        cell.second += 1;
    }
    std::vector<DatedValue> out;
    out.reserve(acc.size());
    for (const auto& [ym, sum] : acc)
        out.push_back({Date{ym.year(), ym.month(), std::chrono::day{1}}, sum.first / sum.second});
    return out;
}

Eigen::VectorXd match_to_events(const std::vector<DatedValue>& monthly, const std::vector<Date>& events)
{
    if (monthly.empty())
        throw ValidationError("no monthly observations to match");
    auto month_index = [](const Date& d) {
        return static_cast<int>(d.year()) * 12 + static_cast<int>(static_cast<unsigned>(d.month()));
    };
    Eigen::VectorXd out(static_cast<Index>(events.size()));
    for (std::size_t e = 0; e < events.size(); ++e)
    {
        const int target = month_index(events[e]);
        int best_gap = -1;
        double best = 0.0;
        for (const auto& m : monthly)
        {
            const int gap = std::abs(month_index(m.date) - target);
            if (best_gap < 0 || gap < best_gap)
            {
                best_gap = gap;
                best = m.value;
            }
        }
        out(static_cast<Index>(e)) = best;
    }
    return out;
}

} // namespace netpanel
