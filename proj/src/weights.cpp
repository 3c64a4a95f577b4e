#include "netpanel/weights.hpp"

#include <algorithm>
#include <set>

namespace netpanel {

InputShares<double> build_weight_matrix(const IoTables& tables)
{
    if (tables.make.rows() != tables.use.cols() || tables.make.cols() != tables.use.rows())
        throw ValidationError("vintage " + tables.vintage + ": make is " + std::to_string(tables.make.rows()) + "x" +
                              std::to_string(tables.make.cols()) + " but use is " + std::to_string(tables.use.rows()) +
                              "x" + std::to_string(tables.use.cols()));
    if ((tables.use.array() < 0.0).any())
        throw ValidationError("vintage " + tables.vintage + ": use table has negative entries");
    const auto shares = market_shares(tables.make, tables.commodity_ids);
    const auto rev = revenue_matrix(shares, tables.use);
    return input_share_weights(rev, tables.use, tables.industry_ids);
}

namespace {

IoTables align_to(const IoTables& tables, const std::vector<std::string>& order)
{
    if (tables.industry_ids == order)
        return tables;
    IoTables out = tables;
    out.industry_ids = order;
    const Index n = static_cast<Index>(order.size());
    for (Index i = 0; i < n; ++i)
    {
        const auto it = std::find(tables.industry_ids.begin(), tables.industry_ids.end(), order[i]);
        const Index src = std::distance(tables.industry_ids.begin(), it);
        out.make.row(i) = tables.make.row(src);
        out.use.col(i) = tables.use.col(src);
    }
    return out;
}

} // namespace

StitchedWeights stitch(const std::vector<IoTables>& vintages, const std::vector<Date>& cutover_dates)
{
    if (vintages.empty())
        throw ValidationError("no vintages to stitch");
    if (cutover_dates.size() + 1 != vintages.size())
        throw ValidationError("expected " + std::to_string(vintages.size() - 1) + " cutover dates for " +
                              std::to_string(vintages.size()) + " vintages, got " +
                              std::to_string(cutover_dates.size()));
    std::vector<std::string> issues;
    for (std::size_t v = 1; v < vintages.size(); ++v)
        if (!(vintages[v - 1].vintage < vintages[v].vintage))
            issues.push_back("vintages not sorted at '" + vintages[v].vintage + "'");
    for (std::size_t c = 1; c < cutover_dates.size(); ++c)
        if (!(cutover_dates[c - 1] < cutover_dates[c]))
            issues.push_back("overlapping windows: cutover " + format_date(cutover_dates[c]) + " not after " +
                             format_date(cutover_dates[c - 1]));

    const auto& reference = vintages.front().industry_ids;
    const std::set<std::string> ref_set(reference.begin(), reference.end());
    if (ref_set.size() != reference.size())
        issues.push_back("vintage " + vintages.front().vintage + " has duplicate industry ids");
    for (std::size_t v = 1; v < vintages.size(); ++v)
    {
        const std::set<std::string> other(vintages[v].industry_ids.begin(), vintages[v].industry_ids.end());
        if (other == ref_set && other.size() == vintages[v].industry_ids.size())
            continue;
        std::vector<std::string> diff;
        std::set_symmetric_difference(ref_set.begin(), ref_set.end(), other.begin(), other.end(),
                                      std::back_inserter(diff));
        std::string listed;
        for (const auto& d : diff)
            listed += (listed.empty() ? "" : ", ") + d;
        issues.push_back("industries of vintage " + vintages[v].vintage + " do not match vintage " +
                         vintages.front().vintage + " (symmetric difference: " + listed + ")");
    }
    if (!issues.empty())
        throw ValidationError(std::move(issues));

    StitchedWeights out;
    out.sequence.unit_ids = reference;
    for (std::size_t v = 0; v < vintages.size(); ++v)
    {
        auto built = build_weight_matrix(align_to(vintages[v], reference));
        const Date from = v == 0 ? kDawnOfTime : cutover_dates[v - 1];
        out.sequence.entries.push_back({from, std::move(built.weights)});
        out.raw_row_sums.push_back(std::move(built.raw_row_sums));
    }
    for (const auto& e : out.sequence.entries)
    {
        auto bad = weight_matrix_issues(e.matrix, static_cast<Index>(reference.size()));
        if (!bad.empty())
            throw ValidationError(std::move(bad));
    }
    return out;
}

} // namespace netpanel
