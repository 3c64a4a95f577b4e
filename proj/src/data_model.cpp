#include "netpanel/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace netpanel {

namespace {

std::string join_issues(const std::vector<std::string>& issues)
{
    std::ostringstream out;
    for (std::size_t i = 0; i < issues.size(); ++i)
    {
        if (i != 0)
            out << "; ";
        out << issues[i];
    }
    return out.str();
}

std::string number(double x)
{
    std::ostringstream out;
    out.precision(12);
    out << x;
    return out.str();
}

} // namespace

ValidationError::ValidationError(std::vector<std::string> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues))
{
}

Date parse_date(std::string_view text)
{
    auto fail = [&] { return ValidationError("malformed date '" + std::string(text) + "' (expected YYYY-MM-DD)"); };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        throw fail();
    int y = 0;
    unsigned m = 0, d = 0;
    auto parse = [&](std::string_view part, auto& value) {
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
        if (ec != std::errc{} || ptr != part.data() + part.size())
            throw fail();
    };
    parse(text.substr(0, 4), y);
    parse(text.substr(5, 2), m);
    parse(text.substr(8, 2), d);
    Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok())
        throw fail();
    return date;
}

std::string format_date(const Date& date)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

long days_between(const Date& a, const Date& b)
{
    return (std::chrono::sys_days{b} - std::chrono::sys_days{a}).count();
}

Eigen::VectorXd PanelData::design(Index i, Index t) const
{
    Eigen::VectorXd z(covariate_count() + 1);
    z(0) = 1.0;
    for (Index k = 0; k < covariate_count(); ++k)
        z(k + 1) = covariates[static_cast<std::size_t>(k)](i, t);
    return z;
}

std::size_t WeightSequence::index_at(const Date& date) const
{
    if (entries.empty())
        throw ValidationError("weight sequence is empty");
    auto it = std::upper_bound(entries.begin(), entries.end(), date,
                               [](const Date& d, const WeightEntry& e) { return d < e.effective_from; });
    if (it == entries.begin())
        throw ValidationError("no weight matrix in force on " + format_date(date));
    return static_cast<std::size_t>(std::distance(entries.begin(), it) - 1);
}

std::vector<std::size_t> WeightSequence::schedule(const std::vector<Date>& dates) const
{
    std::vector<std::size_t> out;
    out.reserve(dates.size());
    for (const auto& d : dates)
        out.push_back(index_at(d));
    return out;
}

std::vector<std::string> weight_matrix_issues(const Eigen::MatrixXd& w, Index expected_n, double tolerance)
{
    std::vector<std::string> issues;
    if (w.rows() != expected_n || w.cols() != expected_n)
    {
        issues.push_back("dimension mismatch: weight matrix is " + std::to_string(w.rows()) + "x" +
                         std::to_string(w.cols()) + ", panel has N=" + std::to_string(expected_n));
        return issues;
    }
    if (!w.allFinite())
        issues.push_back("weight matrix has non-finite entries");
    if ((w.array() < 0.0).any())
        issues.push_back("weight matrix has negative entries");
    for (Index r = 0; r < w.rows(); ++r)
    {
        const double s = w.row(r).sum();
        if (!(std::abs(s - 1.0) <= tolerance))
            issues.push_back("row " + std::to_string(r + 1) + " sums to " + number(s));
    }
    return issues;
}

Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& w)
{
    Eigen::MatrixXd out = w;
    for (Index r = 0; r < out.rows(); ++r)
    {
        const double s = out.row(r).sum();
        if (s > 0.0)
            out.row(r) /= s;
    }
    return out;
}

std::string_view to_string(Heterogeneity h)
{
    switch (h)
    {
    case Heterogeneity::pooled: return "pooled";
    case Heterogeneity::cross_section: return "cross_section";
    case Heterogeneity::time: return "time";
    case Heterogeneity::both: return "both";
    }
    return "?";
}

std::string_view to_string(NetworkMode n)
{
    switch (n)
    {
    case NetworkMode::none: return "none";
    case NetworkMode::constant: return "constant";
    case NetworkMode::time_varying: return "time_varying";
    }
    return "?";
}

std::string_view to_string(DataShape d)
{
    return d == DataShape::aggregate ? "aggregate" : "industries";
}

Heterogeneity parse_heterogeneity(std::string_view text)
{
    for (auto h : {Heterogeneity::pooled, Heterogeneity::cross_section, Heterogeneity::time, Heterogeneity::both})
        if (text == to_string(h))
            return h;
    throw ValidationError("unknown heterogeneity '" + std::string(text) + "'");
}

NetworkMode parse_network(std::string_view text)
{
    for (auto n : {NetworkMode::none, NetworkMode::constant, NetworkMode::time_varying})
        if (text == to_string(n))
            return n;
    throw ValidationError("unknown network mode '" + std::string(text) + "'");
}

DataShape parse_data_shape(std::string_view text)
{
    for (auto d : {DataShape::aggregate, DataShape::industries})
        if (text == to_string(d))
            return d;
    throw ValidationError("unknown data shape '" + std::string(text) + "'");
}

namespace {

struct VariantRow
{
    std::string_view name;
    DataShape data;
    Heterogeneity heterogeneity;
    NetworkMode network;
};

constexpr std::array<VariantRow, 11> kVariants{{
    {"A1", DataShape::aggregate, Heterogeneity::pooled, NetworkMode::none},
    {"A2", DataShape::aggregate, Heterogeneity::time, NetworkMode::none},
    {"B1", DataShape::industries, Heterogeneity::pooled, NetworkMode::none},
    {"B2", DataShape::industries, Heterogeneity::cross_section, NetworkMode::none},
    {"B3", DataShape::industries, Heterogeneity::pooled, NetworkMode::constant},
    {"B4", DataShape::industries, Heterogeneity::cross_section, NetworkMode::constant},
    {"C1", DataShape::industries, Heterogeneity::pooled, NetworkMode::time_varying},
    {"C2", DataShape::industries, Heterogeneity::cross_section, NetworkMode::time_varying},
    {"C3", DataShape::industries, Heterogeneity::both, NetworkMode::none},
    {"C4", DataShape::industries, Heterogeneity::both, NetworkMode::constant},
    {"C5", DataShape::industries, Heterogeneity::both, NetworkMode::time_varying},
}};

} // namespace

const std::array<std::string_view, 11>& ModelConfig::variant_names()
{
    static const std::array<std::string_view, 11> names = [] {
        std::array<std::string_view, 11> out{};
        for (std::size_t i = 0; i < kVariants.size(); ++i)
            out[i] = kVariants[i].name;
        return out;
    }();
    return names;
}

int ModelConfig::variant_rank(std::string_view name)
{
    for (std::size_t i = 0; i < kVariants.size(); ++i)
        if (kVariants[i].name == name)
            return static_cast<int>(i);
    return static_cast<int>(kVariants.size());
}

ModelConfig ModelConfig::from_variant(std::string_view name)
{
    for (const auto& row : kVariants)
    {
        if (row.name == name)
        {
            ModelConfig cfg;
            cfg.variant = std::string(row.name);
            cfg.data = row.data;
            cfg.heterogeneity = row.heterogeneity;
            cfg.network = row.network;
            return cfg;
        }
    }
    std::string valid;
    for (const auto& row : kVariants)
        valid += (valid.empty() ? "" : ", ") + std::string(row.name);
    throw ValidationError("unknown variant '" + std::string(name) + "' (valid: " + valid + ")");
}

std::optional<std::string> ModelConfig::variant_of(Heterogeneity h, NetworkMode n, DataShape d)
{
    for (const auto& row : kVariants)
        if (row.heterogeneity == h && row.network == n && row.data == d)
            return std::string(row.name);
    return std::nullopt;
}

Eigen::VectorXd ParameterState::coefficients(Index i, Index t) const
{
    return theta0.row(i).transpose() +
           omega_sqrt.row(i).transpose().cwiseProduct(theta_tilde[static_cast<std::size_t>(i)].col(t));
}

ParameterState ParameterState::zeros(Index n, Index t, Index k)
{
    ParameterState s;
    s.theta_tilde.assign(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(k + 1, t));
    s.theta0 = Eigen::MatrixXd::Zero(n, k + 1);
    s.omega_sqrt = Eigen::MatrixXd::Zero(n, k + 1);
    s.sigma_sq = Eigen::VectorXd::Ones(n);
    s.rho_path = Eigen::VectorXd::Zero(t + 1);
    s.varsigma_sq = 1.0;
    return s;
}

std::vector<std::string> state_issues(const ParameterState& s)
{
    std::vector<std::string> issues;
    const Index n = s.theta0.rows();
    const Index m = s.theta0.cols();
    const Index t = s.rho_path.size() - 1;
    if (static_cast<Index>(s.theta_tilde.size()) != n)
        issues.push_back("theta_tilde has wrong unit count");
    for (const auto& path : s.theta_tilde)
        if (path.rows() != m || path.cols() != t)
            issues.push_back("theta_tilde path has wrong shape");
    if (s.omega_sqrt.rows() != n || s.omega_sqrt.cols() != m)
        issues.push_back("omega_sqrt has wrong shape");
    if (s.sigma_sq.size() != n)
        issues.push_back("sigma_sq has wrong length");
    if (!(s.sigma_sq.array() > 0.0).all())
        issues.push_back("sigma_sq must be positive");
    if (!(s.varsigma_sq > 0.0))
        issues.push_back("varsigma_sq must be positive");
    if (!s.theta0.allFinite() || !s.omega_sqrt.allFinite() || !s.rho_path.allFinite())
        issues.push_back("state has non-finite entries");
    return issues;
}

ValidatedInputs validate_inputs(PanelData panel, WeightSequence weights, ModelConfig config)
{
    std::vector<std::string> issues;
    const Index n = panel.units();
    const Index t = panel.periods();

    if (n < 1)
        issues.push_back("N >= 1 required");
    if (t < 2)
        issues.push_back("T >= 2 required");
    if (panel.covariate_count() < 1)
        issues.push_back("K >= 1 covariates required");
    if (!panel.responses.allFinite())
        issues.push_back("responses contain NaN or infinite cells");
    for (std::size_t k = 0; k < panel.covariates.size(); ++k)
    {
        const auto& x = panel.covariates[k];
        if (x.rows() != n || x.cols() != t)
            issues.push_back("dimension mismatch: covariate " + std::to_string(k + 1) + " is not N x T");
        else if (!x.allFinite())
            issues.push_back("covariate " + std::to_string(k + 1) + " contains NaN or infinite cells");
    }
    if (static_cast<Index>(panel.unit_ids.size()) != n)
        issues.push_back("dimension mismatch: " + std::to_string(panel.unit_ids.size()) + " unit ids for N=" +
                         std::to_string(n));
    if (std::set<std::string>(panel.unit_ids.begin(), panel.unit_ids.end()).size() != panel.unit_ids.size())
        issues.push_back("duplicate unit ids");
    if (static_cast<Index>(panel.event_dates.size()) != t)
        issues.push_back("dimension mismatch: " + std::to_string(panel.event_dates.size()) + " event dates for T=" +
                         std::to_string(t));
    for (std::size_t i = 1; i < panel.event_dates.size(); ++i)
        if (!(panel.event_dates[i - 1] < panel.event_dates[i]))
        {
            issues.push_back("event dates not strictly increasing at " + format_date(panel.event_dates[i]));
            break;
        }
    if (panel.common_shock && !panel.covariates.empty() && panel.covariates[0].rows() == n &&
        panel.covariates[0].cols() == t)
    {
        const auto& v = panel.covariates[0];
        for (Index c = 0; c < t; ++c)
            if ((v.col(c).array() != v(0, c)).any())
            {
                issues.push_back("common shock covariate varies across units at period " + std::to_string(c + 1));
                break;
            }
    }

    const auto& p = config.priors;
    auto positive = [&](double x, const char* name) {
        if (!(x > 0.0) || !std::isfinite(x))
            issues.push_back(std::string("prior ") + name + " must be positive");
    };
    positive(p.a, "a");
    positive(p.b, "b");
    positive(p.varsigma0_sq, "varsigma0_sq");
    positive(p.c_varsigma, "c_varsigma");
    positive(p.d_varsigma, "d_varsigma");
    positive(p.c_sigma, "c_sigma");
    positive(p.d_sigma, "d_sigma");
    if (!std::isfinite(p.mu0))
        issues.push_back("prior mu0 must be finite");
    if (config.chain.burn_in < 0 || config.chain.keep < 1 || config.chain.thin < 1 ||
        config.chain.keep < config.chain.thin)
        issues.push_back("chain schedule needs burn_in >= 0, keep >= thin >= 1");
    if (config.impact_covariate < 1 || config.impact_covariate > panel.covariate_count())
        issues.push_back("impact covariate index out of range 1..K");
    if (config.data == DataShape::aggregate)
    {
        if (n != 1)
            issues.push_back("aggregate data shape requires a single series (N=1)");
        if (config.network != NetworkMode::none)
            issues.push_back("aggregate data shape admits no network dependence");
    }

    std::vector<std::size_t> schedule;
    const bool need_weights = config.network != NetworkMode::none;
    if (need_weights && weights.empty())
        issues.push_back("network model requires at least one weight matrix");
    if (!weights.empty())
    {
        if (weights.unit_ids != panel.unit_ids)
            issues.push_back("dimension mismatch: weight unit ids do not match panel unit ids and ordering");
        for (std::size_t e = 0; e < weights.entries.size(); ++e)
        {
            const auto& entry = weights.entries[e];
            if (e > 0 && !(weights.entries[e - 1].effective_from < entry.effective_from))
                issues.push_back("weight effective dates not strictly increasing at " +
                                 format_date(entry.effective_from));
            for (auto& msg : weight_matrix_issues(entry.matrix, n))
                issues.push_back("W[" + format_date(entry.effective_from) + "] " + msg);
        }
        if (!panel.event_dates.empty() && panel.event_dates.front() < weights.entries.front().effective_from)
            issues.push_back("first event precedes the first weight matrix");
    }

    if (!issues.empty())
        throw ValidationError(std::move(issues));
    if (need_weights)
        schedule = weights.schedule(panel.event_dates);
    return ValidatedInputs{std::move(panel), std::move(weights), std::move(config), std::move(schedule)};
}

} // namespace netpanel
