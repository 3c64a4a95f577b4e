#include "netpanel/clustering.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "netpanel/rng.hpp"

namespace netpanel {

namespace {

constexpr int kMaxLloydIterations = 300;

int distinct_rows(const Eigen::MatrixXd& points)
{
    std::set<std::vector<double>> seen;
    std::vector<double> row(static_cast<std::size_t>(points.cols()));
    for (Index r = 0; r < points.rows(); ++r)
    {
        for (Index c = 0; c < points.cols(); ++c)
            row[static_cast<std::size_t>(c)] = points(r, c);
        seen.insert(row);
    }
    return static_cast<int>(seen.size());
}

Eigen::MatrixXd plus_plus_seeds(const Eigen::MatrixXd& points, int k, Rng& rng)
{
    const Index n = points.rows();
    Eigen::MatrixXd centers(k, points.cols());
    std::uniform_int_distribution<Index> pick(0, n - 1);
    centers.row(0) = points.row(pick(rng.engine()));
    Eigen::VectorXd d2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c)
    {
        const double total = d2.sum();
        Index chosen = 0;
        if (total > 0.0)
        {
            double u = rng.uniform() * total;
            chosen = n - 1;
            for (Index i = 0; i < n; ++i)
            {
                u -= d2(i);
                if (u < 0.0)
                {
                    chosen = i;
                    break;
                }
            }
        }
        centers.row(c) = points.row(chosen);
        d2 = d2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }
    return centers;
}

double assign(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers, std::vector<int>& labels)
{
    double ss = 0.0;
    for (Index i = 0; i < points.rows(); ++i)
    {
        Index best = 0;
        const double d = (centers.rowwise() - points.row(i)).rowwise().squaredNorm().minCoeff(&best);
        labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
        ss += d;
    }
    return ss;
}

KMeansResult lloyd(const Eigen::MatrixXd& points, int k, Rng& rng)
{
    const Index n = points.rows();
    KMeansResult r;
    r.centers = plus_plus_seeds(points, k, rng);
    r.assignments.assign(static_cast<std::size_t>(n), 0);
    r.within_ss = assign(points, r.centers, r.assignments);
    r.within_ss_trace.push_back(r.within_ss);
    for (int iter = 0; iter < kMaxLloydIterations; ++iter)
    {
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
        for (Index i = 0; i < n; ++i)
        {
            const int c = r.assignments[static_cast<std::size_t>(i)];
            sums.row(c) += points.row(i);
            counts(c) += 1.0;
        }
        for (int c = 0; c < k; ++c)
        {
            if (counts(c) > 0.0)
            {
                r.centers.row(c) = sums.row(c) / counts(c);
                continue;
            }
            // empty cluster: move it onto the point farthest from its center
            Index far = 0;
            Eigen::VectorXd d(n);
            for (Index i = 0; i < n; ++i)
                d(i) = (points.row(i) - r.centers.row(r.assignments[static_cast<std::size_t>(i)])).squaredNorm();
            d.maxCoeff(&far);
            r.centers.row(c) = points.row(far);
            r.assignments[static_cast<std::size_t>(far)] = c;
        }
        std::vector<int> next(r.assignments.size());
        const double ss = assign(points, r.centers, next);
        r.within_ss_trace.push_back(ss);
        const bool stable = next == r.assignments;
        r.assignments = std::move(next);
        r.within_ss = ss;
        if (stable)
            break;
    }
    return r;
}

} // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int restarts)
{
    const Index n = points.rows();
    if (k < 1 || n < k)
        throw ValidationError("k-means needs N >= k >= 1 (N=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");
    if (!points.allFinite())
        throw ValidationError("k-means points must be finite");
    if (distinct_rows(points) < k)
        throw ValidationError("fewer distinct points than k=" + std::to_string(k));
    Rng rng(seed, static_cast<std::uint64_t>(k));
    KMeansResult best;
    best.within_ss = std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(1, restarts); ++r)
    {
        KMeansResult cand = lloyd(points, k, rng);
        if (cand.within_ss < best.within_ss)
            best = std::move(cand);
    }
    return best;
}

Eigen::VectorXd silhouette_values(const Eigen::MatrixXd& points, const std::vector<int>& assignments)
{
    const Index n = points.rows();
    const int k = assignments.empty() ? 0 : *std::max_element(assignments.begin(), assignments.end()) + 1;
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (int a : assignments)
        ++sizes[static_cast<std::size_t>(a)];

    Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
    std::vector<double> sum(static_cast<std::size_t>(k));
    for (Index i = 0; i < n; ++i)
    {
        const int own = assignments[static_cast<std::size_t>(i)];
        if (sizes[static_cast<std::size_t>(own)] < 2)
            continue;
        std::fill(sum.begin(), sum.end(), 0.0);
        for (Index j = 0; j < n; ++j)
            if (j != i)
                sum[static_cast<std::size_t>(assignments[static_cast<std::size_t>(j)])] +=
                    (points.row(i) - points.row(j)).norm();
        const double a = sum[static_cast<std::size_t>(own)] / (sizes[static_cast<std::size_t>(own)] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c)
            if (c != own && sizes[static_cast<std::size_t>(c)] > 0)
                b = std::min(b, sum[static_cast<std::size_t>(c)] / sizes[static_cast<std::size_t>(c)]);
        const double denom = std::max(a, b);
        s(i) = denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return s;
}

double mean_silhouette(const Eigen::MatrixXd& points, const std::vector<int>& assignments)
{
    return silhouette_values(points, assignments).mean();
}

SilhouetteChoice silhouette_k(const Eigen::MatrixXd& points, int k_max, std::uint64_t seed)
{
    const Index n = points.rows();
    if (n < 3)
        throw ValidationError("silhouette selection needs at least 3 points");
    const int upper = std::min({k_max, static_cast<int>(n) - 1, distinct_rows(points)});
    if (upper < 2)
        throw ValidationError("fewer than 2 distinct points; no clustering to select");
    SilhouetteChoice out;
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 2; k <= upper; ++k)
    {
        const auto fit = kmeans(points, k, seed);
        const double score = mean_silhouette(points, fit.assignments);
        out.scores[k] = score;
        if (score > best)
        {
            best = score;
            out.k = k;
        }
    }
    return out;
}

std::vector<int> order_by_network(KMeansResult& result, const Eigen::MatrixXd& points)
{
    const auto k = static_cast<int>(result.centers.rows());
    std::vector<double> mean(static_cast<std::size_t>(k), 0.0);
    std::vector<int> count(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < result.assignments.size(); ++i)
    {
        mean[static_cast<std::size_t>(result.assignments[i])] += points(static_cast<Index>(i), 1);
        ++count[static_cast<std::size_t>(result.assignments[i])];
    }
    for (int c = 0; c < k; ++c)
        if (count[static_cast<std::size_t>(c)] > 0)
            mean[static_cast<std::size_t>(c)] /= count[static_cast<std::size_t>(c)];
    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return mean[static_cast<std::size_t>(a)] > mean[static_cast<std::size_t>(b)];
    });
    std::vector<int> relabel(static_cast<std::size_t>(k));
    for (int pos = 0; pos < k; ++pos)
        relabel[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] = pos;
    for (auto& a : result.assignments)
        a = relabel[static_cast<std::size_t>(a)];
    Eigen::MatrixXd centers(result.centers.rows(), result.centers.cols());
    for (int c = 0; c < k; ++c)
        centers.row(relabel[static_cast<std::size_t>(c)]) = result.centers.row(c);
    result.centers = std::move(centers);
    return relabel;
}

ClusterRun cluster_posterior(const std::vector<Eigen::MatrixXd>& effect_pairs, const ClusterOptions& options)
{
    if (effect_pairs.empty())
        throw ValidationError("no draws to cluster");
    const Index n = effect_pairs.front().rows();
    ClusterRun run;
    run.inclusion_prob = Eigen::MatrixXd::Zero(n, options.k_fixed);
    std::map<int, std::size_t> k_counts;

    for (std::size_t d = 0; d < effect_pairs.size(); ++d)
    {
        const auto& raw = effect_pairs[d];
        if (raw.rows() != n || raw.cols() < 2)
            throw ValidationError("draw " + std::to_string(d) + " has inconsistent shape");
        if (!raw.allFinite())
        {
            ++run.skipped_draws;
            continue;
        }
        Eigen::MatrixXd pts = raw;
        if (options.standardize)
        {
            const Eigen::RowVectorXd mu = pts.colwise().mean();
            pts.rowwise() -= mu;
            const Eigen::RowVectorXd sd = (pts.colwise().squaredNorm() / std::max<double>(1.0, n - 1.0)).cwiseSqrt();
            for (Index c = 0; c < pts.cols(); ++c)
                if (sd(c) > 0.0)
                    pts.col(c) /= sd(c);
        }
        const std::uint64_t seed = options.seed + 7919u * static_cast<std::uint64_t>(d);
        ++k_counts[silhouette_k(pts, options.k_max, seed).k];

        auto fit = kmeans(pts, options.k_fixed, seed, options.restarts);
        // ordering constraint uses the raw network effect, not the scaled one
        order_by_network(fit, raw);
        for (Index i = 0; i < n; ++i)
            run.inclusion_prob(i, fit.assignments[static_cast<std::size_t>(i)]) += 1.0;
        Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(options.k_fixed, raw.cols());
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(options.k_fixed);
        for (Index i = 0; i < n; ++i)
        {
            centers.row(fit.assignments[static_cast<std::size_t>(i)]) += raw.row(i);
            counts(fit.assignments[static_cast<std::size_t>(i)]) += 1.0;
        }
        for (int c = 0; c < options.k_fixed; ++c)
            if (counts(c) > 0.0)
                centers.row(c) /= counts(c);
        run.centers.push_back(std::move(centers));
        ++run.used_draws;
    }
    if (run.used_draws == 0)
        throw ValidationError("every draw had missing network shares; nothing to cluster");
    run.inclusion_prob /= static_cast<double>(run.used_draws);
    for (const auto& [k, c] : k_counts)
        run.k_distribution[k] = static_cast<double>(c) / static_cast<double>(run.used_draws);
    return run;
}

} // namespace netpanel
