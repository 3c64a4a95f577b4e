#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "netpanel/data_model.hpp"

namespace netpanel {

struct KMeansResult
{
    std::vector<int> assignments; // 0-based cluster per point
    Eigen::MatrixXd centers;      // k x d
    double within_ss = 0.0;
    std::vector<double> within_ss_trace; // per Lloyd iteration of the winning restart
};

/// Lloyd's algorithm with k-means++ seeding, best of `restarts` by
/// within-cluster sum of squares. Deterministic given the seed.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int restarts = 10);

/// Per-point silhouette coefficients (Euclidean); singleton clusters score 0.
Eigen::VectorXd silhouette_values(const Eigen::MatrixXd& points, const std::vector<int>& assignments);

double mean_silhouette(const Eigen::MatrixXd& points, const std::vector<int>& assignments);

struct SilhouetteChoice
{
    int k = 2;
    std::map<int, double> scores; // k -> mean silhouette
};

/// Evaluates k = 2..k_max (capped by the number of distinct points and
/// N - 1) and returns the argmax of the mean silhouette.
SilhouetteChoice silhouette_k(const Eigen::MatrixXd& points, int k_max, std::uint64_t seed);

struct ClusterRun
{
    std::map<int, double> k_distribution;
    Eigen::MatrixXd inclusion_prob; // N x k_fixed
    std::vector<Eigen::MatrixXd> centers; // per used draw, k_fixed x d, relabeled
    std::size_t used_draws = 0;
    std::size_t skipped_draws = 0;
};

struct ClusterOptions
{
    int k_fixed = 2;
    int k_max = 15;
    std::uint64_t seed = 1;
    int restarts = 10;
    bool standardize = false; // z-score each feature per draw
};

/// Relabels a fixed-k solution so cluster means of feature column 1 (the
/// network share) are in decreasing order. Returns the permutation applied
/// (new label of each old label).
std::vector<int> order_by_network(KMeansResult& result, const Eigen::MatrixXd& points);

/// Per draw: silhouette choice of k, and a fixed-k clustering relabeled by
/// the ordering constraint; accumulated into a k distribution and
/// membership probabilities. Draws with missing values are skipped.
ClusterRun cluster_posterior(const std::vector<Eigen::MatrixXd>& effect_pairs, const ClusterOptions& options = {});

} // namespace netpanel
