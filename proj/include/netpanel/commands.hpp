#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "netpanel/impacts.hpp"

namespace netpanel::cli {

namespace fs = std::filesystem;

/// Creates `out`, refusing to touch a non-empty directory unless forced (in
/// which case its contents are replaced).
void prepare_output(const fs::path& out, bool force);

struct WeightsOptions
{
    fs::path manifest; // vintage,make,use,effective_from
    fs::path out;
    bool force = false;
};
void cmd_weights(const WeightsOptions& options);

struct SimulateOptions
{
    fs::path out;
    Index n = 10;
    Index t = 60;
    std::uint64_t seed = 1;
    std::string network = "random"; // random | ring
    int vintages = 3;
    bool force = false;
};
void cmd_simulate(const SimulateOptions& options);

struct EstimateOptions
{
    std::optional<fs::path> config;
    fs::path data; // directory holding panel.csv and optionally weights.csv
    fs::path out;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> variant;
    std::optional<int> burn_in, keep, thin;
    int chains = 1;
    bool long_effects = false;
    bool force = false;
};

struct EstimateResult
{
    PosteriorDraws draws; // pooled over chains
    ImpactSummary summary;
    std::vector<std::string> warnings;
};
EstimateResult cmd_estimate(const EstimateOptions& options);

struct ClusterOptionsCli
{
    fs::path run; // an estimate output directory
    fs::path out;
    int k_fixed = 2;
    int k_max = 15;
    std::uint64_t seed = 1;
    bool standardize = false;
    bool force = false;
};
void cmd_cluster(const ClusterOptionsCli& options);

struct ReportOptions
{
    std::vector<fs::path> runs;
    fs::path out;
    bool force = false;
};
void cmd_report(const ReportOptions& options);

struct ShocksOptions
{
    fs::path input; // date,ff_pre,ff_post,days_in_month,day_of_meeting
    fs::path out;
    bool force = false;
};
void cmd_shocks(const ShocksOptions& options);

struct CorrelateOptions
{
    std::vector<std::string> series; // label=path to date,value CSV
    std::optional<fs::path> events;  // CSV with a date column; monthly matching when given
    fs::path out;
    bool force = false;
};
void cmd_correlate(const CorrelateOptions& options);

/// Column names of the one-row posterior summary.
const std::vector<std::string>& summary_header();
std::string summary_row(const std::string& label, const ImpactSummary& s);

} // namespace netpanel::cli
