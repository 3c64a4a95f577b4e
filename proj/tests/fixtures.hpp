#pragma once

#include <filesystem>
#include <fstream>

#include <Eigen/Dense>

#include "netpanel/data_model.hpp"
#include "netpanel/synth.hpp"

namespace fixtures {

using namespace netpanel;

inline std::vector<Date> monthly_dates(Index t)
{
    std::vector<Date> dates;
    const std::chrono::year_month start{std::chrono::year{2000}, std::chrono::month{1}};
    for (Index s = 0; s < t; ++s)
        dates.push_back((start + std::chrono::months{static_cast<int>(s)}) / std::chrono::day{15});
    return dates;
}

/// Small noisy panel with a common shock and a constant-W network.
inline PanelData small_panel(Index n, Index t, std::uint64_t seed = 11)
{
    Rng rng(seed);
    PanelData p;
    p.responses.resize(n, t);
    p.covariates.assign(1, Eigen::MatrixXd(n, t));
    for (Index i = 0; i < n; ++i)
        p.unit_ids.push_back("i" + std::to_string(i + 1));
    p.event_dates = monthly_dates(t);
    for (Index s = 0; s < t; ++s)
    {
        const double v = 0.5 * rng.normal();
        for (Index i = 0; i < n; ++i)
        {
            p.covariates[0](i, s) = v;
            p.responses(i, s) = 0.1 - 2.0 * v + 0.5 * rng.normal();
        }
    }
    return p;
}

inline WeightSequence constant_weights(const PanelData& p, const Eigen::MatrixXd& w)
{
    WeightSequence seq;
    seq.unit_ids = p.unit_ids;
    seq.entries.push_back({p.event_dates.front(), w});
    return seq;
}

inline ModelConfig short_chain(std::string_view variant, int burn_in = 200, int keep = 400, int thin = 2,
                               std::uint64_t seed = 5)
{
    ModelConfig cfg = ModelConfig::from_variant(variant);
    cfg.chain = {burn_in, keep, thin, seed};
    return cfg;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / "netpanel_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream(path, std::ios::binary) << text;
}

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace fixtures
