#include "netpanel/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "netpanel/clustering.hpp"
#include "netpanel/ingest.hpp"
#include "netpanel/io.hpp"
#include "netpanel/sampler.hpp"
#include "netpanel/synth.hpp"
#include "netpanel/weights.hpp"

#ifndef NETPANEL_VERSION
#define NETPANEL_VERSION "0.0.0"
#endif

namespace netpanel::cli {

using nlohmann::json;
using io::format_number;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_run_manifest(const fs::path& out, const std::string& command, json details,
                        const std::vector<fs::path>& inputs, Clock::time_point start)
{
    json hashes = json::object();
    for (const auto& p : inputs)
        hashes[p.string()] = io::sha256_file(p);
    details["command"] = command;
    details["software_version"] = NETPANEL_VERSION;
    details["input_sha256"] = hashes;
    details["elapsed_seconds"] = seconds_since(start);
    io::write_text(out / "run_manifest.json", details.dump(2) + "\n");
}

std::string band_cells(const Band& b)
{
    return format_number(b.median) + "," + format_number(b.lower) + "," + format_number(b.upper);
}

std::string fixed(double x, int digits)
{
    if (std::isnan(x))
        return {};
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

} // namespace

void prepare_output(const fs::path& out, bool force)
{
    if (fs::exists(out))
    {
        if (!fs::is_directory(out))
            throw std::runtime_error(out.string() + " exists and is not a directory");
        if (!fs::is_empty(out))
        {
            if (!force)
                throw std::runtime_error(out.string() + " is not empty; pass --force to overwrite");
            for (const auto& entry : fs::directory_iterator(out))
                fs::remove_all(entry.path());
        }
    }
    fs::create_directories(out);
}

const std::vector<std::string>& summary_header()
{
    static const std::vector<std::string> header = [] {
        std::vector<std::string> h{"model"};
        for (const char* name : {"alpha", "beta", "sigma_sq", "rho", "indirect", "direct", "total", "network_pct"})
            for (const char* suffix : {"", "_lo", "_hi"})
                h.push_back(std::string(name) + suffix);
        return h;
    }();
    return header;
}

std::string summary_row(const std::string& label, const ImpactSummary& s)
{
    std::ostringstream row;
    row << label;
    for (const Band* b : {&s.alpha, &s.beta, &s.sigma_sq, &s.rho, &s.indirect, &s.direct, &s.total, &s.share_pct})
        row << ',' << band_cells(*b);
    return row.str();
}

void cmd_weights(const WeightsOptions& options)
{
    const auto start = Clock::now();
    const io::IoManifest manifest = io::read_io_manifest(options.manifest);
    const StitchedWeights stitched = stitch(manifest.vintages, manifest.cutovers);
    for (const auto& entry : stitched.sequence.entries)
    {
        const auto issues = weight_matrix_issues(entry.matrix, static_cast<Index>(stitched.sequence.unit_ids.size()));
        if (!issues.empty())
            throw ValidationError(issues);
    }
    prepare_output(options.out, options.force);
    io::write_weights(options.out, stitched.sequence);

    std::ostringstream diag;
    diag << "vintage,unit_id,raw_row_sum\n";
    for (std::size_t v = 0; v < manifest.vintages.size(); ++v)
        for (std::size_t i = 0; i < stitched.sequence.unit_ids.size(); ++i)
            diag << manifest.vintages[v].vintage << ',' << stitched.sequence.unit_ids[i] << ','
                 << format_number(stitched.raw_row_sums[v](static_cast<Index>(i))) << '\n';
    io::write_text(options.out / "row_sums.csv", diag.str());

    std::vector<fs::path> inputs{options.manifest};
    json vintages = json::array();
    for (const auto& v : manifest.vintages)
        vintages.push_back(v.vintage);
    write_run_manifest(options.out, "weights", {{"vintages", vintages}}, inputs, start);
}

void cmd_simulate(const SimulateOptions& options)
{
    const auto start = Clock::now();
    DgpSpec spec = model_dgp(options.n, options.t, options.seed);
    spec.vintages = options.vintages;
    if (options.network == "ring")
        spec.weights = WeightGenerator::ring;
    else if (options.network != "random")
        throw ValidationError("unknown network generator '" + options.network + "' (ring, random)");
    const SimulatedData sim = simulate(spec);
    prepare_output(options.out, options.force);
    io::write_panel(options.out / "panel.csv", sim.panel);
    if (!sim.weights.empty())
        io::write_weights(options.out, sim.weights);
    io::write_truth(options.out / "truth.json", sim.truth);
    write_run_manifest(options.out, "simulate",
                       {{"seed", options.seed}, {"units", options.n}, {"periods", options.t}, {"network", options.network},
                        {"vintages", options.vintages}},
                       {}, start);
}

EstimateResult cmd_estimate(const EstimateOptions& options)
{
    const auto start = Clock::now();
    io::RunConfig cfg;
    std::vector<fs::path> inputs;
    if (options.config)
    {
        cfg = io::read_config(*options.config);
        inputs.push_back(*options.config);
    }
    if (options.variant)
    {
        const PriorSpec priors = cfg.model.priors;
        const ChainSchedule chain = cfg.model.chain;
        const int k = cfg.model.impact_covariate;
        cfg.model = ModelConfig::from_variant(*options.variant);
        cfg.model.priors = priors;
        cfg.model.chain = chain;
        cfg.model.impact_covariate = k;
    }
    if (options.seed)
        cfg.model.chain.seed = *options.seed;
    if (options.burn_in)
        cfg.model.chain.burn_in = *options.burn_in;
    if (options.keep)
        cfg.model.chain.keep = *options.keep;
    if (options.thin)
        cfg.model.chain.thin = *options.thin;
    if (options.chains < 1)
        throw ValidationError("--chains must be at least 1");

    const fs::path panel_path = options.data / "panel.csv";
    PanelData panel = io::read_panel(panel_path, cfg.common_shock);
    inputs.push_back(panel_path);
    WeightSequence weights;
    if (cfg.model.network != NetworkMode::none)
    {
        const fs::path manifest = options.data / "weights.csv";
        if (!fs::exists(manifest))
            throw ValidationError(manifest.string() + ": network variant " + cfg.model.variant + " needs a weight manifest");
        weights = io::read_weights(manifest, panel.unit_ids);
        inputs.push_back(manifest);
        const io::CsvTable listing = io::read_csv(manifest);
        for (const auto& row : listing.rows)
            inputs.push_back(options.data / row[static_cast<std::size_t>(listing.column("file"))]);
    }
    const ValidatedInputs validated = validate_inputs(std::move(panel), std::move(weights), cfg.model);

    prepare_output(options.out, options.force);

    std::vector<std::future<PosteriorDraws>> jobs;
    for (int c = 0; c < options.chains; ++c)
        jobs.push_back(std::async(std::launch::async, [&validated, c] {
            return run_mcmc(validated, static_cast<std::uint64_t>(c));
        }));
    std::vector<PosteriorDraws> chains;
    for (auto& j : jobs)
        chains.push_back(j.get());

    EstimateResult result;
    result.draws.config = validated.config;
    for (int c = 0; c < options.chains; ++c)
    {
        const auto& chain = chains[static_cast<std::size_t>(c)];
        const fs::path dir = options.chains == 1 ? options.out / "draws"
                                                 : options.out / ("chain_" + std::to_string(c + 1)) / "draws";
        io::write_draws(dir, chain);
        for (const auto& w : chain.warnings)
            result.warnings.push_back(options.chains == 1 ? w : "chain " + std::to_string(c + 1) + ": " + w);
        result.draws.draws.insert(result.draws.draws.end(), chain.draws.begin(), chain.draws.end());
        result.draws.loglik_trace.insert(result.draws.loglik_trace.end(), chain.loglik_trace.begin(),
                                         chain.loglik_trace.end());
    }
    result.draws.warnings = result.warnings;
    if (!chains.empty() && chains[0].rho_accept_rate.size() > 0)
    {
        result.draws.rho_accept_rate = Eigen::VectorXd::Zero(chains[0].rho_accept_rate.size());
        for (const auto& c : chains)
            result.draws.rho_accept_rate += c.rho_accept_rate / static_cast<double>(chains.size());
    }

    const PanelData& p = validated.panel;
    std::ofstream long_out;
    EffectSink sink;
    if (options.long_effects)
    {
        long_out.open(options.out / "effects_long.csv", std::ios::binary | std::ios::trunc);
        long_out << "draw,t,unit_id,direct,indirect,total,share\n";
        sink = [&](std::size_t d, Index t, Index i, double dir, double ind, double tot, double share) {
            long_out << d + 1 << ',' << t + 1 << ',' << p.unit_ids[static_cast<std::size_t>(i)] << ',' << format_number(dir)
                     << ',' << format_number(ind) << ',' << format_number(tot) << ',' << format_number(share) << '\n';
        };
    }
    result.summary = aggregate_draws(result.draws, p, validated.weights, validated.config.impact_covariate, 0.99, sink);
    if (long_out.is_open())
        long_out.close();
    const ImpactSummary& s = result.summary;

    const std::string label = validated.config.variant.empty() ? "custom" : validated.config.variant;
    std::ostringstream summary;
    const auto& header = summary_header();
    for (std::size_t c = 0; c < header.size(); ++c)
        summary << (c ? "," : "") << header[c];
    summary << '\n' << summary_row(label, s) << '\n';
    io::write_text(options.out / "summary.csv", summary.str());

    std::ostringstream time_fx;
    time_fx << "date,direct,direct_lo,direct_hi,indirect,indirect_lo,indirect_hi,total,total_lo,total_hi,network_pct,"
               "network_pct_lo,network_pct_hi\n";
    for (std::size_t t = 0; t < s.by_period.size(); ++t)
    {
        const auto& pr = s.by_period[t];
        time_fx << format_date(p.event_dates[t]) << ',' << band_cells(pr.direct) << ',' << band_cells(pr.indirect) << ','
                << band_cells(pr.total) << ',' << band_cells(pr.share_pct) << '\n';
    }
    io::write_text(options.out / "time_effects.csv", time_fx.str());

    std::ostringstream rho;
    rho << "date,rho,rho_lo,rho_hi,accept_rate\n";
    for (std::size_t t = 0; t < s.rho_by_period.size(); ++t)
        rho << format_date(p.event_dates[t]) << ',' << band_cells(s.rho_by_period[t]) << ','
            << format_number(result.draws.rho_accept_rate.size() > 0
                                 ? result.draws.rho_accept_rate(static_cast<Index>(t))
                                 : std::numeric_limits<double>::quiet_NaN())
            << '\n';
    io::write_text(options.out / "rho_summary.csv", rho.str());

    std::ostringstream heat;
    heat << "unit_id,date,direct,indirect,total\n";
    for (Index i = 0; i < p.units(); ++i)
        for (Index t = 0; t < p.periods(); ++t)
            heat << p.unit_ids[static_cast<std::size_t>(i)] << ',' << format_date(p.event_dates[static_cast<std::size_t>(t)])
                 << ',' << format_number(s.median_direct(i, t)) << ','
                 << (s.network ? format_number(s.median_indirect(i, t)) : std::string()) << ','
                 << format_number(s.median_total(i, t)) << '\n';
    io::write_text(options.out / "heatmap.csv", heat.str());

    std::ostringstream cl;
    cl << "draw,unit_id,total,network_pct\n";
    for (std::size_t d = 0; d < s.cluster_inputs.size(); ++d)
        for (Index i = 0; i < p.units(); ++i)
            cl << d + 1 << ',' << p.unit_ids[static_cast<std::size_t>(i)] << ','
               << format_number(s.cluster_inputs[d](i, 0)) << ',' << format_number(s.cluster_inputs[d](i, 1)) << '\n';
    io::write_text(options.out / "cluster_inputs.csv", cl.str());

    io::RunConfig snapshot = cfg;
    snapshot.model = validated.config;
    write_run_manifest(options.out, "estimate",
                       {{"config", io::format_config(snapshot)},
                        {"seed", validated.config.chain.seed},
                        {"chains", options.chains},
                        {"retained_draws", result.draws.draws.size()},
                        {"warnings", result.warnings}},
                       inputs, start);
    return result;
}

void cmd_cluster(const ClusterOptionsCli& options)
{
    const auto start = Clock::now();
    const fs::path input = options.run / "cluster_inputs.csv";
    const io::CsvTable csv = io::read_csv(input);
    const Index c_draw = csv.column("draw"), c_unit = csv.column("unit_id"), c_total = csv.column("total"),
                c_share = csv.column("network_pct");
    std::vector<std::string> units;
    std::map<int, std::vector<std::pair<double, double>>> by_draw;
    for (std::size_t r = 0; r < csv.rows.size(); ++r)
    {
        const int d = csv.integer(r, c_draw);
        const auto& id = csv.rows[r][static_cast<std::size_t>(c_unit)];
        auto& rows = by_draw[d];
        if (by_draw.size() == 1)
            units.push_back(id);
        else if (rows.size() >= units.size() || units[rows.size()] != id)
            throw ValidationError(csv.where(r) + ": unit order differs from the first draw");
        const auto& share_cell = csv.rows[r][static_cast<std::size_t>(c_share)];
        rows.emplace_back(csv.number(r, c_total),
                          share_cell.empty() ? std::numeric_limits<double>::quiet_NaN() : csv.number(r, c_share));
    }
    if (by_draw.empty())
        throw ValidationError(input.string() + ": no draws");
    std::vector<Eigen::MatrixXd> pairs;
    for (const auto& [d, rows] : by_draw)
    {
        if (rows.size() != units.size())
            throw ValidationError(input.string() + ": draw " + std::to_string(d) + " has " + std::to_string(rows.size()) +
                                  " units, expected " + std::to_string(units.size()));
        Eigen::MatrixXd m(static_cast<Index>(rows.size()), 2);
        for (std::size_t i = 0; i < rows.size(); ++i)
        {
            m(static_cast<Index>(i), 0) = rows[i].first;
            m(static_cast<Index>(i), 1) = rows[i].second;
        }
        pairs.push_back(std::move(m));
    }

    ClusterOptions co;
    co.k_fixed = options.k_fixed;
    co.k_max = options.k_max;
    co.seed = options.seed;
    co.standardize = options.standardize;
    const ClusterRun run = cluster_posterior(pairs, co);

    prepare_output(options.out, options.force);
    std::ostringstream kd;
    kd << "k,probability_pct\n";
    for (const auto& [k, prob] : run.k_distribution)
        kd << k << ',' << format_number(100.0 * prob) << '\n';
    io::write_text(options.out / "k_distribution.csv", kd.str());

    std::ostringstream inc;
    inc << "unit_id";
    for (int c = 1; c <= options.k_fixed; ++c)
        inc << ",cluster_" << c;
    inc << '\n';
    for (std::size_t i = 0; i < units.size(); ++i)
    {
        inc << units[i];
        for (int c = 0; c < options.k_fixed; ++c)
            inc << ',' << format_number(run.inclusion_prob(static_cast<Index>(i), c));
        inc << '\n';
    }
    io::write_text(options.out / "inclusion.csv", inc.str());

    std::ostringstream centers;
    centers << "draw,cluster,total,network_pct\n";
    for (std::size_t d = 0; d < run.centers.size(); ++d)
        for (Index c = 0; c < run.centers[d].rows(); ++c)
            centers << d + 1 << ',' << c + 1 << ',' << format_number(run.centers[d](c, 0)) << ','
                    << format_number(run.centers[d](c, 1)) << '\n';
    io::write_text(options.out / "centers.csv", centers.str());

    write_run_manifest(options.out, "cluster",
                       {{"k_fixed", options.k_fixed},
                        {"k_max", options.k_max},
                        {"seed", options.seed},
                        {"standardize", options.standardize},
                        {"used_draws", run.used_draws},
                        {"skipped_draws", run.skipped_draws}},
                       {input}, start);
}

void cmd_report(const ReportOptions& options)
{
    const auto start = Clock::now();
    if (options.runs.empty())
        throw ValidationError("report needs at least one run directory");
    struct Row
    {
        int rank;
        std::size_t order;
        std::vector<std::string> cells;
    };
    std::vector<Row> rows;
    std::vector<fs::path> inputs;
    for (std::size_t r = 0; r < options.runs.size(); ++r)
    {
        const fs::path path = options.runs[r] / "summary.csv";
        const io::CsvTable csv = io::read_csv(path);
        if (csv.header != summary_header())
            throw ValidationError(path.string() + ":1: not a summary table");
        inputs.push_back(path);
        for (const auto& cells : csv.rows)
            rows.push_back({ModelConfig::variant_rank(cells[0]), rows.size(), cells});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.rank < b.rank; });

    prepare_output(options.out, options.force);
    std::ostringstream csv_out, txt;
    const auto& header = summary_header();
    for (std::size_t c = 0; c < header.size(); ++c)
        csv_out << (c ? "," : "") << header[c];
    csv_out << '\n';

    const std::vector<std::string> titles{"alpha", "beta", "sigma^2", "rho", "Indirect", "Direct", "Total", "Netw. (%)"};
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-8s", "");
    txt << buf;
    for (const auto& t : titles)
    {
        std::snprintf(buf, sizeof buf, "%18s", t.c_str());
        txt << buf;
    }
    txt << '\n';
    auto cell_value = [](const std::string& cell) {
        return cell.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(cell);
    };
    for (const auto& row : rows)
    {
        for (std::size_t c = 0; c < row.cells.size(); ++c)
            csv_out << (c ? "," : "") << row.cells[c];
        csv_out << '\n';
        std::string medians, bands;
        for (std::size_t g = 0; g < titles.size(); ++g)
        {
            const int digits = g == 7 ? 1 : 2;
            const double med = cell_value(row.cells[1 + 3 * g]);
            const double lo = cell_value(row.cells[2 + 3 * g]);
            const double hi = cell_value(row.cells[3 + 3 * g]);
            std::snprintf(buf, sizeof buf, "%18s", fixed(med, digits).c_str());
            medians += buf;
            const std::string band = std::isnan(lo) ? std::string() : "(" + fixed(lo, digits) + ", " + fixed(hi, digits) + ")";
            std::snprintf(buf, sizeof buf, "%18s", band.c_str());
            bands += buf;
        }
        std::snprintf(buf, sizeof buf, "%-8s", row.cells[0].c_str());
        txt << buf << medians << '\n';
        std::snprintf(buf, sizeof buf, "%-8s", "");
        txt << buf << bands << '\n';
    }
    io::write_text(options.out / "report.csv", csv_out.str());
    io::write_text(options.out / "report.txt", txt.str());
    write_run_manifest(options.out, "report", {{"runs", rows.size()}}, inputs, start);
}

void cmd_shocks(const ShocksOptions& options)
{
    const auto start = Clock::now();
    const auto rows = io::read_shocks(options.input);
    std::ostringstream out;
    out << "date,shock\n";
    for (std::size_t r = 0; r < rows.size(); ++r)
    {
        double v = 0.0;
        try
        {
            v = policy_shock(rows[r].second);
        }
        catch (const ValidationError& e)
        {
            throw ValidationError(options.input.string() + ": row " + std::to_string(r + 1) + " (" +
                                  format_date(rows[r].first) + "): " + e.what());
        }
        out << format_date(rows[r].first) << ',' << format_number(v) << '\n';
    }
    prepare_output(options.out, options.force);
    io::write_text(options.out / "shocks.csv", out.str());
    write_run_manifest(options.out, "shocks", {{"events", rows.size()}}, {options.input}, start);
}

void cmd_correlate(const CorrelateOptions& options)
{
    const auto start = Clock::now();
    if (options.series.size() < 2)
        throw ValidationError("correlate needs at least two label=path series");
    std::vector<std::string> labels;
    std::vector<std::vector<DatedValue>> raw;
    std::vector<fs::path> inputs;
    for (const auto& spec : options.series)
    {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ValidationError("series '" + spec + "' is not of the form label=path");
        labels.push_back(spec.substr(0, eq));
        const fs::path path = spec.substr(eq + 1);
        raw.push_back(io::read_index(path));
        inputs.push_back(path);
    }

    std::vector<Date> dates;
    std::vector<Eigen::VectorXd> series;
    if (options.events)
    {
        const io::CsvTable ev = io::read_csv(*options.events);
        const Index c_date = ev.column("date");
        for (std::size_t r = 0; r < ev.rows.size(); ++r)
            dates.push_back(ev.date(r, c_date));
        inputs.push_back(*options.events);
        for (const auto& s : raw)
            series.push_back(match_to_events(monthly_means(s), dates));
    }
    else
    {
        for (const auto& v : raw.front())
            dates.push_back(v.date);
        for (std::size_t s = 0; s < raw.size(); ++s)
        {
            if (raw[s].size() != dates.size())
                throw ValidationError("series '" + labels[s] + "' has a different length; pass --events to align by month");
            Eigen::VectorXd x(static_cast<Index>(dates.size()));
            for (std::size_t i = 0; i < dates.size(); ++i)
            {
                if (raw[s][i].date != dates[i])
                    throw ValidationError("series '" + labels[s] + "' dates differ from '" + labels[0] +
                                          "'; pass --events to align by month");
                x(static_cast<Index>(i)) = raw[s][i].value;
            }
            series.push_back(std::move(x));
        }
    }

    const CorrelationTable table = correlation_table(series, labels);
    prepare_output(options.out, options.force);
    std::ostringstream corr;
    corr << "row,col,r,p,stars\n";
    for (Index i = 0; i < table.r.rows(); ++i)
        for (Index j = 0; j < table.r.cols(); ++j)
            corr << labels[static_cast<std::size_t>(i)] << ',' << labels[static_cast<std::size_t>(j)] << ','
                 << format_number(table.r(i, j)) << ',' << format_number(table.p(i, j)) << ',' << table.stars(i, j)
                 << '\n';
    io::write_text(options.out / "correlation.csv", corr.str());

    std::ostringstream norm;
    norm << "date";
    for (const auto& l : labels)
        norm << ',' << l;
    norm << '\n';
    std::vector<Eigen::VectorXd> scaled;
    for (const auto& s : series)
        scaled.push_back(unit_normalize(s));
    for (std::size_t i = 0; i < dates.size(); ++i)
    {
        norm << format_date(dates[i]);
        for (const auto& s : scaled)
            norm << ',' << format_number(s(static_cast<Index>(i)));
        norm << '\n';
    }
    io::write_text(options.out / "normalized.csv", norm.str());
    write_run_manifest(options.out, "correlate", {{"series", labels}}, inputs, start);
}

} // namespace netpanel::cli
