#include <iostream>

#include "CLI11.hpp"

#include "netpanel/commands.hpp"

using namespace netpanel;

int main(int argc, char** argv)
{
    CLI::App app{"Bayesian network panel estimation of shock propagation"};
    app.require_subcommand(1);

    cli::WeightsOptions weights;
    auto* w = app.add_subcommand("weights", "build row-stochastic network matrices from make/use tables");
    w->add_option("manifest", weights.manifest, "vintage manifest (vintage,make,use,effective_from)")->required();
    w->add_option("--out", weights.out)->required();
    w->add_flag("--force", weights.force);

    cli::SimulateOptions sim;
    auto* s = app.add_subcommand("simulate", "simulate a panel, network and truth record");
    s->add_option("--out", sim.out)->required();
    s->add_option("--seed", sim.seed);
    s->add_option("--units", sim.n);
    s->add_option("--periods", sim.t);
    s->add_option("--network", sim.network)->check(CLI::IsMember({"random", "ring"}));
    s->add_option("--vintages", sim.vintages);
    s->add_flag("--force", sim.force);

    cli::EstimateOptions est;
    auto* e = app.add_subcommand("estimate", "run the sampler and summarize impacts");
    e->add_option("--config", est.config, "key = value model configuration");
    e->add_option("--data", est.data, "directory with panel.csv and weights.csv")->required();
    e->add_option("--out", est.out)->required();
    e->add_option("--seed", est.seed);
    e->add_option("--variant", est.variant, "A1, A2, B1..B4, C1..C5");
    e->add_option("--chains", est.chains);
    e->add_option("--burn-in", est.burn_in);
    e->add_option("--keep", est.keep);
    e->add_option("--thin", est.thin);
    e->add_flag("--long", est.long_effects, "also write per-draw effects in long format");
    e->add_flag("--force", est.force);

    cli::ClusterOptionsCli cl;
    auto* c = app.add_subcommand("cluster", "cluster units on posterior total and network effects");
    c->add_option("run", cl.run, "estimate output directory")->required();
    c->add_option("--out", cl.out)->required();
    c->add_option("--seed", cl.seed);
    c->add_option("--k", cl.k_fixed);
    c->add_option("--k-max", cl.k_max);
    c->add_flag("--standardize", cl.standardize);
    c->add_flag("--force", cl.force);

    cli::ReportOptions rep;
    auto* r = app.add_subcommand("report", "merge run summaries into one comparison table");
    r->add_option("runs", rep.runs, "estimate output directories")->required();
    r->add_option("--out", rep.out)->required();
    r->add_flag("--force", rep.force);

    cli::ShocksOptions sh;
    auto* k = app.add_subcommand("shocks", "policy surprises from futures rates around announcements");
    k->add_option("input", sh.input, "CSV with date,ff_pre,ff_post,days_in_month,day_of_meeting")->required();
    k->add_option("--out", sh.out)->required();
    k->add_flag("--force", sh.force);

    cli::CorrelateOptions co;
    auto* q = app.add_subcommand("correlate", "correlation table of index series");
    q->add_option("series", co.series, "label=path pairs")->required();
    q->add_option("--events", co.events, "CSV with a date column to align monthly means to");
    q->add_option("--out", co.out)->required();
    q->add_flag("--force", co.force);

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*w)
            cli::cmd_weights(weights);
        else if (*s)
            cli::cmd_simulate(sim);
        else if (*e)
        {
            const auto result = cli::cmd_estimate(est);
            if (!result.warnings.empty())
                std::cerr << "warning: " << result.warnings.size()
                          << " sampler diagnostics flagged; see run_manifest.json\n";
        }
        else if (*c)
            cli::cmd_cluster(cl);
        else if (*r)
            cli::cmd_report(rep);
        else if (*k)
            cli::cmd_shocks(sh);
        else if (*q)
            cli::cmd_correlate(co);
    }
    catch (const ValidationError& err)
    {
        std::cerr << "validation failed:\n";
        for (const auto& issue : err.issues())
            std::cerr << "  " << issue << '\n';
        return 2;
    }
    catch (const NumericalError& err)
    {
        std::cerr << "numerical abort: " << err.what() << '\n';
        return 3;
    }
    catch (const std::exception& err)
    {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
    return 0;
}
