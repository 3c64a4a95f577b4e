#include "doctest.h"

#include <sstream>

#include "fixtures.hpp"
#include "netpanel/commands.hpp"
#include "netpanel/io.hpp"

using namespace netpanel;
namespace fs = std::filesystem;

namespace {

const fs::path& simulated()
{
    static const fs::path dir = [] {
        const fs::path d = fixtures::scratch("cmd_sim");
        cli::cmd_simulate({d, 6, 12, 3, "random", 2, true});
        return d;
    }();
    return dir;
}

cli::EstimateOptions quick(const std::string& variant, const fs::path& out)
{
    cli::EstimateOptions o;
    o.data = simulated();
    o.out = out;
    o.variant = variant;
    o.burn_in = 40;
    o.keep = 80;
    o.thin = 2;
    o.seed = 7;
    o.force = true;
    return o;
}

std::vector<std::string> lines(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);)
        out.push_back(l);
    return out;
}

} // namespace

TEST_CASE("simulate writes a panel, weights and truth that read back")
{
    const fs::path d = simulated();
    for (const char* f : {"panel.csv", "weights.csv", "W_1.csv", "W_2.csv", "truth.json", "run_manifest.json"})
        CHECK(fs::exists(d / f));
    const PanelData p = io::read_panel(d / "panel.csv");
    CHECK(p.units() == 6);
    CHECK(p.periods() == 12);
    CHECK_NOTHROW(validate_inputs(p, io::read_weights(d / "weights.csv", p.unit_ids), ModelConfig::from_variant("C5")));
}

TEST_CASE("estimate without a network leaves the network columns empty")
{
    const fs::path out = fixtures::scratch("cmd_b1");
    const auto result = cli::cmd_estimate(quick("B1", out));
    CHECK(result.draws.draws.size() == 40);
    const auto csv = io::read_csv(out / "summary.csv");
    REQUIRE(csv.rows.size() == 1);
    CHECK(csv.rows[0][0] == "B1");
    for (const char* col : {"rho", "indirect", "indirect_lo", "network_pct", "network_pct_hi"})
        CHECK(csv.rows[0][static_cast<std::size_t>(csv.column(col))].empty());
    CHECK_FALSE(csv.rows[0][static_cast<std::size_t>(csv.column("total"))].empty());
    for (const char* f : {"draws/manifest.json", "time_effects.csv", "heatmap.csv", "cluster_inputs.csv", "run_manifest.json"})
        CHECK(fs::exists(out / f));
    CHECK_FALSE(fs::exists(out / "effects_long.csv"));
}

TEST_CASE("unknown variants and missing inputs are validation errors")
{
    const fs::path out = fixtures::scratch("cmd_bad");
    CHECK_THROWS_WITH_AS(cli::cmd_estimate(quick("D7", out)), doctest::Contains("C5"), ValidationError);
    auto o = quick("C5", out);
    o.data = fixtures::scratch("cmd_empty");
    CHECK_THROWS_AS(cli::cmd_estimate(o), ValidationError);
    o = quick("C5", out);
    o.chains = 0;
    CHECK_THROWS_AS(cli::cmd_estimate(o), ValidationError);
}

TEST_CASE("existing output is never overwritten without force")
{
    const fs::path out = fixtures::scratch("cmd_force");
    fixtures::write_file(out / "keep.txt", "precious");
    auto o = quick("B2", out);
    o.force = false;
    CHECK_THROWS_AS(cli::cmd_estimate(o), std::runtime_error);
    CHECK(fixtures::read_file(out / "keep.txt") == "precious");
    o.force = true;
    CHECK_NOTHROW(cli::cmd_estimate(o));
    CHECK_FALSE(fs::exists(out / "keep.txt"));
}

TEST_CASE("chains, long effects and a config file")
{
    const fs::path dir = fixtures::scratch("cmd_cfg");
    fixtures::write_file(dir / "run.cfg", "variant = C4\nchain.burn_in = 30\nchain.keep = 40\nchain.thin = 2\nchain.seed = 4\n");
    cli::EstimateOptions o;
    o.config = dir / "run.cfg";
    o.data = simulated();
    o.out = dir / "out";
    o.chains = 2;
    o.long_effects = true;
    const auto result = cli::cmd_estimate(o);
    CHECK(result.draws.draws.size() == 40);
    CHECK(fs::exists(o.out / "chain_1" / "draws" / "manifest.json"));
    CHECK(fs::exists(o.out / "chain_2" / "draws" / "manifest.json"));
    const auto long_rows = lines(fixtures::read_file(o.out / "effects_long.csv"));
    CHECK(long_rows.size() == 1 + 40 * 12 * 6);
    CHECK(io::read_csv(o.out / "summary.csv").rows[0][0] == "C4");
}

TEST_CASE("report orders models like the comparison table and copies single rows")
{
    const fs::path root = fixtures::scratch("cmd_report");
    cli::cmd_estimate(quick("C5", root / "c5"));
    cli::cmd_estimate(quick("B1", root / "b1"));
    cli::cmd_estimate(quick("B4", root / "b4"));
    cli::cmd_report({{root / "c5", root / "b1", root / "b4"}, root / "all", false});
    const auto rows = io::read_csv(root / "all" / "report.csv").rows;
    REQUIRE(rows.size() == 3);
    CHECK(rows[0][0] == "B1");
    CHECK(rows[1][0] == "B4");
    CHECK(rows[2][0] == "C5");
    CHECK(fs::exists(root / "all" / "report.txt"));

    cli::cmd_report({{root / "b4"}, root / "one", false});
    CHECK(fixtures::read_file(root / "one" / "report.csv") == fixtures::read_file(root / "b4" / "summary.csv"));
    CHECK_THROWS_AS(cli::cmd_report({{root / "one"}, root / "bad", false}), ValidationError);
}

TEST_CASE("cluster reads an estimate run")
{
    const fs::path root = fixtures::scratch("cmd_cluster");
    cli::cmd_estimate(quick("B4", root / "run"));
    cli::cmd_cluster({root / "run", root / "clusters", 2, 4, 1, false, false});
    const auto kd = io::read_csv(root / "clusters" / "k_distribution.csv");
    double total = 0.0;
    for (std::size_t r = 0; r < kd.rows.size(); ++r)
        total += kd.number(r, kd.column("probability_pct"));
    CHECK(total == doctest::Approx(100.0));
    const auto inc = io::read_csv(root / "clusters" / "inclusion.csv");
    CHECK(inc.rows.size() == 6);
    CHECK(fs::exists(root / "clusters" / "centers.csv"));

    cli::cmd_estimate(quick("B2", root / "plain"));
    CHECK_THROWS_AS(cli::cmd_cluster({root / "plain", root / "c2", 2, 4, 1, false, false}), ValidationError);
}

TEST_CASE("weights command on a two-industry fixture")
{
    const fs::path dir = fixtures::scratch("cmd_weights");
    fixtures::write_file(dir / "make.csv", "industry_id,c1,c2\na,2,0\nb,2,4\n");
    fixtures::write_file(dir / "use.csv", "commodity_id,a,b\nc1,2,2\nc2,2,0\n");
    fixtures::write_file(dir / "io.csv", "vintage,make,use,effective_from\n1997,make.csv,use.csv,\n");
    cli::cmd_weights({dir / "io.csv", dir / "out", false});
    const auto w = io::read_weight_matrix(dir / "out" / "W_1.csv", {"a", "b"});
    CHECK(w(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(w(1, 1) == doctest::Approx(0.4).epsilon(1e-15));
    const auto sums = io::read_csv(dir / "out" / "row_sums.csv");
    CHECK(sums.number(0, sums.column("raw_row_sum")) == 0.75);
    CHECK(fs::exists(dir / "out" / "weights.csv"));
}

TEST_CASE("shocks and correlation commands")
{
    const fs::path dir = fixtures::scratch("cmd_shocks");
    fixtures::write_file(dir / "ff.csv", "date,ff_pre,ff_post,days_in_month,day_of_meeting\n"
                                         "2001-01-10,4.00,4.05,30,10\n2001-03-30,3.10,3.00,31,30\n");
    cli::cmd_shocks({dir / "ff.csv", dir / "out", false});
    const auto s = io::read_csv(dir / "out" / "shocks.csv");
    CHECK(s.number(0, s.column("shock")) == doctest::Approx(0.075));
    CHECK(s.number(1, s.column("shock")) == doctest::Approx(-3.1));

    fixtures::write_file(dir / "a.csv", "date,value\n2001-01-01,1\n2001-02-01,2\n2001-03-01,4\n2001-04-01,3\n");
    fixtures::write_file(dir / "b.csv", "date,value\n2001-01-01,2\n2001-02-01,4\n2001-03-01,8\n2001-04-01,6\n");
    cli::cmd_correlate({{"a=" + (dir / "a.csv").string(), "b=" + (dir / "b.csv").string()}, std::nullopt, dir / "corr", false});
    const auto c = io::read_csv(dir / "corr" / "correlation.csv");
    bool found = false;
    for (std::size_t r = 0; r < c.rows.size(); ++r)
        if (c.rows[r][0] == "a" && c.rows[r][1] == "b")
        {
            found = true;
            CHECK(c.number(r, c.column("r")) == doctest::Approx(1.0));
        }
    CHECK(found);
    CHECK(fs::exists(dir / "corr" / "normalized.csv"));
}
