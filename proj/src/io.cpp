#include "netpanel/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "json.hpp"

namespace netpanel::io {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "draw bundles are written in little-endian order");

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true)
    {
        const auto comma = line.find(',', start);
        cells.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return cells;
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError(path.string() + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

[[noreturn]] void fail(const fs::path& path, std::size_t line, const std::string& message)
{
    throw ValidationError(path.string() + ":" + std::to_string(line) + ": " + message);
}

double parse_number(std::string_view text, bool& ok)
{
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    ok = ec == std::errc{} && ptr == text.data() + text.size() && !text.empty();
    return value;
}

} // namespace

Index CsvTable::column(std::string_view name) const
{
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
        fail(path, 1, "missing column '" + std::string(name) + "'");
    return static_cast<Index>(std::distance(header.begin(), it));
}

std::string CsvTable::where(std::size_t row) const
{
    return path.string() + ":" + std::to_string(lines[row]);
}

double CsvTable::number(std::size_t row, Index col) const
{
    const auto& cell = rows[row][static_cast<std::size_t>(col)];
    bool ok = false;
    const double v = parse_number(cell, ok);
    if (!ok)
        fail(path, lines[row], "column '" + header[static_cast<std::size_t>(col)] + "': cannot parse '" + cell +
                                   "' as a number");
    return v;
}

int CsvTable::integer(std::size_t row, Index col) const
{
    const auto& cell = rows[row][static_cast<std::size_t>(col)];
    int v = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty())
        fail(path, lines[row], "column '" + header[static_cast<std::size_t>(col)] + "': cannot parse '" + cell +
                                   "' as an integer");
    return v;
}

Date CsvTable::date(std::size_t row, Index col) const
{
    try
    {
        return parse_date(rows[row][static_cast<std::size_t>(col)]);
    }
    catch (const ValidationError& e)
    {
        fail(path, lines[row], "column '" + header[static_cast<std::size_t>(col)] + "': " + e.what());
    }
}

CsvTable read_csv(const fs::path& path)
{
    std::istringstream in(read_file(path));
    CsvTable table;
    table.path = path;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line))
    {
        ++number;
        if (trim(line).empty())
            continue;
        auto cells = split(line);
        if (table.header.empty())
        {
            table.header = std::move(cells);
            continue;
        }
        if (cells.size() != table.header.size())
            fail(path, number, "expected " + std::to_string(table.header.size()) + " cells, found " +
                                   std::to_string(cells.size()));
        table.rows.push_back(std::move(cells));
        table.lines.push_back(number);
    }
    if (table.header.empty())
        fail(path, 1, "file is empty");
    return table;
}

std::string format_number(double x)
{
    if (std::isnan(x))
        return {};
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error(path.string() + ": cannot write file");
        out << text;
    }
    fs::rename(tmp, path);
}

PanelData read_panel(const fs::path& path, bool common_shock)
{
    const CsvTable csv = read_csv(path);
    const Index c_unit = csv.column("unit_id");
    const Index c_date = csv.column("date");
    const Index c_y = csv.column("y");
    std::vector<Index> c_x;
    for (int k = 1;; ++k)
    {
        const auto it = std::find(csv.header.begin(), csv.header.end(), "x" + std::to_string(k));
        if (it == csv.header.end())
            break;
        c_x.push_back(static_cast<Index>(std::distance(csv.header.begin(), it)));
    }
    if (c_x.empty())
        fail(path, 1, "need at least one covariate column x1");

    PanelData panel;
    panel.common_shock = common_shock;
    std::map<std::string, Index> unit_pos;
    std::set<Date> date_set;
    for (std::size_t r = 0; r < csv.rows.size(); ++r)
    {
        const auto& id = csv.rows[r][static_cast<std::size_t>(c_unit)];
        if (id.empty())
            fail(path, csv.lines[r], "empty unit_id");
        if (unit_pos.emplace(id, static_cast<Index>(panel.unit_ids.size())).second)
            panel.unit_ids.push_back(id);
        date_set.insert(csv.date(r, c_date));
    }
    panel.event_dates.assign(date_set.begin(), date_set.end());
    const auto n = static_cast<Index>(panel.unit_ids.size());
    const auto t_len = static_cast<Index>(panel.event_dates.size());
    if (csv.rows.size() != static_cast<std::size_t>(n * t_len))
        fail(path, 1, "unbalanced panel: " + std::to_string(csv.rows.size()) + " rows for " + std::to_string(n) +
                          " units and " + std::to_string(t_len) + " dates");

    const double nan = std::numeric_limits<double>::quiet_NaN();
    panel.responses = Eigen::MatrixXd::Constant(n, t_len, nan);
    panel.covariates.assign(c_x.size(), Eigen::MatrixXd::Constant(n, t_len, nan));
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> seen = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, t_len);
    for (std::size_t r = 0; r < csv.rows.size(); ++r)
    {
        const Index i = unit_pos.at(csv.rows[r][static_cast<std::size_t>(c_unit)]);
        const Date d = csv.date(r, c_date);
        const auto t = static_cast<Index>(std::distance(date_set.begin(), date_set.find(d)));
        if (seen(i, t))
            fail(path, csv.lines[r], "duplicate row for unit '" + panel.unit_ids[static_cast<std::size_t>(i)] +
                                         "' on " + format_date(d));
        seen(i, t) = true;
        panel.responses(i, t) = csv.number(r, c_y);
        for (std::size_t k = 0; k < c_x.size(); ++k)
            panel.covariates[k](i, t) = csv.number(r, c_x[k]);
    }
    return panel;
}

void write_panel(const fs::path& path, const PanelData& panel)
{
    std::ostringstream out;
    out << "unit_id,date,y";
    for (Index k = 1; k <= panel.covariate_count(); ++k)
        out << ",x" << k;
    out << '\n';
    for (Index i = 0; i < panel.units(); ++i)
        for (Index t = 0; t < panel.periods(); ++t)
        {
            out << panel.unit_ids[static_cast<std::size_t>(i)] << ',' << format_date(panel.event_dates[static_cast<std::size_t>(t)])
                << ',' << format_number(panel.responses(i, t));
            for (const auto& x : panel.covariates)
                out << ',' << format_number(x(i, t));
            out << '\n';
        }
    write_text(path, out.str());
}

Eigen::MatrixXd read_weight_matrix(const fs::path& path, const std::vector<std::string>& unit_ids)
{
    const CsvTable csv = read_csv(path);
    const auto n = static_cast<Index>(unit_ids.size());
    if (csv.header.empty() || csv.header[0] != "unit_id")
        fail(path, 1, "first column must be unit_id");
    if (static_cast<Index>(csv.header.size()) != n + 1 || static_cast<Index>(csv.rows.size()) != n)
        fail(path, 1, "dimension mismatch: expected " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
    for (Index j = 0; j < n; ++j)
        if (csv.header[static_cast<std::size_t>(j + 1)] != unit_ids[static_cast<std::size_t>(j)])
            fail(path, 1, "column " + std::to_string(j + 1) + " is '" + csv.header[static_cast<std::size_t>(j + 1)] +
                              "', expected unit '" + unit_ids[static_cast<std::size_t>(j)] + "'");
    Eigen::MatrixXd w(n, n);
    for (Index i = 0; i < n; ++i)
    {
        const auto r = static_cast<std::size_t>(i);
        if (csv.rows[r][0] != unit_ids[r])
            fail(path, csv.lines[r], "row unit '" + csv.rows[r][0] + "', expected '" + unit_ids[r] + "'");
        for (Index j = 0; j < n; ++j)
            w(i, j) = csv.number(r, j + 1);
    }
    return w;
}

void write_weight_matrix(const fs::path& path, const Eigen::MatrixXd& w, const std::vector<std::string>& unit_ids)
{
    std::ostringstream out;
    out << "unit_id";
    for (const auto& id : unit_ids)
        out << ',' << id;
    out << '\n';
    for (Index i = 0; i < w.rows(); ++i)
    {
        out << unit_ids[static_cast<std::size_t>(i)];
        for (Index j = 0; j < w.cols(); ++j)
            out << ',' << format_number(w(i, j));
        out << '\n';
    }
    write_text(path, out.str());
}

WeightSequence read_weights(const fs::path& manifest, const std::vector<std::string>& unit_ids)
{
    const CsvTable csv = read_csv(manifest);
    const Index c_from = csv.column("effective_from");
    const Index c_file = csv.column("file");
    WeightSequence seq;
    seq.unit_ids = unit_ids;
    for (std::size_t r = 0; r < csv.rows.size(); ++r)
    {
        const fs::path file = manifest.parent_path() / csv.rows[r][static_cast<std::size_t>(c_file)];
        const Eigen::MatrixXd raw = read_weight_matrix(file, unit_ids);
        if ((raw.array() < 0.0).any())
            fail(file, 1, "weight matrix has negative entries");
        seq.entries.push_back({csv.date(r, c_from), normalize_rows(raw)});
    }
    return seq;
}

void write_weights(const fs::path& dir, const WeightSequence& weights)
{
    std::ostringstream manifest;
    manifest << "effective_from,file\n";
    for (std::size_t v = 0; v < weights.entries.size(); ++v)
    {
        const std::string name = "W_" + std::to_string(v + 1) + ".csv";
        write_weight_matrix(dir / name, weights.entries[v].matrix, weights.unit_ids);
        manifest << format_date(weights.entries[v].effective_from) << ',' << name << '\n';
    }
    write_text(dir / "weights.csv", manifest.str());
}

namespace {

struct LabeledMatrix
{
    Eigen::MatrixXd values;
    std::vector<std::string> row_ids;
    std::vector<std::string> col_ids;
};

LabeledMatrix read_labeled(const fs::path& path, const char* row_key)
{
    const CsvTable csv = read_csv(path);
    if (csv.header[0] != row_key)
        fail(path, 1, std::string("first column must be ") + row_key);
    LabeledMatrix m;
    m.col_ids.assign(csv.header.begin() + 1, csv.header.end());
    m.values.resize(static_cast<Index>(csv.rows.size()), static_cast<Index>(m.col_ids.size()));
    for (std::size_t r = 0; r < csv.rows.size(); ++r)
    {
        m.row_ids.push_back(csv.rows[r][0]);
        for (Index c = 0; c < m.values.cols(); ++c)
        {
            m.values(static_cast<Index>(r), c) = csv.number(r, c + 1);
            if (m.values(static_cast<Index>(r), c) < 0.0)
                fail(path, csv.lines[r], "column '" + csv.header[static_cast<std::size_t>(c + 1)] + "': negative flow");
        }
    }
    return m;
}

} // namespace

IoTables read_io_tables(const fs::path& make, const fs::path& use, std::string vintage)
{
    const LabeledMatrix mk = read_labeled(make, "industry_id");
    const LabeledMatrix us = read_labeled(use, "commodity_id");
    if (us.col_ids != mk.row_ids)
        fail(use, 1, "industry columns do not match the make table's industry rows");
    if (us.row_ids != mk.col_ids)
        fail(use, 1, "commodity rows do not match the make table's commodity columns");
    IoTables t;
    t.make = mk.values;
    t.use = us.values;
    t.industry_ids = mk.row_ids;
    t.commodity_ids = mk.col_ids;
    t.vintage = std::move(vintage);
    return t;
}

IoManifest read_io_manifest(const fs::path& manifest)
{
    const CsvTable csv = read_csv(manifest);
    const Index c_v = csv.column("vintage");
    const Index c_make = csv.column("make");
    const Index c_use = csv.column("use");
    const Index c_from = csv.column("effective_from");
    IoManifest out;
    const fs::path base = manifest.parent_path();
    for (std::size_t r = 0; r < csv.rows.size(); ++r)
    {
        const auto& row = csv.rows[r];
        out.vintages.push_back(read_io_tables(base / row[static_cast<std::size_t>(c_make)],
                                              base / row[static_cast<std::size_t>(c_use)],
                                              row[static_cast<std::size_t>(c_v)]));
        if (r > 0)
        {
            if (row[static_cast<std::size_t>(c_from)].empty())
                fail(manifest, csv.lines[r], "vintage after the first needs an effective_from date");
            out.cutovers.push_back(csv.date(r, c_from));
        }
    }
    if (out.vintages.empty())
        fail(manifest, 1, "no vintages listed");
    return out;
}

RunConfig parse_config(const std::string& text, const std::string& origin)
{
    std::map<std::string, std::pair<std::string, std::size_t>> kv;
    std::istringstream in(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line))
    {
        ++number;
        const auto hash = line.find('#');
        const std::string body = trim(std::string_view(line).substr(0, hash));
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            fail(origin, number, "expected key = value");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        if (!kv.emplace(key, std::make_pair(trim(std::string_view(body).substr(eq + 1)), number)).second)
            fail(origin, number, "duplicate key '" + key + "'");
    }

    RunConfig cfg;
    auto take = [&](const std::string& key) -> std::optional<std::pair<std::string, std::size_t>> {
        const auto it = kv.find(key);
        if (it == kv.end())
            return std::nullopt;
        auto v = it->second;
        kv.erase(it);
        return v;
    };
    auto wrap = [&](std::size_t line_no, auto&& f) {
        try
        {
            f();
        }
        catch (const ValidationError& e)
        {
            fail(origin, line_no, e.what());
        }
    };
    if (auto v = take("variant"))
        wrap(v->second, [&] { cfg.model = ModelConfig::from_variant(v->first); });
    bool structural = false;
    if (auto v = take("heterogeneity"))
        wrap(v->second, [&] { cfg.model.heterogeneity = parse_heterogeneity(v->first); }), structural = true;
    if (auto v = take("network"))
        wrap(v->second, [&] { cfg.model.network = parse_network(v->first); }), structural = true;
    if (auto v = take("data"))
        wrap(v->second, [&] { cfg.model.data = parse_data_shape(v->first); }), structural = true;
    if (structural)
        cfg.model.variant = ModelConfig::variant_of(cfg.model.heterogeneity, cfg.model.network, cfg.model.data).value_or("");

    auto real = [&](const std::string& key, double& target) {
        if (auto v = take(key))
        {
            bool ok = false;
            target = parse_number(v->first, ok);
            if (!ok)
                fail(origin, v->second, key + ": cannot parse '" + v->first + "' as a number");
        }
    };
    auto whole = [&](const std::string& key, auto& target) {
        if (auto v = take(key))
        {
            long long x = 0;
            const auto [ptr, ec] = std::from_chars(v->first.data(), v->first.data() + v->first.size(), x);
            if (ec != std::errc{} || ptr != v->first.data() + v->first.size() || v->first.empty())
                fail(origin, v->second, key + ": cannot parse '" + v->first + "' as an integer");
            target = static_cast<std::remove_reference_t<decltype(target)>>(x);
        }
    };
    auto& p = cfg.model.priors;
    real("priors.a", p.a);
    real("priors.b", p.b);
    real("priors.mu0", p.mu0);
    real("priors.varsigma0_sq", p.varsigma0_sq);
    real("priors.c_varsigma", p.c_varsigma);
    real("priors.d_varsigma", p.d_varsigma);
    real("priors.c_sigma", p.c_sigma);
    real("priors.d_sigma", p.d_sigma);
    auto& c = cfg.model.chain;
    whole("chain.burn_in", c.burn_in);
    whole("chain.keep", c.keep);
    whole("chain.thin", c.thin);
    whole("chain.seed", c.seed);
    whole("rng_seed", c.seed);
    whole("impact_covariate", cfg.model.impact_covariate);
    if (auto v = take("common_shock"))
    {
        if (v->first != "true" && v->first != "false")
            fail(origin, v->second, "common_shock must be true or false");
        cfg.common_shock = v->first == "true";
    }
    if (!kv.empty())
        fail(origin, kv.begin()->second.second, "unknown key '" + kv.begin()->first + "'");
    return cfg;
}

RunConfig read_config(const fs::path& path)
{
    return parse_config(read_file(path), path.string());
}

std::string format_config(const RunConfig& config)
{
    const auto& m = config.model;
    std::ostringstream out;
    if (!m.variant.empty())
        out << "variant = " << m.variant << '\n';
    out << "heterogeneity = " << to_string(m.heterogeneity) << '\n'
        << "network = " << to_string(m.network) << '\n'
        << "data = " << to_string(m.data) << '\n'
        << "impact_covariate = " << m.impact_covariate << '\n'
        << "common_shock = " << (config.common_shock ? "true" : "false") << '\n'
        << "priors.a = " << format_number(m.priors.a) << '\n'
        << "priors.b = " << format_number(m.priors.b) << '\n'
        << "priors.mu0 = " << format_number(m.priors.mu0) << '\n'
        << "priors.varsigma0_sq = " << format_number(m.priors.varsigma0_sq) << '\n'
        << "priors.c_varsigma = " << format_number(m.priors.c_varsigma) << '\n'
        << "priors.d_varsigma = " << format_number(m.priors.d_varsigma) << '\n'
        << "priors.c_sigma = " << format_number(m.priors.c_sigma) << '\n'
        << "priors.d_sigma = " << format_number(m.priors.d_sigma) << '\n'
        << "chain.burn_in = " << m.chain.burn_in << '\n'
        << "chain.keep = " << m.chain.keep << '\n'
        << "chain.thin = " << m.chain.thin << '\n'
        << "chain.seed = " << m.chain.seed << '\n';
    return out.str();
}

std::vector<std::pair<Date, ShockInputs>> read_shocks(const fs::path& path)
{
    const CsvTable csv = read_csv(path);
    const Index c_date = csv.column("date"), c_pre = csv.column("ff_pre"), c_post = csv.column("ff_post"),
                c_days = csv.column("days_in_month"), c_day = csv.column("day_of_meeting");
    std::vector<std::pair<Date, ShockInputs>> out;
    for (std::size_t r = 0; r < csv.rows.size(); ++r)
        out.emplace_back(csv.date(r, c_date),
                         ShockInputs{csv.number(r, c_pre), csv.number(r, c_post), csv.integer(r, c_days), csv.integer(r, c_day)});
    return out;
}

std::vector<DatedValue> read_index(const fs::path& path)
{
    const CsvTable csv = read_csv(path);
    const Index c_date = csv.column("date"), c_value = csv.column("value");
    std::vector<DatedValue> out;
    for (std::size_t r = 0; r < csv.rows.size(); ++r)
        out.push_back({csv.date(r, c_date), csv.number(r, c_value)});
    return out;
}

namespace {

json config_json(const ModelConfig& m)
{
    const auto& p = m.priors;
    return json{{"variant", m.variant},
                {"heterogeneity", to_string(m.heterogeneity)},
                {"network", to_string(m.network)},
                {"data", to_string(m.data)},
                {"impact_covariate", m.impact_covariate},
                {"priors",
                 {{"a", p.a}, {"b", p.b}, {"mu0", p.mu0}, {"varsigma0_sq", p.varsigma0_sq}, {"c_varsigma", p.c_varsigma},
                  {"d_varsigma", p.d_varsigma}, {"c_sigma", p.c_sigma}, {"d_sigma", p.d_sigma}}},
                {"chain", {{"burn_in", m.chain.burn_in}, {"keep", m.chain.keep}, {"thin", m.chain.thin}, {"seed", m.chain.seed}}}};
}

ModelConfig config_from_json(const json& j)
{
    ModelConfig m;
    m.variant = j.at("variant").get<std::string>();
    m.heterogeneity = parse_heterogeneity(j.at("heterogeneity").get<std::string>());
    m.network = parse_network(j.at("network").get<std::string>());
    m.data = parse_data_shape(j.at("data").get<std::string>());
    m.impact_covariate = j.at("impact_covariate").get<int>();
    const auto& p = j.at("priors");
    m.priors = {p.at("a"), p.at("b"), p.at("mu0"), p.at("varsigma0_sq"), p.at("c_varsigma"), p.at("d_varsigma"),
                p.at("c_sigma"), p.at("d_sigma")};
    const auto& c = j.at("chain");
    m.chain = {c.at("burn_in"), c.at("keep"), c.at("thin"), c.at("seed")};
    return m;
}

void write_block(const fs::path& path, const std::vector<double>& data)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error(path.string() + ": cannot write file");
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)));
}

std::vector<double> read_block(const fs::path& path, std::size_t expected)
{
    const std::string bytes = read_file(path);
    if (bytes.size() != expected * sizeof(double))
        throw ValidationError(path.string() + ": expected " + std::to_string(expected) + " values, file holds " +
                              std::to_string(bytes.size() / sizeof(double)));
    std::vector<double> data(expected);
    std::memcpy(data.data(), bytes.data(), bytes.size());
    return data;
}

json matrix_json(const Eigen::MatrixXd& m)
{
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i)
    {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j)
            row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j)
{
    const auto rows = static_cast<Index>(j.size());
    const auto cols = rows == 0 ? Index{0} : static_cast<Index>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index c = 0; c < cols; ++c)
        {
            const auto& v = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
            m(i, c) = v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
        }
    return m;
}

json vector_json(const Eigen::VectorXd& v)
{
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i)
        out.push_back(v(i));
    return out;
}

Eigen::VectorXd vector_from_json(const json& j)
{
    Eigen::VectorXd v(static_cast<Index>(j.size()));
    for (Index i = 0; i < v.size(); ++i)
        v(i) = j[static_cast<std::size_t>(i)].get<double>();
    return v;
}

} // namespace

void write_draws(const fs::path& dir, const PosteriorDraws& draws)
{
    fs::create_directories(dir);
    const std::size_t d_count = draws.draws.size();
    const Index n = d_count ? draws.draws[0].units() : 0;
    const Index m = d_count ? draws.draws[0].coefficient_count() : 0;
    const Index t_len = d_count ? draws.draws[0].periods() : 0;

    std::vector<double> theta0, omega, tilde, sigma, rho, varsigma;
    for (const auto& s : draws.draws)
    {
        for (Index i = 0; i < n; ++i)
            for (Index c = 0; c < m; ++c)
            {
                theta0.push_back(s.theta0(i, c));
                omega.push_back(s.omega_sqrt(i, c));
            }
        for (Index i = 0; i < n; ++i)
            for (Index c = 0; c < m; ++c)
                for (Index t = 0; t < t_len; ++t)
                    tilde.push_back(s.theta_tilde[static_cast<std::size_t>(i)](c, t));
        for (Index i = 0; i < n; ++i)
            sigma.push_back(s.sigma_sq(i));
        for (Index t = 0; t <= t_len; ++t)
            rho.push_back(s.rho_path(t));
        varsigma.push_back(s.varsigma_sq);
    }
    const auto du = static_cast<std::size_t>(d_count);
    const auto nu = static_cast<std::size_t>(n), mu = static_cast<std::size_t>(m), tu = static_cast<std::size_t>(t_len);
    const std::vector<std::pair<std::string, std::pair<const std::vector<double>*, std::vector<std::size_t>>>> blocks{
        {"theta0", {&theta0, {du, nu, mu}}},
        {"omega_sqrt", {&omega, {du, nu, mu}}},
        {"theta_tilde", {&tilde, {du, nu, mu, tu}}},
        {"sigma_sq", {&sigma, {du, nu}}},
        {"rho_path", {&rho, {du, tu + 1}}},
        {"varsigma_sq", {&varsigma, {du}}},
        {"loglik", {&draws.loglik_trace, {draws.loglik_trace.size()}}},
    };
    json manifest{{"format", "netpanel-draws"},
                  {"version", 1},
                  {"draws", d_count},
                  {"units", n},
                  {"coefficients", m},
                  {"periods", t_len},
                  {"byte_order", "little"},
                  {"config", config_json(draws.config)},
                  {"rho_accept_rate", vector_json(draws.rho_accept_rate)},
                  {"warnings", draws.warnings}};
    for (const auto& [name, block] : blocks)
    {
        write_block(dir / (name + ".bin"), *block.first);
        manifest["blocks"][name] = {{"file", name + ".bin"}, {"shape", block.second}};
    }
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

PosteriorDraws read_draws(const fs::path& dir)
{
    json manifest;
    try
    {
        manifest = json::parse(read_file(dir / "manifest.json"));
    }
    catch (const json::exception& e)
    {
        throw ValidationError((dir / "manifest.json").string() + ": " + e.what());
    }
    if (manifest.value("format", "") != "netpanel-draws")
        throw ValidationError((dir / "manifest.json").string() + ": not a draws bundle");
    PosteriorDraws out;
    out.config = config_from_json(manifest.at("config"));
    out.rho_accept_rate = vector_from_json(manifest.at("rho_accept_rate"));
    out.warnings = manifest.at("warnings").get<std::vector<std::string>>();
    const auto d_count = manifest.at("draws").get<std::size_t>();
    const auto n = manifest.at("units").get<Index>();
    const auto m = manifest.at("coefficients").get<Index>();
    const auto t_len = manifest.at("periods").get<Index>();
    const auto du = d_count;
    const auto nu = static_cast<std::size_t>(n), mu = static_cast<std::size_t>(m), tu = static_cast<std::size_t>(t_len);
    const auto theta0 = read_block(dir / "theta0.bin", du * nu * mu);
    const auto omega = read_block(dir / "omega_sqrt.bin", du * nu * mu);
    const auto tilde = read_block(dir / "theta_tilde.bin", du * nu * mu * tu);
    const auto sigma = read_block(dir / "sigma_sq.bin", du * nu);
    const auto rho = read_block(dir / "rho_path.bin", du * (tu + 1));
    const auto varsigma = read_block(dir / "varsigma_sq.bin", du);
    const auto loglik_len = manifest.at("blocks").at("loglik").at("shape").at(0).get<std::size_t>();
    out.loglik_trace = read_block(dir / "loglik.bin", loglik_len);

    std::size_t a = 0, b = 0, c = 0, e = 0;
    for (std::size_t d = 0; d < d_count; ++d)
    {
        ParameterState s = ParameterState::zeros(n, t_len, m - 1);
        for (Index i = 0; i < n; ++i)
            for (Index k = 0; k < m; ++k, ++a)
            {
                s.theta0(i, k) = theta0[a];
                s.omega_sqrt(i, k) = omega[a];
            }
        for (Index i = 0; i < n; ++i)
            for (Index k = 0; k < m; ++k)
                for (Index t = 0; t < t_len; ++t)
                    s.theta_tilde[static_cast<std::size_t>(i)](k, t) = tilde[b++];
        for (Index i = 0; i < n; ++i)
            s.sigma_sq(i) = sigma[c++];
        for (Index t = 0; t <= t_len; ++t)
            s.rho_path(t) = rho[e++];
        s.varsigma_sq = varsigma[d];
        out.draws.push_back(std::move(s));
    }
    return out;
}

void write_truth(const fs::path& path, const TruthRecord& truth)
{
    json paths = json::array();
    for (const auto& p : truth.theta_paths)
        paths.push_back(matrix_json(p));
    json j{{"rho_path", vector_json(truth.rho_path)},
           {"theta_paths", paths},
           {"sigma_sq", vector_json(truth.sigma_sq)},
           {"impact_covariate", truth.impact_covariate},
           {"avg_direct", truth.avg_direct},
           {"avg_indirect", truth.avg_indirect},
           {"avg_total", truth.avg_total},
           {"share_pct", std::isnan(truth.share_pct) ? json(nullptr) : json(truth.share_pct)},
           {"unit_effects", matrix_json(truth.unit_effects)}};
    write_text(path, j.dump(2) + "\n");
}

TruthRecord read_truth(const fs::path& path)
{
    json j;
    try
    {
        j = json::parse(read_file(path));
    }
    catch (const json::exception& e)
    {
        throw ValidationError(path.string() + ": " + e.what());
    }
    TruthRecord t;
    t.rho_path = vector_from_json(j.at("rho_path"));
    for (const auto& p : j.at("theta_paths"))
        t.theta_paths.push_back(matrix_from_json(p));
    t.sigma_sq = vector_from_json(j.at("sigma_sq"));
    t.impact_covariate = j.at("impact_covariate");
    t.avg_direct = j.at("avg_direct");
    t.avg_indirect = j.at("avg_indirect");
    t.avg_total = j.at("avg_total");
    t.share_pct = j.at("share_pct").is_null() ? std::numeric_limits<double>::quiet_NaN() : j.at("share_pct").get<double>();
    t.unit_effects = matrix_from_json(j.at("unit_effects"));
    return t;
}

std::string sha256_file(const fs::path& path)
{
    const std::string bytes = read_file(path);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed for " + path.string());
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i)
    {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

} // namespace netpanel::io
