#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "netpanel/data_model.hpp"
#include "netpanel/ingest.hpp"
#include "netpanel/synth.hpp"
#include "netpanel/weights.hpp"

namespace netpanel::io {

namespace fs = std::filesystem;

/// Comma-separated table; cells are not quoted. Line numbers are 1-based
/// file lines of each data row.
struct CsvTable
{
    fs::path path;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines;

    Index column(std::string_view name) const; // throws when absent
    double number(std::size_t row, Index col) const;
    Date date(std::size_t row, Index col) const;
    int integer(std::size_t row, Index col) const;
    std::string where(std::size_t row) const;
};

CsvTable read_csv(const fs::path& path);

/// Shortest round-trip text form of a double; NaN as an empty cell.
std::string format_number(double x);

/// Writes text atomically enough for batch use (temp file then rename).
void write_text(const fs::path& path, const std::string& text);

PanelData read_panel(const fs::path& path, bool common_shock = true);
void write_panel(const fs::path& path, const PanelData& panel);

/// Square matrix CSV with a leading `unit_id` column and unit ids as header.
Eigen::MatrixXd read_weight_matrix(const fs::path& path, const std::vector<std::string>& unit_ids);
void write_weight_matrix(const fs::path& path, const Eigen::MatrixXd& w, const std::vector<std::string>& unit_ids);

/// Reads a `effective_from,file` manifest; files are relative to it. Rows are
/// renormalized after loading.
WeightSequence read_weights(const fs::path& manifest, const std::vector<std::string>& unit_ids);
void write_weights(const fs::path& dir, const WeightSequence& weights);

/// Make table: `industry_id` rows by commodity columns. Use table:
/// `commodity_id` rows by industry columns.
IoTables read_io_tables(const fs::path& make, const fs::path& use, std::string vintage);

struct IoManifest
{
    std::vector<IoTables> vintages;
    std::vector<Date> cutovers; // effective_from of vintages 2..V
};

/// `vintage,make,use,effective_from` rows in chronological order; the first
/// vintage's effective_from may be left empty.
IoManifest read_io_manifest(const fs::path& manifest);

/// `key = value` lines, `#` comments. Keys mirror ModelConfig fields with
/// `priors.` and `chain.` prefixes for nested ones.
struct RunConfig
{
    ModelConfig model;
    bool common_shock = true;
};
RunConfig read_config(const fs::path& path);
RunConfig parse_config(const std::string& text, const std::string& origin = "config");
std::string format_config(const RunConfig& config);

std::vector<std::pair<Date, ShockInputs>> read_shocks(const fs::path& path);
std::vector<DatedValue> read_index(const fs::path& path);

/// Draw-major binary blocks (little-endian doubles) plus manifest.json.
void write_draws(const fs::path& dir, const PosteriorDraws& draws);
PosteriorDraws read_draws(const fs::path& dir);

void write_truth(const fs::path& path, const TruthRecord& truth);
TruthRecord read_truth(const fs::path& path);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const fs::path& path);

} // namespace netpanel::io
