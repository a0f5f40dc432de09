#ifndef CAPPROP_REPORT_IO_HPP
#define CAPPROP_REPORT_IO_HPP

#include <filesystem>

#include "capprop/experiments.hpp"

namespace capprop {

/// Canonical report bytes; parse(serialize(r)) round-trips exactly.
std::string serialize_report(const ExperimentReport& report);
ExperimentReport parse_report(const std::string& json_text);

/// Flat table: one row per (record, metric).
struct TableRow {
    int record = 0;
    std::string study;
    std::vector<std::pair<std::string, double>> params;
    std::string metric;
    double value = 0.0;
};

std::vector<TableRow> report_table(const ExperimentReport& report);

/// CSV with a header row; numeric fields are shortest round-trip decimals
/// with '.' separator.
std::string table_csv(const std::vector<TableRow>& rows);

/// Standalone SVG line plots derived from the table rows only. Returns
/// (filename, content) pairs; studies without a natural plot yield none.
std::vector<std::pair<std::string, std::string>> render_plots(const ExperimentReport& report);

struct BundleOptions {
    bool report = true;
    bool table = true;
    bool plots = true;
};

struct BundleFile {
    std::string path; // relative to the bundle directory
    std::uint64_t bytes = 0;
    std::string sha256;
};

/// Writes report.json / table.csv / plots/*.svg plus manifest.json into
/// out_dir. Everything is staged under a temporary directory and renamed in
/// only after all writes succeed, so failures leave no partial bundle.
std::vector<BundleFile> write_bundle(const ExperimentReport& report,
                                     const std::filesystem::path& out_dir,
                                     const BundleOptions& options);

std::string sha256_hex(std::string_view bytes);

} // namespace capprop

#endif
