#include "capprop/report_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>
#include <openssl/evp.h>

namespace capprop {

namespace {

using json = nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

json pairs_to_object(const std::vector<std::pair<std::string, double>>& pairs) {
    json obj = json::object();
    for (const auto& [k, v] : pairs) obj[k] = v;
    return obj;
}

std::vector<std::pair<std::string, double>> object_to_pairs(const json& obj) {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& [k, v] : obj.items()) out.emplace_back(k, v.get<double>());
    return out;
}

} // namespace

std::string serialize_report(const ExperimentReport& report) {
    json root;
    root["schema_version"] = report.schema_version;
    root["kind"] = report.kind;
    root["study"] = report.study;
    root["config"] = json::parse(report.config_json);

    json records = json::array();
    for (const auto& rec : report.records) {
        json r;
        r["index"] = rec.index;
        r["params"] = pairs_to_object(rec.params);
        r["metrics"] = pairs_to_object(rec.metrics);
        r["flags"] = rec.flags;
        records.push_back(std::move(r));
    }
    root["records"] = records;

    json fits = json::array();
    for (const auto& f : report.fits) {
        json r;
        r["name"] = f.name;
        r["exponent"] = f.exponent;
        r["prefactor"] = f.prefactor;
        r["r2"] = f.r2;
        fits.push_back(std::move(r));
    }
    root["fits"] = fits;

    json cls = json::array();
    for (const auto& c : report.classifications) {
        json r;
        r["p"] = c.p;
        r["exponent"] = c.exponent;
        r["predicted"] = c.predicted;
        r["band"] = c.band;
        r["verdict"] = c.verdict;
        cls.push_back(std::move(r));
    }
    root["classifications"] = cls;
    root["notes"] = report.notes;

    if (report.profiles) {
        json p;
        p["continuum_kind"] = report.profiles->continuum_kind;
        p["discrete"] = report.profiles->discrete;
        p["continuum"] = report.profiles->continuum;
        root["profiles"] = std::move(p);
    }
    return root.dump(2) + "\n";
}

ExperimentReport parse_report(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("report: not valid JSON: ") + e.what());
    }
    ExperimentReport rep;
    rep.schema_version = root.at("schema_version").get<int>();
    rep.kind = root.at("kind").get<std::string>();
    rep.study = root.at("study").get<std::string>();
    rep.config_json = root.at("config").dump(2);
    for (const auto& r : root.at("records")) {
        RunRecord rec;
        rec.index = r.at("index").get<int>();
        rec.params = object_to_pairs(r.at("params"));
        rec.metrics = object_to_pairs(r.at("metrics"));
        rec.flags = r.at("flags").get<std::vector<std::string>>();
        rep.records.push_back(std::move(rec));
    }
    for (const auto& f : root.at("fits"))
        rep.fits.push_back({f.at("name").get<std::string>(), f.at("exponent").get<double>(),
                            f.at("prefactor").get<double>(), f.at("r2").get<double>()});
    for (const auto& c : root.at("classifications")) {
        ClassificationRecord rec;
        rec.p = c.at("p").get<double>();
        rec.exponent = c.at("exponent").get<double>();
        rec.predicted = c.at("predicted").get<double>();
        rec.band = c.at("band").get<double>();
        rec.verdict = c.at("verdict").get<std::string>();
        rep.classifications.push_back(std::move(rec));
    }
    rep.notes = root.at("notes").get<std::vector<std::string>>();
    if (root.contains("profiles")) {
        ProfilePair p;
        p.continuum_kind = root["profiles"].at("continuum_kind").get<std::string>();
        p.discrete = root["profiles"].at("discrete").get<std::vector<double>>();
        p.continuum = root["profiles"].at("continuum").get<std::vector<double>>();
        rep.profiles = std::move(p);
    }
    return rep;
}

std::vector<TableRow> report_table(const ExperimentReport& report) {
    std::vector<TableRow> rows;
    for (const auto& rec : report.records)
        for (const auto& [metric, value] : rec.metrics) {
            TableRow row;
            row.record = rec.index;
            row.study = report.study;
            row.params = rec.params;
            row.metric = metric;
            row.value = value;
            rows.push_back(std::move(row));
        }
    return rows;
}

std::string table_csv(const std::vector<TableRow>& rows) {
    static const char* kParamColumns[] = {"L", "p", "C", "lambda", "alpha", "N"};
    std::string out = "record,study";
    for (const char* c : kParamColumns) out += std::string(",") + c;
    out += ",metric,value\n";
    for (const auto& row : rows) {
        out += std::to_string(row.record) + "," + row.study;
        for (const char* c : kParamColumns) {
            out += ",";
            for (const auto& [k, v] : row.params)
                if (k == c) {
                    out += format_double(v);
                    break;
                }
        }
        out += "," + row.metric + "," + format_double(row.value) + "\n";
    }
    return out;
}

namespace {

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

/// Minimal deterministic line plot; log10 axes when every value is positive.
std::string render_svg(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Series>& series) {
    const double width = 640, height = 440;
    const double ml = 70, mr = 160, mt = 40, mb = 50;
    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    bool log_ok = true;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            log_ok = log_ok && x > 0.0 && y > 0.0;
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (xmin > xmax) return {};
    auto tx = [&](double v) { return log_ok ? std::log10(v) : v; };
    double txmin = tx(xmin), txmax = tx(xmax), tymin = tx(ymin), tymax = tx(ymax);
    if (txmax - txmin < 1e-12) { txmin -= 0.5; txmax += 0.5; }
    if (tymax - tymin < 1e-12) { tymin -= 0.5; tymax += 0.5; }
    const double padx = 0.05 * (txmax - txmin), pady = 0.05 * (tymax - tymin);
    txmin -= padx; txmax += padx; tymin -= pady; tymax += pady;

    auto sx = [&](double v) { return ml + (tx(v) - txmin) / (txmax - txmin) * (width - ml - mr); };
    auto sy = [&](double v) { return height - mb - (tx(v) - tymin) / (tymax - tymin) * (height - mt - mb); };

    char buf[256];
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"440\" "
           "viewBox=\"0 0 640 440\">\n";
    svg += "<rect width=\"640\" height=\"440\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%g\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">%s</text>\n",
                  ml, title.c_str());
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", ml,
                  height - mb, width - mr, height - mb);
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", ml, mt, ml,
                  height - mb);
    svg += buf;

    for (int i = 0; i <= 4; ++i) {
        const double fx = txmin + (txmax - txmin) * i / 4.0;
        const double fy = tymin + (tymax - tymin) * i / 4.0;
        const double vx = log_ok ? std::pow(10.0, fx) : fx;
        const double vy = log_ok ? std::pow(10.0, fy) : fy;
        const double px = ml + (fx - txmin) / (txmax - txmin) * (width - ml - mr);
        const double py = height - mb - (fy - tymin) / (tymax - tymin) * (height - mt - mb);
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" font-size=\"11\" "
                      "text-anchor=\"middle\">%.3g</text>\n",
                      px, height - mb + 16, vx);
        svg += buf;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" font-size=\"11\" "
                      "text-anchor=\"end\">%.3g</text>\n",
                      ml - 6, py + 4, vy);
        svg += buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" font-size=\"12\" "
                  "text-anchor=\"middle\">%s</text>\n",
                  (ml + width - mr) / 2, height - 10, x_label.c_str());
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"16\" y=\"%g\" font-family=\"sans-serif\" font-size=\"12\" "
                  "transform=\"rotate(-90 16 %g)\" text-anchor=\"middle\">%s</text>\n",
                  (mt + height - mb) / 2, (mt + height - mb) / 2, y_label.c_str());
    svg += buf;

    int color = 0;
    for (const auto& s : series) {
        const char* stroke = kColors[color % 6];
        std::string path = "<polyline fill=\"none\" stroke=\"" + std::string(stroke) +
                           "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : s.points) {
            std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", sx(x), sy(y));
            path += buf;
        }
        path += "\"/>\n";
        svg += path;
        for (const auto& [x, y] : s.points) {
            std::snprintf(buf, sizeof(buf),
                          "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"%s\"/>\n", sx(x), sy(y),
                          stroke);
            svg += buf;
        }
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" font-size=\"11\" "
                      "fill=\"%s\">%s</text>\n",
                      width - mr + 10, mt + 14.0 * (color + 1), stroke, s.label.c_str());
        svg += buf;
        ++color;
    }
    svg += "</svg>\n";
    return svg;
}

/// Collect (x_param, metric) series from the table, one series per value of
/// group_param (or a single series when group_param is empty). Records whose
/// metric is absent are skipped.
std::vector<Series> collect_series(const std::vector<TableRow>& rows, const std::string& x_param,
                                   const std::string& metric, const std::string& group_param) {
    std::map<std::string, Series> grouped;
    for (const auto& row : rows) {
        if (row.metric != metric) continue;
        double x = 0.0;
        bool have_x = false;
        std::string group = metric;
        for (const auto& [k, v] : row.params) {
            if (k == x_param) {
                x = v;
                have_x = true;
            }
            if (!group_param.empty() && k == group_param)
                group = group_param + "=" + format_double(v);
        }
        if (!have_x) continue;
        auto& s = grouped[group];
        s.label = group;
        s.points.emplace_back(x, row.value);
    }
    std::vector<Series> out;
    for (auto& [_, s] : grouped) out.push_back(std::move(s));
    return out;
}

} // namespace

namespace {

/// Plot params sometimes live in the metric column (erf_scale); promote a
/// metric to a pseudo-param so it can serve as the x axis.
std::vector<TableRow> with_metric_param(std::vector<TableRow> rows, const std::string& metric) {
    std::map<int, double> values;
    for (const auto& row : rows)
        if (row.metric == metric) values[row.record] = row.value;
    for (auto& row : rows) {
        auto it = values.find(row.record);
        if (it != values.end()) row.params.emplace_back(metric, it->second);
    }
    return rows;
}

} // namespace

std::vector<std::pair<std::string, std::string>> render_plots(const ExperimentReport& report) {
    const auto rows = report_table(report);
    std::vector<std::pair<std::string, std::string>> out;
    auto add = [&](const std::vector<TableRow>& from, const std::string& name,
                   const std::string& title, const std::string& x, const std::string& metric,
                   const std::string& group) {
        auto series = collect_series(from, x, metric, group);
        bool any = false;
        for (const auto& s : series) any = any || !s.points.empty();
        if (!any) return;
        const std::string svg = render_svg(title, x, metric, series);
        if (!svg.empty()) out.emplace_back(name, svg);
    };

    if (report.study == "convergence") {
        add(rows, "error_vs_depth.svg", "L1 error vs depth", "L", "l1_vs_continuum", "");
    } else if (report.study == "scaling_sweep") {
        add(rows, "width_vs_depth.svg", "Width vs depth", "L", "std_width", "p");
    } else if (report.study == "dilated_erf") {
        add(with_metric_param(rows, "erf_scale"), "width_vs_erf_scale.svg",
            "Width vs lambda^L/sqrt(L)", "erf_scale", "std_width", "lambda");
    } else if (report.study == "multichannel_xavier") {
        add(rows, "xavier_width_ratio.svg", "Mis-scaled width ratio vs channels", "C",
            "width_ratio_misscaled", "");
    } else if (report.study == "leak_split") {
        add(rows, "mass_split_vs_depth.svg", "Input-capacity mass vs depth", "L", "mass_x", "alpha");
    } else if (report.study == "recurrent_memory") {
        add(rows, "memory_vs_length.svg", "Memory fraction vs sequence length", "N", "m_over_n", "");
    }
    return out;
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

std::vector<BundleFile> write_bundle(const ExperimentReport& report,
                                     const std::filesystem::path& out_dir,
                                     const BundleOptions& options) {
    namespace fs = std::filesystem;

    std::vector<std::pair<std::string, std::string>> files;
    if (options.report) files.emplace_back("report.json", serialize_report(report));
    if (options.table) files.emplace_back("table.csv", table_csv(report_table(report)));
    if (options.plots)
        for (auto& [name, svg] : render_plots(report)) files.emplace_back("plots/" + name, svg);

    json manifest;
    manifest["schema_version"] = 1;
    json list = json::array();
    std::vector<BundleFile> out;
    for (const auto& [path, content] : files) {
        BundleFile f;
        f.path = path;
        f.bytes = content.size();
        f.sha256 = sha256_hex(content);
        json e;
        e["path"] = f.path;
        e["bytes"] = f.bytes;
        e["sha256"] = f.sha256;
        list.push_back(std::move(e));
        out.push_back(std::move(f));
    }
    manifest["files"] = list;
    files.emplace_back("manifest.json", manifest.dump(2) + "\n");

    fs::create_directories(out_dir);
    const fs::path stage = out_dir / ".stage";
    fs::remove_all(stage);
    fs::create_directories(stage);
    try {
        for (const auto& [rel, content] : files) {
            const fs::path target = stage / rel;
            fs::create_directories(target.parent_path());
            std::ofstream f(target, std::ios::binary);
            if (!f) throw std::runtime_error("bundle: cannot write " + target.string());
            f.write(content.data(), static_cast<std::streamsize>(content.size()));
            if (!f) throw std::runtime_error("bundle: short write to " + target.string());
        }
        // All writes succeeded; move into place.
        for (const auto& [rel, _] : files) {
            const fs::path src = stage / rel;
            const fs::path dst = out_dir / rel;
            fs::create_directories(dst.parent_path());
            fs::remove(dst);
            fs::rename(src, dst);
        }
    } catch (...) {
        fs::remove_all(stage);
        throw;
    }
    fs::remove_all(stage);
    return out;
}

} // namespace capprop
