#include "capprop/config_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace capprop {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
    throw std::invalid_argument(field + ": " + what);
}

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.contains(key)) fail(where + "." + key, "unknown field");
}

double get_number(const json& obj, const std::string& where, const std::string& key, double fallback,
                  bool required = false) {
    if (!obj.contains(key)) {
        if (required) fail(where + "." + key, "required");
        return fallback;
    }
    if (!obj[key].is_number()) fail(where + "." + key, "must be a number");
    return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& where, const std::string& key, int fallback,
            bool required = false) {
    if (!obj.contains(key)) {
        if (required) fail(where + "." + key, "required");
        return fallback;
    }
    if (!obj[key].is_number_integer()) fail(where + "." + key, "must be an integer");
    return obj[key].get<int>();
}

std::string get_string(const json& obj, const std::string& where, const std::string& key,
                       const std::string& fallback, bool required = false) {
    if (!obj.contains(key)) {
        if (required) fail(where + "." + key, "required");
        return fallback;
    }
    if (!obj[key].is_string()) fail(where + "." + key, "must be a string");
    return obj[key].get<std::string>();
}

StencilGenerator parse_stencil(const json& node, const std::string& where, int dim) {
    if (node.is_string()) {
        const std::string name = node.get<std::string>();
        if (name == "symmetric_unit") return StencilGenerator::symmetric_unit(dim);
        fail(where, "unknown stencil name '" + name + "'");
    }
    if (!node.is_object()) fail(where, "must be a stencil object or name");
    check_keys(node, where, {"offsets", "rates", "random", "symmetric", "radius", "seed"});
    if (node.contains("random") && node["random"].get<bool>()) {
        const int radius = get_int(node, where, "radius", 1);
        const auto seed = static_cast<std::uint64_t>(get_number(node, where, "seed", 0, true));
        const bool symmetric = node.value("symmetric", true);
        return symmetric ? random_symmetric_generator(RngSpec{seed}, radius, dim)
                         : random_generator(RngSpec{seed}, radius, dim);
    }
    if (!node.contains("offsets") || !node.contains("rates"))
        fail(where, "needs offsets and rates (or random: true)");
    std::vector<Offset> offsets;
    for (const auto& o : node["offsets"]) {
        if (o.is_number_integer())
            offsets.push_back({o.get<int>(), 0});
        else if (o.is_array() && o.size() == 2)
            offsets.push_back({o[0].get<int>(), o[1].get<int>()});
        else
            fail(where + ".offsets", "entries must be ints (1D) or [dx, dy] pairs (2D)");
    }
    std::vector<double> rates;
    for (const auto& r : node["rates"]) {
        if (!r.is_number()) fail(where + ".rates", "entries must be numbers");
        rates.push_back(r.get<double>());
    }
    return StencilGenerator(dim, std::move(offsets), std::move(rates));
}

BumpSpec parse_bump(const json& node, const std::string& where) {
    BumpSpec bump;
    if (!node.is_object()) fail(where, "must be an object");
    check_keys(node, where, {"type", "site", "sigma", "rate"});
    const std::string type = get_string(node, where, "type", "one_hot");
    if (type == "one_hot")
        bump.kind = BumpSpec::Kind::one_hot;
    else if (type == "gaussian")
        bump.kind = BumpSpec::Kind::gaussian;
    else
        fail(where + ".type", "must be one_hot or gaussian");
    bump.site = get_int(node, where, "site", -1);
    bump.sigma = get_number(node, where, "sigma", 1.0);
    bump.rate = get_number(node, where, "rate", 1.0);
    return bump;
}

template <typename T>
std::vector<T> parse_list(const json& node, const std::string& where) {
    if (!node.is_array()) fail(where, "must be an array");
    std::vector<T> out;
    for (const auto& v : node) {
        if (!v.is_number()) fail(where, "entries must be numbers");
        out.push_back(v.get<T>());
    }
    return out;
}

json stencil_echo(const StencilGenerator& g) {
    json node;
    json offsets = json::array();
    for (const Offset& o : g.offsets()) {
        if (g.dim() == 1)
            offsets.push_back(o.dx);
        else
            offsets.push_back(json::array({o.dx, o.dy}));
    }
    node["offsets"] = offsets;
    node["rates"] = g.rates();
    return node;
}

} // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
    }
    if (!root.is_object()) fail("config", "top level must be an object");
    check_keys(root, "config",
               {"schema_version", "study", "seed", "grid", "architecture", "initial", "source",
                "sweep", "thresholds", "jobs"});

    ExperimentConfig cfg;
    cfg.schema_version = get_int(root, "config", "schema_version", 0, true);
    if (cfg.schema_version != 1) fail("schema_version", "expected 1");

    if (root.contains("study")) {
        const std::string name = get_string(root, "config", "study", "", true);
        const auto study = study_from_string(name);
        if (!study) fail("study", "unknown study '" + name + "'");
        cfg.study = *study;
        cfg.study_set = true;
    }

    if (root.contains("seed")) {
        if (!root["seed"].is_number_unsigned() && !root["seed"].is_number_integer())
            fail("seed", "must be a nonnegative integer");
        cfg.seed = root["seed"].get<std::uint64_t>();
        cfg.seed_set = true;
    }

    if (root.contains("grid")) {
        const json& g = root["grid"];
        if (!g.is_object()) fail("grid", "must be an object");
        check_keys(g, "grid", {"n", "nx", "ny", "boundary"});
        const std::string boundary = get_string(g, "grid", "boundary", "periodic");
        Boundary b = Boundary::periodic;
        if (boundary == "absorbing")
            b = Boundary::absorbing;
        else if (boundary != "periodic")
            fail("grid.boundary", "must be periodic or absorbing");
        if (g.contains("nx") || g.contains("ny"))
            cfg.grid = Grid::plane(get_int(g, "grid", "nx", 0, true), get_int(g, "grid", "ny", 0, true), b);
        else
            cfg.grid = Grid::line(get_int(g, "grid", "n", 0, true), b);
    }

    if (root.contains("sweep")) {
        const json& s = root["sweep"];
        if (!s.is_object()) fail("sweep", "must be an object");
        check_keys(s, "sweep", {"depth", "p", "channels", "lambda", "alpha"});
        if (s.contains("depth")) cfg.depth_list = parse_list<int>(s["depth"], "sweep.depth");
        if (s.contains("p")) cfg.exponent_list = parse_list<double>(s["p"], "sweep.p");
        if (s.contains("channels"))
            cfg.channel_list = parse_list<int>(s["channels"], "sweep.channels");
        if (s.contains("lambda")) cfg.dilation_list = parse_list<double>(s["lambda"], "sweep.lambda");
        if (s.contains("alpha")) cfg.alpha_list = parse_list<double>(s["alpha"], "sweep.alpha");
    }

    if (!root.contains("architecture")) fail("architecture", "required");
    {
        const json& a = root["architecture"];
        if (!a.is_object()) fail("architecture", "must be an object");
        check_keys(a, "architecture",
                   {"variant", "depth", "capacity_rate", "scaling_exponent", "channels",
                    "dilation_ratio", "stencil", "stencils", "channel_blocks", "leak"});
        const std::string vname = get_string(a, "architecture", "variant", "residual");
        const auto variant = variant_from_string(vname);
        if (!variant) fail("architecture.variant", "unknown variant '" + vname + "'");
        cfg.base.variant = *variant;

        if (a.contains("depth"))
            cfg.base.depth = get_int(a, "architecture", "depth", 0, true);
        else if (!cfg.depth_list.empty())
            cfg.base.depth = cfg.depth_list.front();
        else
            fail("architecture.depth", "required (no sweep.depth to take it from)");

        cfg.base.capacity_rate = get_number(a, "architecture", "capacity_rate", 1.0);
        cfg.base.scaling_exponent = get_number(a, "architecture", "scaling_exponent", 1.0);
        cfg.base.channels = get_int(a, "architecture", "channels", 1);
        cfg.base.dilation_ratio = get_number(a, "architecture", "dilation_ratio", 1.0);

        if (a.contains("stencils")) {
            if (!a["stencils"].is_array()) fail("architecture.stencils", "must be an array");
            int i = 0;
            for (const auto& node : a["stencils"])
                cfg.base.generators.push_back(
                    parse_stencil(node, "architecture.stencils[" + std::to_string(i++) + "]",
                                  cfg.grid.dim));
        } else {
            const json stencil = a.contains("stencil") ? a["stencil"] : json("symmetric_unit");
            cfg.base.generators.push_back(parse_stencil(stencil, "architecture.stencil", cfg.grid.dim));
        }

        if (cfg.base.variant == Variant::multichannel) {
            const json blocks = a.contains("channel_blocks") ? a["channel_blocks"] : json("uniform");
            if (blocks.is_string() && blocks.get<std::string>() == "uniform") {
                const int c = cfg.base.channels;
                cfg.base.channel_blocks.assign(static_cast<std::size_t>(c) * c,
                                               cfg.base.generators.front());
            } else if (blocks.is_array()) {
                int i = 0;
                for (const auto& node : blocks)
                    cfg.base.channel_blocks.push_back(parse_stencil(
                        node, "architecture.channel_blocks[" + std::to_string(i++) + "]",
                        cfg.grid.dim));
            } else {
                fail("architecture.channel_blocks", "must be 'uniform' or an array of stencils");
            }
        }

        if (a.contains("leak")) {
            const json& l = a["leak"];
            if (!l.is_object()) fail("architecture.leak", "must be an object");
            check_keys(l, "architecture.leak", {"alpha", "starts", "values"});
            if (l.contains("alpha")) {
                cfg.base.leak = LeakSchedule::constant(
                    get_number(l, "architecture.leak", "alpha", 0.0, true));
            } else {
                cfg.base.leak = LeakSchedule::piecewise(
                    parse_list<double>(l["starts"], "architecture.leak.starts"),
                    parse_list<double>(l["values"], "architecture.leak.values"));
            }
        }
    }

    if (root.contains("initial")) cfg.initial = parse_bump(root["initial"], "initial");
    if (root.contains("source")) cfg.source = parse_bump(root["source"], "source");

    if (root.contains("thresholds")) {
        const json& t = root["thresholds"];
        if (!t.is_object()) fail("thresholds", "must be an object");
        check_keys(t, "thresholds", {"degeneracy_band", "mis_scale_rate"});
        cfg.degeneracy_band = get_number(t, "thresholds", "degeneracy_band", cfg.degeneracy_band);
        cfg.mis_scale_rate = get_number(t, "thresholds", "mis_scale_rate", cfg.mis_scale_rate);
    }

    cfg.jobs = get_int(root, "config", "jobs", 1);
    cfg.base.validate(cfg.grid);
    if (cfg.study_set) cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("config: cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json root;
    root["schema_version"] = cfg.schema_version;
    if (cfg.study_set) root["study"] = to_string(cfg.study);
    root["seed"] = cfg.seed;

    json grid;
    if (cfg.grid.dim == 1) {
        grid["n"] = cfg.grid.extent[0];
    } else {
        grid["nx"] = cfg.grid.extent[0];
        grid["ny"] = cfg.grid.extent[1];
    }
    grid["boundary"] = to_string(cfg.grid.boundary);
    root["grid"] = grid;

    json arch;
    arch["variant"] = to_string(cfg.base.variant);
    arch["depth"] = cfg.base.depth;
    arch["capacity_rate"] = cfg.base.capacity_rate;
    arch["scaling_exponent"] = cfg.base.scaling_exponent;
    arch["channels"] = cfg.base.channels;
    arch["dilation_ratio"] = cfg.base.dilation_ratio;
    if (cfg.base.generators.size() == 1) {
        arch["stencil"] = stencil_echo(cfg.base.generators.front());
    } else {
        json list = json::array();
        for (const auto& g : cfg.base.generators) list.push_back(stencil_echo(g));
        arch["stencils"] = list;
    }
    if (!cfg.base.channel_blocks.empty()) {
        json list = json::array();
        for (const auto& g : cfg.base.channel_blocks) list.push_back(stencil_echo(g));
        arch["channel_blocks"] = list;
    }
    if (!cfg.base.leak.is_zero()) {
        json leak;
        leak["starts"] = cfg.base.leak.starts();
        leak["values"] = cfg.base.leak.values();
        arch["leak"] = leak;
    }
    root["architecture"] = arch;

    auto bump_echo = [](const BumpSpec& b) {
        json node;
        node["type"] = b.kind == BumpSpec::Kind::one_hot ? "one_hot" : "gaussian";
        node["site"] = b.site;
        if (b.kind == BumpSpec::Kind::gaussian) node["sigma"] = b.sigma;
        node["rate"] = b.rate;
        return node;
    };
    root["initial"] = bump_echo(cfg.initial);
    root["source"] = bump_echo(cfg.source);

    json sweep;
    if (!cfg.depth_list.empty()) sweep["depth"] = cfg.depth_list;
    if (!cfg.exponent_list.empty()) sweep["p"] = cfg.exponent_list;
    if (!cfg.channel_list.empty()) sweep["channels"] = cfg.channel_list;
    if (!cfg.dilation_list.empty()) sweep["lambda"] = cfg.dilation_list;
    if (!cfg.alpha_list.empty()) sweep["alpha"] = cfg.alpha_list;
    root["sweep"] = sweep;

    json thresholds;
    thresholds["degeneracy_band"] = cfg.degeneracy_band;
    thresholds["mis_scale_rate"] = cfg.mis_scale_rate;
    root["thresholds"] = thresholds;
    // jobs deliberately omitted: reports must not depend on worker count.

    return root.dump(2);
}

} // namespace capprop
