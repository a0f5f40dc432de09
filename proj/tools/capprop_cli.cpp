// capprop command-line front end. Talks to the library exclusively through
// the C API in capprop/capprop.h.

#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "capprop/capprop.h"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::string seed_text;
    int jobs = 0;
    bool no_plots = false;
    std::string format = "both";
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Experiment config (JSON)")->required();
    cmd->add_option("--out", args.out_dir, "Output directory")->required();
    cmd->add_option("--seed", args.seed_text, "Seed override (u64)");
    cmd->add_option("--jobs", args.jobs, "Concurrent sweep points");
    cmd->add_flag("--no-plots", args.no_plots, "Skip SVG plots");
    cmd->add_option("--format", args.format, "Outputs: table|report|both")
        ->check(CLI::IsMember({"table", "report", "both"}));
}

int emit_flags(const CommonArgs& args) {
    int flags = 0;
    if (args.format != "table") flags |= CAPPROP_EMIT_REPORT;
    if (args.format != "report") flags |= CAPPROP_EMIT_TABLE;
    if (!args.no_plots) flags |= CAPPROP_EMIT_PLOTS;
    return flags;
}

bool parse_u64(const std::string& text, uint64_t& value) {
    if (text.empty()) return false;
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
    if (errno != 0 || end == text.c_str() || *end != '\0') return false;
    value = v;
    return true;
}

int fail(int code) {
    std::fprintf(stderr, "capprop: %s\n", capprop_last_error());
    return code;
}

int execute(const CommonArgs& args, bool compare, bool require_sweep) {
    capprop_config* cfg = nullptr;
    int rc = capprop_config_open(args.config_path.c_str(), &cfg);
    if (rc != CAPPROP_OK) return fail(rc);

    uint64_t seed = 0;
    if (!args.seed_text.empty()) {
        if (!parse_u64(args.seed_text, seed)) {
            std::fprintf(stderr, "capprop: --seed: must be an unsigned 64-bit integer\n");
            capprop_config_free(cfg);
            return CAPPROP_ERR_VALIDATION;
        }
        capprop_config_set_seed(cfg, seed);
    } else if (const char* env = std::getenv("CAPPROP_SEED"); env && *env) {
        if (!parse_u64(env, seed)) {
            std::fprintf(stderr, "capprop: CAPPROP_SEED: must be an unsigned 64-bit integer\n");
            capprop_config_free(cfg);
            return CAPPROP_ERR_VALIDATION;
        }
        capprop_config_set_seed(cfg, seed);
    }
    if (args.jobs > 0 && capprop_config_set_jobs(cfg, args.jobs) != CAPPROP_OK) {
        capprop_config_free(cfg);
        return fail(CAPPROP_ERR_VALIDATION);
    }
    if (require_sweep && !capprop_config_has_sweep(cfg)) {
        std::fprintf(stderr, "capprop: sweep: config has no sweep lists\n");
        capprop_config_free(cfg);
        return CAPPROP_ERR_VALIDATION;
    }

    capprop_report* rep = nullptr;
    rc = compare ? capprop_compare(cfg, &rep) : capprop_run(cfg, &rep);
    if (rc != CAPPROP_OK) {
        capprop_config_free(cfg);
        return fail(rc);
    }
    rc = capprop_report_write(rep, args.out_dir.c_str(), emit_flags(args));
    if (rc != CAPPROP_OK) {
        capprop_report_free(rep);
        capprop_config_free(cfg);
        return fail(rc);
    }
    std::fprintf(stderr, "capprop: wrote %s (%.3fs)\n", args.out_dir.c_str(),
                 capprop_report_runtime_seconds(rep));
    capprop_report_free(rep);
    capprop_config_free(cfg);
    return CAPPROP_OK;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"capprop: capacity-propagation studies for deep-network scalings"};
    app.require_subcommand(1);

    CommonArgs run_args, compare_args, sweep_args;
    CLI::App* run = app.add_subcommand("run", "Execute the configured study");
    add_common(run, run_args);
    CLI::App* compare = app.add_subcommand("compare",
                                           "Run one architecture against its continuum solution");
    add_common(compare, compare_args);
    CLI::App* sweep = app.add_subcommand("sweep", "Execute a study over its sweep lists");
    add_common(sweep, sweep_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? CAPPROP_ERR_VALIDATION : CAPPROP_OK;
    }

    if (run->parsed()) return execute(run_args, false, false);
    if (compare->parsed()) return execute(compare_args, true, false);
    return execute(sweep_args, false, true);
}
