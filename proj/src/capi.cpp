#include "capprop/capprop.h"

#include <chrono>
#include <string>

#include "capprop/config_io.hpp"
#include "capprop/report_io.hpp"

struct capprop_config {
    capprop::ExperimentConfig cfg;
};

struct capprop_report {
    capprop::ExperimentReport rep;
    std::string json; // cached canonical bytes
};

namespace {

thread_local std::string g_last_error = "";

int fail_validation(const std::string& msg) {
    g_last_error = msg;
    return CAPPROP_ERR_VALIDATION;
}

int fail_runtime(const std::string& msg) {
    g_last_error = msg;
    return CAPPROP_ERR_RUNTIME;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return CAPPROP_OK;
    } catch (const std::invalid_argument& e) {
        return fail_validation(e.what());
    } catch (const std::exception& e) {
        return fail_runtime(e.what());
    } catch (...) {
        return fail_runtime("unknown error");
    }
}

int run_timed(const capprop_config* cfg, capprop_report** out, bool compare) {
    if (!cfg || !out) return fail_validation("null argument");
    *out = nullptr;
    return guarded([&] {
        const auto t0 = std::chrono::steady_clock::now();
        capprop::ExperimentReport rep =
            compare ? capprop::run_compare(cfg->cfg) : capprop::run_study(cfg->cfg);
        rep.runtime_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        auto* handle = new capprop_report;
        handle->rep = std::move(rep);
        handle->json = capprop::serialize_report(handle->rep);
        *out = handle;
    });
}

} // namespace

extern "C" {

unsigned capprop_abi_version(void) { return CAPPROP_ABI_VERSION; }

const char* capprop_last_error(void) { return g_last_error.c_str(); }

int capprop_config_open(const char* path, capprop_config** out) {
    if (!path || !out) return fail_validation("null argument");
    *out = nullptr;
    return guarded([&] {
        auto* handle = new capprop_config{capprop::load_config(path)};
        *out = handle;
    });
}

int capprop_config_parse(const char* json_text, capprop_config** out) {
    if (!json_text || !out) return fail_validation("null argument");
    *out = nullptr;
    return guarded([&] {
        auto* handle = new capprop_config{capprop::parse_config(json_text)};
        *out = handle;
    });
}

void capprop_config_free(capprop_config* cfg) { delete cfg; }

int capprop_config_set_seed(capprop_config* cfg, uint64_t seed) {
    if (!cfg) return fail_validation("null argument");
    cfg->cfg.seed = seed;
    cfg->cfg.seed_set = true;
    g_last_error.clear();
    return CAPPROP_OK;
}

int capprop_config_set_jobs(capprop_config* cfg, int jobs) {
    if (!cfg) return fail_validation("null argument");
    if (jobs < 1) return fail_validation("jobs: must be >= 1");
    cfg->cfg.jobs = jobs;
    g_last_error.clear();
    return CAPPROP_OK;
}

int capprop_config_has_sweep(const capprop_config* cfg) {
    return cfg && cfg->cfg.has_sweep() ? 1 : 0;
}

int capprop_run(const capprop_config* cfg, capprop_report** out) {
    return run_timed(cfg, out, false);
}

int capprop_compare(const capprop_config* cfg, capprop_report** out) {
    return run_timed(cfg, out, true);
}

void capprop_report_free(capprop_report* rep) { delete rep; }

const char* capprop_report_json(const capprop_report* rep) {
    return rep ? rep->json.c_str() : "";
}

double capprop_report_runtime_seconds(const capprop_report* rep) {
    return rep ? rep->rep.runtime_seconds : 0.0;
}

int capprop_report_write(const capprop_report* rep, const char* out_dir, int flags) {
    if (!rep || !out_dir) return fail_validation("null argument");
    return guarded([&] {
        capprop::BundleOptions options;
        options.report = flags & CAPPROP_EMIT_REPORT;
        options.table = flags & CAPPROP_EMIT_TABLE;
        options.plots = flags & CAPPROP_EMIT_PLOTS;
        capprop::write_bundle(rep->rep, out_dir, options);
    });
}

} // extern "C"
