// Exercises the shared-library surface only (capprop.h), the same way the
// CLI and external bindings do.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "capprop/capprop.h"

namespace {

const char* kConfig = R"({
  "schema_version": 1,
  "study": "scaling_sweep",
  "seed": 11,
  "grid": {"n": 128},
  "architecture": {"variant": "residual"},
  "sweep": {"depth": [17, 33, 65], "p": [1.0]}
})";

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("abi version and null handling") {
    CHECK(capprop_abi_version() == CAPPROP_ABI_VERSION);
    CHECK(capprop_config_open(nullptr, nullptr) == CAPPROP_ERR_VALIDATION);
    CHECK(std::strlen(capprop_last_error()) > 0);
}

TEST_CASE("validation errors carry the field name and code 1") {
    capprop_config* cfg = nullptr;
    const int rc = capprop_config_parse(
        R"({"schema_version": 1, "architecture": {"depth": 4, "dilation_ratio": 0.5},
            "study": "convergence", "sweep": {"depth": [3, 5]}})",
        &cfg);
    CHECK(rc == CAPPROP_ERR_VALIDATION);
    CHECK(cfg == nullptr);
    CHECK(std::string(capprop_last_error()).find("dilation_ratio") != std::string::npos);
}

TEST_CASE("run, serialize, write bundle") {
    capprop_config* cfg = nullptr;
    REQUIRE(capprop_config_parse(kConfig, &cfg) == CAPPROP_OK);
    CHECK(capprop_config_has_sweep(cfg) == 1);
    REQUIRE(capprop_config_set_seed(cfg, 99) == CAPPROP_OK);
    CHECK(capprop_config_set_jobs(cfg, 0) == CAPPROP_ERR_VALIDATION);
    REQUIRE(capprop_config_set_jobs(cfg, 2) == CAPPROP_OK);

    capprop_report* rep = nullptr;
    REQUIRE(capprop_run(cfg, &rep) == CAPPROP_OK);
    const std::string json = capprop_report_json(rep);
    CHECK(json.find("\"study\": \"scaling_sweep\"") != std::string::npos);
    CHECK(json.find("\"seed\": 99") != std::string::npos);
    CHECK(capprop_report_runtime_seconds(rep) >= 0.0);

    const auto dir = std::filesystem::temp_directory_path() / "capprop_capi_bundle";
    std::filesystem::remove_all(dir);
    REQUIRE(capprop_report_write(rep, dir.string().c_str(), CAPPROP_EMIT_ALL) == CAPPROP_OK);
    CHECK(std::filesystem::exists(dir / "report.json"));
    CHECK(std::filesystem::exists(dir / "table.csv"));
    CHECK(std::filesystem::exists(dir / "manifest.json"));
    CHECK(slurp(dir / "report.json") == json);

    // report-only bundle
    const auto dir2 = std::filesystem::temp_directory_path() / "capprop_capi_bundle2";
    std::filesystem::remove_all(dir2);
    REQUIRE(capprop_report_write(rep, dir2.string().c_str(), CAPPROP_EMIT_REPORT) == CAPPROP_OK);
    CHECK(std::filesystem::exists(dir2 / "report.json"));
    CHECK(!std::filesystem::exists(dir2 / "table.csv"));

    capprop_report_free(rep);
    capprop_config_free(cfg);
    std::filesystem::remove_all(dir);
    std::filesystem::remove_all(dir2);
}

TEST_CASE("identical seed and config give identical bytes across jobs") {
    auto run_json = [&](int jobs) {
        capprop_config* cfg = nullptr;
        REQUIRE(capprop_config_parse(kConfig, &cfg) == CAPPROP_OK);
        REQUIRE(capprop_config_set_jobs(cfg, jobs) == CAPPROP_OK);
        capprop_report* rep = nullptr;
        REQUIRE(capprop_run(cfg, &rep) == CAPPROP_OK);
        std::string out = capprop_report_json(rep);
        capprop_report_free(rep);
        capprop_config_free(cfg);
        return out;
    };
    const std::string a = run_json(1);
    const std::string b = run_json(8);
    CHECK(a == b);
}

TEST_CASE("compare through the C API") {
    capprop_config* cfg = nullptr;
    REQUIRE(capprop_config_parse(
                R"({"schema_version": 1, "grid": {"n": 128},
                    "architecture": {"variant": "residual", "depth": 33}})",
                &cfg) == CAPPROP_OK);
    capprop_report* rep = nullptr;
    REQUIRE(capprop_compare(cfg, &rep) == CAPPROP_OK);
    CHECK(std::string(capprop_report_json(rep)).find("lattice_semigroup") != std::string::npos);
    capprop_report_free(rep);

    // run without a study is a validation error
    capprop_report* rep2 = nullptr;
    CHECK(capprop_run(cfg, &rep2) == CAPPROP_ERR_VALIDATION);
    CHECK(std::string(capprop_last_error()).find("study") != std::string::npos);
    capprop_config_free(cfg);
}
