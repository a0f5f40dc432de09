#ifndef CAPPROP_EXPERIMENTS_HPP
#define CAPPROP_EXPERIMENTS_HPP

#include <cstdint>
#include <map>
#include <string>

#include "capprop/diffusion.hpp"
#include "capprop/stats.hpp"

namespace capprop {

enum class Study {
    convergence,
    scaling_sweep,
    dilated_erf,
    multichannel_xavier,
    leak_split,
    recurrent_memory,
};

const char* to_string(Study s);
std::optional<Study> study_from_string(std::string_view s);

/// Spatial shape of an initial profile or source density.
struct BumpSpec {
    enum class Kind { one_hot, gaussian } kind = Kind::one_hot;
    int site = -1;        // flat index; -1 means grid center
    double sigma = 1.0;   // gaussian only
    double rate = 1.0;    // total mass (sources: mass per unit time)

    CapacityProfile build(const Grid& grid) const;
};

/// Config-driven study: the architecture to sweep, the sweep lists, grid and
/// seed. validate() reports every violation with the offending field name.
struct ExperimentConfig {
    int schema_version = 1;
    Study study = Study::convergence;
    bool study_set = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
    Grid grid = Grid::line(512);
    ArchitectureSpec base;
    std::vector<int> depth_list;        // L (or N) sweep
    std::vector<double> exponent_list;  // p sweep
    std::vector<int> channel_list;      // C sweep
    std::vector<double> dilation_list;  // lambda sweep
    std::vector<double> alpha_list;     // constant leak sweep
    double degeneracy_band = 0.05;
    double mis_scale_rate = 0.1;        // per-step rate of the mis-scaled controls
    BumpSpec initial;
    BumpSpec source;
    int jobs = 1;

    bool has_sweep() const;
    void validate() const; // throws std::invalid_argument naming the field
};

struct RunRecord {
    int index = 0;
    std::vector<std::pair<std::string, double>> params;
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<std::string> flags;

    double metric(std::string_view name) const; // throws if absent
    bool has_metric(std::string_view name) const;
};

struct FitRecord {
    std::string name;
    double exponent = 0.0;
    double prefactor = 0.0;
    double r2 = 0.0;
};

struct ClassificationRecord {
    double p = 0.0;
    double exponent = 0.0;
    double predicted = 0.0; // (1 - p) / 2
    double band = 0.05;
    std::string verdict;    // shattering-divergent | non-degenerate | trivial-contraction
};

/// Final profiles emitted by compare runs (discrete vs continuum).
struct ProfilePair {
    std::string continuum_kind;
    std::vector<double> discrete;
    std::vector<double> continuum;
};

struct ExperimentReport {
    int schema_version = 1;
    std::string kind;  // "study" or "compare"
    std::string study;
    std::string config_json; // canonical echo of the resolved config
    std::vector<RunRecord> records;
    std::vector<FitRecord> fits;
    std::vector<ClassificationRecord> classifications;
    std::vector<std::string> notes;
    std::optional<ProfilePair> profiles;
    double runtime_seconds = 0.0; // not serialized; reruns must be byte-identical
};

/// Dispatch on config.study. Sweep points run on config.jobs workers; the
/// report assembly is ordered by sweep index, so results are identical for
/// any worker count.
ExperimentReport run_study(const ExperimentConfig& config);

ExperimentReport run_convergence(const ExperimentConfig& config);
ExperimentReport run_scaling_sweep(const ExperimentConfig& config);
ExperimentReport run_dilated_erf(const ExperimentConfig& config);
ExperimentReport run_multichannel_xavier(const ExperimentConfig& config);
ExperimentReport run_leak_split(const ExperimentConfig& config);
ExperimentReport run_recurrent_memory(const ExperimentConfig& config);

/// Discrete propagator vs the matching continuum solution for one
/// architecture; emits both final profiles and their Lp errors.
ExperimentReport run_compare(const ExperimentConfig& config);

/// Degeneracy verdict for a fitted width exponent.
std::string classify_exponent(double exponent, double band);

} // namespace capprop

#endif
