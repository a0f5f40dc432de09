#include "capprop/experiments.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "capprop/config_io.hpp"

namespace capprop {

namespace {

/// Runs fn(0..count-1) on up to jobs workers. Results must be written into
/// pre-sized slots keyed by index so the outcome is independent of worker
/// count and scheduling.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
    if (jobs <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int workers = std::min(jobs, count);
    pool.reserve(static_cast<std::size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

void push(RunRecord& r, std::string name, double value) {
    r.metrics.emplace_back(std::move(name), value);
}

void param(RunRecord& r, std::string name, double value) {
    r.params.emplace_back(std::move(name), value);
}

double scalar_m2(const StencilGenerator& g) {
    const Moment2 m = g.second_moment();
    return m.xx + m.yy;
}

std::string num(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Width of the one-hot response predicted by the exact variance law.
double predicted_width(double c, double m2, int depth, double p) {
    return std::sqrt(c * m2 * std::pow(static_cast<double>(depth - 1), 1.0 - p));
}

ExperimentReport make_report(const ExperimentConfig& config, const char* kind) {
    ExperimentReport rep;
    rep.kind = kind;
    rep.study = to_string(config.study);
    rep.config_json = config_to_json(config);
    if (config.grid.boundary == Boundary::absorbing)
        rep.notes.push_back("absorbing grid: conservation_residual measures boundary mass loss");
    return rep;
}

double conservation_residual(double expected, double actual) {
    return std::fabs(actual - expected) / (expected != 0.0 ? std::fabs(expected) : 1.0);
}

std::vector<double> copy_values(const CapacityProfile& p) {
    return {p.values().begin(), p.values().end()};
}

/// Memory length: smallest k such that the k most-recent inputs' side
/// capacities hold at least half of the total capacity. Returns 0 when the
/// side stream never reaches half (memory undefined).
int memory_length(const LeakResult& result, double total_mass) {
    double cum = 0.0;
    for (std::size_t k = 0; k < result.side_capacities.size(); ++k) {
        cum += result.side_capacities[k].total_mass();
        if (cum >= 0.5 * total_mass) return static_cast<int>(k) + 1;
    }
    return 0;
}

} // namespace

const char* to_string(Study s) {
    switch (s) {
        case Study::convergence: return "convergence";
        case Study::scaling_sweep: return "scaling_sweep";
        case Study::dilated_erf: return "dilated_erf";
        case Study::multichannel_xavier: return "multichannel_xavier";
        case Study::leak_split: return "leak_split";
        case Study::recurrent_memory: return "recurrent_memory";
    }
    return "?";
}

std::optional<Study> study_from_string(std::string_view s) {
    for (Study v : {Study::convergence, Study::scaling_sweep, Study::dilated_erf,
                    Study::multichannel_xavier, Study::leak_split, Study::recurrent_memory})
        if (s == to_string(v)) return v;
    return std::nullopt;
}

std::string classify_exponent(double exponent, double band) {
    if (exponent > band) return "shattering-divergent";
    if (exponent < -band) return "trivial-contraction";
    return "non-degenerate";
}

CapacityProfile BumpSpec::build(const Grid& grid) const {
    const int where = site < 0 ? grid.center() : site;
    if (where < 0 || where >= grid.sites())
        throw std::invalid_argument("initial.site: out of range for the grid");
    if (!(rate > 0.0) || !std::isfinite(rate))
        throw std::invalid_argument("initial.rate: must be finite and > 0");
    if (kind == Kind::one_hot) {
        CapacityProfile p = make_one_hot(grid, where);
        if (rate != 1.0)
            for (double& v : p.values()) v *= rate;
        return p;
    }
    if (!(sigma > 0.0)) throw std::invalid_argument("initial.sigma: must be > 0");
    const int cx = where / grid.extent[1];
    const int cy = where % grid.extent[1];
    CapacityProfile p(grid, 1);
    auto axis_term = [&](int i, int center, int n) {
        double d = std::fabs(static_cast<double>(i - center));
        if (grid.boundary == Boundary::periodic) d = std::min(d, n - d);
        return std::exp(-d * d / (2.0 * sigma * sigma));
    };
    double total = 0.0;
    for (int x = 0; x < grid.extent[0]; ++x)
        for (int y = 0; y < grid.extent[1]; ++y) {
            double v = axis_term(x, cx, grid.extent[0]);
            if (grid.dim == 2) v *= axis_term(y, cy, grid.extent[1]);
            p.at(0, grid.index(x, y)) = v;
            total += v;
        }
    for (double& v : p.values()) v *= rate / total;
    return p;
}

bool ExperimentConfig::has_sweep() const {
    return !depth_list.empty() || !exponent_list.empty() || !channel_list.empty() ||
           !dilation_list.empty() || !alpha_list.empty();
}

void ExperimentConfig::validate() const {
    if (schema_version != 1)
        throw std::invalid_argument("schema_version: expected 1");
    if (jobs < 1) throw std::invalid_argument("jobs: must be >= 1");
    if (!(degeneracy_band > 0.0))
        throw std::invalid_argument("thresholds.degeneracy_band: must be > 0");
    if (!(mis_scale_rate > 0.0) || mis_scale_rate >= 1.0)
        throw std::invalid_argument("thresholds.mis_scale_rate: must lie in (0, 1)");
    for (std::size_t i = 1; i < depth_list.size(); ++i)
        if (depth_list[i] <= depth_list[i - 1])
            throw std::invalid_argument("sweep.depth: must be strictly increasing");
    for (int l : depth_list)
        if (l < 2) throw std::invalid_argument("sweep.depth: entries must be >= 2");

    switch (study) {
        case Study::convergence:
            if (depth_list.size() < 2)
                throw std::invalid_argument("sweep.depth: convergence needs at least 2 depths");
            if (base.scaling_exponent != 1.0)
                throw std::invalid_argument(
                    "architecture.scaling_exponent: convergence runs at p = 1");
            break;
        case Study::scaling_sweep:
            if (depth_list.size() < 2)
                throw std::invalid_argument("sweep.depth: scaling_sweep needs at least 2 depths");
            if (exponent_list.empty())
                throw std::invalid_argument("sweep.p: scaling_sweep needs at least one exponent");
            for (double p : exponent_list)
                if (!(p >= 0.0)) throw std::invalid_argument("sweep.p: entries must be >= 0");
            break;
        case Study::dilated_erf:
            if (depth_list.size() < 2)
                throw std::invalid_argument("sweep.depth: dilated_erf needs at least 2 depths");
            if (dilation_list.empty())
                throw std::invalid_argument("sweep.lambda: dilated_erf needs at least one ratio");
            for (double l : dilation_list)
                if (!(l >= 1.0)) throw std::invalid_argument("sweep.lambda: entries must be >= 1");
            break;
        case Study::multichannel_xavier:
            if (channel_list.empty())
                throw std::invalid_argument("sweep.channels: multichannel_xavier needs entries");
            for (int c : channel_list)
                if (c < 1) throw std::invalid_argument("sweep.channels: entries must be >= 1");
            break;
        case Study::leak_split:
            if (alpha_list.empty())
                throw std::invalid_argument("sweep.alpha: leak_split needs at least one value");
            if (depth_list.empty())
                throw std::invalid_argument("sweep.depth: leak_split needs at least one depth");
            for (double a : alpha_list)
                if (!(a >= 0.0)) throw std::invalid_argument("sweep.alpha: entries must be >= 0");
            break;
        case Study::recurrent_memory:
            if (depth_list.empty())
                throw std::invalid_argument("sweep.depth: recurrent_memory needs at least one length");
            if (alpha_list.size() != 1)
                throw std::invalid_argument("sweep.alpha: recurrent_memory takes exactly one value");
            break;
    }
}

double RunRecord::metric(std::string_view name) const {
    for (const auto& [k, v] : metrics)
        if (k == name) return v;
    throw std::invalid_argument("record: no metric named " + std::string(name));
}

bool RunRecord::has_metric(std::string_view name) const {
    for (const auto& [k, v] : metrics)
        if (k == name) return true;
    return false;
}

ExperimentReport run_convergence(const ExperimentConfig& config) {
    config.validate();
    ExperimentReport rep = make_report(config, "study");

    const StencilGenerator& gen = config.base.generators.front();
    const double c = config.base.capacity_rate;
    const double m2 = scalar_m2(gen);
    const double d_coeff = c * m2 / 2.0;
    const CapacityProfile init = config.initial.build(config.grid);

    const CapacityProfile semi = semigroup_solution(gen, c, 1.0, init);
    const CapacityProfile gauss = heat_kernel_solution(DiffusionModel::constant(d_coeff, init), 1.0);

    const int count = static_cast<int>(config.depth_list.size());
    rep.records.resize(static_cast<std::size_t>(count));
    parallel_for(count, config.jobs, [&](int i) {
        ArchitectureSpec spec = config.base;
        spec.depth = config.depth_list[static_cast<std::size_t>(i)];
        const Trajectory traj = propagate_residual(spec, init);
        RunRecord rec;
        rec.index = i;
        param(rec, "L", spec.depth);
        push(rec, "l1_vs_continuum", lp_error(traj.final_profile(), semi, Norm::l1));
        push(rec, "l1_vs_gaussian", lp_error(traj.final_profile(), gauss, Norm::l1));
        push(rec, "mass", traj.final_profile().total_mass());
        push(rec, "conservation_residual",
             conservation_residual(init.total_mass(), traj.final_profile().total_mass()));
        rep.records[static_cast<std::size_t>(i)] = std::move(rec);
    });

    std::vector<std::pair<double, double>> pts;
    for (const auto& rec : rep.records)
        pts.emplace_back(rec.params.front().second, rec.metric("l1_vs_continuum"));
    const PowerLawFit fit = fit_power_law(pts);
    rep.fits.push_back({"l1_vs_continuum_vs_L", fit.exponent, fit.prefactor, fit.r2});
    rep.notes.push_back("continuum reference: exact-in-time lattice diffusion (spectral); "
                        "gaussian reference: sampled heat kernel, D = c*m2/2");
    return rep;
}

ExperimentReport run_scaling_sweep(const ExperimentConfig& config) {
    config.validate();
    ExperimentReport rep = make_report(config, "study");

    const double c = config.base.capacity_rate;
    const double m2 = scalar_m2(config.base.generators.front());
    const CapacityProfile init = config.initial.build(config.grid);
    const int nl = static_cast<int>(config.depth_list.size());
    const int np = static_cast<int>(config.exponent_list.size());

    rep.records.resize(static_cast<std::size_t>(np) * nl);
    parallel_for(np * nl, config.jobs, [&](int i) {
        const double p = config.exponent_list[static_cast<std::size_t>(i / nl)];
        const int depth = config.depth_list[static_cast<std::size_t>(i % nl)];
        RunRecord rec;
        rec.index = i;
        param(rec, "p", p);
        param(rec, "L", depth);
        const double eps = c * std::pow(static_cast<double>(depth - 1), -p);
        const double width_pred = predicted_width(c, m2, depth, p);
        if (eps > 1.0) {
            rec.flags.push_back("epsilon-overflow");
        } else if (6.0 * width_pred > config.grid.extent[0]) {
            rec.flags.push_back("grid-overflow");
        } else {
            ArchitectureSpec spec = config.base;
            spec.depth = depth;
            spec.scaling_exponent = p;
            const Trajectory traj = propagate_residual(spec, init);
            const ProfileStats stats = profile_stats(traj.final_profile());
            push(rec, "std_width", stats.std_width);
            push(rec, "quantile_width_99", quantile_width(traj.final_profile(), 0.99));
            push(rec, "predicted_width", width_pred);
            push(rec, "mass", stats.mass);
        }
        rep.records[static_cast<std::size_t>(i)] = std::move(rec);
    });

    for (int j = 0; j < np; ++j) {
        const double p = config.exponent_list[static_cast<std::size_t>(j)];
        std::vector<std::pair<double, double>> pts;
        for (int i = j * nl; i < (j + 1) * nl; ++i) {
            const auto& rec = rep.records[static_cast<std::size_t>(i)];
            if (rec.flags.empty()) pts.emplace_back(rec.params[1].second, rec.metric("std_width"));
        }
        if (pts.size() < 2) {
            rep.notes.push_back("p=" + num(p) + ": too few valid depths to fit");
            continue;
        }
        const PowerLawFit fit = fit_power_law(pts);
        rep.fits.push_back({"width_vs_L@p=" + num(p), fit.exponent, fit.prefactor, fit.r2});
        ClassificationRecord cls;
        cls.p = p;
        cls.exponent = fit.exponent;
        cls.predicted = (1.0 - p) / 2.0;
        cls.band = config.degeneracy_band;
        cls.verdict = classify_exponent(fit.exponent, config.degeneracy_band);
        rep.classifications.push_back(std::move(cls));
    }
    return rep;
}

ExperimentReport run_dilated_erf(const ExperimentConfig& config) {
    config.validate();
    ExperimentReport rep = make_report(config, "study");

    const StencilGenerator& gen = config.base.generators.front();
    const double m2 = scalar_m2(gen);
    const CapacityProfile init = config.initial.build(config.grid);
    const int nl = static_cast<int>(config.depth_list.size());
    const int nr = static_cast<int>(config.dilation_list.size());

    rep.records.resize(static_cast<std::size_t>(nr) * nl);
    parallel_for(nr * nl, config.jobs, [&](int i) {
        const double lambda = config.dilation_list[static_cast<std::size_t>(i / nl)];
        const int depth = config.depth_list[static_cast<std::size_t>(i % nl)];
        RunRecord rec;
        rec.index = i;
        param(rec, "lambda", lambda);
        param(rec, "L", depth);

        ArchitectureSpec spec = config.base;
        spec.variant = Variant::dilated;
        spec.dilation_ratio = lambda;
        spec.depth = depth;
        const double var_pred = predicted_variance(spec);
        const double reach = 2.0 * gen.radius() * static_cast<double>(spec.max_dilation());
        if (reach >= config.grid.extent[0] || 6.0 * std::sqrt(var_pred) > config.grid.extent[0]) {
            rec.flags.push_back("grid-overflow");
        } else {
            const Trajectory traj = propagate_dilated(spec, init);
            const ProfileStats stats = profile_stats(traj.final_profile());
            push(rec, "std_width", stats.std_width);
            push(rec, "quantile_width_99", quantile_width(traj.final_profile(), 0.99));
            push(rec, "predicted_width", std::sqrt(var_pred));
            push(rec, "width_ratio", stats.std_width / std::sqrt(var_pred));
            push(rec, "erf_scale", std::pow(lambda, depth) / std::sqrt(static_cast<double>(depth)));
            if (lambda > 1.0)
                push(rec, "v_smooth", v_integral(lambda, depth));
            push(rec, "mass", stats.mass);
        }
        rep.records[static_cast<std::size_t>(i)] = std::move(rec);
    });

    for (int j = 0; j < nr; ++j) {
        const double lambda = config.dilation_list[static_cast<std::size_t>(j)];
        if (lambda <= 1.0) continue;
        std::vector<std::pair<double, double>> pts;
        for (int i = j * nl; i < (j + 1) * nl; ++i) {
            const auto& rec = rep.records[static_cast<std::size_t>(i)];
            if (rec.flags.empty()) pts.emplace_back(rec.metric("erf_scale"), rec.metric("std_width"));
        }
        if (pts.size() < 2) {
            rep.notes.push_back("lambda=" + num(lambda) + ": too few valid depths to fit");
            continue;
        }
        const PowerLawFit fit = fit_power_law(pts);
        rep.fits.push_back(
            {"width_vs_erf_scale@lambda=" + num(lambda), fit.exponent, fit.prefactor, fit.r2});
    }
    rep.notes.push_back("erf_scale = lambda^L / sqrt(L); predicted width from the exact variance law "
                        "eps*m2*sum(d_j^2), m2 = " + num(m2));
    return rep;
}

ExperimentReport run_multichannel_xavier(const ExperimentConfig& config) {
    config.validate();
    ExperimentReport rep = make_report(config, "study");

    const double c = config.base.capacity_rate;
    const StencilGenerator& gen = config.base.generators.front();
    const Grid& grid = config.grid;
    const int depth = config.base.depth;

    ArchitectureSpec ref_spec = config.base;
    ref_spec.variant = Variant::residual;
    ref_spec.channels = 1;
    ref_spec.channel_blocks.clear();
    const CapacityProfile ref_init = config.initial.build(grid);
    const CapacityProfile ref_final = propagate_residual(ref_spec, ref_init).final_profile();
    const double ref_width = profile_stats(ref_final).std_width;

    const int count = static_cast<int>(config.channel_list.size());
    rep.records.resize(static_cast<std::size_t>(count));
    parallel_for(count, config.jobs, [&](int i) {
        const int channels = config.channel_list[static_cast<std::size_t>(i)];
        RunRecord rec;
        rec.index = i;
        param(rec, "C", channels);

        ArchitectureSpec spec = config.base;
        spec.variant = Variant::multichannel;
        spec.channels = channels;
        spec.generators.clear();
        spec.channel_blocks.assign(static_cast<std::size_t>(channels) * channels, gen);

        const int site = config.initial.site < 0 ? grid.center() : config.initial.site;
        const CapacityProfile init = make_one_hot(grid, site, 0, channels);
        const CapacityProfile collapsed =
            collapse_channels(propagate_multichannel(spec, init).final_profile());
        push(rec, "l1_collapse_deviation", lp_error(collapsed, ref_final, Norm::l1));
        push(rec, "mass", collapsed.total_mass());

        // Mis-scaled control: drop the 1/C in epsilon.
        ArchitectureSpec control = spec;
        control.capacity_rate = c * channels;
        const CapacityProfile control_collapsed =
            collapse_channels(propagate_multichannel(control, init).final_profile());
        const double control_width = profile_stats(control_collapsed).std_width;
        push(rec, "width_ratio_misscaled", control_width / ref_width);
        push(rec, "expected_width_ratio", std::sqrt(static_cast<double>(channels)));
        rep.records[static_cast<std::size_t>(i)] = std::move(rec);
    });

    rep.notes.push_back("reference: single-channel residual run at the same capacity rate; "
                        "control drops the 1/C scaling (depth " + std::to_string(depth) + ")");
    return rep;
}

ExperimentReport run_leak_split(const ExperimentConfig& config) {
    config.validate();
    ExperimentReport rep = make_report(config, "study");

    const CapacityProfile init = config.initial.build(config.grid);
    const double mass0 = init.total_mass();
    const int nl = static_cast<int>(config.depth_list.size());
    const int na = static_cast<int>(config.alpha_list.size());

    // Per (alpha, L) one record, plus one mis-scaled control per L.
    rep.records.resize(static_cast<std::size_t>(na) * nl + nl);
    parallel_for(na * nl + nl, config.jobs, [&](int i) {
        RunRecord rec;
        rec.index = i;
        if (i < na * nl) {
            const double alpha = config.alpha_list[static_cast<std::size_t>(i / nl)];
            const int depth = config.depth_list[static_cast<std::size_t>(i % nl)];
            param(rec, "alpha", alpha);
            param(rec, "L", depth);
            ArchitectureSpec spec = config.base;
            spec.variant = Variant::leak;
            spec.depth = depth;
            spec.leak = LeakSchedule::constant(alpha);
            const LeakResult result = propagate_with_leak(spec, init);
            const LeakSplit split = leak_split_analytic(spec.leak, 0.0, init);
            const double mass_x = result.input_capacity.total_mass();
            push(rec, "mass_x", mass_x);
            push(rec, "mass_y", result.total_side_mass());
            push(rec, "analytic_mass_x", split.mass_x);
            push(rec, "mass_x_rel_error", std::fabs(mass_x - split.mass_x) / split.mass_x);
            push(rec, "conservation_residual",
                 conservation_residual(mass0, mass_x + result.total_side_mass()));
        } else {
            // gamma held constant in L: alpha_eff * eps = mis_scale_rate.
            const int depth = config.depth_list[static_cast<std::size_t>(i - na * nl)];
            param(rec, "L", depth);
            rec.flags.push_back("mis-scaled-control");
            ArchitectureSpec spec = config.base;
            spec.variant = Variant::leak;
            spec.depth = depth;
            spec.leak = LeakSchedule::constant(config.mis_scale_rate / spec.epsilon());
            const LeakResult result = propagate_with_leak(spec, init);
            push(rec, "mass_x", result.input_capacity.total_mass());
            push(rec, "conservation_residual",
                 conservation_residual(mass0,
                                       result.input_capacity.total_mass() + result.total_side_mass()));
        }
        rep.records[static_cast<std::size_t>(i)] = std::move(rec);
    });
    return rep;
}

ExperimentReport run_recurrent_memory(const ExperimentConfig& config) {
    config.validate();
    ExperimentReport rep = make_report(config, "study");

    const double alpha = config.alpha_list.front();
    const CapacityProfile init = config.initial.build(config.grid);
    const double mass0 = init.total_mass();
    const int count = static_cast<int>(config.depth_list.size());

    rep.records.resize(static_cast<std::size_t>(count) * 2);
    parallel_for(count * 2, config.jobs, [&](int i) {
        const int n_seq = config.depth_list[static_cast<std::size_t>(i % count)];
        const bool control = i >= count;
        RunRecord rec;
        rec.index = i;
        param(rec, "N", n_seq);
        param(rec, "alpha", alpha);

        ArchitectureSpec spec = config.base;
        spec.variant = Variant::recurrent;
        spec.depth = n_seq;
        spec.leak = LeakSchedule::constant(alpha);
        if (control) {
            rec.flags.push_back("mis-scaled-control");
            // epsilon held constant in N instead of c/N.
            spec.capacity_rate = config.mis_scale_rate * static_cast<double>(n_seq - 1);
        }
        const LeakResult result = propagate_recurrent(spec, init);
        const int m = memory_length(result, mass0);
        if (m == 0) {
            rec.flags.push_back("memory-undefined");
        } else {
            push(rec, "memory_length", m);
            push(rec, "m_over_n", static_cast<double>(m) / n_seq);
        }
        push(rec, "mass_x0", result.input_capacity.total_mass());
        push(rec, "side_mass", result.total_side_mass());
        push(rec, "conservation_residual",
             conservation_residual(mass0,
                                   result.input_capacity.total_mass() + result.total_side_mass()));
        rep.records[static_cast<std::size_t>(i)] = std::move(rec);
    });
    rep.notes.push_back("memory_length: smallest k whose k most-recent side capacities hold >= 50% "
                        "of the total capacity");
    return rep;
}

ExperimentReport run_study(const ExperimentConfig& config) {
    if (!config.study_set)
        throw std::invalid_argument("study: required to run a study (compare does not need one)");
    switch (config.study) {
        case Study::convergence: return run_convergence(config);
        case Study::scaling_sweep: return run_scaling_sweep(config);
        case Study::dilated_erf: return run_dilated_erf(config);
        case Study::multichannel_xavier: return run_multichannel_xavier(config);
        case Study::leak_split: return run_leak_split(config);
        case Study::recurrent_memory: return run_recurrent_memory(config);
    }
    throw std::invalid_argument("study: unknown study");
}

ExperimentReport run_compare(const ExperimentConfig& config) {
    ExperimentReport rep = make_report(config, "compare");
    const ArchitectureSpec& spec = config.base;
    const Grid& grid = config.grid;
    const double c = spec.capacity_rate;

    RunRecord rec;
    rec.index = 0;
    param(rec, "L", spec.depth);

    switch (spec.variant) {
        case Variant::residual: {
            const CapacityProfile init = config.initial.build(grid);
            const Trajectory traj = propagate_residual(spec, init);
            const CapacityProfile semi =
                semigroup_solution(spec.generators.front(), c, 1.0, init);
            const double d_coeff = c * scalar_m2(spec.generators.front()) / 2.0;
            const CapacityProfile gauss =
                heat_kernel_solution(DiffusionModel::constant(d_coeff, init), 1.0);
            push(rec, "l1_vs_continuum", lp_error(traj.final_profile(), semi, Norm::l1));
            push(rec, "l2_vs_continuum", lp_error(traj.final_profile(), semi, Norm::l2));
            push(rec, "linf_vs_continuum", lp_error(traj.final_profile(), semi, Norm::linf));
            push(rec, "l1_vs_gaussian", lp_error(traj.final_profile(), gauss, Norm::l1));
            push(rec, "conservation_residual",
                 conservation_residual(init.total_mass(), traj.final_profile().total_mass()));
            rep.profiles = ProfilePair{"lattice_semigroup", copy_values(traj.final_profile()),
                                       copy_values(semi)};
            break;
        }
        case Variant::multidim: {
            const CapacityProfile init = config.initial.build(grid);
            const Trajectory traj = propagate_residual(spec, init);
            const Moment2 m2 = spec.generators.front().second_moment();
            DiffusionModel model = DiffusionModel::with_tensor(
                DiffusionTensor{c * m2.xx / 2.0, c * m2.xy / 2.0, c * m2.yy / 2.0}, init);
            const CapacityProfile gauss = heat_kernel_solution(model, 1.0);
            const int fine = std::max(16 * spec.steps(),
                                      static_cast<int>(std::ceil(2.0 * c * (m2.xx + m2.yy))) + 1);
            const CapacityProfile pde = solve_pde(model, fine).final_profile();
            push(rec, "l1_vs_refined_pde", lp_error(traj.final_profile(), pde, Norm::l1));
            push(rec, "l1_vs_gaussian", lp_error(traj.final_profile(), gauss, Norm::l1));
            push(rec, "conservation_residual",
                 conservation_residual(init.total_mass(), traj.final_profile().total_mass()));
            rep.profiles = ProfilePair{"refined_pde", copy_values(traj.final_profile()),
                                       copy_values(pde)};
            break;
        }
        case Variant::skip_source:
        case Variant::cumulative: {
            const CapacityProfile src_profile = config.source.build(grid);
            SourceFn source = [&](double) { return src_profile; };
            const Trajectory traj = propagate_with_source(spec, source);
            const double d_coeff = c * scalar_m2(spec.generators.front()) / 2.0;
            DiffusionModel model = DiffusionModel::constant(d_coeff, CapacityProfile(grid, 1));
            model.source = source;
            const CapacityProfile duh = duhamel_solution(model, 1.0, spec.steps());
            push(rec, "l1_vs_duhamel", lp_error(traj.final_profile(), duh, Norm::l1));
            push(rec, "l2_vs_duhamel", lp_error(traj.final_profile(), duh, Norm::l2));
            push(rec, "linf_vs_duhamel", lp_error(traj.final_profile(), duh, Norm::linf));
            push(rec, "mass", traj.final_profile().total_mass());
            rep.profiles = ProfilePair{"duhamel", copy_values(traj.final_profile()),
                                       copy_values(duh)};
            break;
        }
        case Variant::leak:
        case Variant::bias:
        case Variant::recurrent: {
            const CapacityProfile init = config.initial.build(grid);
            const LeakResult result = spec.variant == Variant::recurrent
                                          ? propagate_recurrent(spec, init)
                                          : propagate_with_leak(spec, init);
            const LeakSplit split = leak_split_analytic(spec.leak, 0.0, init);
            const double mass_x = result.input_capacity.total_mass();
            push(rec, "mass_x", mass_x);
            push(rec, "analytic_mass_x", split.mass_x);
            push(rec, "mass_x_rel_error", std::fabs(mass_x - split.mass_x) /
                                              (split.mass_x != 0.0 ? split.mass_x : 1.0));
            push(rec, "conservation_residual",
                 conservation_residual(init.total_mass(),
                                       mass_x + result.total_side_mass()));
            // Continuum input capacity: absorption times the diffusion limit.
            CapacityProfile semi = semigroup_solution(spec.generators.front(), c, 1.0, init);
            const double decay = std::exp(-spec.leak.integral01());
            for (double& v : semi.values()) v *= decay;
            push(rec, "l1_vs_continuum", lp_error(result.input_capacity, semi, Norm::l1));
            rep.profiles = ProfilePair{"absorbed_semigroup", copy_values(result.input_capacity),
                                       copy_values(semi)};
            break;
        }
        case Variant::dilated: {
            const CapacityProfile init = config.initial.build(grid);
            const Trajectory traj = propagate_dilated(spec, init);
            const double var_pred = predicted_variance(spec);
            const ProfileStats stats = profile_stats(traj.final_profile());
            push(rec, "std_width", stats.std_width);
            push(rec, "predicted_width", std::sqrt(var_pred));
            push(rec, "width_ratio", stats.std_width / std::sqrt(var_pred));
            if (spec.dilation_ratio > 1.0)
                push(rec, "v_smooth", v_integral(spec.dilation_ratio, spec.depth));
            push(rec, "conservation_residual",
                 conservation_residual(init.total_mass(), stats.mass));
            const DiffusionModel model =
                DiffusionModel::constant(var_pred / 2.0, init);
            const CapacityProfile gauss = heat_kernel_solution(model, 1.0);
            push(rec, "l1_vs_gaussian", lp_error(traj.final_profile(), gauss, Norm::l1));
            rep.profiles = ProfilePair{"gaussian_matched_variance",
                                       copy_values(traj.final_profile()), copy_values(gauss)};
            break;
        }
        case Variant::multichannel: {
            const int site = config.initial.site < 0 ? grid.center() : config.initial.site;
            const CapacityProfile init = make_one_hot(grid, site, 0, spec.channels);
            const Trajectory traj = propagate_multichannel(spec, init);
            const CapacityProfile collapsed = collapse_channels(traj.final_profile());
            const CapacityProfile semi = semigroup_solution(
                spec.channel_blocks.front(), c, 1.0, collapse_channels(init));
            push(rec, "l1_vs_continuum", lp_error(collapsed, semi, Norm::l1));
            push(rec, "conservation_residual",
                 conservation_residual(init.total_mass(), traj.final_profile().total_mass()));
            rep.profiles = ProfilePair{"lattice_semigroup", copy_values(collapsed),
                                       copy_values(semi)};
            break;
        }
    }
    rep.records.push_back(std::move(rec));
    return rep;
}

} // namespace capprop
