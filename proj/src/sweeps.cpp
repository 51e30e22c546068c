#include <fluorsep/metrics.hpp>
#include <fluorsep/parallel.hpp>
#include <fluorsep/random.hpp>
#include <fluorsep/solver_multi.hpp>
#include <fluorsep/solver_single.hpp>
#include <fluorsep/spectral_csv.hpp>
#include <fluorsep/sweeps.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace fluorsep {

namespace {

struct Prepared {
    FixtureSet fixtures;
    std::vector<SurfacePatch> patches;
};

Prepared prepare(const FixtureSet &fixtures, const SweepOptions &options) {
    if (options.patch_count < 1 || options.patch_count > fixtures.patch_count())
        throw std::invalid_argument("sweep: patch_count must be in [1, " +
                                    std::to_string(fixtures.patch_count()) + "]");
    Prepared p{fixtures.grid() == options.grid ? fixtures : fixtures.resampled(options.grid), {}};
    for (int k = 0; k < options.patch_count; ++k)
        p.patches.push_back(p.fixtures.patch(k));
    return p;
}

MultiTuning multi_tuning(const SweepOptions &options) {
    MultiTuning t;
    t.alpha = options.alpha;
    t.beta = options.beta;
    t.eta = options.eta;
    t.max_iterations = options.max_iterations;
    return t;
}

void require_range(const std::vector<int> &values, int lo, int hi, const char *what) {
    if (values.empty())
        throw std::invalid_argument(std::string{"sweep: empty "} + what + " range");
    for (int v : values)
        if (v < lo || v > hi)
            throw std::invalid_argument(std::string{"sweep: "} + what + " value " +
                                        std::to_string(v) + " outside [" + std::to_string(lo) +
                                        ", " + std::to_string(hi) + "]");
}

double donaldson_error(const DonaldsonMatrix &estimate, const SurfacePatch &truth) {
    return rmse(estimate.entries(), truth.donaldson.entries(), true);
}

std::string label(double v) { return format_number(v); }

std::shared_ptr<const ImagingSystem> options_system(const SweepOptions &o) {
    if (o.filters < 0 || o.illuminants < 0 || (o.filters == 0) != (o.illuminants == 0))
        throw std::invalid_argument("sweep: filters and illuminants must both be 0 (bispectral) or both positive");
    if (o.filters == 0)
        return std::make_shared<const ImagingSystem>(make_bispectral_system(o.grid));
    return std::make_shared<const ImagingSystem>(make_rect_system(o.filters, o.illuminants, o.grid));
}

} // namespace

SweepResult sweep_bases(const FixtureSet &fixtures, const std::vector<int> &n_x_values,
                        const std::vector<int> &n_m_values, const SweepOptions &options) {
    const Prepared prep = prepare(fixtures, options);
    const int d = options.grid.size();
    require_range(n_x_values, 1, std::min(d, kFixtureFluorophores), "n_x");
    require_range(n_m_values, 1, std::min(d, kFixtureFluorophores), "n_m");
    const auto system = std::make_shared<const ImagingSystem>(make_bispectral_system(options.grid));

    SweepResult out{"bases", "n_x", "n_m", {}, {}};
    for (int nx : n_x_values) {
        for (int nm : n_m_values) {
            const MultiSolver solver{prep.fixtures.derive_bases(options.n_r, nx, nm),
                                     multi_tuning(options)};
            std::vector<double> errors(prep.patches.size());
            parallel_for(errors.size(), [&](std::size_t k) {
                const auto &patch = prep.patches[k];
                const auto m = simulate(patch, system, calibrate_gain_max_one(patch, *system));
                errors[k] = donaldson_error(solver.solve(m).donaldson, patch);
            });
            const Summary s = summarize(errors);
            out.points.push_back({label(nx), label(nm), s.mean, s.se});
        }
    }
    return out;
}

SweepResult sweep_channels(const FixtureSet &fixtures, const std::vector<int> &filters,
                           const std::vector<int> &illuminants, const SweepOptions &options) {
    const Prepared prep = prepare(fixtures, options);
    const int d = options.grid.size();
    require_range(filters, 1, d, "filters");
    require_range(illuminants, 1, d, "illuminants");
    const MultiSolver solver{prep.fixtures.derive_bases(options.n_r, options.n_x, options.n_m),
                             multi_tuning(options)};

    SweepResult out{"channels", "filters", "illuminants", {}, {}};
    for (int f : filters) {
        for (int l : illuminants) {
            const auto system =
                std::make_shared<const ImagingSystem>(make_rect_system(f, l, options.grid));
            std::vector<double> errors(prep.patches.size());
            parallel_for(errors.size(), [&](std::size_t k) {
                const auto &patch = prep.patches[k];
                const auto m = simulate(patch, system, calibrate_gain_max_one(patch, *system));
                errors[k] = donaldson_error(solver.solve(m).donaldson, patch);
            });
            const Summary s = summarize(errors);
            out.points.push_back({label(f), label(l), s.mean, s.se});
        }
    }
    return out;
}

SweepResult sweep_noise(const FixtureSet &fixtures, const std::vector<double> &snr_db,
                        int instances, const SweepOptions &options) {
    if (snr_db.empty())
        throw std::invalid_argument("sweep: empty SNR ladder");
    for (double s : snr_db)
        if (std::isnan(s) || s == -INFINITY)
            throw std::invalid_argument("sweep: SNR values must be numbers or +infinity");
    if (instances < 2)
        throw std::invalid_argument("sweep: at least 2 noise instances are needed for a standard error");
    const Prepared prep = prepare(fixtures, options);
    const auto system = options_system(options);
    const MultiSolver solver{prep.fixtures.derive_bases(options.n_r, options.n_x, options.n_m),
                             multi_tuning(options)};

    std::vector<double> levels = snr_db;
    std::sort(levels.begin(), levels.end());
    const std::size_t n_patches = prep.patches.size();
    const auto n_inst = static_cast<std::size_t>(instances);

    SweepResult out{"noise", "snr_db", "", {}, {}};
    for (std::size_t li = 0; li < levels.size(); ++li) {
        std::vector<double> errors(n_patches * n_inst);
        parallel_for(errors.size(), [&](std::size_t task) {
            const std::size_t k = task / n_inst;
            const std::size_t inst = task % n_inst;
            const auto &patch = prep.patches[k];
            const auto clean = simulate(patch, system, calibrate_gain_max_one(patch, *system));
            const std::uint64_t seed = stream_seed(options.seed, "noise/" + label(levels[li]), k, inst);
            errors[task] = donaldson_error(solver.solve(add_noise(clean, levels[li], seed)).donaldson, patch);
        });
        double se = 0.0;
        for (std::size_t k = 0; k < n_patches; ++k)
            se += summarize(std::span<const double>{errors.data() + k * n_inst, n_inst}).se;
        se /= static_cast<double>(n_patches);
        out.points.push_back({label(levels[li]), "", summarize(errors).mean, se});
    }

    bool monotone = true;
    for (std::size_t k = 1; k < out.points.size(); ++k) {
        if (levels[k - 1] < 10.0)
            continue;
        const auto &a = out.points[k - 1];
        const auto &b = out.points[k];
        if (b.mean_rmse > a.mean_rmse + std::max(a.std_err, b.std_err))
            monotone = false;
    }
    out.flags["monotone"] = monotone;
    return out;
}

SweepResult sweep_convergence(const FixtureSet &fixtures, const std::vector<int> &checkpoints,
                              const SweepOptions &options) {
    require_range(checkpoints, 1, options.max_iterations, "checkpoint");
    std::vector<int> marks = checkpoints;
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
    const Prepared prep = prepare(fixtures, options);
    const auto system = options_system(options);
    const BasisSet bases = prep.fixtures.derive_bases(options.n_r, options.n_x, options.n_m);
    MultiTuning mt = multi_tuning(options);
    mt.max_iterations = marks.back();
    const MultiSolver multi{bases, mt};

    const std::size_t n_patches = prep.patches.size();
    const std::size_t n_marks = marks.size();
    std::vector<double> multi_err(n_patches * n_marks);
    std::vector<double> single_err(n_patches * n_marks);
    parallel_for(n_patches, [&](std::size_t k) {
        const auto &patch = prep.patches[k];
        const auto m = simulate(patch, system, calibrate_gain_max_one(patch, *system));
        std::size_t next = 0;
        double last = 0.0;
        multi.solve(m, [&](int it, const WeightVector &, const WeightMatrix &w) {
            if (next < n_marks && it == marks[next]) {
                last = donaldson_error(donaldson_from_weights(bases, w), patch);
                multi_err[k * n_marks + next++] = last;
            }
        });
        // converged early: later checkpoints keep the final value
        for (; next < n_marks; ++next)
            multi_err[k * n_marks + next] = last;

        for (std::size_t c = 0; c < n_marks; ++c) {
            SingleTuning st;
            st.alpha = options.alpha;
            st.beta = options.beta;
            st.max_outer_iterations = marks[c];
            st.seed = options.seed;
            single_err[k * n_marks + c] = donaldson_error(estimate_single(m, bases, st).donaldson, patch);
        }
    });

    SweepResult out{"convergence", "iterations", "model", {}, {}};
    for (const auto *model : {"multi", "single"}) {
        const auto &errs = std::string{model} == "multi" ? multi_err : single_err;
        for (std::size_t c = 0; c < n_marks; ++c) {
            std::vector<double> column(n_patches);
            for (std::size_t k = 0; k < n_patches; ++k)
                column[k] = errs[k * n_marks + c];
            const Summary s = summarize(column);
            out.points.push_back({label(marks[c]), model, s.mean, s.se});
        }
    }
    return out;
}

std::string format_sweep_csv(const SweepResult &result) {
    std::string out = "axis1,axis2,mean_rmse,std_err\n";
    for (const auto &p : result.points)
        out += p.axis1 + "," + p.axis2 + "," + format_number(p.mean_rmse) + "," +
               format_number(p.std_err) + "\n";
    return out;
}

SweepPlan sweep_plan(const std::string &name, bool smoke) {
    SweepPlan plan;
    plan.name = name;
    auto &o = plan.options;
    if (name == "bases") {
        if (smoke) {
            o.grid = WavelengthGrid::spanning(380.0, 1000.0, 32);
            o.patch_count = 4;
            plan.axis1 = {3, 6};
            plan.axis2 = {3, 6};
        } else {
            plan.axis1 = plan.axis2 = {3, 6, 9, 12, 15};
        }
    } else if (name == "channels") {
        o.grid = WavelengthGrid::spanning(380.0, 1000.0, 64);
        if (smoke) {
            o.patch_count = 8;
            plan.axis1 = plan.axis2 = {5, 10, 20};
        } else {
            plan.axis1 = plan.axis2 = {5, 10, 15, 20, 30, 40};
        }
    } else if (name == "noise") {
        o.alpha = o.beta = o.eta = 0.01;
        if (smoke) {
            o.grid = WavelengthGrid::spanning(380.0, 1000.0, 32);
            o.patch_count = 4;
            plan.axis1 = {0, 20, 30};
            plan.instances = 3;
        } else {
            o.patch_count = 8;
            plan.axis1 = {0, 5, 10, 15, 20, 25, 30, 40};
            plan.instances = 10;
        }
    } else if (name == "convergence") {
        o.alpha = o.beta = o.eta = 0.01;
        if (smoke) {
            o.grid = WavelengthGrid::spanning(380.0, 1000.0, 32);
            o.patch_count = 4;
            plan.axis1 = {1, 10, 100};
        } else {
            plan.axis1 = {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000};
        }
    } else {
        throw std::invalid_argument("unknown sweep '" + name +
                                    "' (expected bases, channels, noise or convergence)");
    }
    if (smoke) {
        o.n_x = std::min(o.n_x, 8);
        o.n_m = std::min(o.n_m, 8);
    }
    return plan;
}

SweepResult run_sweep(const FixtureSet &fixtures, const SweepPlan &plan) {
    auto ints = [](const std::vector<double> &v) {
        std::vector<int> out;
        for (double x : v) {
            if (x != std::floor(x))
                throw std::invalid_argument("sweep: expected integer axis values");
            out.push_back(static_cast<int>(x));
        }
        return out;
    };
    if (plan.name == "bases")
        return sweep_bases(fixtures, ints(plan.axis1), ints(plan.axis2), plan.options);
    if (plan.name == "channels")
        return sweep_channels(fixtures, ints(plan.axis1), ints(plan.axis2), plan.options);
    if (plan.name == "noise")
        return sweep_noise(fixtures, plan.axis1, plan.instances, plan.options);
    if (plan.name == "convergence")
        return sweep_convergence(fixtures, ints(plan.axis1), plan.options);
    throw std::invalid_argument("unknown sweep '" + plan.name + "'");
}

} // namespace fluorsep
