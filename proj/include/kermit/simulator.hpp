#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "kermit/scenario.hpp"

namespace kermit {

/// Ground truth for one window.
struct WindowTruth {
    WindowIndex t = 0;
    bool transition = false;
    /// Class name, "A+B" for a hybrid; for transition windows the workload
    /// being entered.
    std::string workload;
    std::size_t segment = 0;
};

struct JobRecord {
    WindowIndex t = 0;
    std::string workload;
    Configuration config;
    double runtime = 0.0;
    bool probe = false;
};

struct SimulationTrace {
    std::vector<std::vector<RawSample>> samples;  // per window
    std::vector<WindowTruth> truth;
    std::vector<JobRecord> jobs;
};

/// Noise-free runtime of a class whose optimum sits at `optimum`.
double true_runtime(const WorkloadClass& c, const GridPoint& optimum, const ConfigSpace& space,
                    const GridPoint& point);

/// Exhaustive minimum of `runtime` over the grid; ties go to the first point
/// in lexicographic order. Returns the configuration, its runtime and the
/// number of evaluations.
struct GridOptimum {
    Configuration config;
    double runtime = 0.0;
    std::size_t evaluations = 0;
};
GridOptimum exhaustive_optimum(const ConfigSpace& space, const std::function<double(const GridPoint&)>& runtime);

/// Window-by-window synthetic cluster. Telemetry depends only on the
/// scenario and seed, never on the configurations applied to jobs.
class Simulator {
public:
    Simulator(const Scenario& scenario, std::uint64_t seed);

    struct Frame {
        WindowIndex t = 0;
        double start = 0.0;
        double end = 0.0;
        std::vector<RawSample> samples;
        WindowTruth truth;
    };

    std::size_t window_count() const noexcept { return plan_.size(); }
    bool done() const noexcept { return next_ >= plan_.size(); }
    /// Generates the next window. Throws PreconditionError when done().
    Frame next_window();

    /// Noise-free runtime of window t's workload under `config`.
    double true_runtime(WindowIndex t, const Configuration& config) const;
    /// Runtime of one job in window t. Regular jobs of the same window share
    /// one noise draw; probe jobs draw from their own stream.
    double run_job(WindowIndex t, const Configuration& config, bool probe);
    /// Runtime a regular job in window t would have under `config`; not recorded.
    double counterfactual_runtime(WindowIndex t, const Configuration& config) const;
    /// Exhaustive optimum of window t's workload.
    GridOptimum ground_truth_optimum(WindowIndex t) const;

    const WindowTruth& truth(WindowIndex t) const;
    const std::vector<JobRecord>& jobs() const noexcept { return jobs_; }
    const Scenario& scenario() const noexcept { return scenario_; }

private:
    struct Component {
        FeatureVector mean;
        FeatureVector noise;
    };
    struct RuntimeComponent {
        std::size_t cls = 0;
        GridPoint optimum;
    };
    struct WindowPlan {
        WindowTruth truth;
        std::vector<Component> telemetry;
        std::vector<RuntimeComponent> runtime;
    };

    void build_plan();
    double regular_noise(WindowIndex t) const;
    const WindowPlan& plan(WindowIndex t) const;

    const Scenario& scenario_;
    std::uint64_t seed_;
    std::vector<WindowPlan> plan_;
    std::size_t next_ = 0;
    std::mt19937_64 telemetry_rng_;
    std::mt19937_64 probe_rng_;
    std::vector<JobRecord> jobs_;
};

/// Runs the scenario with every job under the default configuration.
SimulationTrace run(const Scenario& scenario, std::uint64_t seed);

}  // namespace kermit
