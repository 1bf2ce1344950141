#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "kermit/discovery.hpp"
#include "kermit/forest.hpp"
#include "kermit/metrics.hpp"
#include "kermit/plugin.hpp"
#include "kermit/predictor.hpp"
#include "kermit/scenario.hpp"
#include "kermit/stream_store.hpp"
#include "kermit/zsl.hpp"

namespace kermit {

struct RunSettings {
    DiscoveryParams discovery;
    /// Windows between off-line runs; each run consumes every window
    /// received since the previous one.
    std::size_t interval = 50;
    PluginParams plugin;
    /// Sync tolerance in window lengths.
    double sync_windows = 2.0;
    TrainingSetParams training;
    ForestParams forest;
    std::size_t predictor_order = 3;
    std::size_t zsl_instances = 200;
    std::uint64_t model_seed = 17;

    /// Applies `overrides` (keys as in the scenario "settings" object).
    /// Throws InvalidScenario on unknown keys or bad values.
    void apply(const nlohmann::json& overrides);
    void validate(std::size_t feature_count) const;
};

/// One KERMIT instance: on-line subsystem (detection, classification,
/// prediction, plug-in) and off-line subsystem (discovery, training) over a
/// knowledge base rooted at `kb_root`.
class KermitSystem {
public:
    KermitSystem(const std::filesystem::path& kb_root, FeatureSchema schema, double window_length,
                 ConfigSpace space, RunSettings settings);

    struct Step {
        WindowIndex t = 0;
        bool flagged = false;
        Label label = kUnknownLabel;
        std::optional<Label> transition_label;
        WorkloadContext context;
        Horizons horizons;
    };

    /// Ingests one window of raw samples, runs the on-line pipeline and
    /// emits the window's context. Runs discovery and training when due.
    Step observe(std::span<const RawSample> samples);

    /// Plug-in call for a resource request at time `now`.
    PluginDecision request_configuration(const WorkloadContext& ctx, double now, const Objective& objective);

    /// Off-line pass over every window not yet discovered, if enough remain.
    void finish();

    KnowledgeBase& kb() noexcept { return kb_; }
    const WorkloadDB& db() const noexcept { return kb_.workloads(); }
    const WindowStreams& streams() const noexcept { return streams_; }
    const ConfigSpace& space() const noexcept { return space_; }
    const RunSettings& settings() const noexcept { return settings_; }
    const std::optional<FeatureScale>& scale() const noexcept { return scale_; }
    const std::vector<DiscoveryReport>& reports() const noexcept { return reports_; }
    const std::vector<Label>& online_labels() const noexcept { return online_labels_; }
    const TransitionRegistry& transitions() const noexcept { return registry_; }
    const ForestModel* workload_model() const noexcept { return workload_model_.get(); }
    const ForestModel* transition_model() const noexcept { return transition_model_.get(); }
    const SequenceModel* predictor() const noexcept { return predictor_.get(); }

private:
    void run_discovery();
    void train();
    Label classify(const ObservationWindow& w) const;

    FeatureSchema schema_;
    ConfigSpace space_;
    RunSettings settings_;
    KnowledgeBase kb_;
    WindowStreams streams_;
    ContextEmitter contexts_;
    std::size_t pending_from_ = 0;
    std::optional<FeatureScale> scale_;
    std::vector<DiscoveryReport> reports_;
    std::vector<Label> online_labels_;
    TransitionRegistry registry_;
    std::optional<ClassDescriptor> descriptor_;
    bool knowledge_changed_ = false;
    std::unique_ptr<ForestModel> workload_model_;
    std::unique_ptr<ForestModel> transition_model_;
    std::unique_ptr<SequenceModel> predictor_;
    std::size_t trainings_ = 0;
};

struct WindowLog {
    WindowIndex t = 0;
    std::string truth;
    bool truth_transition = false;
    bool flagged = false;
    Label label = kUnknownLabel;
    Label pred_t1 = kUnknownLabel;
    Label pred_t5 = kUnknownLabel;
    Label pred_t10 = kUnknownLabel;
    bool predictor_ready = false;
    /// Label the plug-in saw (from the previous window's context).
    Label decision_label = kUnknownLabel;
    PluginBranch branch = PluginBranch::Unknown;
    std::size_t probes = 0;
    Configuration config;
    double runtime = 0.0;
    double probe_runtime = 0.0;
    double default_runtime = 0.0;
};

struct RunResult {
    MetricsReport report;
    std::vector<WindowLog> windows;
    std::vector<DiscoveryReport> discoveries;
    WorkloadDB db;
};

/// Runs `scenario` through the simulator and a KermitSystem whose knowledge
/// base lives under `out_dir/kb` (cleared first). Writes report.json and
/// timeseries.csv into `out_dir` and returns everything measured.
RunResult run_scenario(const Scenario& scenario, std::uint64_t seed, const RunSettings& settings,
                       const std::filesystem::path& out_dir);

}  // namespace kermit
