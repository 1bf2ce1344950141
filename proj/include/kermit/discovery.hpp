#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"
#include "kermit/change_detector.hpp"
#include "kermit/sparse_format.hpp"
#include "kermit/telemetry.hpp"
#include "kermit/workload_db.hpp"

namespace kermit {

/// Per-feature divisor used for every distance the off-line subsystem
/// computes (DBSCAN, matching, drift). Estimated from telemetry noise so that
/// one unit is one within-window standard deviation of the raw samples.
struct FeatureScale {
    FeatureVector scale;

    static constexpr double kFloor = 1e-9;

    static FeatureScale unit(std::size_t feature_count);
    /// Median over `windows` of each feature's within-window sample std.
    static FeatureScale estimate(std::span<const ObservationWindow> windows);

    FeatureVector standardize(const FeatureVector& v) const;
    double distance(const FeatureVector& a, const FeatureVector& b) const;
};

void to_json(nlohmann::json& j, const FeatureScale& s);
void from_json(const nlohmann::json& j, FeatureScale& s);

struct Cluster {
    std::vector<std::size_t> members;  // indices into the input points
    FeatureVector centroid;
};

struct DbscanResult {
    std::vector<Cluster> clusters;
    std::vector<std::size_t> noise;
    /// Cluster id per point, -1 for noise.
    std::vector<int> assignment;
};

/// DBSCAN over Euclidean distance. A point is core when at least `min_pts`
/// points (itself included) lie within `eps`. Border points go to the first
/// cluster that reaches them in index scan order.
DbscanResult dbscan(std::span<const FeatureVector> points, double eps, std::size_t min_pts);

/// ceil(q * n)-th order statistic.
double nearest_rank_percentile(std::vector<double> values, double q);

WorkloadCharacterization characterize(std::span<const ObservationWindow> windows);

struct MatchParams {
    /// Per-feature significance level of the Welch comparison.
    double alpha = 0.01;
    /// Records within this scaled L2 distance also match. This lets a known
    /// workload that has drifted be recognised even though its statistics
    /// now differ significantly.
    double radius = 4.0;
};

/// Nearest stored workload that either passes the per-feature Welch test or
/// lies within the match radius; ties go to the smaller label.
std::optional<Label> match_workload(const WorkloadCharacterization& c, const WorkloadDB& db,
                                    const FeatureScale& scale, const MatchParams& params);

double drift_distance(const WorkloadCharacterization& fresh,
                      const WorkloadCharacterization& stored, const FeatureScale& scale);

/// Scaled L2 distance between mean vectors strictly greater than `epsilon`.
bool detect_drift(const WorkloadCharacterization& fresh, const WorkloadCharacterization& stored,
                  const FeatureScale& scale, double epsilon);

/// 1 + the largest label in the db (synthetic labels included); 1 when empty.
Label generate_label(const WorkloadDB& db);

struct DiscoveryParams {
    ChangePolicy change;
    double eps = 3.0;
    std::size_t min_pts = 5;
    double epsilon_drift = 1.0;
    MatchParams match;
};

struct DiscoveryReport {
    std::vector<Label> new_labels;
    std::vector<Label> matched_labels;
    std::vector<Label> drifting_labels;
    std::size_t noise_window_count = 0;
    WindowIndex batch_first = 0;
    WindowIndex batch_last = 0;
    std::vector<WindowIndex> transition_windows;
    std::vector<WindowIndex> noise_windows;
    /// (window index, label) for every clustered window.
    std::vector<std::pair<WindowIndex, Label>> assignments;
};

void to_json(nlohmann::ordered_json& j, const DiscoveryReport& r);

/// One pass of workload discovery and drift detection over a batch of
/// observation windows. Mutates `db`; returns what happened.
DiscoveryReport discover(std::span<const ObservationWindow> batch, WorkloadDB& db,
                         const FeatureScale& scale, const DiscoveryParams& params);

/// Labels for workload transitions, one per ordered (from, to) pair, drawn
/// from a counter in the same way workload labels are.
class TransitionRegistry {
public:
    Label label_for(Label from, Label to);
    std::optional<Label> find(Label from, Label to) const;
    std::optional<std::pair<Label, Label>> pair_of(Label transition) const;
    const std::map<std::pair<Label, Label>, Label>& entries() const noexcept { return labels_; }

    bool operator==(const TransitionRegistry&) const = default;

private:
    std::map<std::pair<Label, Label>, Label> labels_;
};

void to_json(nlohmann::json& j, const TransitionRegistry& r);
void from_json(const nlohmann::json& j, TransitionRegistry& r);

struct PredictorSegment {
    std::vector<Label> context;
    Label next = kUnknownLabel;  // t+1
    Label at5 = kUnknownLabel;   // t+5
    Label at10 = kUnknownLabel;  // t+10
};

struct TrainingSetParams {
    /// Rate windows per transition instance, flattened.
    std::size_t transition_width = 3;
    /// Context length of predictor segments.
    std::size_t segment_length = 3;
};

struct TrainingSets {
    /// Analytic windows tagged with their workload label.
    std::vector<LabeledInstance> workloads;
    /// Flattened rate-window subsequences ending inside an inter-workload
    /// transition, tagged with the transition label.
    std::vector<LabeledInstance> transitions;
    /// Flattened rate-window subsequences lying wholly inside one workload;
    /// used as the "no transition" class.
    std::vector<LabeledInstance> steady_rates;
    /// Workload label per window from the first labelled window on; gaps
    /// carry the previous label forward.
    std::vector<Label> label_sequence;
    std::vector<PredictorSegment> predictor_segments;
};

/// Predictor segments of `length` labels with targets at +1, +5 and +10.
std::vector<PredictorSegment> predictor_segments(std::span<const Label> labels, std::size_t length);

TrainingSets build_training_sets(const WorkloadDB& db, std::span<const AnalyticWindow> analytics,
                                 std::span<const RateWindow> rates, TransitionRegistry& registry,
                                 const TrainingSetParams& params);

}  // namespace kermit
