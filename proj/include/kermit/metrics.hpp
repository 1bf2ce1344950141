#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "kermit/discovery.hpp"

namespace kermit {

/// Sum over clusters of the largest overlap with one truth class, divided by
/// the window count. Both maps must cover the same windows (IndexMismatch).
double metric_purity(const std::map<WindowIndex, Label>& assignments,
                     const std::map<WindowIndex, std::string>& truth);

/// Fraction of truth types matched one-to-one by a cluster whose centroid
/// is nearest to that type's mean. Pairs are taken greedily by ascending
/// distance.
double metric_awt(const std::vector<FeatureVector>& cluster_centroids,
                  const std::vector<FeatureVector>& truth_means, const FeatureScale& scale);

struct ChangeScore {
    double precision = 1.0;  // 1 when nothing is flagged
    double recall = 1.0;     // 1 when there is nothing to find
};

ChangeScore change_scores(const std::set<WindowIndex>& flagged, const std::set<WindowIndex>& truth);

struct MetricsReport {
    static constexpr int kVersion = 1;

    std::string scenario;
    std::uint64_t seed = 0;
    std::size_t windows = 0;
    double purity = 0.0;
    double awt = 0.0;
    double change_precision = 0.0;
    double change_recall = 0.0;
    double pred_acc_t1 = 0.0;
    double pred_acc_t5 = 0.0;
    double pred_acc_t10 = 0.0;
    std::map<std::string, double> tuning_efficiency;
    std::size_t total_probes = 0;
    double runtime_vs_default = 0.0;
    std::size_t workloads_discovered = 0;
    std::size_t drift_events = 0;
};

void to_json(nlohmann::ordered_json& j, const MetricsReport& r);
/// Throws CorruptRecord on a missing field or unknown version.
MetricsReport metrics_report_from_json(const nlohmann::json& j);

/// Multi-line human-readable rendering of every field.
std::string format_summary(const MetricsReport& r);

}  // namespace kermit
