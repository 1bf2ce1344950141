#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "kermit/types.hpp"

namespace kermit {

/// Ordered, fixed set of telemetry features. Every sample, window and
/// characterization in a run shares one schema.
class FeatureSchema {
public:
    explicit FeatureSchema(std::vector<std::string> names);

    /// cpu, memory, disk, network and container counts as exposed by a
    /// per-node monitoring agent.
    static FeatureSchema standard();

    std::size_t size() const noexcept { return names_.size(); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::string& name(std::size_t i) const { return names_.at(i); }
    std::optional<std::size_t> index_of(std::string_view name) const;

    bool operator==(const FeatureSchema&) const = default;

private:
    std::vector<std::string> names_;
};

struct RawSample {
    double timestamp = 0.0;
    std::string source_id;
    std::vector<double> values;

    bool operator==(const RawSample&) const = default;
};

/// `ts,source_id,v1,...,vF`
RawSample parse_raw_sample(std::string_view line, std::size_t feature_count);
std::string format_raw_sample(const RawSample& sample);

struct SampleStats {
    double mean = 0.0;
    double std = 0.0;  // n-1 denominator
    std::size_t n = 0;
    double min = 0.0;
    double max = 0.0;

    static SampleStats of(std::span<const double> values);

    /// Pooled statistics of the union of two disjoint sample sets.
    static SampleStats merge(const SampleStats& a, const SampleStats& b);

    bool operator==(const SampleStats&) const = default;
};

struct ObservationWindow {
    WindowIndex index = 0;
    double start = 0.0;
    double end = 0.0;
    std::vector<SampleStats> per_feature;
    FeatureVector feature_vector;  // per-feature means
};

struct AnalyticWindow {
    WindowIndex index = 0;
    FeatureVector features;
};

struct RateWindow {
    WindowIndex index = 0;
    FeatureVector deltas;
};

/// Aggregates all samples of one window, pooling across sources.
/// Throws EmptyWindow when `samples` is empty.
ObservationWindow aggregate_window(std::span<const RawSample> samples,
                                   const FeatureSchema& schema,
                                   WindowIndex index,
                                   double start,
                                   double end);

AnalyticWindow to_analytic_window(const ObservationWindow& window);

/// Throws NonConsecutive unless curr.index == prev.index + 1.
RateWindow rate_transform(const AnalyticWindow& prev, const AnalyticWindow& curr);

/// Index-aligned observation, analytic and rate streams for one run.
class WindowStreams {
public:
    WindowStreams(FeatureSchema schema, double window_length);

    /// Aggregates the samples of the next window. An empty window (agent
    /// outage) is replaced by a copy of the previous window and logged.
    const ObservationWindow& push_samples(std::span<const RawSample> samples);

    void push(ObservationWindow window);

    const FeatureSchema& schema() const noexcept { return schema_; }
    double window_length() const noexcept { return window_length_; }
    WindowIndex next_index() const noexcept { return static_cast<WindowIndex>(observations_.size()); }

    const std::vector<ObservationWindow>& observations() const noexcept { return observations_; }
    const std::vector<AnalyticWindow>& analytics() const noexcept { return analytics_; }
    /// rates()[i] has index i + 1.
    const std::vector<RateWindow>& rates() const noexcept { return rates_; }

private:
    FeatureSchema schema_;
    double window_length_;
    std::vector<ObservationWindow> observations_;
    std::vector<AnalyticWindow> analytics_;
    std::vector<RateWindow> rates_;
};

void to_json(nlohmann::json& j, const SampleStats& s);
void from_json(const nlohmann::json& j, SampleStats& s);
void to_json(nlohmann::json& j, const ObservationWindow& w);
void from_json(const nlohmann::json& j, ObservationWindow& w);
void to_json(nlohmann::json& j, const AnalyticWindow& w);
void from_json(const nlohmann::json& j, AnalyticWindow& w);
void to_json(nlohmann::json& j, const RateWindow& w);
void from_json(const nlohmann::json& j, RateWindow& w);

}  // namespace kermit
