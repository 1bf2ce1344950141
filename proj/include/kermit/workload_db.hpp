#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "kermit/config_space.hpp"
#include "kermit/types.hpp"

namespace kermit {

struct FeatureSummary {
    double mean = 0.0;
    double std = 0.0;
    double min = 0.0;
    double max = 0.0;
    double p90 = 0.0;
    double p75 = 0.0;

    bool operator==(const FeatureSummary&) const = default;
};

/// Inclusive range of window indices.
struct WindowRange {
    WindowIndex first = 0;
    WindowIndex last = 0;

    bool operator==(const WindowRange&) const = default;
};

/// Adds `extra` to `ranges`, keeping the result sorted with overlapping or
/// adjacent ranges coalesced.
void merge_ranges(std::vector<WindowRange>& ranges, std::span<const WindowRange> extra);
std::vector<WindowRange> ranges_from_indices(std::vector<WindowIndex> indices);

struct WorkloadCharacterization {
    std::vector<FeatureSummary> features;
    /// Number of windows the statistics summarize; 0 marks a synthetic prototype.
    std::size_t window_count = 0;
    /// Every window attributed to the workload so far.
    std::vector<WindowRange> window_ids;

    /// Mean vector, i.e. the workload centroid.
    FeatureVector means() const;
    bool operator==(const WorkloadCharacterization&) const = default;
};

struct WorkloadRecord {
    Label label = kUnknownLabel;
    WorkloadCharacterization characterization;
    bool has_optimal_config = false;
    bool is_drifting = false;
    std::optional<Configuration> config;
    bool is_synthetic = false;

    /// Throws CorruptRecord when has_optimal_config is set without a config.
    void validate() const;
    bool operator==(const WorkloadRecord&) const = default;
};

void to_json(nlohmann::ordered_json& j, const WorkloadRecord& r);
WorkloadRecord workload_record_from_json(const nlohmann::json& j);

/// Workload knowledge base table. Optionally backed by a line-delimited file
/// where each mutation appends the full record; the last line per label wins
/// and the file is compacted when opened. Records are never deleted.
class WorkloadDB {
public:
    WorkloadDB() = default;

    static WorkloadDB open(const std::filesystem::path& file);

    void upsert(const WorkloadRecord& record);

    /// Throws NotFound.
    const WorkloadRecord& get(Label label) const;
    const WorkloadRecord* find(Label label) const;
    bool contains(Label label) const { return records_.contains(label); }

    /// Throws NotFound.
    void set_config(Label label, const Configuration& config, bool optimal);
    void set_drift(Label label, bool drifting);
    void set_optimal_flag(Label label, bool optimal);

    Label max_label() const;
    std::vector<Label> labels() const;
    const std::map<Label, WorkloadRecord>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }

    bool operator==(const WorkloadDB& other) const { return records_ == other.records_; }

private:
    WorkloadRecord& mutable_record(Label label);
    void persist(const WorkloadRecord& record);

    std::map<Label, WorkloadRecord> records_;
    std::optional<std::filesystem::path> file_;
};

}  // namespace kermit
