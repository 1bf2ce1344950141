#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "kermit/config_space.hpp"
#include "kermit/telemetry.hpp"

namespace kermit {

struct WorkloadClass {
    std::string name;
    FeatureVector mean;
    /// Per-feature std of individual samples.
    FeatureVector noise;
    double base_runtime = 100.0;
    /// Domain index of the fastest value, per parameter.
    GridPoint optimum;
    /// Runtime penalty weight, per parameter; all > 0.
    std::vector<double> weights;
};

enum class SegmentKind { Steady, Hybrid, Drift };

struct Segment {
    SegmentKind kind = SegmentKind::Steady;
    std::string a;
    std::string b;  // Hybrid only
    std::size_t windows = 0;
    /// Drift only: persistent shift of a's mean.
    FeatureVector delta;
    /// Drift only: persistent shift of a's optimum, in domain steps.
    std::map<std::string, long> optimum_shift;
};

struct Scenario {
    static constexpr int kVersion = 1;

    explicit Scenario(ConfigSpace config_space) : space(std::move(config_space)) {}

    std::string name;
    std::uint64_t seed = 1;
    FeatureSchema schema = FeatureSchema::standard();
    double window_length = 10.0;
    double sample_interval = 1.0;
    std::size_t agents = 2;
    ConfigSpace space;
    std::vector<WorkloadClass> classes;
    std::vector<Segment> schedule;
    /// Widths (in windows) of successive transitions, cycled.
    std::vector<std::size_t> transition_widths{1};
    /// Std of job runtime noise relative to the class base runtime.
    double runtime_noise = 0.0;
    bool allow_overlap = false;
    /// Optional loop settings; see RunSettings.
    nlohmann::json settings = nlohmann::json::object();

    std::size_t class_index(const std::string& name) const;
    std::size_t samples_per_window() const;
};

/// Throws InvalidScenario.
Scenario parse_scenario(const nlohmann::json& j);
/// Throws IoError when the file is unreadable, InvalidScenario otherwise.
Scenario load_scenario(const std::filesystem::path& file);

/// sqrt(sum_i (a_i - b_i)^2 / ((sa_i^2 + sb_i^2) / 2)); infinite when a
/// feature differs with zero pooled noise.
double pooled_separation(const WorkloadClass& a, const WorkloadClass& b);

}  // namespace kermit
