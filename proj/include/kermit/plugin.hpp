#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include "kermit/config_space.hpp"
#include "kermit/explorer.hpp"
#include "kermit/predictor.hpp"
#include "kermit/workload_db.hpp"

namespace kermit {

enum class PluginBranch {
    Stale,         // context older than the sync tolerance
    Unknown,       // label 0
    Optimal,       // stored optimal configuration reused
    LocalSearch,   // drifting workload refined from its last configuration
    GlobalSearch,  // first optimization of a workload
    Fallback,      // internal failure; default configuration
};

std::string_view branch_name(PluginBranch b);

struct PluginParams {
    /// Seconds a context may lag behind `now`.
    double sync_tolerance = 20.0;
    std::size_t budget_global = 60;
    std::size_t budget_local = 20;
};

struct PluginDecision {
    Configuration config;
    PluginBranch branch = PluginBranch::Fallback;
    std::size_t probes = 0;
    std::optional<SearchResult> search;
};

/// Chooses the configuration for the next resource request. Never throws:
/// any failure yields the default configuration with branch Fallback.
PluginDecision plugin_main(const WorkloadContext& ctx, double now, WorkloadDB& db,
                           const ConfigSpace& space, const Objective& objective,
                           const PluginParams& params);

}  // namespace kermit
