#include "kermit/plugin.hpp"

#include <spdlog/spdlog.h>

#include "kermit/errors.hpp"

namespace kermit {

std::string_view branch_name(PluginBranch b) {
    switch (b) {
        case PluginBranch::Stale: return "stale";
        case PluginBranch::Unknown: return "unknown";
        case PluginBranch::Optimal: return "optimal";
        case PluginBranch::LocalSearch: return "local_search";
        case PluginBranch::GlobalSearch: return "global_search";
        case PluginBranch::Fallback: return "fallback";
    }
    return "fallback";
}

PluginDecision plugin_main(const WorkloadContext& ctx, double now, WorkloadDB& db,
                           const ConfigSpace& space, const Objective& objective,
                           const PluginParams& params) {
    PluginDecision d;
    d.config = space.default_config();
    if (now - ctx.emitted_at > params.sync_tolerance) {
        spdlog::error("workload context for window {} is {:.1f}s old; using default configuration",
                      ctx.t, now - ctx.emitted_at);
        d.branch = PluginBranch::Stale;
        return d;
    }
    if (ctx.current_label == kUnknownLabel) {
        d.branch = PluginBranch::Unknown;
        return d;
    }
    try {
        const WorkloadRecord& rec = db.get(ctx.current_label);
        if (rec.has_optimal_config) {
            d.config = *rec.config;
            d.branch = PluginBranch::Optimal;
            return d;
        }
        SearchResult result;
        if (rec.is_drifting && rec.config) {
            result = local_search(objective, space, *rec.config, params.budget_local);
            d.branch = PluginBranch::LocalSearch;
        } else {
            result = global_search(objective, space, params.budget_global);
            d.branch = PluginBranch::GlobalSearch;
        }
        db.set_config(ctx.current_label, result.config, true);
        db.set_drift(ctx.current_label, false);
        d.config = result.config;
        d.probes = result.probes;
        d.search = std::move(result);
    } catch (const std::exception& e) {
        spdlog::warn("plug-in fell back to the default configuration for label {}: {}",
                     ctx.current_label, e.what());
        d = PluginDecision{};
        d.config = space.default_config();
        d.branch = PluginBranch::Fallback;
    }
    return d;
}

}  // namespace kermit
