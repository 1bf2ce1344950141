#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "json.hpp"
#include "kermit/config_space.hpp"

namespace kermit {

/// Seconds, lower is better.
using Objective = std::function<double(const Configuration&)>;

struct SearchResult {
    Configuration config;
    double objective = 0.0;
    std::size_t probes = 0;
    /// Every objective evaluation in order; probes == trace.size().
    std::vector<std::pair<Configuration, double>> trace;
    bool budget_exhausted = false;
};

void to_json(nlohmann::ordered_json& j, const SearchResult& r);

/// Coarse sweep of each parameter's endpoints and midpoint from the default,
/// then coordinate descent with full line searches from the best point
/// found. Never evaluates a configuration twice. Requires budget >= 1.
SearchResult global_search(const Objective& objective, const ConfigSpace& space, std::size_t budget);

/// Greedy descent over the +-1 index neighbours of the current point,
/// starting at `start`. With budget 0 returns `start` unevaluated.
SearchResult local_search(const Objective& objective, const ConfigSpace& space,
                          const Configuration& start, std::size_t budget);

}  // namespace kermit
