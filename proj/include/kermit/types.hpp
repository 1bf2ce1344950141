#pragma once

#include <cstdint>
#include <vector>

namespace kermit {

/// Workload label. Generated by a monotonically increasing counter; 0 is
/// reserved for workloads that have not been discovered yet.
using Label = std::uint32_t;
inline constexpr Label kUnknownLabel = 0;

/// Position of an observation window in the window stream.
using WindowIndex = std::int64_t;

using FeatureVector = std::vector<double>;

}  // namespace kermit
