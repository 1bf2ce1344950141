#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"
#include "kermit/sparse_format.hpp"
#include "kermit/workload_db.hpp"

namespace kermit {

struct HybridPair {
    Label a = kUnknownLabel;  // a < b
    Label b = kUnknownLabel;
    Label hybrid = kUnknownLabel;

    bool operator==(const HybridPair&) const = default;
};

struct ClassDescriptor {
    std::vector<std::pair<Label, WorkloadCharacterization>> pure_classes;
    std::vector<HybridPair> hybrid_pairs;
};

void to_json(nlohmann::ordered_json& j, const ClassDescriptor& d);
/// Restores the hybrid pairs; pure characterizations are not persisted.
ClassDescriptor class_descriptor_from_json(const nlohmann::json& j);

/// Pure classes are the observed workloads that are not themselves hybrids
/// of `previous`. Pairs keep the hybrid label they had in `previous`; new
/// pairs draw fresh labels from the workload label counter. Throws
/// NoPureClasses.
ClassDescriptor build_class_descriptors(const WorkloadDB& db, const ClassDescriptor* previous = nullptr);

/// Equal-weight two-component mixture of `a` and `b`. Throws SchemaMismatch.
WorkloadCharacterization synthesize_prototype(const WorkloadCharacterization& a,
                                              const WorkloadCharacterization& b);

/// Independent N(mean, std^2) draws per feature, clipped to [min, max].
std::vector<LabeledInstance> sample_synthetic_instances(const WorkloadCharacterization& proto,
                                                        std::size_t n, std::uint64_t seed, Label label);

/// observed ++ synthetic. Throws LabelCollision when a label occurs in both.
std::vector<LabeledInstance> merge_training_sets(std::span<const LabeledInstance> observed,
                                                 std::span<const LabeledInstance> synthetic);

struct ZslParams {
    std::size_t instances_per_hybrid = 200;
    std::uint64_t seed = 0;
};

struct ZslOutput {
    ClassDescriptor descriptor;
    std::vector<LabeledInstance> synthetic;
};

/// Builds descriptors, stores a synthetic record per hybrid label that has
/// not been observed, and samples its training instances.
ZslOutput run_zsl(WorkloadDB& db, const ClassDescriptor* previous, const ZslParams& params);

}  // namespace kermit
