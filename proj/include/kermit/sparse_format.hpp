#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kermit/types.hpp"

namespace kermit {

struct LabeledInstance {
    FeatureVector features;
    Label label = kUnknownLabel;

    bool operator==(const LabeledInstance&) const = default;
};

/// One `label idx:value ...` line with 1-based indices. Zero-valued
/// features are omitted.
std::string format_sparse_line(const LabeledInstance& instance);

/// Parses a sparse line into a dense vector of `dimension` features.
/// Indices must be strictly increasing and within [1, dimension].
LabeledInstance parse_sparse_line(std::string_view line, std::size_t dimension);

void write_sparse(std::ostream& out, std::span<const LabeledInstance> rows);
std::vector<LabeledInstance> read_sparse(std::istream& in, std::size_t dimension);

}  // namespace kermit
