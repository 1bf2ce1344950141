#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace kermit {

/// A tunable with a finite, ordered domain. Values are kept as text so the
/// same machinery serves numeric and enumerated settings.
struct Parameter {
    std::string name;
    std::vector<std::string> values;
};

/// Parameter name -> chosen value.
using Configuration = std::map<std::string, std::string>;

/// A configuration expressed as one domain index per parameter, in
/// ConfigSpace parameter order.
using GridPoint = std::vector<std::size_t>;

class ConfigSpace {
public:
    ConfigSpace(std::vector<Parameter> parameters, Configuration default_config);

    const std::vector<Parameter>& parameters() const noexcept { return parameters_; }
    std::size_t dimension() const noexcept { return parameters_.size(); }
    const Configuration& default_config() const noexcept { return default_; }
    GridPoint default_point() const { return to_point(default_); }

    /// Index floor(|domain| / 2) for every parameter.
    GridPoint mid_point() const;

    bool contains(const Configuration& config) const;
    /// Throws PreconditionError when `config` is not in the space.
    GridPoint to_point(const Configuration& config) const;
    Configuration to_config(const GridPoint& point) const;

    std::size_t grid_size() const;
    /// Visits every grid point in lexicographic order.
    void for_each_point(const std::function<void(const GridPoint&)>& visit) const;

private:
    std::vector<Parameter> parameters_;
    Configuration default_;
};

void to_json(nlohmann::json& j, const ConfigSpace& space);
ConfigSpace config_space_from_json(const nlohmann::json& j);

}  // namespace kermit
