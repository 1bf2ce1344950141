#include "kermit/config_space.hpp"

#include <algorithm>
#include <set>

#include "kermit/errors.hpp"

namespace kermit {

ConfigSpace::ConfigSpace(std::vector<Parameter> parameters, Configuration default_config)
    : parameters_(std::move(parameters)), default_(std::move(default_config)) {
    if (parameters_.empty()) {
        throw PreconditionError("config space needs at least one parameter");
    }
    std::set<std::string> names;
    for (const auto& p : parameters_) {
        if (p.values.empty()) {
            throw PreconditionError("parameter '" + p.name + "' has an empty domain");
        }
        if (!names.insert(p.name).second) {
            throw PreconditionError("duplicate parameter '" + p.name + "'");
        }
        std::set<std::string> values(p.values.begin(), p.values.end());
        if (values.size() != p.values.size()) {
            throw PreconditionError("parameter '" + p.name + "' has duplicate values");
        }
    }
    if (!contains(default_)) {
        throw PreconditionError("default configuration is not in the config space");
    }
}

GridPoint ConfigSpace::mid_point() const {
    GridPoint p;
    p.reserve(parameters_.size());
    for (const auto& param : parameters_) p.push_back(param.values.size() / 2);
    return p;
}

bool ConfigSpace::contains(const Configuration& config) const {
    if (config.size() != parameters_.size()) return false;
    for (const auto& p : parameters_) {
        auto it = config.find(p.name);
        if (it == config.end()) return false;
        if (std::find(p.values.begin(), p.values.end(), it->second) == p.values.end()) return false;
    }
    return true;
}

GridPoint ConfigSpace::to_point(const Configuration& config) const {
    if (config.size() != parameters_.size()) {
        throw PreconditionError("configuration does not cover the config space");
    }
    GridPoint point;
    point.reserve(parameters_.size());
    for (const auto& p : parameters_) {
        auto it = config.find(p.name);
        if (it == config.end()) {
            throw PreconditionError("configuration is missing parameter '" + p.name + "'");
        }
        auto v = std::find(p.values.begin(), p.values.end(), it->second);
        if (v == p.values.end()) {
            throw PreconditionError("value '" + it->second + "' outside the domain of '" +
                                    p.name + "'");
        }
        point.push_back(static_cast<std::size_t>(v - p.values.begin()));
    }
    return point;
}

Configuration ConfigSpace::to_config(const GridPoint& point) const {
    if (point.size() != parameters_.size()) {
        throw PreconditionError("grid point has the wrong dimension");
    }
    Configuration c;
    for (std::size_t i = 0; i < point.size(); ++i) {
        c[parameters_[i].name] = parameters_[i].values.at(point[i]);
    }
    return c;
}

std::size_t ConfigSpace::grid_size() const {
    std::size_t n = 1;
    for (const auto& p : parameters_) n *= p.values.size();
    return n;
}

void ConfigSpace::for_each_point(const std::function<void(const GridPoint&)>& visit) const {
    GridPoint p(parameters_.size(), 0);
    while (true) {
        visit(p);
        std::size_t i = p.size();
        while (i > 0) {
            --i;
            if (++p[i] < parameters_[i].values.size()) break;
            p[i] = 0;
            if (i == 0) return;
        }
    }
}

void to_json(nlohmann::json& j, const ConfigSpace& space) {
    j = nlohmann::json::object();
    auto& params = j["parameters"] = nlohmann::json::array();
    for (const auto& p : space.parameters()) {
        params.push_back({{"name", p.name}, {"values", p.values}});
    }
    j["default"] = space.default_config();
}

namespace {

std::string value_text(const nlohmann::json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
}

}  // namespace

ConfigSpace config_space_from_json(const nlohmann::json& j) {
    std::vector<Parameter> params;
    for (const auto& p : j.at("parameters")) {
        Parameter param;
        param.name = p.at("name").get<std::string>();
        for (const auto& v : p.at("values")) param.values.push_back(value_text(v));
        params.push_back(std::move(param));
    }
    Configuration def;
    for (const auto& [k, v] : j.at("default").items()) def[k] = value_text(v);
    return ConfigSpace(std::move(params), std::move(def));
}

}  // namespace kermit
