#include "kermit/scenario.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "kermit/errors.hpp"

namespace kermit {

std::size_t Scenario::class_index(const std::string& n) const {
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (classes[i].name == n) return i;
    }
    throw InvalidScenario("unknown workload class '" + n + "'");
}

std::size_t Scenario::samples_per_window() const {
    return static_cast<std::size_t>(std::llround(window_length / sample_interval));
}

double pooled_separation(const WorkloadClass& a, const WorkloadClass& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.mean.size(); ++i) {
        const double gap = a.mean[i] - b.mean[i];
        const double pooled = 0.5 * (a.noise[i] * a.noise[i] + b.noise[i] * b.noise[i]);
        if (pooled == 0.0) {
            if (gap != 0.0) return std::numeric_limits<double>::infinity();
            continue;
        }
        sum += gap * gap / pooled;
    }
    return std::sqrt(sum);
}

namespace {

[[noreturn]] void invalid(const std::string& what) { throw InvalidScenario(what); }

FeatureVector vector_of(const nlohmann::json& j, std::size_t f, const std::string& what) {
    if (!j.is_array() || j.size() != f) {
        invalid(what + " must be an array of " + std::to_string(f) + " numbers");
    }
    FeatureVector v;
    for (const auto& x : j) {
        if (!x.is_number()) invalid(what + " must contain numbers");
        v.push_back(x.get<double>());
        if (!std::isfinite(v.back())) invalid(what + " must be finite");
    }
    return v;
}

std::size_t index_in(const Parameter& p, const nlohmann::json& v, const std::string& owner) {
    const std::string text = v.is_string() ? v.get<std::string>() : v.dump();
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        if (p.values[i] == text) return i;
    }
    invalid(owner + ": value " + text + " is not in the domain of '" + p.name + "'");
}

WorkloadClass parse_class(const nlohmann::json& j, const Scenario& s) {
    WorkloadClass c;
    const std::size_t f = s.schema.size();
    c.name = j.at("name").get<std::string>();
    if (c.name.empty() || c.name.find('+') != std::string::npos) {
        invalid("class names must be non-empty and must not contain '+'");
    }
    c.mean = vector_of(j.at("mean"), f, "class " + c.name + " mean");
    c.noise = j.at("noise").is_number() ? FeatureVector(f, j.at("noise").get<double>())
                                        : vector_of(j.at("noise"), f, "class " + c.name + " noise");
    for (double n : c.noise) {
        if (!(n >= 0.0)) invalid("class " + c.name + " noise must be >= 0");
    }
    c.base_runtime = j.value("base_runtime", 100.0);
    if (!(c.base_runtime > 0.0)) invalid("class " + c.name + " base_runtime must be > 0");

    const auto& params = s.space.parameters();
    const auto& opt = j.at("optimum");
    c.optimum.resize(params.size());
    for (std::size_t p = 0; p < params.size(); ++p) {
        if (!opt.contains(params[p].name)) {
            invalid("class " + c.name + " optimum lacks parameter '" + params[p].name + "'");
        }
        c.optimum[p] = index_in(params[p], opt.at(params[p].name), "class " + c.name);
    }
    const auto w = j.value("weights", nlohmann::json(1.0));
    for (const auto& param : params) {
        const double v = w.is_number() ? w.get<double>() : w.at(param.name).get<double>();
        if (!(v > 0.0)) invalid("class " + c.name + " weights must be > 0");
        c.weights.push_back(v);
    }
    return c;
}

Segment parse_segment(const nlohmann::json& j, const Scenario& s) {
    Segment seg;
    seg.windows = j.at("windows").get<std::size_t>();
    if (seg.windows < 3) invalid("segments must last at least 3 windows");
    if (j.contains("class")) {
        seg.kind = SegmentKind::Steady;
        seg.a = j.at("class").get<std::string>();
    } else if (j.contains("hybrid")) {
        seg.kind = SegmentKind::Hybrid;
        const auto& h = j.at("hybrid");
        if (!h.is_array() || h.size() != 2) invalid("hybrid segments name exactly two classes");
        seg.a = h.at(0).get<std::string>();
        seg.b = h.at(1).get<std::string>();
        if (seg.a == seg.b) invalid("a hybrid needs two distinct classes");
        s.class_index(seg.b);
    } else if (j.contains("drift")) {
        seg.kind = SegmentKind::Drift;
        seg.a = j.at("drift").get<std::string>();
        seg.delta = vector_of(j.at("delta"), s.schema.size(), "drift delta");
        if (j.contains("optimum_shift")) {
            for (const auto& [name, steps] : j.at("optimum_shift").items()) {
                bool known = false;
                for (const auto& p : s.space.parameters()) known = known || p.name == name;
                if (!known) invalid("optimum_shift names unknown parameter '" + name + "'");
                seg.optimum_shift[name] = steps.get<long>();
            }
        }
    } else {
        invalid("segment needs one of 'class', 'hybrid' or 'drift'");
    }
    s.class_index(seg.a);
    return seg;
}

}  // namespace

Scenario parse_scenario(const nlohmann::json& j) {
    try {
        if (!j.is_object()) invalid("scenario must be an object");
        if (j.value("version", 0) != Scenario::kVersion) {
            invalid("unsupported scenario version; expected " + std::to_string(Scenario::kVersion));
        }
        Scenario s(config_space_from_json(j.at("config_space")));
        s.name = j.value("name", std::string("scenario"));
        s.seed = j.value("seed", std::uint64_t{1});
        if (j.contains("features")) s.schema = FeatureSchema(j.at("features").get<std::vector<std::string>>());
        s.window_length = j.value("window_length", 10.0);
        s.sample_interval = j.value("sample_interval", 1.0);
        s.agents = j.value("agents", std::size_t{2});
        if (!(s.window_length > 0.0) || !(s.sample_interval > 0.0) || s.samples_per_window() < 2) {
            invalid("a window must hold at least 2 sampling intervals");
        }
        if (s.agents < 1) invalid("at least one agent is required");
        s.runtime_noise = j.value("runtime_noise", 0.0);
        if (!(s.runtime_noise >= 0.0 && s.runtime_noise <= 0.01)) {
            invalid("runtime_noise must lie in [0, 0.01]");
        }
        s.allow_overlap = j.value("allow_overlap", false);
        if (j.contains("transition_widths")) {
            const auto& w = j.at("transition_widths");
            s.transition_widths = w.is_array() ? w.get<std::vector<std::size_t>>()
                                               : std::vector<std::size_t>{w.get<std::size_t>()};
        }
        if (s.transition_widths.empty()) invalid("transition_widths must not be empty");
        for (auto w : s.transition_widths) {
            if (w < 1 || w > 3) invalid("transition widths must lie in [1, 3]");
        }
        if (j.contains("settings")) s.settings = j.at("settings");

        std::set<std::string> names;
        for (const auto& c : j.at("classes")) {
            s.classes.push_back(parse_class(c, s));
            if (!names.insert(s.classes.back().name).second) {
                invalid("duplicate class '" + s.classes.back().name + "'");
            }
        }
        if (s.classes.empty()) invalid("scenario declares no classes");
        for (const auto& seg : j.at("schedule")) s.schedule.push_back(parse_segment(seg, s));
        if (s.schedule.empty()) invalid("scenario schedule is empty");

        if (!s.allow_overlap) {
            for (std::size_t a = 0; a < s.classes.size(); ++a) {
                for (std::size_t b = a + 1; b < s.classes.size(); ++b) {
                    if (pooled_separation(s.classes[a], s.classes[b]) < 10.0) {
                        invalid("classes " + s.classes[a].name + " and " + s.classes[b].name +
                                " are closer than 10 pooled standard deviations");
                    }
                }
            }
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidScenario(std::string("malformed scenario: ") + e.what());
    } catch (const PreconditionError& e) {
        throw InvalidScenario(e.what());
    }
}

Scenario load_scenario(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot read scenario " + file.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidScenario(file.string() + ": " + e.what());
    }
    return parse_scenario(j);
}

}  // namespace kermit
