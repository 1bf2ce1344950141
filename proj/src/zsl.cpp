#include "kermit/zsl.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "kermit/errors.hpp"

namespace kermit {

void to_json(nlohmann::ordered_json& j, const ClassDescriptor& d) {
    j = nlohmann::ordered_json::object();
    auto& pure = j["pure_labels"] = nlohmann::ordered_json::array();
    for (const auto& [label, c] : d.pure_classes) pure.push_back(label);
    auto& pairs = j["hybrid_pairs"] = nlohmann::ordered_json::array();
    for (const auto& p : d.hybrid_pairs) pairs.push_back({{"a", p.a}, {"b", p.b}, {"label", p.hybrid}});
}

ClassDescriptor class_descriptor_from_json(const nlohmann::json& j) {
    ClassDescriptor d;
    for (const auto& label : j.at("pure_labels")) d.pure_classes.emplace_back(label.get<Label>(), WorkloadCharacterization{});
    for (const auto& p : j.at("hybrid_pairs")) {
        d.hybrid_pairs.push_back({p.at("a").get<Label>(), p.at("b").get<Label>(), p.at("label").get<Label>()});
    }
    return d;
}

ClassDescriptor build_class_descriptors(const WorkloadDB& db, const ClassDescriptor* previous) {
    std::map<std::pair<Label, Label>, Label> known;
    std::set<Label> hybrid_labels;
    Label next = db.max_label() + 1;
    if (previous) {
        for (const auto& p : previous->hybrid_pairs) {
            known[{p.a, p.b}] = p.hybrid;
            hybrid_labels.insert(p.hybrid);
            next = std::max(next, p.hybrid + 1);
        }
    }

    ClassDescriptor d;
    for (const auto& [label, rec] : db.records()) {
        if (rec.is_synthetic || hybrid_labels.contains(label)) continue;
        d.pure_classes.emplace_back(label, rec.characterization);
    }
    if (d.pure_classes.empty()) throw NoPureClasses("no observed workloads to pair");

    for (std::size_t i = 0; i < d.pure_classes.size(); ++i) {
        for (std::size_t j = i + 1; j < d.pure_classes.size(); ++j) {
            const Label a = d.pure_classes[i].first;
            const Label b = d.pure_classes[j].first;
            auto it = known.find({a, b});
            d.hybrid_pairs.push_back({a, b, it != known.end() ? it->second : next++});
        }
    }
    return d;
}

WorkloadCharacterization synthesize_prototype(const WorkloadCharacterization& a,
                                              const WorkloadCharacterization& b) {
    if (a.features.size() != b.features.size()) {
        throw SchemaMismatch("prototype parents have different feature counts");
    }
    WorkloadCharacterization p;
    p.window_count = 0;
    p.features.resize(a.features.size());
    for (std::size_t i = 0; i < a.features.size(); ++i) {
        const auto& x = a.features[i];
        const auto& y = b.features[i];
        auto& out = p.features[i];
        const double gap = x.mean - y.mean;
        out.mean = 0.5 * (x.mean + y.mean);
        out.std = std::sqrt(0.5 * (x.std * x.std + y.std * y.std) + 0.25 * gap * gap);
        out.min = std::min(x.min, y.min);
        out.max = std::max(x.max, y.max);
        out.p75 = 0.5 * (x.p75 + y.p75);
        out.p90 = 0.5 * (x.p90 + y.p90);
    }
    return p;
}

std::vector<LabeledInstance> sample_synthetic_instances(const WorkloadCharacterization& proto,
                                                        std::size_t n, std::uint64_t seed, Label label) {
    if (n == 0) throw PreconditionError("synthetic instance count must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    std::vector<LabeledInstance> out(n);
    for (auto& row : out) {
        row.label = label;
        row.features.reserve(proto.features.size());
        for (const auto& f : proto.features) {
            const double v = f.mean + f.std * unit(rng);
            row.features.push_back(std::clamp(v, f.min, f.max));
        }
    }
    return out;
}

std::vector<LabeledInstance> merge_training_sets(std::span<const LabeledInstance> observed,
                                                 std::span<const LabeledInstance> synthetic) {
    std::set<Label> seen;
    for (const auto& r : observed) seen.insert(r.label);
    for (const auto& r : synthetic) {
        if (seen.contains(r.label)) {
            throw LabelCollision("label " + std::to_string(r.label) + " is both observed and synthetic");
        }
    }
    std::vector<LabeledInstance> out(observed.begin(), observed.end());
    out.insert(out.end(), synthetic.begin(), synthetic.end());
    return out;
}

ZslOutput run_zsl(WorkloadDB& db, const ClassDescriptor* previous, const ZslParams& params) {
    ZslOutput out;
    out.descriptor = build_class_descriptors(db, previous);
    std::map<Label, const WorkloadCharacterization*> pure;
    for (const auto& [label, c] : out.descriptor.pure_classes) pure[label] = &c;

    for (const auto& pair : out.descriptor.hybrid_pairs) {
        const WorkloadRecord* existing = db.find(pair.hybrid);
        if (existing && !existing->is_synthetic) continue;
        const auto proto = synthesize_prototype(*pure.at(pair.a), *pure.at(pair.b));
        if (!existing || existing->characterization != proto) {
            WorkloadRecord rec = existing ? *existing : WorkloadRecord{};
            rec.label = pair.hybrid;
            rec.characterization = proto;
            rec.is_synthetic = true;
            db.upsert(rec);
        }
        const std::uint64_t seed = params.seed ^ (0x9E3779B97F4A7C15ULL * (pair.hybrid + 1ULL));
        auto rows = sample_synthetic_instances(proto, params.instances_per_hybrid, seed, pair.hybrid);
        out.synthetic.insert(out.synthetic.end(), rows.begin(), rows.end());
    }
    return out;
}

}  // namespace kermit
