#include "kermit/workload_db.hpp"

#include <algorithm>
#include <fstream>

#include "kermit/errors.hpp"

namespace kermit {

void merge_ranges(std::vector<WindowRange>& ranges, std::span<const WindowRange> extra) {
    ranges.insert(ranges.end(), extra.begin(), extra.end());
    std::sort(ranges.begin(), ranges.end(), [](const WindowRange& a, const WindowRange& b) {
        return a.first != b.first ? a.first < b.first : a.last < b.last;
    });
    std::vector<WindowRange> out;
    for (const auto& r : ranges) {
        if (!out.empty() && r.first <= out.back().last + 1) {
            out.back().last = std::max(out.back().last, r.last);
        } else {
            out.push_back(r);
        }
    }
    ranges = std::move(out);
}

std::vector<WindowRange> ranges_from_indices(std::vector<WindowIndex> indices) {
    std::sort(indices.begin(), indices.end());
    std::vector<WindowRange> out;
    for (WindowIndex i : indices) {
        if (!out.empty() && i <= out.back().last + 1) {
            out.back().last = std::max(out.back().last, i);
        } else {
            out.push_back({i, i});
        }
    }
    return out;
}

FeatureVector WorkloadCharacterization::means() const {
    FeatureVector m;
    m.reserve(features.size());
    for (const auto& f : features) m.push_back(f.mean);
    return m;
}

void WorkloadRecord::validate() const {
    if (label == kUnknownLabel) {
        throw CorruptRecord("workload label 0 is reserved");
    }
    if (has_optimal_config && !config) {
        throw CorruptRecord("workload " + std::to_string(label) +
                            " is marked optimal but has no configuration");
    }
}

void to_json(nlohmann::ordered_json& j, const WorkloadRecord& r) {
    j = nlohmann::ordered_json::object();
    j["label"] = r.label;
    j["is_synthetic"] = r.is_synthetic;
    j["has_optimal_config"] = r.has_optimal_config;
    j["is_drifting"] = r.is_drifting;
    j["config"] = r.config ? nlohmann::ordered_json(*r.config) : nlohmann::ordered_json(nullptr);
    auto& c = j["characterization"];
    c["window_count"] = r.characterization.window_count;
    auto& ranges = c["window_ids"] = nlohmann::ordered_json::array();
    for (const auto& w : r.characterization.window_ids) ranges.push_back({w.first, w.last});
    auto& feats = c["features"] = nlohmann::ordered_json::array();
    for (const auto& f : r.characterization.features) {
        feats.push_back({{"mean", f.mean}, {"std", f.std}, {"min", f.min},
                         {"max", f.max}, {"p90", f.p90}, {"p75", f.p75}});
    }
}

WorkloadRecord workload_record_from_json(const nlohmann::json& j) {
    WorkloadRecord r;
    j.at("label").get_to(r.label);
    j.at("is_synthetic").get_to(r.is_synthetic);
    j.at("has_optimal_config").get_to(r.has_optimal_config);
    j.at("is_drifting").get_to(r.is_drifting);
    if (!j.at("config").is_null()) r.config = j.at("config").get<Configuration>();
    const auto& c = j.at("characterization");
    c.at("window_count").get_to(r.characterization.window_count);
    for (const auto& w : c.at("window_ids")) {
        r.characterization.window_ids.push_back({w.at(0).get<WindowIndex>(), w.at(1).get<WindowIndex>()});
    }
    for (const auto& f : c.at("features")) {
        FeatureSummary s;
        f.at("mean").get_to(s.mean);
        f.at("std").get_to(s.std);
        f.at("min").get_to(s.min);
        f.at("max").get_to(s.max);
        f.at("p90").get_to(s.p90);
        f.at("p75").get_to(s.p75);
        r.characterization.features.push_back(s);
    }
    return r;
}

WorkloadDB WorkloadDB::open(const std::filesystem::path& file) {
    WorkloadDB db;
    if (std::filesystem::exists(file)) {
        std::ifstream in(file);
        if (!in) throw IoError("cannot read " + file.string());
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            if (in.eof()) break;  // torn final record without newline
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw CorruptRecord(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
            }
            WorkloadRecord r = workload_record_from_json(j);
            r.validate();
            db.records_[r.label] = std::move(r);
        }
    }
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    {
        std::ofstream out(file, std::ios::trunc);
        if (!out) throw IoError("cannot write " + file.string());
        for (const auto& [label, r] : db.records_) {
            nlohmann::ordered_json j = r;
            out << j.dump() << '\n';
        }
    }
    db.file_ = file;
    return db;
}

void WorkloadDB::persist(const WorkloadRecord& record) {
    if (!file_) return;
    std::ofstream out(*file_, std::ios::app);
    if (!out) throw IoError("cannot append to " + file_->string());
    nlohmann::ordered_json j = record;
    out << j.dump() + "\n" << std::flush;
}

void WorkloadDB::upsert(const WorkloadRecord& record) {
    record.validate();
    records_[record.label] = record;
    persist(record);
}

const WorkloadRecord& WorkloadDB::get(Label label) const {
    const auto* r = find(label);
    if (!r) throw NotFound("workload " + std::to_string(label) + " is not in the WorkloadDB");
    return *r;
}

const WorkloadRecord* WorkloadDB::find(Label label) const {
    auto it = records_.find(label);
    return it == records_.end() ? nullptr : &it->second;
}

WorkloadRecord& WorkloadDB::mutable_record(Label label) {
    auto it = records_.find(label);
    if (it == records_.end()) {
        throw NotFound("workload " + std::to_string(label) + " is not in the WorkloadDB");
    }
    return it->second;
}

void WorkloadDB::set_config(Label label, const Configuration& config, bool optimal) {
    auto& r = mutable_record(label);
    if (r.config == config && r.has_optimal_config == optimal) return;
    r.config = config;
    r.has_optimal_config = optimal;
    persist(r);
}

void WorkloadDB::set_drift(Label label, bool drifting) {
    auto& r = mutable_record(label);
    if (r.is_drifting == drifting) return;
    r.is_drifting = drifting;
    persist(r);
}

void WorkloadDB::set_optimal_flag(Label label, bool optimal) {
    auto& r = mutable_record(label);
    if (r.has_optimal_config == optimal) return;
    r.has_optimal_config = optimal;
    r.validate();
    persist(r);
}

Label WorkloadDB::max_label() const {
    return records_.empty() ? kUnknownLabel : records_.rbegin()->first;
}

std::vector<Label> WorkloadDB::labels() const {
    std::vector<Label> out;
    out.reserve(records_.size());
    for (const auto& [label, r] : records_) out.push_back(label);
    return out;
}

}  // namespace kermit
