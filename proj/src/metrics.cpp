#include "kermit/metrics.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <tuple>

#include "kermit/errors.hpp"

namespace kermit {

double metric_purity(const std::map<WindowIndex, Label>& assignments,
                     const std::map<WindowIndex, std::string>& truth) {
    if (assignments.size() != truth.size()) {
        throw IndexMismatch("assignments and ground truth cover different windows");
    }
    if (assignments.empty()) return 0.0;
    std::map<Label, std::map<std::string, std::size_t>> overlap;
    for (const auto& [t, label] : assignments) {
        auto it = truth.find(t);
        if (it == truth.end()) throw IndexMismatch("window " + std::to_string(t) + " has no ground truth");
        ++overlap[label][it->second];
    }
    std::size_t majority = 0;
    for (const auto& [label, counts] : overlap) {
        std::size_t top = 0;
        for (const auto& [name, n] : counts) top = std::max(top, n);
        majority += top;
    }
    return static_cast<double>(majority) / static_cast<double>(assignments.size());
}

double metric_awt(const std::vector<FeatureVector>& cluster_centroids,
                  const std::vector<FeatureVector>& truth_means, const FeatureScale& scale) {
    if (truth_means.empty() || cluster_centroids.empty()) return 0.0;
    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;  // distance, cluster, type
    for (std::size_t c = 0; c < cluster_centroids.size(); ++c) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t nearest = 0;
        for (std::size_t t = 0; t < truth_means.size(); ++t) {
            const double d = scale.distance(cluster_centroids[c], truth_means[t]);
            if (d < best) {
                best = d;
                nearest = t;
            }
        }
        pairs.emplace_back(best, c, nearest);
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<bool> type_used(truth_means.size(), false);
    std::size_t matched = 0;
    for (const auto& [d, c, t] : pairs) {
        if (type_used[t]) continue;
        type_used[t] = true;
        ++matched;
    }
    return static_cast<double>(matched) / static_cast<double>(truth_means.size());
}

ChangeScore change_scores(const std::set<WindowIndex>& flagged, const std::set<WindowIndex>& truth) {
    std::size_t hits = 0;
    for (auto t : flagged) hits += truth.contains(t) ? 1 : 0;
    ChangeScore s;
    if (!flagged.empty()) s.precision = static_cast<double>(hits) / static_cast<double>(flagged.size());
    if (!truth.empty()) s.recall = static_cast<double>(hits) / static_cast<double>(truth.size());
    return s;
}

void to_json(nlohmann::ordered_json& j, const MetricsReport& r) {
    j = nlohmann::ordered_json::object();
    j["version"] = MetricsReport::kVersion;
    j["scenario"] = r.scenario;
    j["seed"] = r.seed;
    j["windows"] = r.windows;
    j["purity"] = r.purity;
    j["awt"] = r.awt;
    j["change_precision"] = r.change_precision;
    j["change_recall"] = r.change_recall;
    j["pred_acc_t1"] = r.pred_acc_t1;
    j["pred_acc_t5"] = r.pred_acc_t5;
    j["pred_acc_t10"] = r.pred_acc_t10;
    auto& eff = j["tuning_efficiency"] = nlohmann::ordered_json::object();
    for (const auto& [name, v] : r.tuning_efficiency) eff[name] = v;
    j["total_probes"] = r.total_probes;
    j["runtime_vs_default"] = r.runtime_vs_default;
    j["workloads_discovered"] = r.workloads_discovered;
    j["drift_events"] = r.drift_events;
}

MetricsReport metrics_report_from_json(const nlohmann::json& j) {
    try {
        if (j.at("version").get<int>() != MetricsReport::kVersion) {
            throw CorruptRecord("unsupported report version");
        }
        MetricsReport r;
        j.at("scenario").get_to(r.scenario);
        j.at("seed").get_to(r.seed);
        j.at("windows").get_to(r.windows);
        j.at("purity").get_to(r.purity);
        j.at("awt").get_to(r.awt);
        j.at("change_precision").get_to(r.change_precision);
        j.at("change_recall").get_to(r.change_recall);
        j.at("pred_acc_t1").get_to(r.pred_acc_t1);
        j.at("pred_acc_t5").get_to(r.pred_acc_t5);
        j.at("pred_acc_t10").get_to(r.pred_acc_t10);
        j.at("tuning_efficiency").get_to(r.tuning_efficiency);
        j.at("total_probes").get_to(r.total_probes);
        j.at("runtime_vs_default").get_to(r.runtime_vs_default);
        j.at("workloads_discovered").get_to(r.workloads_discovered);
        j.at("drift_events").get_to(r.drift_events);
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw CorruptRecord(std::string("metrics report: ") + e.what());
    }
}

std::string format_summary(const MetricsReport& r) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(4);
    out << "scenario              " << r.scenario << " (seed " << r.seed << ", " << r.windows
        << " windows)\n";
    out << "purity                " << r.purity << '\n';
    out << "awt                   " << r.awt << '\n';
    out << "change_precision      " << r.change_precision << '\n';
    out << "change_recall         " << r.change_recall << '\n';
    out << "pred_acc_t1           " << r.pred_acc_t1 << '\n';
    out << "pred_acc_t5           " << r.pred_acc_t5 << '\n';
    out << "pred_acc_t10          " << r.pred_acc_t10 << '\n';
    out << "tuning_efficiency\n";
    for (const auto& [name, v] : r.tuning_efficiency) out << "  " << name << std::string(20 - std::min<std::size_t>(name.size(), 19), ' ') << v << '\n';
    out << "total_probes          " << r.total_probes << '\n';
    out << "runtime_vs_default    " << r.runtime_vs_default << '\n';
    out << "workloads_discovered  " << r.workloads_discovered << '\n';
    out << "drift_events          " << r.drift_events << '\n';
    return out.str();
}

}  // namespace kermit
