#include "kermit/discovery.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <unordered_map>

#include "kermit/errors.hpp"

namespace kermit {

FeatureScale FeatureScale::unit(std::size_t feature_count) {
    return FeatureScale{FeatureVector(feature_count, 1.0)};
}

FeatureScale FeatureScale::estimate(std::span<const ObservationWindow> windows) {
    if (windows.empty()) throw PreconditionError("cannot estimate feature scale from no windows");
    const std::size_t f = windows.front().per_feature.size();
    FeatureScale s{FeatureVector(f, kFloor)};
    std::vector<double> stds(windows.size());
    for (std::size_t i = 0; i < f; ++i) {
        for (std::size_t w = 0; w < windows.size(); ++w) {
            if (windows[w].per_feature.size() != f) throw SchemaMismatch("window feature count differs");
            stds[w] = windows[w].per_feature[i].std;
        }
        const auto mid = stds.begin() + static_cast<std::ptrdiff_t>(stds.size() / 2);
        std::nth_element(stds.begin(), mid, stds.end());
        double median = *mid;
        if (stds.size() % 2 == 0) {
            median = 0.5 * (median + *std::max_element(stds.begin(), mid));
        }
        s.scale[i] = std::max(median, kFloor);
    }
    return s;
}

FeatureVector FeatureScale::standardize(const FeatureVector& v) const {
    if (v.size() != scale.size()) throw SchemaMismatch("feature count differs from scale");
    FeatureVector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / scale[i];
    return out;
}

double FeatureScale::distance(const FeatureVector& a, const FeatureVector& b) const {
    if (a.size() != scale.size() || b.size() != scale.size()) {
        throw SchemaMismatch("feature count differs from scale");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = (a[i] - b[i]) / scale[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

void to_json(nlohmann::json& j, const FeatureScale& s) { j = nlohmann::json{{"scale", s.scale}}; }
void from_json(const nlohmann::json& j, FeatureScale& s) { j.at("scale").get_to(s.scale); }

DbscanResult dbscan(std::span<const FeatureVector> points, double eps, std::size_t min_pts) {
    if (!(eps > 0.0)) throw PreconditionError("dbscan eps must be positive");
    if (min_pts < 1) throw PreconditionError("dbscan minPts must be >= 1");
    if (points.empty()) throw PreconditionError("dbscan needs at least one point");

    const std::size_t n = points.size();
    const std::size_t dim = points.front().size();
    const double eps2 = eps * eps;
    std::vector<std::vector<std::size_t>> neighbours(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (points[i].size() != dim) throw DimensionMismatch("dbscan points differ in dimension");
        neighbours[i].push_back(i);
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                const double d = points[i][k] - points[j][k];
                d2 += d * d;
            }
            if (d2 <= eps2) {
                neighbours[i].push_back(j);
                neighbours[j].push_back(i);
            }
        }
    }
    for (auto& nb : neighbours) std::sort(nb.begin(), nb.end());

    constexpr int kUnvisited = -2;
    constexpr int kNoise = -1;
    std::vector<int> label(n, kUnvisited);
    int next_cluster = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] != kUnvisited) continue;
        if (neighbours[i].size() < min_pts) {
            label[i] = kNoise;
            continue;
        }
        const int c = next_cluster++;
        label[i] = c;
        std::deque<std::size_t> queue(neighbours[i].begin(), neighbours[i].end());
        while (!queue.empty()) {
            const std::size_t j = queue.front();
            queue.pop_front();
            if (label[j] == kNoise) label[j] = c;
            if (label[j] != kUnvisited) continue;
            label[j] = c;
            if (neighbours[j].size() >= min_pts) {
                queue.insert(queue.end(), neighbours[j].begin(), neighbours[j].end());
            }
        }
    }

    DbscanResult out;
    out.clusters.resize(static_cast<std::size_t>(next_cluster));
    out.assignment.assign(label.begin(), label.end());
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] < 0) {
            out.noise.push_back(i);
        } else {
            out.clusters[static_cast<std::size_t>(label[i])].members.push_back(i);
        }
    }
    for (auto& c : out.clusters) {
        c.centroid.assign(dim, 0.0);
        for (auto m : c.members) {
            for (std::size_t k = 0; k < dim; ++k) c.centroid[k] += points[m][k];
        }
        for (auto& v : c.centroid) v /= static_cast<double>(c.members.size());
    }
    return out;
}

double nearest_rank_percentile(std::vector<double> values, double q) {
    if (values.empty()) throw PreconditionError("percentile of empty set");
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    // Tolerance keeps products such as 0.9 * 10 on their exact rank.
    auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    return values[rank - 1];
}

WorkloadCharacterization characterize(std::span<const ObservationWindow> windows) {
    if (windows.empty()) throw PreconditionError("cannot characterize an empty cluster");
    const std::size_t f = windows.front().feature_vector.size();
    WorkloadCharacterization c;
    c.window_count = windows.size();
    c.features.resize(f);
    std::vector<double> column(windows.size());
    std::vector<WindowIndex> ids;
    ids.reserve(windows.size());
    for (const auto& w : windows) {
        if (w.feature_vector.size() != f) throw SchemaMismatch("window feature count differs");
        ids.push_back(w.index);
    }
    for (std::size_t i = 0; i < f; ++i) {
        for (std::size_t w = 0; w < windows.size(); ++w) column[w] = windows[w].feature_vector[i];
        const auto st = SampleStats::of(column);
        FeatureSummary& s = c.features[i];
        s.mean = st.mean;
        s.std = st.std;
        s.min = st.min;
        s.max = st.max;
        s.p90 = nearest_rank_percentile(column, 0.90);
        s.p75 = nearest_rank_percentile(column, 0.75);
    }
    c.window_ids = ranges_from_indices(std::move(ids));
    return c;
}

namespace {

SampleStats as_stats(const FeatureSummary& s, std::size_t n) {
    return SampleStats{s.mean, s.std, n, s.min, s.max};
}

bool welch_agrees(const WorkloadCharacterization& a, const WorkloadCharacterization& b, double alpha) {
    for (std::size_t i = 0; i < a.features.size(); ++i) {
        const auto r = welch_t(as_stats(a.features[i], a.window_count),
                               as_stats(b.features[i], b.window_count), alpha, i);
        if (r.reject) return false;
    }
    return true;
}

}  // namespace

std::optional<Label> match_workload(const WorkloadCharacterization& c, const WorkloadDB& db,
                                    const FeatureScale& scale, const MatchParams& params) {
    const FeatureVector centre = c.means();
    std::optional<Label> best;
    double best_distance = 0.0;
    for (const auto& [label, rec] : db.records()) {
        const auto& stored = rec.characterization;
        if (stored.features.size() != c.features.size()) {
            throw SchemaMismatch("stored workload " + std::to_string(label) + " has a different schema");
        }
        const double d = scale.distance(centre, stored.means());
        bool candidate = d <= params.radius;
        if (!candidate && !rec.is_synthetic && stored.window_count >= 2 && c.window_count >= 2) {
            candidate = welch_agrees(c, stored, params.alpha);
        }
        if (candidate && (!best || d < best_distance)) {
            best = label;
            best_distance = d;
        }
    }
    return best;
}

double drift_distance(const WorkloadCharacterization& fresh, const WorkloadCharacterization& stored,
                      const FeatureScale& scale) {
    if (fresh.features.size() != stored.features.size()) {
        throw SchemaMismatch("characterizations have different feature counts");
    }
    return scale.distance(fresh.means(), stored.means());
}

bool detect_drift(const WorkloadCharacterization& fresh, const WorkloadCharacterization& stored,
                  const FeatureScale& scale, double epsilon) {
    return drift_distance(fresh, stored, scale) > epsilon;
}

Label generate_label(const WorkloadDB& db) { return db.max_label() + 1; }

void to_json(nlohmann::ordered_json& j, const DiscoveryReport& r) {
    j = nlohmann::ordered_json{{"batch_first", r.batch_first},
                               {"batch_last", r.batch_last},
                               {"new_labels", r.new_labels},
                               {"matched_labels", r.matched_labels},
                               {"drifting_labels", r.drifting_labels},
                               {"noise_window_count", r.noise_window_count},
                               {"transition_windows", r.transition_windows}};
}

DiscoveryReport discover(std::span<const ObservationWindow> batch, WorkloadDB& db,
                         const FeatureScale& scale, const DiscoveryParams& params) {
    if (batch.size() < std::max<std::size_t>(params.min_pts, 2)) {
        throw TooFewWindows("discovery batch of " + std::to_string(batch.size()) +
                            " windows is shorter than minPts");
    }
    DiscoveryReport report;
    report.batch_first = batch.front().index;
    report.batch_last = batch.back().index;
    report.transition_windows = detect_batch(batch, params.change);

    const std::set<WindowIndex> transitions(report.transition_windows.begin(),
                                            report.transition_windows.end());
    std::vector<ObservationWindow> steady;
    std::vector<FeatureVector> points;
    for (const auto& w : batch) {
        if (transitions.contains(w.index)) continue;
        steady.push_back(w);
        points.push_back(scale.standardize(w.feature_vector));
    }
    if (steady.empty()) return report;

    const auto clusters = dbscan(points, params.eps, params.min_pts);
    for (auto i : clusters.noise) report.noise_windows.push_back(steady[i].index);
    report.noise_window_count = clusters.noise.size();

    std::set<Label> fresh, matched, drifting;
    for (const auto& cluster : clusters.clusters) {
        std::vector<ObservationWindow> members;
        members.reserve(cluster.members.size());
        for (auto i : cluster.members) members.push_back(steady[i]);
        const auto c = characterize(members);

        Label label;
        if (auto hit = match_workload(c, db, scale, params.match)) {
            label = *hit;
            WorkloadRecord rec = db.get(label);
            const auto before = rec.characterization.window_ids;
            merge_ranges(rec.characterization.window_ids, c.window_ids);
            if (rec.is_synthetic) {
                // An anticipated workload has now been observed.
                const auto ids = rec.characterization.window_ids;
                rec.characterization = c;
                rec.characterization.window_ids = ids;
                rec.is_synthetic = false;
                db.upsert(rec);
                matched.insert(label);
            } else if (detect_drift(c, rec.characterization, scale, params.epsilon_drift)) {
                rec.characterization.features = c.features;
                rec.characterization.window_count = c.window_count;
                rec.is_drifting = true;
                rec.has_optimal_config = false;
                db.upsert(rec);
                drifting.insert(label);
            } else {
                if (rec.characterization.window_ids != before) db.upsert(rec);
                matched.insert(label);
            }
        } else {
            label = generate_label(db);
            WorkloadRecord rec;
            rec.label = label;
            rec.characterization = c;
            db.upsert(rec);
            fresh.insert(label);
        }
        for (const auto& w : members) report.assignments.emplace_back(w.index, label);
    }

    for (auto l : fresh) {
        matched.erase(l);
        drifting.erase(l);
    }
    for (auto l : drifting) matched.erase(l);
    report.new_labels.assign(fresh.begin(), fresh.end());
    report.matched_labels.assign(matched.begin(), matched.end());
    report.drifting_labels.assign(drifting.begin(), drifting.end());
    std::sort(report.assignments.begin(), report.assignments.end());
    return report;
}

Label TransitionRegistry::label_for(Label from, Label to) {
    if (auto existing = find(from, to)) return *existing;
    Label next = 1;
    for (const auto& [pair, label] : labels_) next = std::max(next, label + 1);
    labels_.emplace(std::make_pair(from, to), next);
    return next;
}

std::optional<Label> TransitionRegistry::find(Label from, Label to) const {
    auto it = labels_.find({from, to});
    if (it == labels_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::pair<Label, Label>> TransitionRegistry::pair_of(Label transition) const {
    for (const auto& [pair, label] : labels_) {
        if (label == transition) return pair;
    }
    return std::nullopt;
}

void to_json(nlohmann::json& j, const TransitionRegistry& r) {
    j = nlohmann::json::array();
    for (const auto& [pair, label] : r.entries()) {
        j.push_back({{"from", pair.first}, {"to", pair.second}, {"label", label}});
    }
}

void from_json(const nlohmann::json& j, TransitionRegistry& r) {
    r = TransitionRegistry{};
    std::vector<std::pair<std::pair<Label, Label>, Label>> rows;
    for (const auto& e : j) {
        rows.push_back({{e.at("from").get<Label>(), e.at("to").get<Label>()}, e.at("label").get<Label>()});
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    for (const auto& [pair, label] : rows) {
        if (r.label_for(pair.first, pair.second) != label) {
            throw CorruptRecord("transition labels are not a dense counter sequence");
        }
    }
}

std::vector<PredictorSegment> predictor_segments(std::span<const Label> labels, std::size_t length) {
    constexpr std::size_t kFarthest = 10;
    std::vector<PredictorSegment> out;
    if (length == 0 || labels.size() < length + kFarthest) return out;
    for (std::size_t i = 0; i + length + kFarthest <= labels.size(); ++i) {
        PredictorSegment s;
        s.context.assign(labels.begin() + static_cast<std::ptrdiff_t>(i),
                         labels.begin() + static_cast<std::ptrdiff_t>(i + length));
        s.next = labels[i + length];
        s.at5 = labels[i + length + 4];
        s.at10 = labels[i + length + 9];
        out.push_back(std::move(s));
    }
    return out;
}

TrainingSets build_training_sets(const WorkloadDB& db, std::span<const AnalyticWindow> analytics,
                                 std::span<const RateWindow> rates, TransitionRegistry& registry,
                                 const TrainingSetParams& params) {
    if (db.empty()) throw EmptyTrainingSet("workload db is empty");
    if (params.transition_width == 0) throw PreconditionError("transition width must be >= 1");

    std::unordered_map<WindowIndex, Label> label_of;
    for (const auto& [label, rec] : db.records()) {
        if (rec.is_synthetic) continue;
        for (const auto& r : rec.characterization.window_ids) {
            for (WindowIndex t = r.first; t <= r.last; ++t) label_of.emplace(t, label);
        }
    }
    std::unordered_map<WindowIndex, const RateWindow*> rate_at;
    for (const auto& r : rates) rate_at.emplace(r.index, &r);

    const std::size_t width = params.transition_width;
    auto flattened = [&](WindowIndex end) -> std::optional<FeatureVector> {
        FeatureVector v;
        for (WindowIndex t = end - static_cast<WindowIndex>(width) + 1; t <= end; ++t) {
            auto it = rate_at.find(t);
            if (it == rate_at.end()) return std::nullopt;
            v.insert(v.end(), it->second->deltas.begin(), it->second->deltas.end());
        }
        return v;
    };
    auto labelled = [&](WindowIndex t) -> std::optional<Label> {
        auto it = label_of.find(t);
        if (it == label_of.end()) return std::nullopt;
        return it->second;
    };

    TrainingSets out;
    std::optional<std::pair<WindowIndex, Label>> last_seen;
    for (const auto& a : analytics) {
        const auto label = labelled(a.index);
        if (label) {
            out.workloads.push_back({a.features, *label});
            if (last_seen && last_seen->second != *label) {
                const Label tr = registry.label_for(last_seen->second, *label);
                WindowIndex first = last_seen->first + 1;
                WindowIndex last = a.index - 1;
                if (first > last) first = last = a.index;
                for (WindowIndex t = first; t <= last; ++t) {
                    if (auto v = flattened(t)) out.transitions.push_back({std::move(*v), tr});
                }
            }
            bool steady = true;
            for (WindowIndex t = a.index - static_cast<WindowIndex>(width); t < a.index && steady; ++t) {
                steady = labelled(t) == label;
            }
            if (steady) {
                if (auto v = flattened(a.index)) out.steady_rates.push_back({std::move(*v), kUnknownLabel});
            }
            last_seen = std::make_pair(a.index, *label);
        }
        if (last_seen) out.label_sequence.push_back(last_seen->second);
    }
    out.predictor_segments = predictor_segments(out.label_sequence, params.segment_length);
    return out;
}

}  // namespace kermit
