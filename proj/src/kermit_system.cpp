#include "kermit/kermit_system.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include <spdlog/spdlog.h>

#include "kermit/errors.hpp"
#include "kermit/simulator.hpp"

namespace kermit {

namespace {

constexpr const char* kRawStream = "raw";
constexpr const char* kObservationStream = "observations";
constexpr const char* kAnalyticStream = "analytics";
constexpr const char* kRateStream = "rates";
constexpr const char* kTransitionStream = "transitions";
constexpr const char* kContextStream = "contexts";
constexpr const char* kDiscoveryStream = "discovery_reports";
constexpr const char* kPluginStream = "plugin_log";
constexpr const char* kSearchStream = "search_traces";
constexpr const char* kScaleStream = "feature_scale";
constexpr const char* kDescriptorStream = "class_descriptors";
constexpr const char* kRegistryStream = "transition_registry";

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) j.at(key).get_to(out);
}

void write_text(const std::filesystem::path& file, const std::string& text) {
    std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + file.string());
    out << text;
    if (!out) throw IoError("write failed on " + file.string());
}

void write_sparse_file(const std::filesystem::path& file, std::span<const LabeledInstance> rows) {
    std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + file.string());
    write_sparse(out, rows);
}

}  // namespace

void RunSettings::apply(const nlohmann::json& overrides) {
    static const std::set<std::string> known = {
        "alpha",          "min_features_rejecting", "correction",     "eps",          "minpts",
        "epsilon_drift",  "alpha_match",            "match_radius",   "interval",     "budget_global",
        "budget_local",   "sync_windows",           "transition_width", "segment_length",
        "predictor_order", "n_trees",               "max_depth",      "min_leaf",     "zsl_instances",
        "model_seed"};
    if (!overrides.is_object()) throw InvalidScenario("settings must be an object");
    for (const auto& [key, value] : overrides.items()) {
        if (!known.contains(key)) throw InvalidScenario("unknown setting '" + key + "'");
    }
    try {
        read_key(overrides, "alpha", discovery.change.alpha);
        read_key(overrides, "min_features_rejecting", discovery.change.min_features_rejecting);
        if (overrides.contains("correction")) {
            const auto c = overrides.at("correction").get<std::string>();
            if (c == "none") {
                discovery.change.correction = Correction::None;
            } else if (c == "bonferroni") {
                discovery.change.correction = Correction::Bonferroni;
            } else {
                throw InvalidScenario("correction must be 'none' or 'bonferroni'");
            }
        }
        read_key(overrides, "eps", discovery.eps);
        read_key(overrides, "minpts", discovery.min_pts);
        read_key(overrides, "epsilon_drift", discovery.epsilon_drift);
        read_key(overrides, "alpha_match", discovery.match.alpha);
        read_key(overrides, "match_radius", discovery.match.radius);
        read_key(overrides, "interval", interval);
        read_key(overrides, "budget_global", plugin.budget_global);
        read_key(overrides, "budget_local", plugin.budget_local);
        read_key(overrides, "sync_windows", sync_windows);
        read_key(overrides, "transition_width", training.transition_width);
        read_key(overrides, "segment_length", training.segment_length);
        read_key(overrides, "predictor_order", predictor_order);
        read_key(overrides, "n_trees", forest.n_trees);
        read_key(overrides, "max_depth", forest.max_depth);
        read_key(overrides, "min_leaf", forest.min_leaf);
        read_key(overrides, "zsl_instances", zsl_instances);
        read_key(overrides, "model_seed", model_seed);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidScenario(std::string("bad setting value: ") + e.what());
    }
}

void RunSettings::validate(std::size_t feature_count) const {
    try {
        discovery.change.validate(feature_count);
    } catch (const PreconditionError& e) {
        throw InvalidScenario(e.what());
    }
    if (!(discovery.eps > 0.0)) throw InvalidScenario("eps must be > 0");
    if (discovery.min_pts < 1) throw InvalidScenario("minpts must be >= 1");
    if (!(discovery.epsilon_drift > 0.0)) throw InvalidScenario("epsilon_drift must be > 0");
    if (!(discovery.match.alpha > 0.0 && discovery.match.alpha < 1.0)) {
        throw InvalidScenario("alpha_match must lie in (0, 1)");
    }
    if (!(discovery.match.radius >= 0.0)) throw InvalidScenario("match_radius must be >= 0");
    if (interval < 2) throw InvalidScenario("interval must be >= 2");
    if (plugin.budget_global < 1) throw InvalidScenario("budget_global must be >= 1");
    if (!(sync_windows > 0.0)) throw InvalidScenario("sync_windows must be > 0");
    if (training.transition_width < 1) throw InvalidScenario("transition_width must be >= 1");
    if (training.segment_length < 1) throw InvalidScenario("segment_length must be >= 1");
    if (predictor_order < 1) throw InvalidScenario("predictor_order must be >= 1");
    if (forest.n_trees < 1 || forest.min_leaf < 1) throw InvalidScenario("forest needs trees and min_leaf >= 1");
    if (zsl_instances < 1) throw InvalidScenario("zsl_instances must be >= 1");
}

KermitSystem::KermitSystem(const std::filesystem::path& kb_root, FeatureSchema schema, double window_length,
                           ConfigSpace space, RunSettings settings)
    : schema_(std::move(schema)),
      space_(std::move(space)),
      settings_(std::move(settings)),
      kb_(kb_root),
      streams_(schema_, window_length),
      contexts_(kb_.analytics(), kContextStream) {
    settings_.validate(schema_.size());
    settings_.plugin.sync_tolerance = settings_.sync_windows * window_length;
    for (const char* s : {kRawStream}) kb_.landing().create_stream(s);
    for (const char* s : {kObservationStream, kAnalyticStream, kRateStream, kTransitionStream}) {
        kb_.transformation().create_stream(s);
    }
    for (const char* s : {kDiscoveryStream, kPluginStream, kSearchStream, kScaleStream, kDescriptorStream,
                          kRegistryStream}) {
        kb_.analytics().create_stream(s);
    }
}

Label KermitSystem::classify(const ObservationWindow& w) const {
    if (!workload_model_ || !scale_) return kUnknownLabel;
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& [label, rec] : db().records()) {
        nearest = std::min(nearest, scale_->distance(w.feature_vector, rec.characterization.means()));
    }
    if (nearest > settings_.discovery.match.radius) return kUnknownLabel;
    return classify_window(*workload_model_, to_analytic_window(w)).label;
}

KermitSystem::Step KermitSystem::observe(std::span<const RawSample> samples) {
    std::vector<std::string> raw;
    raw.reserve(samples.size());
    for (const auto& s : samples) raw.push_back(format_raw_sample(s));
    kb_.landing().append_many(kRawStream, raw);

    const ObservationWindow& w = streams_.push_samples(samples);
    const std::size_t n = streams_.observations().size();
    kb_.transformation().append(kObservationStream, nlohmann::json(w).dump());
    kb_.transformation().append(kAnalyticStream, nlohmann::json(streams_.analytics().back()).dump());
    if (n >= 2) kb_.transformation().append(kRateStream, nlohmann::json(streams_.rates().back()).dump());

    Step step;
    step.t = w.index;
    const Label previous = online_labels_.empty() ? kUnknownLabel : online_labels_.back();
    if (n >= 2) {
        step.flagged = detect_stream(streams_.observations()[n - 2], w, settings_.discovery.change);
    }
    if (step.flagged) {
        kb_.transformation().append(kTransitionStream, std::to_string(w.index));
        step.label = previous;
        const std::size_t width = settings_.training.transition_width;
        if (transition_model_ && streams_.rates().size() >= width) {
            FeatureVector flat;
            for (auto it = streams_.rates().end() - static_cast<std::ptrdiff_t>(width); it != streams_.rates().end(); ++it) {
                flat.insert(flat.end(), it->deltas.begin(), it->deltas.end());
            }
            step.transition_label = classify_transition(*transition_model_, flat).label;
        }
    } else {
        step.label = classify(w);
    }
    online_labels_.push_back(step.label);

    // An undiscovered workload has no history to extrapolate from.
    if (predictor_ && step.label != kUnknownLabel) {
        const std::size_t k = std::min(predictor_->order(), online_labels_.size());
        step.horizons = predictor_->predict(std::span<const Label>(online_labels_).last(k));
    } else {
        step.horizons = Horizons{step.label, step.label, step.label, std::vector<Label>(10, step.label)};
    }
    step.context = WorkloadContext{w.index, step.label, step.horizons.t1, step.horizons.t5, step.horizons.t10, w.end};
    contexts_.emit(step.context);

    if (n % settings_.interval == 0) run_discovery();
    return step;
}

PluginDecision KermitSystem::request_configuration(const WorkloadContext& ctx, double now,
                                                   const Objective& objective) {
    PluginDecision d = plugin_main(ctx, now, kb_.workloads(), space_, objective, settings_.plugin);
    nlohmann::ordered_json log = {{"t", ctx.t},
                                  {"label", ctx.current_label},
                                  {"branch", std::string(branch_name(d.branch))},
                                  {"probes", d.probes}};
    kb_.analytics().append(kPluginStream, log.dump());
    if (d.search) {
        nlohmann::ordered_json trace = {{"t", ctx.t},
                                        {"label", ctx.current_label},
                                        {"branch", std::string(branch_name(d.branch))},
                                        {"search", *d.search}};
        kb_.analytics().append(kSearchStream, trace.dump());
    }
    return d;
}

void KermitSystem::finish() {
    const std::size_t pending = streams_.observations().size() - pending_from_;
    if (pending >= std::max<std::size_t>(settings_.discovery.min_pts, 2)) run_discovery();
}

void KermitSystem::run_discovery() {
    const auto& all = streams_.observations();
    const std::size_t end = all.size();
    if (end - pending_from_ < std::max<std::size_t>(settings_.discovery.min_pts, 2)) return;
    std::span<const ObservationWindow> batch(all.data() + pending_from_, end - pending_from_);

    if (!scale_) {
        const auto flagged = detect_batch(batch, settings_.discovery.change);
        const std::set<WindowIndex> skip(flagged.begin(), flagged.end());
        std::vector<ObservationWindow> steady;
        for (const auto& w : batch) {
            if (!skip.contains(w.index)) steady.push_back(w);
        }
        scale_ = FeatureScale::estimate(steady.empty() ? std::vector<ObservationWindow>(batch.begin(), batch.end())
                                                       : steady);
        kb_.analytics().append(kScaleStream, nlohmann::json(*scale_).dump());
    }

    DiscoveryReport report = discover(batch, kb_.workloads(), *scale_, settings_.discovery);
    pending_from_ = end;
    if (!report.new_labels.empty() || !report.drifting_labels.empty()) knowledge_changed_ = true;
    nlohmann::ordered_json j = report;
    kb_.analytics().append(kDiscoveryStream, j.dump());
    spdlog::debug("discovery over windows {}..{}: {} new, {} matched, {} drifting", report.batch_first,
                  report.batch_last, report.new_labels.size(), report.matched_labels.size(),
                  report.drifting_labels.size());
    reports_.push_back(std::move(report));
    if (!db().empty()) train();
}

void KermitSystem::train() {
    const std::size_t transitions_before = registry_.entries().size();
    TrainingSets sets = build_training_sets(db(), streams_.analytics(), streams_.rates(), registry_,
                                            settings_.training);
    if (registry_.entries().size() != transitions_before) {
        knowledge_changed_ = true;
        kb_.analytics().append(kRegistryStream, nlohmann::json(registry_).dump());
    }

    ZslOutput zsl = run_zsl(kb_.workloads(), descriptor_ ? &*descriptor_ : nullptr,
                            ZslParams{settings_.zsl_instances, settings_.model_seed});
    const bool descriptor_changed = !descriptor_ || descriptor_->hybrid_pairs != zsl.descriptor.hybrid_pairs;
    if (descriptor_changed) {
        nlohmann::ordered_json j = zsl.descriptor;
        kb_.analytics().append(kDescriptorStream, j.dump());
        knowledge_changed_ = true;
    }
    descriptor_ = zsl.descriptor;

    const auto workloads = merge_training_sets(sets.workloads, zsl.synthetic);
    std::vector<LabeledInstance> transitions = sets.transitions;
    transitions.insert(transitions.end(), sets.steady_rates.begin(), sets.steady_rates.end());
    const auto dir = kb_.root() / zone_dir_name(ZoneKind::Analytics);
    write_sparse_file(dir / "training" / "workloads.svm", workloads);
    write_sparse_file(dir / "training" / "transitions.svm", transitions);

    if (knowledge_changed_ || !workload_model_) {
        if (workloads.size() >= 2) {
            workload_model_ = std::make_unique<ForestModel>(
                ForestModel::train(workloads, settings_.forest, settings_.model_seed + trainings_));
            write_text(dir / "models" / "workload_forest.txt", workload_model_->serialize());
        }
        if (transitions.size() >= 2) {
            transition_model_ = std::make_unique<ForestModel>(
                ForestModel::train(transitions, settings_.forest, settings_.model_seed + trainings_ + 1));
            write_text(dir / "models" / "transition_forest.txt", transition_model_->serialize());
        }
        ++trainings_;
        knowledge_changed_ = false;
    }
    if (sets.label_sequence.size() >= 2) {
        predictor_ = std::make_unique<SequenceModel>(
            SequenceModel::train(sets.label_sequence, settings_.predictor_order));
    }
}

namespace {

MetricsReport compute_metrics(const Scenario& scenario, std::uint64_t seed, const KermitSystem& sys,
                              const Simulator& sim, const std::vector<WindowLog>& logs) {
    MetricsReport r;
    r.scenario = scenario.name;
    r.seed = seed;
    r.windows = logs.size();

    std::map<WindowIndex, Label> assigned;
    for (const auto& [label, rec] : sys.db().records()) {
        if (rec.is_synthetic) continue;
        ++r.workloads_discovered;
        for (const auto& range : rec.characterization.window_ids) {
            for (WindowIndex t = range.first; t <= range.last; ++t) assigned.emplace(t, label);
        }
    }
    std::map<WindowIndex, Label> scored;
    std::map<WindowIndex, std::string> truth;
    for (const auto& [t, label] : assigned) {
        const auto& w = logs.at(static_cast<std::size_t>(t));
        if (w.truth_transition) continue;
        scored.emplace(t, label);
        truth.emplace(t, w.truth);
    }
    r.purity = metric_purity(scored, truth);

    std::map<std::string, std::pair<FeatureVector, std::size_t>> sums;
    const auto& obs = sys.streams().observations();
    for (const auto& w : logs) {
        if (w.truth_transition) continue;
        auto& [sum, n] = sums[w.truth];
        const auto& fv = obs.at(static_cast<std::size_t>(w.t)).feature_vector;
        if (sum.empty()) sum.assign(fv.size(), 0.0);
        for (std::size_t i = 0; i < fv.size(); ++i) sum[i] += fv[i];
        ++n;
    }
    std::vector<FeatureVector> truth_means;
    for (auto& [name, s] : sums) {
        for (auto& v : s.first) v /= static_cast<double>(s.second);
        truth_means.push_back(s.first);
    }
    std::vector<FeatureVector> centroids;
    for (const auto& [label, rec] : sys.db().records()) {
        if (!rec.is_synthetic && !rec.characterization.window_ids.empty()) {
            centroids.push_back(rec.characterization.means());
        }
    }
    const FeatureScale scale = sys.scale() ? *sys.scale() : FeatureScale::unit(scenario.schema.size());
    r.awt = metric_awt(centroids, truth_means, scale);

    std::set<WindowIndex> flagged, transitions;
    for (const auto& w : logs) {
        if (w.flagged) flagged.insert(w.t);
        if (w.truth_transition) transitions.insert(w.t);
    }
    const auto cs = change_scores(flagged, transitions);
    r.change_precision = cs.precision;
    r.change_recall = cs.recall;

    const auto& labels = sys.online_labels();
    auto accuracy = [&](std::size_t h, Label WindowLog::*pred) {
        std::size_t total = 0, hits = 0;
        for (const auto& w : logs) {
            const auto target = static_cast<std::size_t>(w.t) + h;
            if (!w.predictor_ready || target >= labels.size()) continue;
            ++total;
            if (w.*pred == labels[target]) ++hits;
        }
        return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
    };
    r.pred_acc_t1 = accuracy(1, &WindowLog::pred_t1);
    r.pred_acc_t5 = accuracy(5, &WindowLog::pred_t5);
    r.pred_acc_t10 = accuracy(10, &WindowLog::pred_t10);

    std::map<std::string, WindowIndex> last_window;
    for (const auto& w : logs) {
        if (!w.truth_transition) last_window[w.truth] = w.t;
    }
    for (const auto& [name, t] : last_window) {
        const auto& w = logs.at(static_cast<std::size_t>(t));
        r.tuning_efficiency[name] = sim.ground_truth_optimum(t).runtime / sim.true_runtime(t, w.config);
    }

    double kermit_total = 0.0, default_total = 0.0;
    for (const auto& w : logs) {
        r.total_probes += w.probes;
        kermit_total += w.runtime + w.probe_runtime;
        default_total += w.default_runtime;
    }
    const double jobs = static_cast<double>(logs.size() + r.total_probes);
    r.runtime_vs_default = logs.empty() ? 0.0
                                        : (kermit_total / jobs) / (default_total / static_cast<double>(logs.size()));
    for (const auto& rep : sys.reports()) r.drift_events += rep.drifting_labels.size();
    return r;
}

std::string timeseries_csv(const std::vector<WindowLog>& logs) {
    std::string out =
        "t,truth,truth_transition,flagged,label,pred_t1,pred_t5,pred_t10,branch,probes,runtime,default_runtime\n";
    char buf[64];
    for (const auto& w : logs) {
        out += std::to_string(w.t) + ',' + w.truth + ',' + (w.truth_transition ? "1" : "0") + ',' +
               (w.flagged ? "1" : "0") + ',' + std::to_string(w.label) + ',' + std::to_string(w.pred_t1) +
               ',' + std::to_string(w.pred_t5) + ',' + std::to_string(w.pred_t10) + ',' +
               std::string(branch_name(w.branch)) + ',' + std::to_string(w.probes);
        std::snprintf(buf, sizeof(buf), ",%.9g,%.9g\n", w.runtime, w.default_runtime);
        out += buf;
    }
    return out;
}

}  // namespace

RunResult run_scenario(const Scenario& scenario, std::uint64_t seed, const RunSettings& settings,
                       const std::filesystem::path& out_dir) {
    const auto kb_root = out_dir / "kb";
    std::error_code ec;
    std::filesystem::remove_all(kb_root, ec);
    if (ec) throw IoError("cannot clear " + kb_root.string() + ": " + ec.message());

    Simulator sim(scenario, seed);
    KermitSystem sys(kb_root, scenario.schema, scenario.window_length, scenario.space, settings);
    std::vector<WindowLog> logs;
    logs.reserve(sim.window_count());
    std::optional<WorkloadContext> ctx;

    while (!sim.done()) {
        auto frame = sim.next_window();
        const double now = frame.start;
        WindowLog log;
        log.t = frame.t;
        log.truth = frame.truth.workload;
        log.truth_transition = frame.truth.transition;

        const WorkloadContext current = ctx ? *ctx : WorkloadContext{frame.t - 1, kUnknownLabel, 0, 0, 0, now};
        double probe_runtime = 0.0;
        const Objective objective = [&](const Configuration& cfg) {
            const double r = sim.run_job(frame.t, cfg, true);
            probe_runtime += r;
            return r;
        };
        const PluginDecision d = sys.request_configuration(current, now, objective);
        log.decision_label = current.current_label;
        log.branch = d.branch;
        log.probes = d.probes;
        log.config = d.config;
        log.probe_runtime = probe_runtime;
        log.runtime = sim.run_job(frame.t, d.config, false);
        log.default_runtime = sim.counterfactual_runtime(frame.t, scenario.space.default_config());

        log.predictor_ready = sys.predictor() != nullptr;
        const auto step = sys.observe(frame.samples);
        log.flagged = step.flagged;
        log.label = step.label;
        log.pred_t1 = step.context.pred_t1;
        log.pred_t5 = step.context.pred_t5;
        log.pred_t10 = step.context.pred_t10;
        ctx = step.context;
        logs.push_back(std::move(log));
    }
    sys.finish();

    RunResult result;
    result.report = compute_metrics(scenario, seed, sys, sim, logs);
    result.windows = std::move(logs);
    result.discoveries = sys.reports();
    result.db = sys.db();

    nlohmann::ordered_json j = result.report;
    write_text(out_dir / "report.json", j.dump(2) + "\n");
    write_text(out_dir / "timeseries.csv", timeseries_csv(result.windows));
    return result;
}

}  // namespace kermit
