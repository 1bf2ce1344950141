// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "kermit/change_detector.hpp"
#include "kermit/cli.hpp"
#include "kermit/kermit_system.hpp"
#include "kermit/plugin.hpp"
#include "kermit/predictor.hpp"
#include "kermit/zsl.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace kermit;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

std::string slurp(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

RunResult run_bundled(const std::string& name, const std::filesystem::path& out,
                      const std::function<void(RunSettings&)>& tweak = {}) {
    const auto scenario = load_scenario(test::scenario_path(name));
    RunSettings settings;
    settings.apply(scenario.settings);
    if (tweak) tweak(settings);
    return run_scenario(scenario, scenario.seed, settings, out);
}

Outcome change_detection(const std::filesystem::path& tmp) {
    const auto start = Clock::now();
    const auto mixed = run_bundled("mixed_transitions", tmp / "c1_mixed");
    const auto plateau = run_bundled("noiseless_plateau", tmp / "c1_plateau");
    const double elapsed = seconds_since(start);
    std::size_t false_flags = 0;
    for (const auto& w : plateau.windows) false_flags += w.flagged ? 1 : 0;
    const auto& r = mixed.report;
    return {r.change_precision >= 0.95 && r.change_recall >= 0.95 && plateau.windows.size() >= 10000 &&
                false_flags == 0 && elapsed < 5.0,
            fmt("precision=%.3f recall=%.3f plateau_windows=%zu false_flags=%zu time=%.2fs", r.change_precision,
                r.change_recall, plateau.windows.size(), false_flags, elapsed)};
}

Outcome welch_oracle() {
    std::mt19937_64 rng(1000);
    std::uniform_real_distribution<double> mean(-100, 100), sd(0.01, 30);
    std::uniform_int_distribution<std::size_t> n(2, 200);
    std::uniform_real_distribution<double> log_alpha(-6, -0.7);
    struct Case {
        SampleStats a, b;
        double alpha;
    };
    std::vector<Case> cases(1000);
    for (auto& c : cases) {
        c.a = test::make_stats(mean(rng), sd(rng), n(rng));
        c.b = test::make_stats(c.a.mean + mean(rng) * 0.05, sd(rng), n(rng));
        c.alpha = std::pow(10.0, log_alpha(rng));
    }
    const auto start = Clock::now();
    std::vector<WelchResult> ours;
    ours.reserve(cases.size());
    for (const auto& c : cases) ours.push_back(welch_t(c.a, c.b, c.alpha));
    const double elapsed = seconds_since(start);

    double worst_t = 0.0, worst_dof = 0.0;
    std::size_t decision_mismatch = 0, rejections = 0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto ref = test::reference_welch(cases[i].a, cases[i].b, cases[i].alpha);
        worst_t = std::max(worst_t, std::fabs(ours[i].t_stat - ref.t) / std::max(std::fabs(ref.t), 1e-300));
        worst_dof = std::max(worst_dof, std::fabs(ours[i].dof - ref.dof) / ref.dof);
        decision_mismatch += ours[i].reject != ref.reject ? 1 : 0;
        rejections += ref.reject ? 1 : 0;
    }
    return {worst_t <= 1e-9 && worst_dof <= 1e-9 && decision_mismatch == 0 && elapsed < 1.0,
            fmt("max_rel_err t=%.2e dof=%.2e decision_mismatches=%zu rejections=%zu/1000 time=%.4fs", worst_t,
                worst_dof, decision_mismatch, rejections, elapsed)};
}

Outcome discovery(const RunResult& plateaus) {
    std::mt19937_64 rng(200);
    std::uniform_real_distribution<double> coord(0.0, 10.0);
    std::uniform_int_distribution<std::size_t> mp(1, 6);
    std::uniform_real_distribution<double> eps_d(0.5, 3.0);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<FeatureVector> pts(20, FeatureVector(2));
        for (auto& p : pts) p = {coord(rng), coord(rng)};
        const double eps = eps_d(rng);
        const std::size_t min_pts = mp(rng);
        if (test::canonical(dbscan(pts, eps, min_pts).assignment) !=
            test::canonical(test::reference_dbscan(pts, eps, min_pts))) {
            ++mismatches;
        }
    }
    const auto& r = plateaus.report;
    return {r.awt == 1.0 && r.purity >= 0.99 && mismatches == 0,
            fmt("awt=%.3f purity=%.4f dbscan_mismatches=%zu/200", r.awt, r.purity, mismatches)};
}

Outcome drift(const RunResult& run, const std::filesystem::path& kb_root) {
    std::vector<std::pair<Label, WindowIndex>> events;
    for (const auto& rep : run.discoveries) {
        for (auto l : rep.drifting_labels) events.emplace_back(l, rep.batch_last);
    }
    if (events.size() != 1) return {false, fmt("drift_events=%zu (expected 1)", events.size())};
    const auto [label, at] = events.front();

    std::map<std::string, std::size_t> truth_votes;
    for (const auto& rep : run.discoveries) {
        for (const auto& [t, l] : rep.assignments) {
            if (l == label) ++truth_votes[run.windows.at(static_cast<std::size_t>(t)).truth];
        }
    }
    std::string drifted;
    std::size_t best = 0;
    for (const auto& [name, n] : truth_votes) {
        if (n > best) best = n, drifted = name;
    }

    KnowledgeBase kb(kb_root);
    std::string next_branch = "none";
    for (const auto& line : kb.analytics().read("search_traces")) {
        const auto j = nlohmann::json::parse(line);
        if (j.at("label").get<Label>() == label && j.at("t").get<WindowIndex>() >= at) {
            next_branch = j.at("branch").get<std::string>();
            break;
        }
    }
    return {drifted == "terasort" && next_branch == "local_search",
            fmt("drift_events=1 label=%u class=%s next_search=%s", label, drifted.c_str(), next_branch.c_str())};
}

Outcome tuning(const std::map<std::string, RunResult>& runs) {
    double worst = 1.0;
    std::string worst_class;
    for (const auto& [name, run] : runs) {
        for (const auto& [cls, eff] : run.report.tuning_efficiency) {
            if (eff < worst) worst = eff, worst_class = name + "/" + cls;
        }
    }
    const auto scenario = load_scenario(test::scenario_path("repeat_daily"));
    const bool mid_default = scenario.space.default_point() == scenario.space.mid_point();
    const double ratio = runs.at("repeat_daily").report.runtime_vs_default;
    return {worst >= 0.90 && mid_default && ratio <= 0.95,
            fmt("min_efficiency=%.4f%s%s repeat_daily runtime_vs_default=%.3f default_is_mid_grid=%s", worst,
                worst_class.empty() ? "" : " at ", worst_class.c_str(), ratio, mid_default ? "yes" : "no")};
}

Outcome zero_repeat(const RunResult& run) {
    std::map<Label, std::size_t> searches;
    std::map<std::string, std::size_t> recurrences;
    std::string previous;
    for (const auto& w : run.windows) {
        if (w.decision_label != kUnknownLabel) {
            searches[w.decision_label];
            if (w.probes > 0) ++searches[w.decision_label];
        }
        if (!w.truth_transition && w.truth != previous) ++recurrences[w.truth];
        if (!w.truth_transition) previous = w.truth;
    }
    bool ok = !searches.empty();
    std::string detail;
    for (const auto& [label, n] : searches) {
        ok = ok && n == 1;
        detail += fmt(" label%u:%zu", label, n);
    }
    std::size_t min_recur = recurrences.empty() ? 0 : SIZE_MAX;
    for (const auto& [name, n] : recurrences) min_recur = std::min(min_recur, n);
    ok = ok && min_recur >= 5;
    return {ok, "searching windows per label:" + detail + fmt(" min_recurrences=%zu", min_recur)};
}

Outcome prediction(const std::filesystem::path& tmp) {
    const std::vector<Label> period{1, 2, 3, 1, 2, 4};
    std::vector<Label> seq;
    for (int i = 0; i < 30; ++i) seq.insert(seq.end(), period.begin(), period.end());
    Zone zone(tmp / "c7", ZoneKind::Analytics);
    ContextEmitter emitter(zone, "contexts");
    std::size_t total = 0, hits = 0, inconsistent = 0;
    for (std::size_t t = period.size() - 1; t + 1 < seq.size(); ++t) {
        const std::vector<Label> history(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(t) + 1);
        const auto model = SequenceModel::train(history, 3);
        const std::vector<Label> recent(history.end() - 3, history.end());
        const auto h = model.predict(recent);
        emit_context(emitter, static_cast<WindowIndex>(t), seq[t], h, static_cast<double>(t));
        std::vector<Label> rolled = recent;
        bool consistent = h.rollout.size() == 10 && h.rollout[0] == h.t1 && h.rollout[4] == h.t5 &&
                          h.rollout[9] == h.t10;
        for (std::size_t s = 0; consistent && s < h.rollout.size(); ++s) {
            consistent = model.next(rolled) == h.rollout[s];
            rolled.push_back(h.rollout[s]);
        }
        inconsistent += consistent ? 0 : 1;
        ++total;
        hits += h.t1 == seq[t + 1] ? 1 : 0;
    }
    const auto emitted = read_contexts(zone, "contexts");
    bool stream_ok = emitted.size() == total;
    for (std::size_t i = 0; stream_ok && i < emitted.size(); ++i) {
        stream_ok = emitted[i].current_label == seq[emitted[i].t];
    }
    const double acc = static_cast<double>(hits) / static_cast<double>(total);
    return {acc >= 0.95 && inconsistent == 0 && stream_ok,
            fmt("t+1 accuracy=%.4f over %zu emissions, rollout_inconsistencies=%zu, stream=%s", acc, total,
                inconsistent, stream_ok ? "ok" : "bad")};
}

Outcome zsl(const std::filesystem::path& tmp) {
    const auto out = tmp / "c8";
    const auto run = run_bundled("hybrid_anticipation", out, [](RunSettings& s) { s.interval = 120; });
    if (run.discoveries.empty() || run.discoveries.front().new_labels.size() != 2) {
        return {false, "first discovery pass did not find exactly the two pure classes"};
    }
    KnowledgeBase kb(out / "kb");
    const auto lines = kb.analytics().read("class_descriptors");
    if (lines.empty()) return {false, "no class descriptor recorded"};
    const auto descriptor = class_descriptor_from_json(nlohmann::json::parse(lines.front()));
    if (descriptor.hybrid_pairs.size() != 1) return {false, "expected one hybrid pair from two pure classes"};
    const auto pair = descriptor.hybrid_pairs.front();

    std::size_t hybrid_windows = 0, anticipated = 0;
    for (const auto& w : run.windows) {
        if (w.truth_transition || w.truth.find('+') == std::string::npos) continue;
        ++hybrid_windows;
        anticipated += w.label == pair.hybrid ? 1 : 0;
    }
    const double frac = hybrid_windows ? static_cast<double>(anticipated) / static_cast<double>(hybrid_windows) : 0.0;

    const auto& a = run.db.get(pair.a).characterization;
    const auto& b = run.db.get(pair.b).characterization;
    const auto proto = synthesize_prototype(a, b);
    std::mt19937_64 rng(8);
    std::bernoulli_distribution coin(0.5);
    std::normal_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    const int draws = 1000000;
    for (std::size_t k = 0; k < proto.features.size(); ++k) {
        double sum = 0.0, sq = 0.0;
        for (int i = 0; i < draws; ++i) {
            const auto& f = coin(rng) ? a.features[k] : b.features[k];
            const double x = f.mean + f.std * unit(rng);
            sum += x;
            sq += x * x;
        }
        const double m = sum / draws;
        const double sd = std::sqrt(sq / draws - m * m);
        worst = std::max(worst, std::fabs(proto.features[k].mean - m) / std::fabs(m));
        worst = std::max(worst, std::fabs(proto.features[k].std - sd) / sd);
    }
    return {frac >= 0.80 && worst <= 0.01,
            fmt("hybrid label %u on %zu/%zu hybrid windows (%.3f), prototype max_rel_err=%.4f", pair.hybrid,
                anticipated, hybrid_windows, frac, worst)};
}

Outcome determinism(const std::filesystem::path& tmp) {
    bool ok = true;
    std::string detail;
    for (const char* name : {"mixed_transitions", "drift_pair"}) {
        std::string reports[2];
        for (int i = 0; i < 2; ++i) {
            cli::RunOptions options;
            options.scenario = test::scenario_path(name);
            options.out = tmp / ("c9_" + std::string(name) + std::to_string(i));
            std::ostringstream out, err;
            ok = ok && cli::cmd_run(options, out, err) == cli::kExitOk;
            reports[i] = slurp(options.out / "report.json");
        }
        const bool same = !reports[0].empty() && reports[0] == reports[1];
        ok = ok && same;
        detail += fmt("%s:%s ", name, same ? "identical" : "DIFFERENT");
    }
    return {ok, detail};
}

Outcome branch_totality() {
    const auto space = test::small_space();
    const Objective objective = [&](const Configuration& c) {
        const auto p = space.to_point(c);
        return 50.0 + std::pow(static_cast<double>(p[0]), 2) + std::pow(static_cast<double>(p[1]) - 4.0, 2);
    };
    const Configuration best = space.to_config({0, 4});
    const Configuration stored = space.to_config({1, 3});
    std::size_t failures = 0;
    std::string detail;
    for (bool known : {false, true}) {
        for (bool optimal : {false, true}) {
            for (bool drifting : {false, true}) {
                WorkloadDB db;
                WorkloadRecord rec;
                rec.label = 5;
                rec.characterization.features = {{1.0, 0.1, 0.7, 1.3, 1.07, 1.13}};
                rec.characterization.window_count = 10;
                rec.characterization.window_ids = {{0, 9}};
                db.upsert(rec);
                if (optimal || drifting) db.set_config(5, stored, optimal);
                db.set_drift(5, drifting);
                const WorkloadRecord before = db.get(5);

                const Label label = known ? 5 : kUnknownLabel;
                const WorkloadContext ctx{3, label, label, label, label, 30.0};
                const auto d = plugin_main(ctx, 30.0, db, space, objective, PluginParams{});
                const WorkloadRecord& after = db.get(5);

                PluginBranch expected;
                bool state_ok;
                Configuration expected_config;
                if (!known) {
                    expected = PluginBranch::Unknown;
                    expected_config = space.default_config();
                    state_ok = after == before && db.size() == 1;
                } else if (optimal) {
                    expected = PluginBranch::Optimal;
                    expected_config = stored;
                    state_ok = after == before;
                } else {
                    expected = drifting ? PluginBranch::LocalSearch : PluginBranch::GlobalSearch;
                    expected_config = best;
                    state_ok = after.config == best && after.has_optimal_config && !after.is_drifting &&
                               after.characterization == before.characterization && d.probes > 0;
                }
                const bool ok = d.branch == expected && d.config == expected_config && state_ok;
                failures += ok ? 0 : 1;
                detail += fmt("%s/%s/%s=%s%s ", known ? "known" : "unknown", optimal ? "opt" : "noopt",
                              drifting ? "drift" : "steady", std::string(branch_name(d.branch)).c_str(),
                              ok ? "" : "(!)");
            }
        }
    }
    return {failures == 0, detail};
}

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::off);
    test::TempDir tmp;
    int failed = 0;
    auto report = [&](int id, const char* name, const std::function<Outcome()>& check) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s  %2d %-22s %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    };

    std::map<std::string, RunResult> runs;
    for (const char* name : {"three_plateaus", "mixed_transitions", "repeat_daily", "drift_pair", "hybrid_anticipation"}) {
        runs.emplace(name, run_bundled(name, tmp / name));
    }

    report(1, "change detection", [&] { return change_detection(tmp.path()); });
    report(2, "welch oracle", [] { return welch_oracle(); });
    report(3, "workload discovery", [&] { return discovery(runs.at("three_plateaus")); });
    report(4, "drift handling", [&] { return drift(runs.at("drift_pair"), tmp / "drift_pair" / "kb"); });
    report(5, "tuning efficiency", [&] { return tuning(runs); });
    report(6, "zero repeat search", [&] { return zero_repeat(runs.at("repeat_daily")); });
    report(7, "label prediction", [&] { return prediction(tmp.path()); });
    report(8, "zsl anticipation", [&] { return zsl(tmp.path()); });
    report(9, "determinism", [&] { return determinism(tmp.path()); });
    report(10, "plug-in branches", [] { return branch_totality(); });

    std::printf("%d of 10 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
