#include "kermit/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kermit/errors.hpp"

namespace kermit {

namespace {

std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

FeatureVector lerp(const FeatureVector& a, const FeatureVector& b, double w) {
    FeatureVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + (b[i] - a[i]) * w;
    return out;
}

}  // namespace

double true_runtime(const WorkloadClass& c, const GridPoint& optimum, const ConfigSpace& space,
                    const GridPoint& point) {
    double r = c.base_runtime;
    const auto& params = space.parameters();
    for (std::size_t p = 0; p < params.size(); ++p) {
        const double off = (static_cast<double>(point[p]) - static_cast<double>(optimum[p])) /
                           static_cast<double>(params[p].values.size());
        r *= 1.0 + c.weights[p] * off * off;
    }
    return r;
}

GridOptimum exhaustive_optimum(const ConfigSpace& space,
                               const std::function<double(const GridPoint&)>& runtime) {
    GridOptimum best;
    best.runtime = std::numeric_limits<double>::infinity();
    space.for_each_point([&](const GridPoint& p) {
        const double r = runtime(p);
        ++best.evaluations;
        if (r < best.runtime) {
            best.runtime = r;
            best.config = space.to_config(p);
        }
    });
    return best;
}

Simulator::Simulator(const Scenario& scenario, std::uint64_t seed)
    : scenario_(scenario), seed_(seed), telemetry_rng_(mix(seed)), probe_rng_(mix(seed ^ 0x5EEDULL)) {
    build_plan();
}

void Simulator::build_plan() {
    const auto& s = scenario_;
    const auto& params = s.space.parameters();
    std::vector<FeatureVector> means;
    std::vector<GridPoint> optima;
    for (const auto& c : s.classes) {
        means.push_back(c.mean);
        optima.push_back(c.optimum);
    }

    std::vector<Component> previous;
    std::size_t boundary = 0;
    for (std::size_t si = 0; si < s.schedule.size(); ++si) {
        const Segment& seg = s.schedule[si];
        const std::size_t a = s.class_index(seg.a);
        if (seg.kind == SegmentKind::Drift) {
            for (std::size_t i = 0; i < means[a].size(); ++i) means[a][i] += seg.delta[i];
            for (std::size_t p = 0; p < params.size(); ++p) {
                auto it = seg.optimum_shift.find(params[p].name);
                if (it == seg.optimum_shift.end()) continue;
                const long moved = static_cast<long>(optima[a][p]) + it->second;
                const long top = static_cast<long>(params[p].values.size()) - 1;
                optima[a][p] = static_cast<std::size_t>(std::clamp(moved, 0L, top));
            }
        }

        WindowPlan steady;
        steady.truth.segment = si;
        steady.telemetry.push_back({means[a], s.classes[a].noise});
        steady.runtime.push_back({a, optima[a]});
        steady.truth.workload = seg.a;
        if (seg.kind == SegmentKind::Hybrid) {
            const std::size_t b = s.class_index(seg.b);
            steady.telemetry.push_back({means[b], s.classes[b].noise});
            steady.runtime.push_back({b, optima[b]});
            steady.truth.workload = seg.a + "+" + seg.b;
        }

        if (!previous.empty()) {
            auto centre = [](const std::vector<Component>& cs) {
                Component out = cs.front();
                for (std::size_t k = 1; k < cs.size(); ++k) {
                    for (std::size_t i = 0; i < out.mean.size(); ++i) {
                        out.mean[i] += cs[k].mean[i];
                        out.noise[i] += cs[k].noise[i];
                    }
                }
                for (auto& v : out.mean) v /= static_cast<double>(cs.size());
                for (auto& v : out.noise) v /= static_cast<double>(cs.size());
                return out;
            };
            const Component from = centre(previous);
            const Component to = centre(steady.telemetry);
            const std::size_t width = s.transition_widths[boundary++ % s.transition_widths.size()];
            for (std::size_t j = 0; j < width; ++j) {
                const double w = static_cast<double>(j + 1) / static_cast<double>(width);
                WindowPlan tr;
                tr.truth.transition = true;
                tr.truth.workload = steady.truth.workload;
                tr.truth.segment = si;
                tr.telemetry.push_back({lerp(from.mean, to.mean, w), lerp(from.noise, to.noise, w)});
                tr.runtime = steady.runtime;
                plan_.push_back(std::move(tr));
            }
        }
        for (std::size_t k = 0; k < seg.windows; ++k) plan_.push_back(steady);
        previous = steady.telemetry;
    }
    for (std::size_t t = 0; t < plan_.size(); ++t) plan_[t].truth.t = static_cast<WindowIndex>(t);
}

const Simulator::WindowPlan& Simulator::plan(WindowIndex t) const {
    if (t < 0 || static_cast<std::size_t>(t) >= plan_.size()) {
        throw PreconditionError("window " + std::to_string(t) + " is outside the scenario");
    }
    return plan_[static_cast<std::size_t>(t)];
}

Simulator::Frame Simulator::next_window() {
    if (done()) throw PreconditionError("scenario has no more windows");
    const WindowPlan& p = plan_[next_];
    Frame f;
    f.t = static_cast<WindowIndex>(next_);
    f.start = static_cast<double>(next_) * scenario_.window_length;
    f.end = f.start + scenario_.window_length;
    f.truth = p.truth;
    std::normal_distribution<double> unit(0.0, 1.0);
    const std::size_t n = scenario_.samples_per_window();
    const std::size_t agents = scenario_.agents;
    f.samples.reserve(n * agents);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t a = 0; a < agents; ++a) {
            const Component& c = p.telemetry[(k * agents + a) % p.telemetry.size()];
            RawSample r;
            r.timestamp = f.start + static_cast<double>(k) * scenario_.sample_interval;
            r.source_id = "agent-" + std::to_string(a);
            r.values.resize(c.mean.size());
            for (std::size_t i = 0; i < c.mean.size(); ++i) {
                const double z = unit(telemetry_rng_);
                r.values[i] = c.mean[i] + c.noise[i] * z;
            }
            f.samples.push_back(std::move(r));
        }
    }
    ++next_;
    return f;
}

double Simulator::true_runtime(WindowIndex t, const Configuration& config) const {
    const WindowPlan& p = plan(t);
    const GridPoint point = scenario_.space.to_point(config);
    double sum = 0.0;
    for (const auto& rc : p.runtime) {
        sum += kermit::true_runtime(scenario_.classes[rc.cls], rc.optimum, scenario_.space, point);
    }
    return sum / static_cast<double>(p.runtime.size());
}

double Simulator::regular_noise(WindowIndex t) const {
    std::mt19937_64 window_rng(mix(seed_ ^ mix(static_cast<std::uint64_t>(t) + 1)));
    return std::normal_distribution<double>(0.0, 1.0)(window_rng);
}

double Simulator::counterfactual_runtime(WindowIndex t, const Configuration& config) const {
    const WindowPlan& p = plan(t);
    const double r = true_runtime(t, config);
    if (scenario_.runtime_noise == 0.0) return r;
    const double base = scenario_.classes[p.runtime.front().cls].base_runtime;
    return std::max(r + base * scenario_.runtime_noise * regular_noise(t), 1e-9);
}

double Simulator::run_job(WindowIndex t, const Configuration& config, bool probe) {
    const WindowPlan& p = plan(t);
    double r = 0.0;
    if (probe && scenario_.runtime_noise > 0.0) {
        const double base = scenario_.classes[p.runtime.front().cls].base_runtime;
        const double z = std::normal_distribution<double>(0.0, 1.0)(probe_rng_);
        r = std::max(true_runtime(t, config) + base * scenario_.runtime_noise * z, 1e-9);
    } else {
        r = counterfactual_runtime(t, config);
    }
    jobs_.push_back({t, p.truth.workload, config, r, probe});
    return r;
}

GridOptimum Simulator::ground_truth_optimum(WindowIndex t) const {
    const WindowPlan& p = plan(t);
    return exhaustive_optimum(scenario_.space, [&](const GridPoint& point) {
        double sum = 0.0;
        for (const auto& rc : p.runtime) {
            sum += kermit::true_runtime(scenario_.classes[rc.cls], rc.optimum, scenario_.space, point);
        }
        return sum / static_cast<double>(p.runtime.size());
    });
}

const WindowTruth& Simulator::truth(WindowIndex t) const { return plan(t).truth; }

SimulationTrace run(const Scenario& scenario, std::uint64_t seed) {
    Simulator sim(scenario, seed);
    SimulationTrace trace;
    while (!sim.done()) {
        auto frame = sim.next_window();
        sim.run_job(frame.t, scenario.space.default_config(), false);
        trace.samples.push_back(std::move(frame.samples));
        trace.truth.push_back(std::move(frame.truth));
    }
    trace.jobs = sim.jobs();
    return trace;
}

}  // namespace kermit
