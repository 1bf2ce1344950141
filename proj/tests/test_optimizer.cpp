#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "kermit/errors.hpp"
#include "kermit/explorer.hpp"
#include "kermit/plugin.hpp"
#include "support.hpp"

using namespace kermit;

namespace {

ConfigSpace grid(std::vector<std::size_t> sizes) {
    std::vector<Parameter> params;
    Configuration def;
    for (std::size_t p = 0; p < sizes.size(); ++p) {
        Parameter param{"x" + std::to_string(p), {}};
        for (std::size_t i = 0; i < sizes[p]; ++i) param.values.push_back(std::to_string(i));
        def[param.name] = std::to_string(sizes[p] / 2);
        params.push_back(param);
    }
    return ConfigSpace(params, def);
}

/// Weighted squared distance to `optimum` in index space.
Objective bowl(const ConfigSpace& space, GridPoint optimum, std::vector<double> weights) {
    return [&space, optimum, weights](const Configuration& c) {
        const auto p = space.to_point(c);
        double v = 10.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double d = static_cast<double>(p[i]) - static_cast<double>(optimum[i]);
            v += weights[i] * d * d;
        }
        return v;
    };
}

std::pair<Configuration, double> exhaustive(const Objective& f, const ConfigSpace& space) {
    Configuration best;
    double best_v = std::numeric_limits<double>::infinity();
    space.for_each_point([&](const GridPoint& p) {
        const auto c = space.to_config(p);
        const double v = f(c);
        if (v < best_v) best_v = v, best = c;
    });
    return {best, best_v};
}

void check_trace(const SearchResult& r) {
    CHECK(r.probes == r.trace.size());
    std::set<Configuration> seen;
    for (const auto& [c, v] : r.trace) CHECK(seen.insert(c).second);
}

WorkloadRecord known(Label label) {
    WorkloadRecord r;
    r.label = label;
    r.characterization.features = {{1.0, 0.1, 0.7, 1.3, 1.07, 1.13}};
    r.characterization.window_count = 10;
    r.characterization.window_ids = {{0, 9}};
    return r;
}

WorkloadContext context(Label label, double emitted_at = 100.0) {
    return WorkloadContext{10, label, label, label, label, emitted_at};
}

}  // namespace

TEST_CASE("config space") {
    const auto space = grid({5, 3, 4});
    CHECK(space.grid_size() == 60);
    CHECK(space.default_point() == GridPoint{2, 1, 2});
    CHECK(space.mid_point() == GridPoint{2, 1, 2});
    std::size_t visited = 0;
    GridPoint last;
    space.for_each_point([&](const GridPoint& p) {
        if (visited > 0) CHECK(last < p);
        last = p;
        CHECK(space.to_point(space.to_config(p)) == p);
        ++visited;
    });
    CHECK(visited == 60);
    CHECK_FALSE(space.contains({{"x0", "9"}, {"x1", "0"}, {"x2", "0"}}));
    CHECK_THROWS_AS(space.to_point({{"x0", "9"}, {"x1", "0"}, {"x2", "0"}}), PreconditionError);
    nlohmann::json j = space;
    const auto back = config_space_from_json(j);
    CHECK(back.default_config() == space.default_config());
    CHECK(back.grid_size() == 60);
}

TEST_CASE("global search finds the exhaustive optimum of a 5x5x5 bowl") {
    const auto space = grid({5, 5, 5});
    const auto f = bowl(space, {0, 4, 3}, {1.0, 2.0, 0.5});
    const auto r = global_search(f, space, 1000);
    const auto [best, best_v] = exhaustive(f, space);
    CHECK(r.config == best);
    CHECK(r.objective == best_v);
    CHECK(r.probes < space.grid_size());
    CHECK_FALSE(r.budget_exhausted);
    check_trace(r);
}

TEST_CASE("global search matches exhaustive search on random separable bowls") {
    std::mt19937_64 rng(10);
    std::uniform_int_distribution<std::size_t> size(2, 7), dims(1, 4);
    std::uniform_real_distribution<double> weight(0.1, 5.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::size_t> sizes(dims(rng));
        for (auto& s : sizes) s = size(rng);
        const auto space = grid(sizes);
        GridPoint optimum;
        std::vector<double> w;
        for (auto s : sizes) {
            optimum.push_back(std::uniform_int_distribution<std::size_t>(0, s - 1)(rng));
            w.push_back(weight(rng));
        }
        const auto f = bowl(space, optimum, w);
        const auto r = global_search(f, space, 10000);
        CHECK(r.config == space.to_config(optimum));
        CHECK(r.objective == exhaustive(f, space).second);
        check_trace(r);
    }
}

TEST_CASE("global search budget and ties") {
    const auto space = grid({5, 5});
    const auto f = bowl(space, {0, 0}, {1.0, 1.0});
    const auto one = global_search(f, space, 1);
    CHECK(one.config == space.default_config());
    CHECK(one.probes == 1);
    CHECK(one.budget_exhausted);
    check_trace(one);

    const auto four = global_search(f, space, 4);
    CHECK(four.probes == 4);
    CHECK(four.budget_exhausted);
    check_trace(four);

    const Objective flat = [](const Configuration&) { return 3.0; };
    const auto r = global_search(flat, space, 100);
    CHECK(r.config == space.default_config());
    CHECK(r.objective == 3.0);
    check_trace(r);

    CHECK_THROWS_AS(global_search(f, space, 0), PreconditionError);
}

TEST_CASE("local search") {
    const auto space = grid({7, 7, 7});
    const GridPoint optimum{3, 5, 1};
    const auto f = bowl(space, optimum, {1.0, 1.0, 1.0});

    SUBCASE("start at the optimum") {
        const auto r = local_search(f, space, space.to_config(optimum), 100);
        CHECK(r.config == space.to_config(optimum));
        CHECK(r.probes <= 2 * space.dimension() + 1);
        check_trace(r);
    }
    SUBCASE("one step away") {
        const auto r = local_search(f, space, space.to_config({3, 4, 1}), 100);
        CHECK(r.config == space.to_config(optimum));
        check_trace(r);
    }
    SUBCASE("descends from a corner") {
        const auto r = local_search(f, space, space.to_config({0, 0, 6}), 1000);
        CHECK(r.config == space.to_config(optimum));
        check_trace(r);
    }
    SUBCASE("zero budget returns the start") {
        const auto start = space.to_config({6, 6, 6});
        const auto r = local_search(f, space, start, 0);
        CHECK(r.config == start);
        CHECK(r.probes == 0);
        CHECK(std::isnan(r.objective));
    }
    SUBCASE("budget is respected") {
        const auto r = local_search(f, space, space.to_config({0, 0, 6}), 5);
        CHECK(r.probes == 5);
        CHECK(r.budget_exhausted);
    }
}

TEST_CASE("plugin branches") {
    const auto space = test::small_space();
    const auto f = bowl(space, {0, 4}, {1.0, 1.0});
    WorkloadDB db;
    db.upsert(known(1));
    PluginParams params;

    SUBCASE("stale context") {
        const auto d = plugin_main(context(1, 0.0), 100.0, db, space, f, params);
        CHECK(d.branch == PluginBranch::Stale);
        CHECK(d.config == space.default_config());
        CHECK(d.probes == 0);
        CHECK_FALSE(db.get(1).has_optimal_config);
    }
    SUBCASE("unknown workload") {
        const auto d = plugin_main(context(kUnknownLabel), 100.0, db, space, f, params);
        CHECK(d.branch == PluginBranch::Unknown);
        CHECK(d.config == space.default_config());
        CHECK(d.probes == 0);
    }
    SUBCASE("first sighting searches globally, then reuses") {
        const auto first = plugin_main(context(1), 100.0, db, space, f, params);
        CHECK(first.branch == PluginBranch::GlobalSearch);
        CHECK(first.config == space.to_config({0, 4}));
        CHECK(first.probes > 0);
        CHECK(db.get(1).has_optimal_config);
        CHECK(db.get(1).config == first.config);
        const auto second = plugin_main(context(1), 100.0, db, space, f, params);
        CHECK(second.branch == PluginBranch::Optimal);
        CHECK(second.config == first.config);
        CHECK(second.probes == 0);
    }
    SUBCASE("drifting workload searches locally") {
        db.set_config(1, space.to_config({1, 3}), false);
        db.set_drift(1, true);
        const auto d = plugin_main(context(1), 100.0, db, space, f, params);
        CHECK(d.branch == PluginBranch::LocalSearch);
        CHECK(d.config == space.to_config({0, 4}));
        CHECK(d.probes <= params.budget_local);
        CHECK(db.get(1).has_optimal_config);
        CHECK_FALSE(db.get(1).is_drifting);
    }
    SUBCASE("drifting without a configuration searches globally") {
        db.set_drift(1, true);
        CHECK(plugin_main(context(1), 100.0, db, space, f, params).branch == PluginBranch::GlobalSearch);
    }
    SUBCASE("failures fall back to the default") {
        const Objective broken = [](const Configuration&) -> double { throw std::runtime_error("job failed"); };
        const auto d = plugin_main(context(1), 100.0, db, space, broken, params);
        CHECK(d.branch == PluginBranch::Fallback);
        CHECK(d.config == space.default_config());
        CHECK_FALSE(db.get(1).has_optimal_config);
        CHECK(plugin_main(context(42), 100.0, db, space, f, params).branch == PluginBranch::Fallback);
    }
    CHECK(branch_name(PluginBranch::LocalSearch) == "local_search");
}
