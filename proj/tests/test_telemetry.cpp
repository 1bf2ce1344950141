#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "kermit/errors.hpp"
#include "kermit/telemetry.hpp"
#include "support.hpp"

using namespace kermit;

namespace {

FeatureSchema schema_of(std::size_t f) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < f; ++i) names.push_back("f" + std::to_string(i));
    return FeatureSchema(names);
}

RawSample sample(double ts, std::vector<double> values, std::string source = "a0") {
    return RawSample{ts, std::move(source), std::move(values)};
}

/// Two-pass textbook statistics over a flat list.
SampleStats brute_stats(const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    SampleStats s;
    s.n = v.size();
    s.mean = mean;
    s.std = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    s.min = *std::min_element(v.begin(), v.end());
    s.max = *std::max_element(v.begin(), v.end());
    return s;
}

}  // namespace

TEST_CASE("feature schema") {
    CHECK(FeatureSchema::standard().size() == 8);
    CHECK(FeatureSchema::standard().index_of("mem_used_pct") == 2u);
    CHECK_FALSE(FeatureSchema::standard().index_of("gpu").has_value());
    CHECK_THROWS_AS(FeatureSchema({}), PreconditionError);
    CHECK_THROWS_AS(FeatureSchema({"a", "a"}), PreconditionError);
}

TEST_CASE("raw sample text round trip") {
    const RawSample s = sample(12.5, {1.0, -2.25, 3e-7}, "node-3");
    const RawSample back = parse_raw_sample(format_raw_sample(s), 3);
    CHECK(back.timestamp == s.timestamp);
    CHECK(back.source_id == s.source_id);
    CHECK(back.values == s.values);
    CHECK_THROWS_AS(parse_raw_sample("1,a,2", 2), PreconditionError);
    CHECK_THROWS_AS(parse_raw_sample("1,a,2,x", 2), PreconditionError);
    CHECK_THROWS_AS(parse_raw_sample("nan,a,2,3", 2), PreconditionError);
}

TEST_CASE("aggregate_window examples") {
    const auto schema = schema_of(1);
    SUBCASE("constant input") {
        std::vector<RawSample> s;
        for (int k = 0; k < 6; ++k) s.push_back(sample(k, {4.5}));
        const auto w = aggregate_window(s, schema, 0, 0.0, 10.0);
        CHECK(w.per_feature[0].mean == 4.5);
        CHECK(w.per_feature[0].std == 0.0);
        CHECK(w.per_feature[0].min == 4.5);
        CHECK(w.per_feature[0].max == 4.5);
    }
    SUBCASE("two-point sample") {
        const std::vector<RawSample> s{sample(1, {2.0}), sample(2, {4.0})};
        const auto w = aggregate_window(s, schema, 0, 0.0, 10.0);
        CHECK(w.per_feature[0].mean == 3.0);
        CHECK(w.per_feature[0].std == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
        CHECK(w.per_feature[0].n == 2);
        CHECK(w.feature_vector == FeatureVector{3.0});
    }
    SUBCASE("no samples") {
        CHECK_THROWS_AS(aggregate_window({}, schema, 0, 0.0, 10.0), EmptyWindow);
    }
    SUBCASE("sample outside the span") {
        const std::vector<RawSample> s{sample(10.0, {1.0})};
        CHECK_THROWS_AS(aggregate_window(s, schema, 0, 0.0, 10.0), PreconditionError);
    }
}

TEST_CASE("aggregate_window pools every source") {
    const std::vector<RawSample> s{sample(1, {1.0}, "a"), sample(1, {3.0}, "b"), sample(2, {5.0}, "a")};
    const auto w = aggregate_window(s, schema_of(1), 3, 0.0, 10.0);
    CHECK(w.index == 3);
    CHECK(w.per_feature[0].n == 3);
    CHECK(w.per_feature[0].mean == 3.0);
}

TEST_CASE("aggregate_window is invariant under sample order") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> d(50.0, 7.0);
    std::vector<RawSample> s;
    for (int k = 0; k < 40; ++k) s.push_back(sample(k * 0.25, {d(rng), d(rng), d(rng)}));
    const auto ref = aggregate_window(s, schema_of(3), 0, 0.0, 10.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::shuffle(s.begin(), s.end(), rng);
        const auto w = aggregate_window(s, schema_of(3), 0, 0.0, 10.0);
        CHECK(w.per_feature == ref.per_feature);
    }
}

TEST_CASE("pooled statistics equal statistics of the concatenation") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> parts(1, 6);
    std::uniform_int_distribution<int> len(1, 30);
    std::normal_distribution<double> d(-3.0, 11.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> all;
        SampleStats pooled;
        const int k = parts(rng);
        for (int p = 0; p < k; ++p) {
            std::vector<double> chunk(static_cast<std::size_t>(len(rng)));
            for (auto& x : chunk) x = d(rng);
            all.insert(all.end(), chunk.begin(), chunk.end());
            pooled = SampleStats::merge(pooled, SampleStats::of(chunk));
        }
        const SampleStats ref = brute_stats(all);
        CHECK(pooled.n == ref.n);
        CHECK(pooled.mean == doctest::Approx(ref.mean).epsilon(1e-12));
        if (ref.std > 0.0) CHECK(pooled.std == doctest::Approx(ref.std).epsilon(1e-9));
        CHECK(pooled.min == ref.min);
        CHECK(pooled.max == ref.max);
    }
}

TEST_CASE("sample stats invariants") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> d(0.0, 1e6);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> v(static_cast<std::size_t>(trial % 7 + 1));
        for (auto& x : v) x = d(rng);
        const auto s = SampleStats::of(v);
        CHECK(s.std >= 0.0);
        CHECK(s.min <= s.mean);
        CHECK(s.mean <= s.max);
        if (s.n == 1) CHECK(s.std == 0.0);
    }
}

TEST_CASE("to_analytic_window is the identity on feature means") {
    ObservationWindow o;
    o.index = 7;
    o.feature_vector = {1, 2, 3};
    const auto a = to_analytic_window(o);
    CHECK(a.index == 7);
    CHECK(a.features == FeatureVector{1, 2, 3});
}

TEST_CASE("rate_transform examples") {
    CHECK(rate_transform({4, {1, 1}}, {5, {1, 1}}).deltas == FeatureVector{0, 0});
    const auto r = rate_transform({0, {1, 1}}, {1, {4, -1}});
    CHECK(r.index == 1);
    CHECK(r.deltas == FeatureVector{3, -2});
    CHECK_THROWS_AS(rate_transform({3, {1}}, {5, {1}}), NonConsecutive);
    CHECK_THROWS_AS(rate_transform({3, {1}}, {4, {1, 2}}), SchemaMismatch);
}

TEST_CASE("window streams stay index-aligned") {
    WindowStreams streams(schema_of(2), 10.0);
    for (int t = 0; t < 12; ++t) {
        std::vector<RawSample> s{sample(t * 10.0 + 1, {double(t), 1.0}), sample(t * 10.0 + 2, {double(t), 3.0})};
        streams.push_samples(s);
        CHECK(streams.analytics().size() == streams.observations().size());
        CHECK(streams.rates().size() == streams.observations().size() - 1);
    }
    for (std::size_t i = 0; i < streams.rates().size(); ++i) {
        CHECK(streams.rates()[i].index == static_cast<WindowIndex>(i + 1));
        CHECK(streams.rates()[i].deltas == FeatureVector{1.0, 0.0});
    }
    CHECK(streams.observations()[4].end - streams.observations()[4].start == 10.0);
}

TEST_CASE("an empty window is replaced by the previous one") {
    WindowStreams streams(schema_of(1), 10.0);
    CHECK_THROWS_AS(streams.push_samples({}), EmptyWindow);
    const std::vector<RawSample> s{sample(1, {2.0}), sample(2, {4.0})};
    streams.push_samples(s);
    const auto& copy = streams.push_samples({});
    CHECK(copy.index == 1);
    CHECK(copy.start == 10.0);
    CHECK(copy.per_feature == streams.observations()[0].per_feature);
    CHECK(streams.rates().back().deltas == FeatureVector{0.0});
}

TEST_CASE("window json round trip") {
    std::mt19937_64 rng(1);
    const auto w = test::noisy_window(4, {1.0, 2.0}, 0.5, 10, rng);
    const ObservationWindow back = nlohmann::json(w).get<ObservationWindow>();
    CHECK(back.index == w.index);
    CHECK(back.per_feature == w.per_feature);
    CHECK(back.feature_vector == w.feature_vector);
}
