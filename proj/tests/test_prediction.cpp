#include <map>
#include <random>

#include "doctest.h"
#include "kermit/errors.hpp"
#include "kermit/predictor.hpp"
#include "support.hpp"

using namespace kermit;

namespace {

/// Scans the training sequence for each suffix of `recent`, longest first.
Label reference_next(const std::vector<Label>& train, const std::vector<Label>& recent, std::size_t k) {
    for (std::size_t len = std::min(k, recent.size()); len >= 1; --len) {
        std::map<Label, int> counts;
        for (std::size_t i = len; i < train.size(); ++i) {
            bool same = true;
            for (std::size_t j = 0; j < len && same; ++j) {
                same = train[i - len + j] == recent[recent.size() - len + j];
            }
            if (same) ++counts[train[i]];
        }
        if (!counts.empty()) {
            Label best = 0;
            int best_n = -1;
            for (auto [l, n] : counts) {
                if (n > best_n) best = l, best_n = n;
            }
            return best;
        }
    }
    std::map<Label, int> marginal;
    for (auto l : train) ++marginal[l];
    Label best = 0;
    int best_n = -1;
    for (auto [l, n] : marginal) {
        if (n > best_n) best = l, best_n = n;
    }
    return best;
}

}  // namespace

TEST_CASE("constant sequence predicts itself") {
    const std::vector<Label> seq(20, 4);
    const auto m = SequenceModel::train(seq, 3);
    const auto h = m.predict(std::vector<Label>{4, 4, 4});
    CHECK(h.t1 == 4);
    CHECK(h.t5 == 4);
    CHECK(h.t10 == 4);
}

TEST_CASE("periodic sequence with order 2") {
    std::vector<Label> seq;
    for (int i = 0; i < 10; ++i) seq.insert(seq.end(), {1, 2, 3});
    const auto m = SequenceModel::train(seq, 2);
    CHECK(m.next(std::vector<Label>{1, 2}) == 3);
    CHECK(m.next(std::vector<Label>{2, 3}) == 1);
    CHECK(m.next(std::vector<Label>{3, 1}) == 2);
    const auto h = m.predict(std::vector<Label>{3, 1, 2});
    CHECK(h.t1 == 3);
    CHECK(h.t5 == 1);
    CHECK(h.t10 == 3);
    CHECK(h.rollout == std::vector<Label>{3, 1, 2, 3, 1, 2, 3, 1, 2, 3});
}

TEST_CASE("order-1 successor counts sum to n - 1") {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<Label> d(1, 4);
    std::vector<Label> seq(200);
    for (auto& l : seq) l = d(rng);
    const auto m = SequenceModel::train(seq, 1);
    std::size_t total = 0;
    for (const auto& [ctx, counts] : m.transitions()) {
        CHECK(ctx.size() == 1);
        for (const auto& [l, n] : counts) total += n;
    }
    CHECK(total == seq.size() - 1);
    std::size_t marginal = 0;
    for (const auto& [l, n] : m.marginal()) marginal += n;
    CHECK(marginal == seq.size());
}

TEST_CASE("unseen context falls back to the marginal mode") {
    const std::vector<Label> seq{1, 1, 2, 1, 2, 1};
    const auto m = SequenceModel::train(seq, 2);
    CHECK(m.next(std::vector<Label>{9}) == 1);
    CHECK(m.next(std::vector<Label>{7, 9}) == 1);
    // (9, 2) is unseen but its suffix (2) is.
    CHECK(m.next(std::vector<Label>{9, 2}) == 1);
}

TEST_CASE("ties go to the smaller label") {
    const std::vector<Label> seq{5, 3, 5, 2};
    const auto m = SequenceModel::train(seq, 1);
    CHECK(m.next(std::vector<Label>{5}) == 2);
}

TEST_CASE("training rejects short input") {
    CHECK_THROWS_AS(SequenceModel::train(std::vector<Label>{1}, 2), TooShort);
    CHECK_THROWS_AS(SequenceModel::train(std::vector<Label>{}, 2), TooShort);
    CHECK_THROWS_AS(SequenceModel::train(std::vector<Label>{1, 2}, 0), PreconditionError);
    const auto m = SequenceModel::train(std::vector<Label>{1, 2}, 2);
    CHECK_THROWS_AS(m.predict(std::vector<Label>{}), PreconditionError);
}

TEST_CASE("next agrees with a scanning reference") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        std::uniform_int_distribution<Label> d(1, 2 + trial % 4);
        std::uniform_int_distribution<std::size_t> len(2, 60);
        std::vector<Label> train(len(rng));
        for (auto& l : train) l = d(rng);
        const std::size_t k = 1 + trial % 4;
        const auto m = SequenceModel::train(train, k);
        std::vector<Label> recent(1 + trial % 5);
        for (auto& l : recent) l = d(rng);
        CHECK(m.next(recent) == reference_next(train, recent, k));
    }
}

TEST_CASE("rollout is consistent with repeated next") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<Label> d(1, 3);
    std::vector<Label> seq(100);
    for (auto& l : seq) l = d(rng);
    const auto m = SequenceModel::train(seq, 3);
    std::vector<Label> history{seq.end() - 3, seq.end()};
    const auto h = m.predict(history);
    CHECK(h.rollout.size() == 10);
    CHECK(h.rollout[0] == h.t1);
    CHECK(h.rollout[4] == h.t5);
    CHECK(h.rollout[9] == h.t10);
    for (auto expected : h.rollout) {
        CHECK(m.next(history) == expected);
        history.push_back(expected);
    }
}

TEST_CASE("context emitter") {
    test::TempDir dir;
    Zone zone(dir.path(), ZoneKind::Analytics);
    {
        ContextEmitter emitter(zone, "contexts");
        const Horizons h{2, 3, 4, std::vector<Label>(10, 2)};
        CHECK(emit_context(emitter, 5, 1, h, 50.0) == 0);
        CHECK_THROWS_AS(emit_context(emitter, 5, 1, h, 51.0), OutOfOrder);
        CHECK_THROWS_AS(emit_context(emitter, 4, 1, h, 51.0), OutOfOrder);
        CHECK(emit_context(emitter, 6, 2, h, 60.0) == 1);
        CHECK(emitter.last_index() == 6);
    }
    const auto contexts = read_contexts(zone, "contexts");
    REQUIRE(contexts.size() == 2);
    CHECK(contexts[0] == WorkloadContext{5, 1, 2, 3, 4, 50.0});
    CHECK(read_contexts(zone, "contexts", 1).front().t == 6);

    ContextEmitter resumed(zone, "contexts");
    CHECK(resumed.last_index() == 6);
    CHECK_THROWS_AS(resumed.emit(WorkloadContext{6, 1, 1, 1, 1, 0.0}), OutOfOrder);

    const WorkloadContext c{11, 3, 4, 5, 6, 1.25};
    nlohmann::ordered_json j = c;
    CHECK(workload_context_from_json(nlohmann::json::parse(j.dump())) == c);
}
