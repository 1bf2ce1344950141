#include "kermit/predictor.hpp"

#include <algorithm>

#include "kermit/errors.hpp"

namespace kermit {

namespace {

Label mode(const std::map<Label, std::size_t>& counts) {
    Label best = kUnknownLabel;
    std::size_t best_n = 0;
    for (const auto& [label, n] : counts) {
        if (n > best_n) {
            best = label;
            best_n = n;
        }
    }
    return best;
}

constexpr std::size_t kRolloutSteps = 10;

}  // namespace

SequenceModel SequenceModel::train(std::span<const Label> labels, std::size_t k) {
    if (labels.size() < 2) throw TooShort("predictor training needs at least 2 labels");
    if (k == 0) throw PreconditionError("predictor order must be >= 1");
    SequenceModel m;
    m.k_ = k;
    for (auto l : labels) ++m.marginal_[l];
    for (std::size_t i = 1; i < labels.size(); ++i) {
        for (std::size_t len = 1; len <= k && len <= i; ++len) {
            std::vector<Label> ctx(labels.begin() + static_cast<std::ptrdiff_t>(i - len),
                                   labels.begin() + static_cast<std::ptrdiff_t>(i));
            ++m.successors_[std::move(ctx)][labels[i]];
        }
    }
    return m;
}

Label SequenceModel::next(std::span<const Label> recent) const {
    const std::size_t longest = std::min(k_, recent.size());
    for (std::size_t len = longest; len >= 1; --len) {
        std::vector<Label> ctx(recent.end() - static_cast<std::ptrdiff_t>(len), recent.end());
        auto it = successors_.find(ctx);
        if (it != successors_.end()) return mode(it->second);
    }
    return mode(marginal_);
}

Horizons SequenceModel::predict(std::span<const Label> recent) const {
    if (recent.empty()) throw PreconditionError("prediction needs at least one recent label");
    std::vector<Label> history(recent.end() - static_cast<std::ptrdiff_t>(std::min(k_, recent.size())),
                               recent.end());
    Horizons h;
    h.rollout.reserve(kRolloutSteps);
    for (std::size_t step = 0; step < kRolloutSteps; ++step) {
        const Label n = next(history);
        h.rollout.push_back(n);
        history.push_back(n);
        if (history.size() > k_) history.erase(history.begin());
    }
    h.t1 = h.rollout[0];
    h.t5 = h.rollout[4];
    h.t10 = h.rollout[9];
    return h;
}

void to_json(nlohmann::ordered_json& j, const WorkloadContext& c) {
    j = nlohmann::ordered_json{{"t", c.t},
                               {"current_label", c.current_label},
                               {"pred_t1", c.pred_t1},
                               {"pred_t5", c.pred_t5},
                               {"pred_t10", c.pred_t10},
                               {"emitted_at", c.emitted_at}};
}

WorkloadContext workload_context_from_json(const nlohmann::json& j) {
    WorkloadContext c;
    j.at("t").get_to(c.t);
    j.at("current_label").get_to(c.current_label);
    j.at("pred_t1").get_to(c.pred_t1);
    j.at("pred_t5").get_to(c.pred_t5);
    j.at("pred_t10").get_to(c.pred_t10);
    j.at("emitted_at").get_to(c.emitted_at);
    return c;
}

ContextEmitter::ContextEmitter(Zone& zone, std::string stream) : zone_(zone), stream_(std::move(stream)) {
    zone_.create_stream(stream_);
    const auto n = zone_.size(stream_);
    if (n > 0) {
        const auto tail = zone_.read(stream_, n - 1);
        last_ = workload_context_from_json(nlohmann::json::parse(tail.back())).t;
    }
}

std::uint64_t ContextEmitter::emit(const WorkloadContext& ctx) {
    if (last_ && ctx.t <= *last_) {
        throw OutOfOrder("context for window " + std::to_string(ctx.t) + " after window " +
                         std::to_string(*last_));
    }
    nlohmann::ordered_json j = ctx;
    const auto offset = zone_.append(stream_, j.dump());
    last_ = ctx.t;
    return offset;
}

std::uint64_t emit_context(ContextEmitter& emitter, WindowIndex t, Label current, const Horizons& preds,
                           double emitted_at) {
    return emitter.emit(WorkloadContext{t, current, preds.t1, preds.t5, preds.t10, emitted_at});
}

std::vector<WorkloadContext> read_contexts(const Zone& zone, const std::string& stream,
                                           std::uint64_t from_offset) {
    std::vector<WorkloadContext> out;
    for (const auto& line : zone.read(stream, from_offset)) {
        out.push_back(workload_context_from_json(nlohmann::json::parse(line)));
    }
    return out;
}

}  // namespace kermit
