#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "kermit/stream_store.hpp"
#include "kermit/types.hpp"

namespace kermit {

struct Horizons {
    Label t1 = kUnknownLabel;
    Label t5 = kUnknownLabel;
    Label t10 = kUnknownLabel;
    /// Labels predicted for t+1 .. t+10.
    std::vector<Label> rollout;
};

/// Forecasts workload labels from recent history. Implementations must be
/// immutable after construction.
class LabelPredictor {
public:
    virtual ~LabelPredictor() = default;
    virtual std::size_t order() const = 0;
    /// `recent` holds the latest labels, oldest first; must be non-empty.
    virtual Horizons predict(std::span<const Label> recent) const = 0;
};

/// Order-k frequency model over label sequences with suffix backoff.
class SequenceModel final : public LabelPredictor {
public:
    /// Throws TooShort when |labels| < 2.
    static SequenceModel train(std::span<const Label> labels, std::size_t k);

    std::size_t order() const override { return k_; }
    Horizons predict(std::span<const Label> recent) const override;

    /// Most frequent successor of the longest suffix of `recent` seen in
    /// training, falling back to the marginal mode. Ties go to the smaller label.
    Label next(std::span<const Label> recent) const;

    const std::map<std::vector<Label>, std::map<Label, std::size_t>>& transitions() const noexcept {
        return successors_;
    }
    const std::map<Label, std::size_t>& marginal() const noexcept { return marginal_; }

private:
    std::size_t k_ = 1;
    std::map<std::vector<Label>, std::map<Label, std::size_t>> successors_;
    std::map<Label, std::size_t> marginal_;
};

struct WorkloadContext {
    WindowIndex t = 0;
    Label current_label = kUnknownLabel;
    Label pred_t1 = kUnknownLabel;
    Label pred_t5 = kUnknownLabel;
    Label pred_t10 = kUnknownLabel;
    double emitted_at = 0.0;

    bool operator==(const WorkloadContext&) const = default;
};

void to_json(nlohmann::ordered_json& j, const WorkloadContext& c);
WorkloadContext workload_context_from_json(const nlohmann::json& j);

/// Single writer of a context stream. Window indices must strictly increase.
class ContextEmitter {
public:
    ContextEmitter(Zone& zone, std::string stream);

    /// Throws OutOfOrder. Returns the record's offset.
    std::uint64_t emit(const WorkloadContext& ctx);
    std::optional<WindowIndex> last_index() const noexcept { return last_; }

private:
    Zone& zone_;
    std::string stream_;
    std::optional<WindowIndex> last_;
};

std::uint64_t emit_context(ContextEmitter& emitter, WindowIndex t, Label current, const Horizons& preds,
                           double emitted_at);

std::vector<WorkloadContext> read_contexts(const Zone& zone, const std::string& stream,
                                           std::uint64_t from_offset = 0);

}  // namespace kermit
