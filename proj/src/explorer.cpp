#include "kermit/explorer.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <optional>

#include "kermit/errors.hpp"

namespace kermit {

namespace {

class Evaluator {
public:
    Evaluator(const Objective& objective, const ConfigSpace& space, std::size_t budget)
        : objective_(objective), space_(space), budget_(budget) {}

    /// nullopt once the budget is spent and `p` has not been seen before.
    std::optional<double> operator()(const GridPoint& p) {
        if (auto it = memo_.find(p); it != memo_.end()) return it->second;
        if (result_.probes >= budget_) {
            result_.budget_exhausted = true;
            return std::nullopt;
        }
        const Configuration cfg = space_.to_config(p);
        const double v = objective_(cfg);
        memo_.emplace(p, v);
        result_.trace.emplace_back(cfg, v);
        ++result_.probes;
        if (!best_ || v < best_value_) {
            best_ = p;
            best_value_ = v;
        }
        return v;
    }

    SearchResult finish() && {
        if (best_) {
            result_.config = space_.to_config(*best_);
            result_.objective = best_value_;
        }
        return std::move(result_);
    }

    const std::optional<GridPoint>& best() const noexcept { return best_; }
    double best_value() const noexcept { return best_value_; }
    bool exhausted() const noexcept { return result_.budget_exhausted; }

private:
    const Objective& objective_;
    const ConfigSpace& space_;
    std::size_t budget_;
    std::map<GridPoint, double> memo_;
    std::optional<GridPoint> best_;
    double best_value_ = std::numeric_limits<double>::infinity();
    SearchResult result_;
};

}  // namespace

void to_json(nlohmann::ordered_json& j, const SearchResult& r) {
    j = nlohmann::ordered_json::object();
    j["config"] = r.config;
    j["objective"] = r.objective;
    j["probes"] = r.probes;
    j["budget_exhausted"] = r.budget_exhausted;
    auto& trace = j["trace"] = nlohmann::ordered_json::array();
    for (const auto& [cfg, v] : r.trace) trace.push_back({{"config", cfg}, {"objective", v}});
}

SearchResult global_search(const Objective& objective, const ConfigSpace& space, std::size_t budget) {
    if (budget < 1) throw PreconditionError("global search budget must be >= 1");
    Evaluator eval(objective, space, budget);
    const GridPoint start = space.default_point();
    const auto& params = space.parameters();
    const double start_value = *eval(start);

    // Phase 1: coarse sweep.
    GridPoint composite = start;
    for (std::size_t p = 0; p < params.size(); ++p) {
        const std::size_t n = params[p].values.size();
        double line_best = start_value;
        for (std::size_t idx : {std::size_t{0}, n / 2, n - 1}) {
            GridPoint q = start;
            q[p] = idx;
            const auto v = eval(q);
            if (!v) return std::move(eval).finish();
            if (*v < line_best) {
                line_best = *v;
                composite[p] = idx;
            }
        }
    }
    if (!eval(composite)) return std::move(eval).finish();

    // Phase 2: coordinate descent from the best point so far.
    GridPoint current = *eval.best();
    double current_value = eval.best_value();
    for (bool improved = true; improved;) {
        improved = false;
        for (std::size_t p = 0; p < params.size(); ++p) {
            GridPoint line_best = current;
            double line_value = current_value;
            for (std::size_t idx = 0; idx < params[p].values.size(); ++idx) {
                GridPoint q = current;
                q[p] = idx;
                const auto v = eval(q);
                if (!v) return std::move(eval).finish();
                if (*v < line_value) {
                    line_value = *v;
                    line_best = q;
                }
            }
            if (line_value < current_value) {
                current = line_best;
                current_value = line_value;
                improved = true;
            }
        }
    }
    return std::move(eval).finish();
}

SearchResult local_search(const Objective& objective, const ConfigSpace& space,
                          const Configuration& start, std::size_t budget) {
    const GridPoint origin = space.to_point(start);
    if (budget == 0) {
        SearchResult r;
        r.config = start;
        r.objective = std::numeric_limits<double>::quiet_NaN();
        r.budget_exhausted = true;
        return r;
    }
    Evaluator eval(objective, space, budget);
    GridPoint current = origin;
    double current_value = *eval(current);
    const auto& params = space.parameters();
    for (bool improved = true; improved;) {
        improved = false;
        GridPoint step_best = current;
        double step_value = current_value;
        for (std::size_t p = 0; p < params.size(); ++p) {
            for (int delta : {-1, +1}) {
                if (delta < 0 && current[p] == 0) continue;
                if (delta > 0 && current[p] + 1 >= params[p].values.size()) continue;
                GridPoint q = current;
                q[p] = delta < 0 ? q[p] - 1 : q[p] + 1;
                const auto v = eval(q);
                if (!v) return std::move(eval).finish();
                if (*v < step_value) {
                    step_value = *v;
                    step_best = q;
                }
            }
        }
        if (step_value < current_value) {
            current = step_best;
            current_value = step_value;
            improved = true;
        }
    }
    return std::move(eval).finish();
}

}  // namespace kermit
