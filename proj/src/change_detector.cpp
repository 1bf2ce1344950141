#include "kermit/change_detector.hpp"

#include <cmath>
#include <limits>

#include "kermit/errors.hpp"
#include "kermit/student_t.hpp"

namespace kermit {

WelchResult welch_t(const SampleStats& a, const SampleStats& b, double alpha,
                    std::size_t feature_index) {
    if (a.n < 2 || b.n < 2) {
        throw PreconditionError("Welch's test needs at least two samples on each side");
    }
    WelchResult r;
    r.feature_index = feature_index;
    const double diff = a.mean - b.mean;
    const double va = a.std * a.std / static_cast<double>(a.n);
    const double vb = b.std * b.std / static_cast<double>(b.n);
    const double se2 = va + vb;

    if (se2 == 0.0) {
        r.degenerate = true;
        r.dof = static_cast<double>(a.n + b.n - 2);
        if (diff == 0.0) {
            r.t_stat = 0.0;
            r.reject = false;
        } else {
            r.t_stat = std::copysign(std::numeric_limits<double>::infinity(), diff);
            r.reject = true;
        }
        return r;
    }

    r.t_stat = diff / std::sqrt(se2);
    r.dof = se2 * se2 /
            (va * va / static_cast<double>(a.n - 1) + vb * vb / static_cast<double>(b.n - 1));
    r.reject = std::fabs(r.t_stat) > stats::student_t_two_sided_critical(r.dof, alpha);
    return r;
}

double ChangePolicy::per_feature_alpha(std::size_t feature_count) const {
    return correction == Correction::Bonferroni ? alpha / static_cast<double>(feature_count)
                                                : alpha;
}

void ChangePolicy::validate(std::size_t feature_count) const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw PreconditionError("change policy alpha must lie in (0, 1)");
    }
    if (min_features_rejecting < 1 || min_features_rejecting > feature_count) {
        throw PreconditionError("min_features_rejecting must lie in [1, F]");
    }
}

bool detect_stream(const ObservationWindow& prev, const ObservationWindow& curr,
                   const ChangePolicy& policy) {
    if (curr.index != prev.index + 1) {
        throw NonConsecutive("detect_stream needs adjacent windows, got " +
                             std::to_string(prev.index) + " and " + std::to_string(curr.index));
    }
    const std::size_t f = curr.per_feature.size();
    if (prev.per_feature.size() != f) {
        throw SchemaMismatch("feature count differs between windows");
    }
    policy.validate(f);
    const double alpha = policy.per_feature_alpha(f);
    std::size_t rejecting = 0;
    for (std::size_t i = 0; i < f; ++i) {
        if (welch_t(prev.per_feature[i], curr.per_feature[i], alpha, i).reject) {
            if (++rejecting >= policy.min_features_rejecting) return true;
        }
    }
    return false;
}

std::vector<WindowIndex> detect_batch(std::span<const ObservationWindow> windows,
                                      const ChangePolicy& policy) {
    if (windows.size() < 2) {
        throw TooFewWindows("batch change detection needs at least two windows");
    }
    std::vector<WindowIndex> flagged;
    for (std::size_t i = 1; i < windows.size(); ++i) {
        if (detect_stream(windows[i - 1], windows[i], policy)) {
            flagged.push_back(windows[i].index);
        }
    }
    return flagged;
}

bool ChangeDetector::observe(const ObservationWindow& window) {
    bool flagged = false;
    if (prev_) {
        flagged = detect_stream(*prev_, window, policy_);
    }
    prev_ = window;
    return flagged;
}

}  // namespace kermit
