#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "kermit/telemetry.hpp"

namespace kermit {

struct WelchResult {
    double t_stat = 0.0;
    double dof = 0.0;
    bool reject = false;
    /// Both samples have zero variance. The decision then reduces to
    /// whether the means differ; t is +-inf (or 0 for equal means).
    bool degenerate = false;
    std::size_t feature_index = 0;
};

/// Two-sided Welch's unequal-variance t-test. Requires a.n >= 2 and b.n >= 2.
WelchResult welch_t(const SampleStats& a, const SampleStats& b, double alpha,
                    std::size_t feature_index = 0);

enum class Correction { None, Bonferroni };

struct ChangePolicy {
    double alpha = 0.05;
    std::size_t min_features_rejecting = 1;
    Correction correction = Correction::Bonferroni;

    /// Significance level applied to each feature's test.
    double per_feature_alpha(std::size_t feature_count) const;
    void validate(std::size_t feature_count) const;
};

/// True when `curr` differs significantly from the window right before it.
bool detect_stream(const ObservationWindow& prev, const ObservationWindow& curr,
                   const ChangePolicy& policy);

/// Indices (ObservationWindow::index) of transition windows. The first
/// window has no predecessor and is never flagged.
std::vector<WindowIndex> detect_batch(std::span<const ObservationWindow> windows,
                                      const ChangePolicy& policy);

/// Streaming form of the detector: compares each window with the previous one.
class ChangeDetector {
public:
    explicit ChangeDetector(ChangePolicy policy) : policy_(policy) {}

    bool observe(const ObservationWindow& window);
    const ChangePolicy& policy() const noexcept { return policy_; }

private:
    ChangePolicy policy_;
    std::optional<ObservationWindow> prev_;
};

}  // namespace kermit
