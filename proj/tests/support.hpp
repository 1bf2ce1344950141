#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "kermit/change_detector.hpp"
#include "kermit/config_space.hpp"
#include "kermit/telemetry.hpp"

namespace kermit::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("kermit-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::filesystem::path scenario_path(const std::string& name) {
    return std::filesystem::path(KERMIT_SCENARIO_DIR) / (name + ".json");
}

inline SampleStats make_stats(double mean, double std, std::size_t n) {
    SampleStats s;
    s.mean = mean;
    s.std = std;
    s.n = n;
    s.min = mean - 3.0 * std;
    s.max = mean + 3.0 * std;
    return s;
}

/// Window of `n` samples per feature drawn from N(means[i], sigma^2).
inline ObservationWindow noisy_window(WindowIndex t, const FeatureVector& means, double sigma, std::size_t n,
                                      std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, sigma);
    std::vector<RawSample> samples(n);
    for (std::size_t k = 0; k < n; ++k) {
        samples[k].timestamp = static_cast<double>(t) * 10.0 + static_cast<double>(k) * (10.0 / n);
        samples[k].source_id = "a0";
        for (double m : means) samples[k].values.push_back(m + noise(rng));
    }
    std::vector<std::string> names;
    for (std::size_t i = 0; i < means.size(); ++i) names.push_back("f" + std::to_string(i));
    return aggregate_window(samples, FeatureSchema(names), t, static_cast<double>(t) * 10.0,
                            static_cast<double>(t + 1) * 10.0);
}

/// Two parameters with domains of 5 values each, default at the midpoint.
inline ConfigSpace small_space(std::size_t n = 5) {
    std::vector<Parameter> params;
    for (const char* name : {"p", "q"}) {
        Parameter p{name, {}};
        for (std::size_t i = 0; i < n; ++i) p.values.push_back(std::to_string(i));
        params.push_back(p);
    }
    const std::string mid = std::to_string(n / 2);
    return ConfigSpace(params, {{"p", mid}, {"q", mid}});
}

}  // namespace kermit::test
