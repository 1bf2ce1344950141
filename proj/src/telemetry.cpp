#include "kermit/telemetry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include <spdlog/spdlog.h>

#include "kermit/errors.hpp"

namespace kermit {

FeatureSchema::FeatureSchema(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.empty()) {
        throw PreconditionError("feature schema must not be empty");
    }
    std::set<std::string> seen;
    for (const auto& n : names_) {
        if (!seen.insert(n).second) {
            throw PreconditionError("duplicate feature name: " + n);
        }
    }
}

FeatureSchema FeatureSchema::standard() {
    return FeatureSchema({"cpu_user_pct", "cpu_sys_pct", "mem_used_pct", "disk_read_mbs",
                          "disk_write_mbs", "net_rx_mbs", "net_tx_mbs", "active_containers"});
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - names_.begin());
}

namespace {

double parse_double(std::string_view field, std::string_view line) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw PreconditionError("malformed number '" + std::string(field) + "' in sample: " +
                                std::string(line));
    }
    return value;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

RawSample parse_raw_sample(std::string_view line, std::size_t feature_count) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        auto comma = line.find(',', pos);
        fields.push_back(line.substr(pos, comma == std::string_view::npos ? comma : comma - pos));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    if (fields.size() != feature_count + 2) {
        throw PreconditionError("expected " + std::to_string(feature_count + 2) +
                                " fields in sample: " + std::string(line));
    }
    RawSample s;
    s.timestamp = parse_double(fields[0], line);
    if (!std::isfinite(s.timestamp)) {
        throw PreconditionError("non-finite timestamp: " + std::string(line));
    }
    s.source_id = std::string(fields[1]);
    s.values.reserve(feature_count);
    for (std::size_t i = 0; i < feature_count; ++i) {
        s.values.push_back(parse_double(fields[i + 2], line));
    }
    return s;
}

std::string format_raw_sample(const RawSample& sample) {
    std::string out = format_double(sample.timestamp);
    out += ',';
    out += sample.source_id;
    for (double v : sample.values) {
        out += ',';
        out += format_double(v);
    }
    return out;
}

SampleStats SampleStats::of(std::span<const double> values) {
    if (values.empty()) {
        throw PreconditionError("SampleStats of an empty sample");
    }
    // Summing in sorted order makes the result independent of sample order.
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());

    SampleStats s;
    s.n = sorted.size();
    s.min = sorted.front();
    s.max = sorted.back();
    double sum = 0.0;
    for (double v : sorted) sum += v;
    s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    s.mean = std::clamp(s.mean, s.min, s.max);
    return s;
}

SampleStats SampleStats::merge(const SampleStats& a, const SampleStats& b) {
    if (a.n == 0) return b;
    if (b.n == 0) return a;
    const double na = static_cast<double>(a.n);
    const double nb = static_cast<double>(b.n);
    const double n = na + nb;
    const double delta = b.mean - a.mean;

    SampleStats s;
    s.n = a.n + b.n;
    s.mean = a.mean + delta * nb / n;
    const double m2 = a.std * a.std * (na - 1.0) + b.std * b.std * (nb - 1.0) +
                      delta * delta * na * nb / n;
    s.std = s.n > 1 ? std::sqrt(m2 / (n - 1.0)) : 0.0;
    s.min = std::min(a.min, b.min);
    s.max = std::max(a.max, b.max);
    s.mean = std::clamp(s.mean, s.min, s.max);
    return s;
}

ObservationWindow aggregate_window(std::span<const RawSample> samples,
                                   const FeatureSchema& schema,
                                   WindowIndex index,
                                   double start,
                                   double end) {
    if (samples.empty()) {
        throw EmptyWindow("no samples in window " + std::to_string(index));
    }
    const std::size_t f = schema.size();
    std::vector<std::vector<double>> columns(f);
    for (auto& c : columns) c.reserve(samples.size());
    for (const auto& s : samples) {
        if (s.values.size() != f) {
            throw PreconditionError("sample has " + std::to_string(s.values.size()) +
                                    " values, schema has " + std::to_string(f));
        }
        if (!(s.timestamp >= start && s.timestamp < end)) {
            throw PreconditionError("sample timestamp outside window " + std::to_string(index));
        }
        for (std::size_t i = 0; i < f; ++i) columns[i].push_back(s.values[i]);
    }

    ObservationWindow w;
    w.index = index;
    w.start = start;
    w.end = end;
    w.per_feature.reserve(f);
    w.feature_vector.reserve(f);
    for (const auto& c : columns) {
        w.per_feature.push_back(SampleStats::of(c));
        w.feature_vector.push_back(w.per_feature.back().mean);
    }
    return w;
}

AnalyticWindow to_analytic_window(const ObservationWindow& window) {
    return AnalyticWindow{window.index, window.feature_vector};
}

RateWindow rate_transform(const AnalyticWindow& prev, const AnalyticWindow& curr) {
    if (curr.index != prev.index + 1) {
        throw NonConsecutive("rate transform needs adjacent windows, got " +
                             std::to_string(prev.index) + " and " + std::to_string(curr.index));
    }
    if (curr.features.size() != prev.features.size()) {
        throw SchemaMismatch("feature count differs between windows");
    }
    RateWindow r;
    r.index = curr.index;
    r.deltas.resize(curr.features.size());
    for (std::size_t i = 0; i < r.deltas.size(); ++i) {
        r.deltas[i] = curr.features[i] - prev.features[i];
    }
    return r;
}

WindowStreams::WindowStreams(FeatureSchema schema, double window_length)
    : schema_(std::move(schema)), window_length_(window_length) {
    if (!(window_length_ > 0.0)) {
        throw PreconditionError("window length must be positive");
    }
}

const ObservationWindow& WindowStreams::push_samples(std::span<const RawSample> samples) {
    const WindowIndex t = next_index();
    const double start = static_cast<double>(t) * window_length_;
    const double end = start + window_length_;
    try {
        push(aggregate_window(samples, schema_, t, start, end));
    } catch (const EmptyWindow& e) {
        if (observations_.empty()) throw;
        spdlog::warn("{}; substituting window {}", e.what(), t - 1);
        ObservationWindow copy = observations_.back();
        copy.index = t;
        copy.start = start;
        copy.end = end;
        push(std::move(copy));
    }
    return observations_.back();
}

void WindowStreams::push(ObservationWindow window) {
    if (window.index != next_index()) {
        throw NonConsecutive("expected window " + std::to_string(next_index()) + ", got " +
                             std::to_string(window.index));
    }
    if (window.feature_vector.size() != schema_.size()) {
        throw SchemaMismatch("window feature count does not match schema");
    }
    analytics_.push_back(to_analytic_window(window));
    if (analytics_.size() > 1) {
        rates_.push_back(rate_transform(analytics_[analytics_.size() - 2], analytics_.back()));
    }
    observations_.push_back(std::move(window));
}

void to_json(nlohmann::json& j, const SampleStats& s) {
    j = nlohmann::json{{"mean", s.mean}, {"std", s.std}, {"n", s.n}, {"min", s.min}, {"max", s.max}};
}

void from_json(const nlohmann::json& j, SampleStats& s) {
    j.at("mean").get_to(s.mean);
    j.at("std").get_to(s.std);
    j.at("n").get_to(s.n);
    j.at("min").get_to(s.min);
    j.at("max").get_to(s.max);
}

void to_json(nlohmann::json& j, const ObservationWindow& w) {
    j = nlohmann::json{{"t", w.index},
                       {"start", w.start},
                       {"end", w.end},
                       {"stats", w.per_feature},
                       {"features", w.feature_vector}};
}

void from_json(const nlohmann::json& j, ObservationWindow& w) {
    j.at("t").get_to(w.index);
    j.at("start").get_to(w.start);
    j.at("end").get_to(w.end);
    j.at("stats").get_to(w.per_feature);
    j.at("features").get_to(w.feature_vector);
}

void to_json(nlohmann::json& j, const AnalyticWindow& w) {
    j = nlohmann::json{{"t", w.index}, {"features", w.features}};
}

void from_json(const nlohmann::json& j, AnalyticWindow& w) {
    j.at("t").get_to(w.index);
    j.at("features").get_to(w.features);
}

void to_json(nlohmann::json& j, const RateWindow& w) {
    j = nlohmann::json{{"t", w.index}, {"deltas", w.deltas}};
}

void from_json(const nlohmann::json& j, RateWindow& w) {
    j.at("t").get_to(w.index);
    j.at("deltas").get_to(w.deltas);
}

}  // namespace kermit
