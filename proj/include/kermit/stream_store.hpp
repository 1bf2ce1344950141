#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kermit/workload_db.hpp"

namespace kermit {

enum class ZoneKind { Landing, Transformation, Analytics };

std::string_view zone_dir_name(ZoneKind kind);

/// A directory of named, append-only, line-delimited streams. Offsets are
/// record ordinals. Each append writes one complete line and flushes, and a
/// trailing partial line left by a crash is dropped when the zone is opened,
/// so readers never see a torn record.
class Zone {
public:
    Zone(std::filesystem::path dir, ZoneKind kind);

    ZoneKind kind() const noexcept { return kind_; }
    const std::filesystem::path& dir() const noexcept { return dir_; }

    /// Declares a stream; a no-op when it already exists.
    void create_stream(const std::string& name);
    bool has_stream(const std::string& name) const { return streams_.contains(name); }
    std::vector<std::string> stream_names() const;

    /// Returns the offset of the appended record. Throws UnknownStream.
    std::uint64_t append(const std::string& name, std::string_view record);
    /// Appends several records; returns the offset of the first.
    std::uint64_t append_many(const std::string& name, std::span<const std::string> records);

    /// All records with offset >= from_offset, in order. Throws UnknownStream.
    std::vector<std::string> read(const std::string& name, std::uint64_t from_offset = 0) const;
    std::uint64_t size(const std::string& name) const;

    std::filesystem::path stream_path(const std::string& name) const;

private:
    struct Stream {
        std::filesystem::path file;
        std::vector<std::uint64_t> line_starts;
        std::uint64_t end = 0;
        std::unique_ptr<std::ofstream> out;
    };

    Stream& stream(const std::string& name);
    const Stream& stream(const std::string& name) const;
    static void load(Stream& s);

    std::filesystem::path dir_;
    ZoneKind kind_;
    std::map<std::string, Stream> streams_;
};

/// Root of a knowledge base: `<root>/{lz,tz,az}` plus the WorkloadDB file in AZ.
class KnowledgeBase {
public:
    explicit KnowledgeBase(std::filesystem::path root);

    const std::filesystem::path& root() const noexcept { return root_; }
    Zone& zone(ZoneKind kind);
    const Zone& zone(ZoneKind kind) const;
    Zone& landing() { return zone(ZoneKind::Landing); }
    Zone& transformation() { return zone(ZoneKind::Transformation); }
    Zone& analytics() { return zone(ZoneKind::Analytics); }

    WorkloadDB& workloads() noexcept { return workloads_; }
    const WorkloadDB& workloads() const noexcept { return workloads_; }

    static std::filesystem::path workload_db_path(const std::filesystem::path& root);

private:
    std::filesystem::path root_;
    Zone lz_;
    Zone tz_;
    Zone az_;
    WorkloadDB workloads_;
};

}  // namespace kermit
