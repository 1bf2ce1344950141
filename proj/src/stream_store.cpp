#include "kermit/stream_store.hpp"

#include "kermit/errors.hpp"

namespace kermit {

namespace {
constexpr std::string_view kStreamExtension = ".jsonl";
}

std::string_view zone_dir_name(ZoneKind kind) {
    switch (kind) {
        case ZoneKind::Landing: return "lz";
        case ZoneKind::Transformation: return "tz";
        case ZoneKind::Analytics: return "az";
    }
    return "";
}

Zone::Zone(std::filesystem::path dir, ZoneKind kind) : dir_(std::move(dir)), kind_(kind) {
    std::filesystem::create_directories(dir_);
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
        if (!entry.is_regular_file() || entry.path().extension() != kStreamExtension) continue;
        Stream s;
        s.file = entry.path();
        load(s);
        streams_.emplace(entry.path().stem().string(), std::move(s));
    }
}

void Zone::load(Stream& s) {
    std::ifstream in(s.file, std::ios::binary);
    if (!in) throw IoError("cannot read " + s.file.string());
    s.line_starts.clear();
    std::uint64_t pos = 0;
    std::uint64_t line_start = 0;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        const auto got = static_cast<std::uint64_t>(in.gcount());
        for (std::uint64_t i = 0; i < got; ++i) {
            if (buf[i] == '\n') {
                s.line_starts.push_back(line_start);
                line_start = pos + i + 1;
            }
        }
        pos += got;
    }
    s.end = line_start;
    if (pos != s.end) {
        std::filesystem::resize_file(s.file, s.end);
    }
}

std::filesystem::path Zone::stream_path(const std::string& name) const {
    return dir_ / (name + std::string(kStreamExtension));
}

void Zone::create_stream(const std::string& name) {
    if (name.empty() || name.find('/') != std::string::npos) {
        throw PreconditionError("invalid stream name '" + name + "'");
    }
    if (streams_.contains(name)) return;
    Stream s;
    s.file = stream_path(name);
    if (std::filesystem::exists(s.file)) {
        load(s);
    } else {
        std::ofstream touch(s.file);
        if (!touch) throw IoError("cannot create " + s.file.string());
    }
    streams_.emplace(name, std::move(s));
}

std::vector<std::string> Zone::stream_names() const {
    std::vector<std::string> out;
    for (const auto& [name, s] : streams_) out.push_back(name);
    return out;
}

Zone::Stream& Zone::stream(const std::string& name) {
    auto it = streams_.find(name);
    if (it == streams_.end()) {
        throw UnknownStream("no stream '" + name + "' in zone " + std::string(zone_dir_name(kind_)));
    }
    return it->second;
}

const Zone::Stream& Zone::stream(const std::string& name) const {
    auto it = streams_.find(name);
    if (it == streams_.end()) {
        throw UnknownStream("no stream '" + name + "' in zone " + std::string(zone_dir_name(kind_)));
    }
    return it->second;
}

std::uint64_t Zone::append(const std::string& name, std::string_view record) {
    const std::string line(record);
    return append_many(name, std::span<const std::string>(&line, 1));
}

std::uint64_t Zone::append_many(const std::string& name, std::span<const std::string> records) {
    Stream& s = stream(name);
    std::string block;
    std::vector<std::uint64_t> starts;
    starts.reserve(records.size());
    for (const auto& r : records) {
        if (r.find('\n') != std::string::npos) {
            throw PreconditionError("stream records must be single lines");
        }
        starts.push_back(s.end + block.size());
        block += r;
        block += '\n';
    }
    if (!s.out) {
        s.out = std::make_unique<std::ofstream>(s.file, std::ios::binary | std::ios::app);
        if (!*s.out) throw IoError("cannot append to " + s.file.string());
    }
    s.out->write(block.data(), static_cast<std::streamsize>(block.size()));
    s.out->flush();
    if (!*s.out) throw IoError("write failed on " + s.file.string());

    const std::uint64_t first = s.line_starts.size();
    s.line_starts.insert(s.line_starts.end(), starts.begin(), starts.end());
    s.end += block.size();
    return first;
}

std::vector<std::string> Zone::read(const std::string& name, std::uint64_t from_offset) const {
    const Stream& s = stream(name);
    std::vector<std::string> out;
    if (from_offset >= s.line_starts.size()) return out;
    std::ifstream in(s.file, std::ios::binary);
    if (!in) throw IoError("cannot read " + s.file.string());
    const std::uint64_t begin = s.line_starts[from_offset];
    in.seekg(static_cast<std::streamoff>(begin));
    std::string bytes(s.end - begin, '\0');
    in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.reserve(s.line_starts.size() - from_offset);
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        auto nl = bytes.find('\n', pos);
        out.emplace_back(bytes.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return out;
}

std::uint64_t Zone::size(const std::string& name) const { return stream(name).line_starts.size(); }

KnowledgeBase::KnowledgeBase(std::filesystem::path root)
    : root_(std::move(root)),
      lz_(root_ / zone_dir_name(ZoneKind::Landing), ZoneKind::Landing),
      tz_(root_ / zone_dir_name(ZoneKind::Transformation), ZoneKind::Transformation),
      az_(root_ / zone_dir_name(ZoneKind::Analytics), ZoneKind::Analytics),
      workloads_(WorkloadDB::open(workload_db_path(root_))) {}

std::filesystem::path KnowledgeBase::workload_db_path(const std::filesystem::path& root) {
    return root / zone_dir_name(ZoneKind::Analytics) / "workload_db.db";
}

Zone& KnowledgeBase::zone(ZoneKind kind) {
    switch (kind) {
        case ZoneKind::Landing: return lz_;
        case ZoneKind::Transformation: return tz_;
        case ZoneKind::Analytics: return az_;
    }
    return az_;
}

const Zone& KnowledgeBase::zone(ZoneKind kind) const {
    return const_cast<KnowledgeBase*>(this)->zone(kind);
}

}  // namespace kermit
