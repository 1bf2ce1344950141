#include "kermit/sparse_format.hpp"

#include <charconv>

#include "kermit/errors.hpp"

namespace kermit {

namespace {

template <typename T>
T parse_number(std::string_view text, std::string_view line) {
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw PreconditionError("malformed sparse line: " + std::string(line));
    }
    return value;
}

}  // namespace

std::string format_sparse_line(const LabeledInstance& instance) {
    std::string out = std::to_string(instance.label);
    char buf[64];
    for (std::size_t i = 0; i < instance.features.size(); ++i) {
        const double v = instance.features[i];
        if (v == 0.0) continue;
        out += ' ';
        out += std::to_string(i + 1);
        out += ':';
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        out.append(buf, ptr);
    }
    return out;
}

LabeledInstance parse_sparse_line(std::string_view line, std::size_t dimension) {
    LabeledInstance row;
    row.features.assign(dimension, 0.0);
    std::size_t pos = 0;
    auto next_token = [&]() -> std::string_view {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
        const std::size_t start = pos;
        while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
        return line.substr(start, pos - start);
    };
    const auto label = next_token();
    if (label.empty()) throw PreconditionError("empty sparse line");
    row.label = parse_number<Label>(label, line);
    std::size_t last_index = 0;
    for (auto tok = next_token(); !tok.empty(); tok = next_token()) {
        const auto colon = tok.find(':');
        if (colon == std::string_view::npos) {
            throw PreconditionError("missing ':' in sparse line: " + std::string(line));
        }
        const auto index = parse_number<std::size_t>(tok.substr(0, colon), line);
        if (index == 0 || index > dimension || index <= last_index) {
            throw PreconditionError("bad feature index in sparse line: " + std::string(line));
        }
        row.features[index - 1] = parse_number<double>(tok.substr(colon + 1), line);
        last_index = index;
    }
    return row;
}

void write_sparse(std::ostream& out, std::span<const LabeledInstance> rows) {
    for (const auto& r : rows) out << format_sparse_line(r) << '\n';
}

std::vector<LabeledInstance> read_sparse(std::istream& in, std::size_t dimension) {
    std::vector<LabeledInstance> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows.push_back(parse_sparse_line(line, dimension));
    }
    return rows;
}

}  // namespace kermit
