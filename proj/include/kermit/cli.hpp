#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

namespace kermit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitRuntime = 3;

struct RunOptions {
    std::filesystem::path scenario;
    std::filesystem::path out;
    std::optional<std::uint64_t> seed;
    std::optional<double> window_length;
    std::optional<double> alpha;
    std::optional<double> eps;
    std::optional<double> epsilon_drift;
    std::optional<std::size_t> min_pts;
    std::optional<std::size_t> interval;
    std::optional<std::size_t> budget_global;
    std::optional<std::size_t> budget_local;
};

/// Errors are written to `err` as one JSON line.
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);
int cmd_report(const std::filesystem::path& run_dir, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace kermit::cli
