#include "kermit/cli.hpp"

#include <fstream>
#include <iostream>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "kermit/errors.hpp"
#include "kermit/kermit_system.hpp"

namespace kermit::cli {

namespace {

int fail(std::ostream& err, int code, std::string_view kind, std::string_view message) {
    err << nlohmann::json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
    return code;
}

}  // namespace

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
    std::optional<Scenario> scenario;
    RunSettings settings;
    try {
        scenario.emplace(load_scenario(options.scenario));
        if (options.window_length) {
            scenario->window_length = *options.window_length;
            if (scenario->samples_per_window() < 2) {
                throw InvalidScenario("--windows-len must cover at least 2 sampling intervals");
            }
        }
        settings.apply(scenario->settings);
        if (options.alpha) settings.discovery.change.alpha = *options.alpha;
        if (options.eps) settings.discovery.eps = *options.eps;
        if (options.epsilon_drift) settings.discovery.epsilon_drift = *options.epsilon_drift;
        if (options.min_pts) settings.discovery.min_pts = *options.min_pts;
        if (options.interval) settings.interval = *options.interval;
        if (options.budget_global) settings.plugin.budget_global = *options.budget_global;
        if (options.budget_local) settings.plugin.budget_local = *options.budget_local;
        settings.validate(scenario->schema.size());
    } catch (const Error& e) {
        return fail(err, kExitInput, e.kind(), e.what());
    }

    try {
        const auto result =
            run_scenario(*scenario, options.seed.value_or(scenario->seed), settings, options.out);
        out << format_summary(result.report);
        return kExitOk;
    } catch (const Error& e) {
        return fail(err, kExitRuntime, e.kind(), e.what());
    } catch (const std::exception& e) {
        return fail(err, kExitRuntime, "InternalError", e.what());
    }
}

int cmd_report(const std::filesystem::path& run_dir, std::ostream& out, std::ostream& err) {
    const auto file = run_dir / "report.json";
    std::ifstream in(file);
    if (!in) return fail(err, kExitInput, "NoReport", "no report.json in " + run_dir.string());
    try {
        out << format_summary(metrics_report_from_json(nlohmann::json::parse(in)));
        return kExitOk;
    } catch (const nlohmann::json::exception& e) {
        return fail(err, kExitInput, "CorruptRecord", e.what());
    } catch (const Error& e) {
        return fail(err, kExitInput, e.kind(), e.what());
    }
}

int main(int argc, char** argv) {
    CLI::App app{"KERMIT workload management loop on a simulated cluster"};
    app.require_subcommand(1);
    std::string log_level = "warn";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Run a scenario end to end and write a metrics report");
    run_cmd->add_option("scenario", run.scenario, "Scenario file")->required();
    run_cmd->add_option("--out", run.out, "Output directory")->required();
    run_cmd->add_option("--seed", run.seed, "Simulation seed (default: the scenario's)");
    run_cmd->add_option("--windows-len", run.window_length, "Observation window length in seconds");
    run_cmd->add_option("--alpha", run.alpha, "Change detection significance level");
    run_cmd->add_option("--eps", run.eps, "DBSCAN neighbourhood radius in noise units");
    run_cmd->add_option("--epsilon-drift", run.epsilon_drift, "Drift threshold in noise units");
    run_cmd->add_option("--minpts", run.min_pts, "DBSCAN minPts");
    run_cmd->add_option("--interval", run.interval, "Windows per discovery batch");
    run_cmd->add_option("--budget-global", run.budget_global, "Global search probe budget");
    run_cmd->add_option("--budget-local", run.budget_local, "Local search probe budget");

    std::filesystem::path report_dir;
    auto* report_cmd = app.add_subcommand("report", "Summarize the report of a finished run");
    report_cmd->add_option("run_dir", report_dir, "Directory passed to 'run --out'")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(std::cerr, kExitInput, "UsageError", e.what());
    }
    spdlog::set_level(spdlog::level::from_str(log_level));

    if (*run_cmd) return cmd_run(run, std::cout, std::cerr);
    return cmd_report(report_dir, std::cout, std::cerr);
}

}  // namespace kermit::cli
