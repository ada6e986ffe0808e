// Command-line driver: validate / backtest / report / synth.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trendfolio/pipeline.hpp"
#include "trendfolio/synthetic.hpp"

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kConfig = 2, kData = 3, kRuntime = 4 };

enum class Verbosity { Quiet, Info, Debug };

Verbosity verbosity() {
    const char* v = std::getenv("TRENDFOLIO_LOG");
    if (!v)
        return Verbosity::Info;
    std::string s = v;
    if (s == "quiet" || s == "error")
        return Verbosity::Quiet;
    if (s == "debug")
        return Verbosity::Debug;
    return Verbosity::Info;
}

void info(const std::string& msg) {
    if (verbosity() != Verbosity::Quiet)
        std::cerr << msg << '\n';
}

void debug(const std::string& msg) {
    if (verbosity() == Verbosity::Debug)
        std::cerr << "debug: " << msg << '\n';
}

void describe(const trendfolio::RunManifest& m) {
    debug("data_dir " + m.data_dir.string());
    debug("universe " + m.universe.string());
    debug("output_dir " + m.output_dir.string());
    for (const auto& s : m.strategies)
        debug("strategy " + s.name + " benchmark " + s.benchmark_id + " te_window " + std::to_string(s.te_window) +
              " rebalance_period " + std::to_string(s.rebalance_period));
    if (m.blend)
        debug("blend " + m.blend->name + " with " + std::to_string(m.blend->components.size()) + " components");
}

int exit_for(trendfolio::ErrorClass c) {
    switch (c) {
    case trendfolio::ErrorClass::Config: return kConfig;
    case trendfolio::ErrorClass::Data: return kData;
    case trendfolio::ErrorClass::Runtime: return kRuntime;
    }
    return kRuntime;
}

// config problems take precedence over data problems
int exit_for(const std::vector<trendfolio::Finding>& findings) {
    int code = kOk;
    for (const auto& f : findings) {
        if (f.cls == trendfolio::ErrorClass::Config)
            return kConfig;
        code = std::max(code, exit_for(f.cls));
    }
    return code;
}

int cmd_validate(const std::string& manifest_path) {
    auto m = trendfolio::load_manifest(manifest_path);
    describe(m);
    auto findings = trendfolio::validate_manifest(m);
    if (findings.empty()) {
        std::cout << "OK " << manifest_path << '\n';
        return kOk;
    }
    for (const auto& f : findings)
        std::cout << "FAIL " << f.where << ": " << f.message << '\n';
    return exit_for(findings);
}

int cmd_backtest(const std::string& manifest_path, bool with_report) {
    auto m = trendfolio::load_manifest(manifest_path);
    describe(m);
    auto findings = trendfolio::validate_manifest(m);
    if (!findings.empty()) {
        for (const auto& f : findings)
            std::cerr << "FAIL " << f.where << ": " << f.message << '\n';
        return exit_for(findings);
    }
    const auto t0 = std::chrono::steady_clock::now();
    auto dirs = trendfolio::run_manifest(m);
    debug("backtests finished in " +
          std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) + " s");
    for (const auto& dir : dirs) {
        info("wrote " + dir.string());
        if (with_report)
            info("wrote " + trendfolio::report_result_dir(dir).string());
    }
    return kOk;
}

int cmd_report(const std::vector<std::string>& dirs) {
    for (const auto& d : dirs)
        info("wrote " + trendfolio::report_result_dir(d).string());
    return kOk;
}

int cmd_synth(const std::string& dir, std::uint64_t seed) {
    trendfolio::synthetic::write_dataset(trendfolio::synthetic::generate(seed), dir);
    info("wrote synthetic dataset to " + dir);
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"trendfolio: momentum / trend-following portfolio backtester"};
    app.require_subcommand(1);

    std::string manifest;
    auto* validate = app.add_subcommand("validate", "Check a run manifest, its universe and every price file");
    validate->add_option("manifest", manifest, "Run manifest (JSON)")->required()->check(CLI::ExistingFile);

    bool with_report = false;
    auto* backtest = app.add_subcommand("backtest", "Run every strategy and the blend of a manifest");
    backtest->add_option("manifest", manifest, "Run manifest (JSON)")->required()->check(CLI::ExistingFile);
    backtest->add_flag("--report", with_report, "Also write analytics for each result directory");

    std::vector<std::string> result_dirs;
    auto* report = app.add_subcommand("report", "Write metric panel, calendar-year table and plot data");
    report->add_option("result_dirs", result_dirs, "Result directories written by backtest")->required();

    std::string synth_dir;
    std::uint64_t seed = 20231227;
    auto* synth = app.add_subcommand("synth", "Generate the bundled synthetic 21-asset dataset");
    synth->add_option("dir", synth_dir, "Output directory")->required();
    synth->add_option("--seed", seed, "Generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        if (*validate)
            return cmd_validate(manifest);
        if (*backtest)
            return cmd_backtest(manifest, with_report);
        if (*report)
            return cmd_report(result_dirs);
        if (*synth)
            return cmd_synth(synth_dir, seed);
    } catch (const trendfolio::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_for(e.error_class());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
    return kUsage;
}
