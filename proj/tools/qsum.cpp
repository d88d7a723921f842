// qsum: run summation-protocol scenarios, print exact oracles, demo single runs.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qsum/cli.hpp"
#include "qsum/scenario.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitInvalid = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void print_summary(std::ostream& os, const nlohmann::json& agg) {
    os << "scenario " << agg["scenario"]["name"].get<std::string>() << ": " << agg["runs"] << " runs, success_rate "
       << agg["success_rate"] << ", detection_rate " << agg["detection_rate"];
    if (!agg["recovered_accuracy"].is_null()) os << ", recovered_accuracy " << agg["recovered_accuracy"];
    os << '\n';
    for (const auto& c : agg["oracle_comparisons"]) {
        os << "  " << c["quantity"].get<std::string>() << ": estimate " << c["estimate"]["point"] << " +- "
           << c["estimate"]["stderr"] << " vs oracle " << c["oracle"]["fraction"].get<std::string>();
        if (!c["within_3_sigma"].is_null()) os << (c["within_3_sigma"].get<bool>() ? " (within 3 sigma)" : " (OUTSIDE 3 sigma)");
        if (c.contains("matches_reference") && !c["matches_reference"].get<bool>())
            os << " [differs from reference " << c["reference_constant"]["expression"].get<std::string>() << " = "
               << c["reference_constant"]["fraction"].get<std::string>() << "]";
        os << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-party quantum summation simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> trials;
    std::string out_path;
    unsigned workers = 1;
    bool timing = false;
    auto* run = app.add_subcommand("run", "Execute a scenario file and write a JSON Lines report");
    run->add_option("scenario", scenario_path, "Scenario file (JSON)")->required();
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--trials", trials, "Override the scenario trial count");
    run->add_option("--out", out_path, "Report path (default: scenario 'output', else stdout)");
    run->add_option("--workers", workers, "Worker threads; output order is by run id regardless");
    run->add_flag("--timing", timing, "Add wall_time_ms to the aggregate record");

    std::string oracle_kind;
    std::vector<std::string> oracle_args;
    auto* oracle = app.add_subcommand("oracle", "Print an exact probability: escape N q | conditional_pass n d r "
                                                "first|adaptive | eve_detection d");
    oracle->add_option("kind", oracle_kind, "escape, conditional_pass or eve_detection")->required();
    oracle->add_option("params", oracle_args, "Parameters for the oracle");

    std::string demo_protocol;
    std::vector<std::string> demo_args;
    std::optional<std::uint64_t> demo_seed;
    auto* demo = app.add_subcommand("demo", "Print one seeded run step by step");
    demo->add_option("protocol", demo_protocol, "yy2018, improved, attack1, attack2, fake_state, intercept_resend")
        ->required();
    demo->add_option("options", demo_args, "k=v overrides: n d N q decoys seed attack party digit r count fraction "
                                           "model secrets");
    demo->add_option("--seed", demo_seed, "Run seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            auto scenario = qsum::parse_scenario(read_file(scenario_path));
            if (seed) scenario.config.seed = *seed;
            if (trials) scenario.trials = *trials;
            if (!out_path.empty()) scenario.output = out_path;
            const auto report = qsum::run_scenario(scenario, workers, timing);
            if (scenario.output.empty()) {
                report.write(std::cout);
            } else {
                std::ofstream out(scenario.output, std::ios::binary);
                if (!out) throw std::runtime_error("cannot write report '" + scenario.output + "'");
                report.write(out);
                print_summary(std::cout, report.aggregate);
                std::cout << "report written to " << scenario.output << '\n';
            }
        } else if (*oracle) {
            std::cout << qsum::cli::oracle_command(oracle_kind, oracle_args) << '\n';
        } else if (*demo) {
            auto scenario = qsum::cli::demo_scenario(demo_protocol, demo_args);
            if (demo_seed) scenario.config.seed = *demo_seed;
            std::cout << qsum::cli::render_demo(scenario);
        }
    } catch (const qsum::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kExitInvalid;
    } catch (const qsum::ScenarioError& e) {
        std::cerr << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::length_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
