// simulate: run a decoherence scenario and write per-method CSVs plus a manifest.
//
//   simulate --scenario <path> --out <dir> [--method <name> ...] [--verbose]
//
// Exit codes: 0 success, 1 I/O or internal error, 2 schema error,
// 3 numerical failure (breakup regime, quadrature tolerance not met).

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "becmon/runner.hpp"
#include "becmon/scenario.hpp"

namespace {

constexpr int kExitIo = 1;
constexpr int kExitSchema = 2;
constexpr int kExitNumerical = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Oscillator monitored by a double-well condensate: moment dynamics simulator"};
    std::string scenario_path;
    std::string out_dir;
    std::vector<std::string> methods;
    bool verbose = false;
    app.add_option("--scenario", scenario_path, "Scenario document (flat key = value)")->required();
    app.add_option("--out", out_dir, "Output directory")->required();
    app.add_option("--method", methods, "Override the scenario's methods (discrete, continuum, approx, closed_form)")
        ->take_all();
    app.add_flag("--verbose", verbose, "Print a run summary to stderr");
    app.set_version_flag("--version", becmon::kToolVersion);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitSchema;
    }

    try {
        auto scenario = becmon::load_scenario(scenario_path);
        if (!methods.empty()) {
            scenario.methods.clear();
            for (const auto& name : methods) {
                const auto m = becmon::method_from_string(name);
                if (!m) throw becmon::SchemaError("--method", "unknown method '" + name + "'");
                if (std::find(scenario.methods.begin(), scenario.methods.end(), *m) != scenario.methods.end())
                    throw becmon::SchemaError("--method", "method '" + name + "' given twice");
                becmon::check_method_compatibility(scenario, *m);
                scenario.methods.push_back(*m);
            }
        }

        const auto result = becmon::run_scenario(scenario);
        becmon::write_outputs(result, out_dir);

        for (const auto& w : result.manifest.warnings) std::cerr << "warning: " << w << '\n';
        if (verbose) {
            std::cerr << "case " << becmon::to_string(scenario.case_kind) << ", "
                      << scenario.time_grid.n_points << " time points\n";
            for (const auto& [method, seconds] : result.manifest.timing_seconds)
                std::fprintf(stderr, "  %-12s %.3f s -> %s/%s.csv\n", method.c_str(), seconds, out_dir.c_str(),
                             method.c_str());
            for (const auto& [name, value] : result.manifest.max_deviation)
                std::fprintf(stderr, "  max |%s| = %.3e\n", name.c_str(), value);
            if (result.manifest.breakup_mass)
                std::fprintf(stderr, "  breakup mass = %.3e\n", *result.manifest.breakup_mass);
        }
        return 0;
    } catch (const becmon::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << '\n';
        return kExitSchema;
    } catch (const becmon::BreakupRegime& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const becmon::ToleranceNotMet& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const becmon::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
}
