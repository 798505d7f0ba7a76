#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "becmon/runner.hpp"

using namespace becmon;
namespace fs = std::filesystem;

namespace {

const std::string kScenarioDir = BECMON_SCENARIO_DIR;
const std::string kSimulate = BECMON_SIMULATE_EXE;

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("becmon_test_" + name);
    fs::remove_all(dir);
    return dir;
}

int run_cli(const std::string& args) {
    const int status = std::system((kSimulate + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Scenario small_case_a() {
    auto s = load_scenario(kScenarioDir + "/fig2.scenario");
    s.time_grid.n_points = 101;
    return s;
}

}  // namespace

TEST(Runner, CsvFormat) {
    const auto result = run_scenario(small_case_a());
    ASSERT_EQ(result.series.size(), 2u);
    const auto csv = to_csv(result.series[0], result.manifest.scenario.params);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "tau,mean_x,mean_p,var_x,var_p,cov_xp");
    EXPECT_EQ(csv.find('\r'), std::string::npos);
    EXPECT_EQ(csv.back(), '\n');
    std::istringstream in(csv);
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        EXPECT_NE(line.back(), ',');
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 5);
    }
    EXPECT_EQ(rows, 102u);
}

TEST(Runner, CoherentRowAtStart) {
    const auto result = run_scenario(small_case_a());
    const auto r = scaled_row(0.0, result.series[0].moments[0], result.manifest.scenario.params);
    EXPECT_NEAR(r.mean_p, 2.0, 1e-14);
    EXPECT_NEAR(r.var_x, 1.0, 1e-14);
    EXPECT_NEAR(r.var_p, 1.0, 1e-14);
    EXPECT_NEAR(r.cov_xp, 0.0, 1e-14);
}

TEST(Runner, CaseADiscreteMatchesClosedForm) {
    const auto result = run_scenario(small_case_a());
    ASSERT_EQ(result.manifest.max_deviation.size(), 1u);
    EXPECT_LE(result.manifest.max_deviation[0].second, 1e-10);
    EXPECT_TRUE(result.manifest.warnings.empty());
}

TEST(Runner, InconsistentMethodsWarn) {
    auto s = load_scenario(kScenarioDir + "/caseC.scenario");
    s.time_grid = {0.0, 100.0, 51};
    s.ensemble.n_atoms = 2000;
    s.ensemble.delta_omega = 1e-4;
    const auto result = run_scenario(s);
    ASSERT_EQ(result.manifest.max_deviation.size(), 1u);
    if (result.manifest.max_deviation[0].second > kConsistencyThreshold)
        EXPECT_EQ(result.manifest.warnings.size(), 1u);
    // Closed form gives only the means.
    const auto& closed = result.series[0].method == Method::ClosedForm ? result.series[0] : result.series[1];
    ASSERT_EQ(closed.method, Method::ClosedForm);
    EXPECT_TRUE(std::isnan(closed.moments[3].var_x()));
    EXPECT_NE(to_csv(closed, s.params).find(",nan,nan,nan\n"), std::string::npos);
}

TEST(Runner, ManifestRoundTripsScenario) {
    for (const char* name : {"fig2", "fig3", "caseC"}) {
        const auto s = load_scenario(kScenarioDir + "/" + name + ".scenario");
        RunManifest m;
        m.scenario = s;
        m.timing_seconds = {{"discrete", 0.5}};
        m.warnings = {"something"};
        const auto text = to_manifest_text(m);
        EXPECT_EQ(scenario_from_manifest(text), s) << name;
        EXPECT_NE(text.find("tool.version = 1.0.0\n"), std::string::npos);
    }
}

TEST(Runner, ManifestDiagnosticsCaseB) {
    auto s = load_scenario(kScenarioDir + "/fig3.scenario");
    s.time_grid.n_points = 13;
    const auto result = run_scenario(s);
    ASSERT_TRUE(result.manifest.breakup_mass);
    EXPECT_NEAR(*result.manifest.breakup_mass, 1.04059925290970600e-25, 1e-35);
    ASSERT_TRUE(result.manifest.quadrature_max_error);
    EXPECT_LE(*result.manifest.quadrature_max_error, 1e-6);
    ASSERT_TRUE(result.manifest.discrete_breakup_weight);
    EXPECT_EQ(*result.manifest.discrete_breakup_weight, 0.0);
    EXPECT_EQ(result.manifest.max_deviation.size(), 3u);
}

TEST(Runner, RunIsDeterministic) {
    auto s = load_scenario(kScenarioDir + "/fig3.scenario");
    s.time_grid.n_points = 41;
    const auto a = run_scenario(s);
    const auto b = run_scenario(s);
    for (std::size_t k = 0; k < a.series.size(); ++k)
        EXPECT_EQ(to_csv(a.series[k], s.params), to_csv(b.series[k], s.params));
}

TEST(Runner, WritesOutputs) {
    const auto dir = scratch("write");
    write_outputs(run_scenario(small_case_a()), dir / "nested");
    EXPECT_TRUE(fs::exists(dir / "nested" / "discrete.csv"));
    EXPECT_TRUE(fs::exists(dir / "nested" / "closed_form.csv"));
    EXPECT_TRUE(fs::exists(dir / "nested" / "manifest.txt"));
    fs::remove_all(dir);
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("cli");
    fs::create_directories(dir);
    EXPECT_EQ(run_cli("--scenario " + kScenarioDir + "/fig2.scenario --out " + (dir / "ok").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "ok" / "discrete.csv"));

    std::ofstream(dir / "bad.scenario") << "case = A\nensemble.kind = binomial\n";
    EXPECT_EQ(run_cli("--scenario " + (dir / "bad.scenario").string() + " --out " + (dir / "o1").string()), 2);

    std::ofstream(dir / "breakup.scenario") << "case = B\nmethod = discrete\nensemble.kind = binomial\n"
                                               "ensemble.n_atoms = 100\nensemble.delta_omega = 0.1\n"
                                               "time_grid.tau_end = 1\ntime_grid.n_points = 3\n";
    EXPECT_EQ(run_cli("--scenario " + (dir / "breakup.scenario").string() + " --out " + (dir / "o2").string()), 3);

    EXPECT_EQ(run_cli("--scenario " + kScenarioDir + "/fig2.scenario --method continuum --out " +
                      (dir / "o3").string()),
              2);
    EXPECT_EQ(run_cli("--out " + (dir / "o4").string()), 2);
    EXPECT_EQ(run_cli("--scenario " + (dir / "missing.scenario").string() + " --out " + (dir / "o5").string()), 1);
    fs::remove_all(dir);
}

TEST(Cli, RerunsAreByteIdentical) {
    const auto dir = scratch("rerun");
    const std::string scenario = kScenarioDir + "/fig3.scenario";
    ASSERT_EQ(run_cli("--scenario " + scenario + " --out " + (dir / "a").string()), 0);
    ASSERT_EQ(run_cli("--scenario " + scenario + " --out " + (dir / "b").string()), 0);
    for (const char* f : {"discrete.csv", "continuum.csv", "approx.csv"})
        EXPECT_EQ(read_file(dir / "a" / f), read_file(dir / "b" / f)) << f;
    fs::remove_all(dir);
}
