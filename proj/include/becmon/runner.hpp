#pragma once

// Runs a scenario with each requested method on the shared time grid and
// writes one CSV per method plus a flat key/value manifest.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "becmon/core.hpp"
#include "becmon/dynamics_continuum.hpp"
#include "becmon/dynamics_discrete.hpp"
#include "becmon/ensemble.hpp"
#include "becmon/errors.hpp"
#include "becmon/scenario.hpp"

namespace becmon {

inline constexpr const char* kToolVersion = "1.0.0";

// Pairwise method deviations above this (in X0/P0 units) are flagged.
inline constexpr double kConsistencyThreshold = 1e-2;

inline constexpr const char* kCsvHeader = "tau,mean_x,mean_p,var_x,var_p,cov_xp";

struct TimeSeries {
    Method method = Method::Discrete;
    std::vector<double> tau;
    std::vector<OscillatorMoments> moments;  // physical units
};

struct RunManifest {
    Scenario scenario;
    std::string tool_version = kToolVersion;
    std::vector<std::pair<std::string, double>> timing_seconds;  // per method, run order
    std::optional<double> quadrature_max_error;
    std::optional<double> quadrature_mean_error;
    std::optional<double> breakup_mass;              // continuum Gaussian tail below -w0/4
    std::optional<double> discrete_breakup_weight;   // finite-N weight on repeller branches
    double consistency_threshold = kConsistencyThreshold;
    std::vector<std::pair<std::string, double>> max_deviation;  // "a_vs_b" -> max abs diff
    std::vector<std::string> warnings;
};

struct RunResult {
    std::vector<TimeSeries> series;
    RunManifest manifest;
};

// One CSV row in units of X0, P0: tau, <X>, <P>, var X, var P, <XP+PX>.
struct ScaledRow {
    double tau, mean_x, mean_p, var_x, var_p, cov_xp;
};

inline ScaledRow scaled_row(double tau, const OscillatorMoments& m, const PhysicalParams& params) {
    const auto d = nondimensionalize(params, m);
    return {tau, d.mean_x, d.mean_p, d.var_x(), d.var_p(), d.mean_xp_sym};
}

namespace detail {

// Runs body(i) for i in [0, n) on a few threads; each index writes only its
// own slot, so results do not depend on scheduling.
template <class Body>
void parallel_for(std::size_t n, const Body& body) {
    const std::size_t workers =
        std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), (n + 63) / 64);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr failure;
    std::size_t failed_index = n;
    std::mutex guard;
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(guard);
                    // Keep the error of the earliest index for a stable message.
                    if (i < failed_index) {
                        failed_index = i;
                        failure = std::current_exception();
                    }
                    return;
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
}

inline OscillatorMoments physical_initial(const Scenario& s) {
    const auto& p = s.params;
    return coherent_state_moments(p, s.initial.mean_x0 * p.length_unit(),
                                  s.initial.mean_p0 * p.momentum_unit());
}

inline BecEnsemble build_finite_ensemble(const Scenario& s) {
    const double w0 = s.params.omega0();
    const auto& e = s.ensemble;
    if (e.kind == EnsembleSpec::Kind::Binomial) return binomial_ensemble(e.n_atoms, e.delta_omega * w0);
    return truncated_exponential_ensemble(e.n_atoms, e.delta_omega * w0, e.alpha / w0, s.params);
}

}  // namespace detail

inline RunResult run_scenario(const Scenario& s) {
    for (Method m : s.methods) check_method_compatibility(s, m);
    if (s.methods.empty()) throw IncompatibleMethod("(none)", "no methods requested");

    RunResult result;
    result.manifest.scenario = s;
    auto& manifest = result.manifest;

    const auto taus = s.time_grid.points();
    const auto init = detail::physical_initial(s);
    const auto& params = s.params;
    const double w0 = params.omega0();

    if (auto kappa = s.ensemble.limit_kappa(); kappa && s.coupling == CouplingKind::PositionSquared)
        manifest.breakup_mass = breakup_mass(gaussian_density(*kappa * w0), w0);

    std::vector<double> quad_errors;

    for (Method method : s.methods) {
        const auto start = std::chrono::steady_clock::now();
        TimeSeries series;
        series.method = method;
        series.tau = taus;
        series.moments.resize(taus.size());

        try {
            switch (method) {
                case Method::Discrete: {
                    const auto ensemble = detail::build_finite_ensemble(s);
                    if (s.coupling == CouplingKind::PositionSquared)
                        manifest.discrete_breakup_weight = discrete_breakup_weight(ensemble, params);
                    detail::parallel_for(taus.size(), [&](std::size_t i) {
                        series.moments[i] = ensemble_average(ensemble, s.coupling, taus[i], init, params);
                    });
                    break;
                }
                case Method::Continuum:
                case Method::Approx: {
                    const double sigma = sigma_from_kappa(*s.ensemble.limit_kappa() * w0, params);
                    const auto backend = method == Method::Continuum ? ContinuumBackend::Quadrature
                                                                     : ContinuumBackend::GaussianApprox;
                    std::vector<double> errors(taus.size(), 0.0);
                    detail::parallel_for(taus.size(), [&](std::size_t i) {
                        const auto r = continuum_moments(taus[i], sigma, init, params, backend, s.quadrature);
                        series.moments[i] = r.moments;
                        errors[i] = r.est_error;
                    });
                    if (method == Method::Continuum)
                        quad_errors.insert(quad_errors.end(), errors.begin(), errors.end());
                    break;
                }
                case Method::ClosedForm: {
                    if (s.case_kind == CaseKind::A) {
                        const double kappa = *s.ensemble.limit_kappa() * w0;
                        for (std::size_t i = 0; i < taus.size(); ++i)
                            series.moments[i] = closed_form_breathing(kappa, taus[i], init, params);
                    } else {
                        const double alpha = s.ensemble.alpha / w0;
                        const double nan = std::numeric_limits<double>::quiet_NaN();
                        for (std::size_t i = 0; i < taus.size(); ++i) {
                            const double t = params.time_of(taus[i]);
                            series.moments[i] = OscillatorMoments{power_law_mean_x(t, alpha, init, params),
                                                                  power_law_mean_p(t, alpha, init, params), nan,
                                                                  nan, nan};
                        }
                    }
                    break;
                }
            }
        } catch (const BreakupRegime& e) {
            throw BreakupRegime("method " + to_string(method) + ": " + e.what(), e.branch_index(), e.epsilon());
        } catch (const ToleranceNotMet& e) {
            throw ToleranceNotMet("method " + to_string(method) + ": " + e.what(), e.est_error());
        }

        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        manifest.timing_seconds.emplace_back(to_string(method), elapsed.count());
        result.series.push_back(std::move(series));
    }

    if (!quad_errors.empty()) {
        manifest.quadrature_max_error = *std::max_element(quad_errors.begin(), quad_errors.end());
        double sum = 0.0;
        for (double e : quad_errors) sum += e;
        manifest.quadrature_mean_error = sum / static_cast<double>(quad_errors.size());
    }

    // Cross-method deviations over every column both series define.
    for (std::size_t a = 0; a < result.series.size(); ++a) {
        for (std::size_t b = a + 1; b < result.series.size(); ++b) {
            double worst = 0.0;
            for (std::size_t i = 0; i < taus.size(); ++i) {
                const auto ra = scaled_row(taus[i], result.series[a].moments[i], params);
                const auto rb = scaled_row(taus[i], result.series[b].moments[i], params);
                for (auto [x, y] : {std::pair{ra.mean_x, rb.mean_x}, std::pair{ra.mean_p, rb.mean_p},
                                    std::pair{ra.var_x, rb.var_x}, std::pair{ra.var_p, rb.var_p},
                                    std::pair{ra.cov_xp, rb.cov_xp}}) {
                    if (std::isfinite(x) && std::isfinite(y)) worst = std::max(worst, std::abs(x - y));
                }
            }
            const std::string name =
                to_string(result.series[a].method) + "_vs_" + to_string(result.series[b].method);
            manifest.max_deviation.emplace_back(name, worst);
            if (worst > manifest.consistency_threshold) {
                char buf[160];
                std::snprintf(buf, sizeof buf, "%s max deviation %.3e exceeds threshold %.3e", name.c_str(), worst,
                              manifest.consistency_threshold);
                manifest.warnings.emplace_back(buf);
            }
        }
    }
    return result;
}

namespace detail {

inline std::string format_sci(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.11e", v);
    return buf;
}

}  // namespace detail

inline std::string to_csv(const TimeSeries& series, const PhysicalParams& params) {
    std::string out = kCsvHeader;
    out += '\n';
    for (std::size_t i = 0; i < series.tau.size(); ++i) {
        const auto r = scaled_row(series.tau[i], series.moments[i], params);
        for (double v : {r.tau, r.mean_x, r.mean_p, r.var_x, r.var_p}) {
            out += detail::format_sci(v);
            out += ',';
        }
        out += detail::format_sci(r.cov_xp);
        out += '\n';
    }
    return out;
}

inline std::string to_manifest_text(const RunManifest& m) {
    using detail::format_real;
    std::ostringstream out;
    out << "tool.name = simulate\n";
    out << "tool.version = " << m.tool_version << '\n';
    std::istringstream scenario(to_document(m.scenario));
    for (std::string line; std::getline(scenario, line);) out << "scenario." << line << '\n';
    for (const auto& [method, seconds] : m.timing_seconds)
        out << "timing." << method << ".seconds = " << format_real(seconds) << '\n';
    if (m.quadrature_max_error) out << "quadrature.max_est_error = " << format_real(*m.quadrature_max_error) << '\n';
    if (m.quadrature_mean_error)
        out << "quadrature.mean_est_error = " << format_real(*m.quadrature_mean_error) << '\n';
    if (m.breakup_mass) out << "diagnostic.breakup_mass = " << format_real(*m.breakup_mass) << '\n';
    if (m.discrete_breakup_weight)
        out << "diagnostic.discrete_breakup_weight = " << format_real(*m.discrete_breakup_weight) << '\n';
    out << "consistency.threshold = " << format_real(m.consistency_threshold) << '\n';
    for (const auto& [name, value] : m.max_deviation)
        out << "consistency.max_deviation." << name << " = " << format_real(value) << '\n';
    for (std::size_t i = 0; i < m.warnings.size(); ++i) out << "warning." << i << " = " << m.warnings[i] << '\n';
    return out.str();
}

// Recovers the scenario echoed in a manifest.
inline Scenario scenario_from_manifest(std::string_view manifest_text) {
    std::istringstream in{std::string(manifest_text)};
    std::string document;
    const std::string prefix = "scenario.";
    for (std::string line; std::getline(in, line);)
        if (line.rfind(prefix, 0) == 0) document += line.substr(prefix.size()) + '\n';
    return parse_scenario(document);
}

inline std::string csv_file_name(Method m) { return to_string(m) + ".csv"; }

inline void write_outputs(const RunResult& result, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "': " + ec.message());

    auto write = [](const std::filesystem::path& path, const std::string& text) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
        out << text;
        out.close();
        if (!out) throw IoError("failed writing '" + path.string() + "'");
    };

    const auto& params = result.manifest.scenario.params;
    for (const auto& series : result.series) write(out_dir / csv_file_name(series.method), to_csv(series, params));
    write(out_dir / "manifest.txt", to_manifest_text(result.manifest));
}

}  // namespace becmon
