#pragma once

// Declarative scenario documents: flat `key = value` lines with dotted keys.
// Blank lines and lines starting with '#' are ignored; `method` may repeat.
// All quantities are dimensionless: rates in units of omega0, times in
// 1/omega0, positions in X0 and momenta in P0.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "becmon/core.hpp"
#include "becmon/errors.hpp"
#include "becmon/quadrature.hpp"

namespace becmon {

enum class CaseKind { A, B, C };

enum class Method { Discrete, Continuum, Approx, ClosedForm };

inline std::string to_string(CaseKind c) {
    switch (c) {
        case CaseKind::A: return "A";
        case CaseKind::B: return "B";
        case CaseKind::C: return "C";
    }
    return "?";
}

inline std::string to_string(Method m) {
    switch (m) {
        case Method::Discrete: return "discrete";
        case Method::Continuum: return "continuum";
        case Method::Approx: return "approx";
        case Method::ClosedForm: return "closed_form";
    }
    return "?";
}

inline std::optional<Method> method_from_string(std::string_view s) {
    if (s == "discrete") return Method::Discrete;
    if (s == "continuum") return Method::Continuum;
    if (s == "approx") return Method::Approx;
    if (s == "closed_form") return Method::ClosedForm;
    return std::nullopt;
}

struct EnsembleSpec {
    enum class Kind { Binomial, Gaussian, TruncatedExponential, ExponentialDensity };

    Kind kind = Kind::Binomial;
    long n_atoms = 0;
    double delta_omega = 0.0;
    double kappa = 0.0;
    double alpha = 0.0;

    bool is_finite() const { return kind == Kind::Binomial || kind == Kind::TruncatedExponential; }

    // kappa of the Gaussian limit: given directly, or dOmega sqrt(N) for the binomial.
    std::optional<double> limit_kappa() const {
        if (kind == Kind::Gaussian) return kappa;
        if (kind == Kind::Binomial) return delta_omega * std::sqrt(static_cast<double>(n_atoms));
        return std::nullopt;
    }

    friend bool operator==(const EnsembleSpec&, const EnsembleSpec&) = default;
};

inline std::string to_string(EnsembleSpec::Kind k) {
    switch (k) {
        case EnsembleSpec::Kind::Binomial: return "binomial";
        case EnsembleSpec::Kind::Gaussian: return "gaussian";
        case EnsembleSpec::Kind::TruncatedExponential: return "truncated_exponential";
        case EnsembleSpec::Kind::ExponentialDensity: return "exponential_density";
    }
    return "?";
}

struct TimeGrid {
    double tau_start = 0.0;
    double tau_end = 0.0;
    int n_points = 0;

    double at(int i) const {
        if (i == n_points - 1) return tau_end;
        return tau_start + (tau_end - tau_start) * static_cast<double>(i) / (n_points - 1);
    }

    std::vector<double> points() const {
        std::vector<double> out(static_cast<std::size_t>(n_points));
        for (int i = 0; i < n_points; ++i) out[i] = at(i);
        return out;
    }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

struct Scenario {
    CaseKind case_kind = CaseKind::A;
    std::vector<Method> methods;
    PhysicalParams params;
    CouplingKind coupling = CouplingKind::Position;
    EnsembleSpec ensemble;
    CoherentState initial;  // in units of X0, P0
    TimeGrid time_grid;
    QuadratureSpec quadrature;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

inline constexpr int kMaxTimePoints = 10'000'000;

namespace detail {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

inline double parse_real(const std::string& key, const std::string& text) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value))
        throw SchemaError(key, "expected a finite real number, got '" + text + "'");
    return value;
}

inline long parse_integer(const std::string& key, const std::string& text) {
    long value = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) throw SchemaError(key, "expected an integer, got '" + text + "'");
    return value;
}

// Shortest text that parses back to the same double.
inline std::string format_real(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline const std::set<std::string, std::less<>>& known_keys() {
    static const std::set<std::string, std::less<>> keys = {
        "case",           "method",           "mass",
        "omega0",         "coupling",         "ensemble.kind",
        "ensemble.n_atoms", "ensemble.delta_omega", "ensemble.kappa",
        "ensemble.alpha", "initial.kind",     "initial.mean_x",
        "initial.mean_p", "time_grid.tau_start", "time_grid.tau_end",
        "time_grid.n_points", "quadrature.abs_tol", "quadrature.rel_tol"};
    return keys;
}

}  // namespace detail

// Throws IncompatibleMethod if `method` cannot run for the scenario's case,
// ensemble and initial state.
inline void check_method_compatibility(const Scenario& s, Method method) {
    using Kind = EnsembleSpec::Kind;
    const auto name = to_string(method);
    const auto kind = s.ensemble.kind;
    switch (method) {
        case Method::Discrete:
            if (!s.ensemble.is_finite())
                throw IncompatibleMethod(name, "requires a finite-N ensemble (binomial or truncated_exponential), got " +
                                                   to_string(kind));
            return;
        case Method::Continuum:
        case Method::Approx:
            if (s.case_kind != CaseKind::B)
                throw IncompatibleMethod(name, "the Gaussian-limit integrals apply to case B only");
            if (!s.ensemble.limit_kappa())
                throw IncompatibleMethod(name, "requires a Gaussian density (gaussian, or the limit of binomial), got " +
                                                   to_string(kind));
            return;
        case Method::ClosedForm:
            if (s.case_kind == CaseKind::B)
                throw IncompatibleMethod(name, "case B has no closed form; use continuum or approx");
            if (s.case_kind == CaseKind::A && !s.ensemble.limit_kappa())
                throw IncompatibleMethod(name, "the breathing formula needs a symmetric ensemble with known kappa, got " +
                                                   to_string(kind));
            if (s.case_kind == CaseKind::C) {
                if (kind != Kind::ExponentialDensity && kind != Kind::TruncatedExponential)
                    throw IncompatibleMethod(name, "the power-law formula needs an exponential ensemble");
                if (s.initial.mean_x0 != 0.0)
                    throw IncompatibleMethod(name, "the power-law formula requires initial.mean_x = 0");
            }
            return;
    }
}

// Methods that can run for the scenario, in canonical order.
inline std::vector<Method> compatible_methods(const Scenario& s) {
    std::vector<Method> out;
    for (Method m : {Method::Discrete, Method::Continuum, Method::Approx, Method::ClosedForm}) {
        try {
            check_method_compatibility(s, m);
            out.push_back(m);
        } catch (const IncompatibleMethod&) {
        }
    }
    return out;
}

inline Scenario parse_scenario(std::string_view document) {
    std::map<std::string, std::string, std::less<>> values;
    std::vector<std::string> method_values;

    std::istringstream in{std::string(document)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = detail::trim(line);
        if (text.empty() || text.front() == '#') continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw SchemaError("", "line " + std::to_string(line_no) + ": expected 'key = value'");
        const auto key = detail::trim(std::string_view(text).substr(0, eq));
        const auto value = detail::trim(std::string_view(text).substr(eq + 1));
        if (!detail::known_keys().contains(key)) throw SchemaError(key, "unknown key");
        if (value.empty()) throw SchemaError(key, "empty value");
        if (key == "method") {
            method_values.push_back(value);
            continue;
        }
        if (!values.emplace(key, value).second) throw SchemaError(key, "duplicate key");
    }

    std::set<std::string, std::less<>> used;
    auto take = [&](const std::string& key) -> std::optional<std::string> {
        auto it = values.find(key);
        if (it == values.end()) return std::nullopt;
        used.insert(key);
        return it->second;
    };
    auto require = [&](const std::string& key, const std::string& why) {
        auto v = take(key);
        if (!v) throw SchemaError(key, "missing (" + why + ")");
        return *v;
    };

    Scenario s;

    const auto case_text = require("case", "one of A, B, C");
    if (case_text == "A")
        s.case_kind = CaseKind::A;
    else if (case_text == "B")
        s.case_kind = CaseKind::B;
    else if (case_text == "C")
        s.case_kind = CaseKind::C;
    else
        throw SchemaError("case", "expected A, B or C, got '" + case_text + "'");

    s.coupling = s.case_kind == CaseKind::A ? CouplingKind::Position : CouplingKind::PositionSquared;
    if (auto c = take("coupling")) {
        CouplingKind given;
        if (*c == "position")
            given = CouplingKind::Position;
        else if (*c == "position_squared")
            given = CouplingKind::PositionSquared;
        else
            throw SchemaError("coupling", "expected position or position_squared, got '" + *c + "'");
        if (given != s.coupling)
            throw SchemaError("coupling", "case " + case_text + " requires coupling " + to_string(s.coupling));
    }

    {
        const double mass = take("mass") ? detail::parse_real("mass", values["mass"]) : 1.0;
        const double omega0 = take("omega0") ? detail::parse_real("omega0", values["omega0"]) : 1.0;
        if (!(mass > 0.0)) throw SchemaError("mass", "must be positive");
        if (!(omega0 > 0.0)) throw SchemaError("omega0", "must be positive");
        s.params = PhysicalParams(mass, omega0);
    }

    using Kind = EnsembleSpec::Kind;
    const auto kind_text = require("ensemble.kind", "binomial, gaussian, truncated_exponential or exponential_density");
    if (kind_text == "binomial")
        s.ensemble.kind = Kind::Binomial;
    else if (kind_text == "gaussian")
        s.ensemble.kind = Kind::Gaussian;
    else if (kind_text == "truncated_exponential")
        s.ensemble.kind = Kind::TruncatedExponential;
    else if (kind_text == "exponential_density")
        s.ensemble.kind = Kind::ExponentialDensity;
    else
        throw SchemaError("ensemble.kind", "unknown ensemble kind '" + kind_text + "'");

    const bool needs_atoms = s.ensemble.is_finite();
    const bool needs_kappa = s.ensemble.kind == Kind::Gaussian;
    const bool needs_alpha = s.ensemble.kind == Kind::TruncatedExponential || s.ensemble.kind == Kind::ExponentialDensity;
    const std::string why = "required by ensemble.kind=" + kind_text;
    if (needs_atoms) {
        s.ensemble.n_atoms = detail::parse_integer("ensemble.n_atoms", require("ensemble.n_atoms", why));
        if (s.ensemble.n_atoms < 1) throw SchemaError("ensemble.n_atoms", "must be >= 1");
        if (s.ensemble.n_atoms > 1'000'000) throw SchemaError("ensemble.n_atoms", "must be <= 1000000");
        s.ensemble.delta_omega = detail::parse_real("ensemble.delta_omega", require("ensemble.delta_omega", why));
        if (!(s.ensemble.delta_omega > 0.0)) throw SchemaError("ensemble.delta_omega", "must be positive");
    }
    if (needs_kappa) {
        s.ensemble.kappa = detail::parse_real("ensemble.kappa", require("ensemble.kappa", why));
        if (!(s.ensemble.kappa > 0.0)) throw SchemaError("ensemble.kappa", "must be positive");
    }
    if (needs_alpha) {
        s.ensemble.alpha = detail::parse_real("ensemble.alpha", require("ensemble.alpha", why));
        if (!(s.ensemble.alpha > 0.0)) throw SchemaError("ensemble.alpha", "must be positive");
    }
    if (s.case_kind == CaseKind::C && !needs_alpha)
        throw SchemaError("ensemble.kind", "case C needs truncated_exponential or exponential_density");
    if (s.case_kind != CaseKind::C && s.ensemble.kind == Kind::ExponentialDensity)
        throw SchemaError("ensemble.kind", "exponential_density is only meaningful for case C");

    if (auto k = take("initial.kind"); k && *k != "coherent")
        throw SchemaError("initial.kind", "only 'coherent' initial states can be described in a scenario");
    if (take("initial.mean_x")) s.initial.mean_x0 = detail::parse_real("initial.mean_x", values["initial.mean_x"]);
    if (take("initial.mean_p")) s.initial.mean_p0 = detail::parse_real("initial.mean_p", values["initial.mean_p"]);

    if (take("time_grid.tau_start"))
        s.time_grid.tau_start = detail::parse_real("time_grid.tau_start", values["time_grid.tau_start"]);
    s.time_grid.tau_end = detail::parse_real("time_grid.tau_end", require("time_grid.tau_end", "end of the time grid"));
    {
        const long n = detail::parse_integer("time_grid.n_points",
                                             require("time_grid.n_points", "number of grid points"));
        if (n < 2) throw SchemaError("time_grid.n_points", "must be >= 2");
        if (n > kMaxTimePoints) throw SchemaError("time_grid.n_points", "must be <= 10000000");
        s.time_grid.n_points = static_cast<int>(n);
    }
    if (s.time_grid.tau_start < 0.0) throw SchemaError("time_grid.tau_start", "must be >= 0");
    if (!(s.time_grid.tau_end > s.time_grid.tau_start))
        throw SchemaError("time_grid.tau_end", "must be greater than time_grid.tau_start");

    if (take("quadrature.abs_tol")) {
        s.quadrature.abs_tol = detail::parse_real("quadrature.abs_tol", values["quadrature.abs_tol"]);
        if (!(s.quadrature.abs_tol > 0.0)) throw SchemaError("quadrature.abs_tol", "must be positive");
    }
    if (take("quadrature.rel_tol")) {
        s.quadrature.rel_tol = detail::parse_real("quadrature.rel_tol", values["quadrature.rel_tol"]);
        if (!(s.quadrature.rel_tol > 0.0)) throw SchemaError("quadrature.rel_tol", "must be positive");
    }

    for (const auto& [key, value] : values)
        if (!used.contains(key)) throw SchemaError(key, "not used by ensemble.kind=" + kind_text);

    if (method_values.empty()) {
        s.methods = compatible_methods(s);
        if (s.methods.empty()) throw IncompatibleMethod("(default)", "no method can run this scenario");
    } else {
        for (const auto& text : method_values) {
            const auto m = method_from_string(text);
            if (!m) throw SchemaError("method", "unknown method '" + text + "'");
            if (std::find(s.methods.begin(), s.methods.end(), *m) != s.methods.end())
                throw SchemaError("method", "method '" + text + "' listed twice");
            check_method_compatibility(s, *m);
            s.methods.push_back(*m);
        }
    }
    return s;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str());
}

// Canonical document for a scenario; parse_scenario(to_document(s)) == s.
inline std::string to_document(const Scenario& s) {
    using detail::format_real;
    std::ostringstream out;
    out << "case = " << to_string(s.case_kind) << '\n';
    for (Method m : s.methods) out << "method = " << to_string(m) << '\n';
    out << "mass = " << format_real(s.params.mass()) << '\n';
    out << "omega0 = " << format_real(s.params.omega0()) << '\n';
    out << "coupling = " << to_string(s.coupling) << '\n';
    out << "ensemble.kind = " << to_string(s.ensemble.kind) << '\n';
    if (s.ensemble.is_finite()) {
        out << "ensemble.n_atoms = " << s.ensemble.n_atoms << '\n';
        out << "ensemble.delta_omega = " << format_real(s.ensemble.delta_omega) << '\n';
    }
    if (s.ensemble.kind == EnsembleSpec::Kind::Gaussian)
        out << "ensemble.kappa = " << format_real(s.ensemble.kappa) << '\n';
    if (s.ensemble.kind == EnsembleSpec::Kind::TruncatedExponential ||
        s.ensemble.kind == EnsembleSpec::Kind::ExponentialDensity)
        out << "ensemble.alpha = " << format_real(s.ensemble.alpha) << '\n';
    out << "initial.kind = coherent\n";
    out << "initial.mean_x = " << format_real(s.initial.mean_x0) << '\n';
    out << "initial.mean_p = " << format_real(s.initial.mean_p0) << '\n';
    out << "time_grid.tau_start = " << format_real(s.time_grid.tau_start) << '\n';
    out << "time_grid.tau_end = " << format_real(s.time_grid.tau_end) << '\n';
    out << "time_grid.n_points = " << s.time_grid.n_points << '\n';
    out << "quadrature.abs_tol = " << format_real(s.quadrature.abs_tol) << '\n';
    out << "quadrature.rel_tol = " << format_real(s.quadrature.rel_tol) << '\n';
    return out.str();
}

}  // namespace becmon
