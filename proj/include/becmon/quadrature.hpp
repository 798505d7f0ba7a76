#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature for real- or
// complex-valued integrands on a finite interval.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "becmon/errors.hpp"

namespace becmon {

struct QuadratureSpec {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_subdivisions = 100000;
    // Minimum number of samples per period of an oscillating phase factor.
    int oscillation_resolution = 16;

    void validate() const {
        if (!(abs_tol > 0.0)) throw InvalidArgument("quadrature: abs_tol must be positive");
        if (!(rel_tol > 0.0)) throw InvalidArgument("quadrature: rel_tol must be positive");
        if (max_subdivisions < 1) throw InvalidArgument("quadrature: max_subdivisions must be >= 1");
        if (oscillation_resolution < 4)
            throw InvalidArgument("quadrature: oscillation_resolution must be >= 4");
    }

    friend bool operator==(const QuadratureSpec&, const QuadratureSpec&) = default;
};

template <class T>
struct QuadratureResult {
    T value{};
    double est_error = 0.0;
    int subdivisions = 0;
    bool converged = false;
};

namespace detail {

// Nodes and weights from QUADPACK's dqk15.
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd Kronrod nodes 1, 3, 5 and the centre.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct Panel {
    double a;
    double b;
    T value;
    double error;

    friend bool operator<(const Panel& lhs, const Panel& rhs) { return lhs.error < rhs.error; }
};

}  // namespace detail

// One 15-point Kronrod estimate on [a, b]; error is |K15 - G7|.
template <class F>
auto gauss_kronrod15(const F& f, double a, double b) {
    using T = decltype(f(a));
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    const T fc = f(centre);
    T kronrod = detail::kKronrodWeights[7] * fc;
    T gauss = detail::kGaussWeights[3] * fc;
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = half * detail::kKronrodNodes[j];
        const T pair = f(centre - dx) + f(centre + dx);
        kronrod += detail::kKronrodWeights[j] * pair;
        if (j % 2 == 1) gauss += detail::kGaussWeights[j / 2] * pair;
    }
    kronrod *= half;
    gauss *= half;
    struct Estimate {
        T value;
        double error;
    };
    return Estimate{kronrod, std::abs(kronrod - gauss)};
}

// Integrates f over [a, b], starting from `initial_panels` equal panels and
// bisecting the panel with the largest error estimate until the summed
// error drops below max(abs_tol, rel_tol * |I|) or the panel budget runs out.
template <class F>
auto integrate_adaptive(const F& f, double a, double b, int initial_panels, double abs_tol,
                        double rel_tol, int max_subdivisions) {
    using T = decltype(f(a));
    using Panel = detail::Panel<T>;

    QuadratureResult<T> result;
    if (!(b > a)) {
        result.converged = true;
        return result;
    }
    initial_panels = std::max(initial_panels, 1);

    std::vector<Panel> storage;
    storage.reserve(static_cast<std::size_t>(initial_panels) * 2);
    const double width = (b - a) / initial_panels;
    for (int i = 0; i < initial_panels; ++i) {
        const double lo = a + i * width;
        const double hi = (i + 1 == initial_panels) ? b : a + (i + 1) * width;
        const auto est = gauss_kronrod15(f, lo, hi);
        storage.push_back(Panel{lo, hi, est.value, est.error});
    }
    std::make_heap(storage.begin(), storage.end());

    auto totals = [&storage] {
        T value{};
        double error = 0.0;
        for (const auto& panel : storage) {
            value += panel.value;
            error += panel.error;
        }
        return std::pair{value, error};
    };

    auto [running_value, running_error] = totals();

    int panels = initial_panels;
    while (running_error > std::max(abs_tol, rel_tol * std::abs(running_value))) {
        if (panels >= max_subdivisions) break;
        std::pop_heap(storage.begin(), storage.end());
        const Panel worst = storage.back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            // cannot split further in double precision
            std::push_heap(storage.begin(), storage.end());
            break;
        }
        const auto left = gauss_kronrod15(f, worst.a, mid);
        const auto right = gauss_kronrod15(f, mid, worst.b);
        storage.back() = Panel{worst.a, mid, left.value, left.error};
        std::push_heap(storage.begin(), storage.end());
        storage.push_back(Panel{mid, worst.b, right.value, right.error});
        std::push_heap(storage.begin(), storage.end());
        running_value += left.value + right.value - worst.value;
        running_error += left.error + right.error - worst.error;
        ++panels;
    }

    const auto [value, error] = totals();
    result.value = value;
    result.est_error = error;
    result.subdivisions = panels;
    result.converged = error <= std::max(abs_tol, rel_tol * std::abs(value));
    return result;
}

}  // namespace becmon
