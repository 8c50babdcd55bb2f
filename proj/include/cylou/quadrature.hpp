// Adaptive Gauss-Kronrod quadrature and grid integration rules shared by the
// numerical modules.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cylou {

// Raised when an adaptive rule cannot reach the requested tolerance.  Carries
// the best estimate obtained so far and the tolerance actually achieved.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double best, double achieved)
        : std::runtime_error(what), best_estimate(best), achieved_tol(achieved) {}
    double best_estimate;
    double achieved_tol;
};

struct QuadResult {
    double value = 0.0;
    double abs_err = 0.0;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod pair (QUADPACK abscissae, half interval).
inline constexpr double kGK15Nodes[8] = {
    0.000000000000000000000000000000000e+00,
    2.077849550078984676006894037732449e-01,
    4.058451513773971669066064120769615e-01,
    5.860872354676911302941448382587296e-01,
    7.415311855993944398638647732807884e-01,
    8.648644233597690727897127886409262e-01,
    9.491079123427585245261896840478513e-01,
    9.914553711208126392068546975263285e-01};

inline constexpr double kKronrodW[8] = {
    2.094821410847278280129991748917143e-01,
    2.044329400752988924141619992346491e-01,
    1.903505780647854099132564024210137e-01,
    1.690047266392679028265834265985503e-01,
    1.406532597155259187451895905102379e-01,
    1.047900103222501838398763225415180e-01,
    6.309209262997855329070066318920429e-02,
    2.293532201052922496373200805896959e-02};

inline constexpr double kGaussW[4] = {
    4.179591836734693877551020408163265e-01,
    3.818300505051189449503697754889751e-01,
    2.797053914892766679014677714237796e-01,
    1.294849661688696932706114326790820e-01};

}  // namespace detail

// One Gauss-Kronrod panel on [a, b].
template <class F>
QuadResult gk15(const F& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double hlf = 0.5 * (b - a);

    const double f0 = f(mid);
    double kron = detail::kKronrodW[0] * f0;
    double gauss = detail::kGaussW[0] * f0;

    for (int i = 1; i < 8; ++i) {
        const double dx = hlf * detail::kGK15Nodes[i];
        const double fsum = f(mid - dx) + f(mid + dx);
        kron += detail::kKronrodW[i] * fsum;
        if (i % 2 == 0) gauss += detail::kGaussW[i / 2] * fsum;
    }
    kron *= hlf;
    gauss *= hlf;

    QuadResult r;
    r.value = kron;
    const double diff = std::fabs(kron - gauss);
    r.abs_err = std::min(diff, 200.0 * diff * std::sqrt(std::max(diff, 0.0)));
    if (r.abs_err == 0.0) r.abs_err = std::fabs(kron) * 1e-15;
    return r;
}

struct AdaptiveOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-300;
    int max_panels = 4000;
};

// Adaptive bisection on [a, b] with a worst-panel-first queue.  Throws
// QuadratureError if the panel budget is exhausted before the tolerance.
template <class F>
QuadResult integrate_adaptive(const F& f, double a, double b,
                              const AdaptiveOptions& opt = {}) {
    if (!(b > a)) return {0.0, 0.0};

    struct Panel {
        double a, b, value, err;
    };
    std::vector<Panel> panels;
    QuadResult whole = gk15(f, a, b);
    panels.push_back({a, b, whole.value, whole.abs_err});

    double total = whole.value;
    double total_err = whole.abs_err;

    auto tol = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::fabs(total)); };

    while (total_err > tol()) {
        if (static_cast<int>(panels.size()) >= opt.max_panels)
            throw QuadratureError("integrate_adaptive: panel budget exhausted",
                                  total, total_err / std::max(1.0, std::fabs(total)));
        // split the worst panel
        size_t worst = 0;
        for (size_t i = 1; i < panels.size(); ++i)
            if (panels[i].err > panels[worst].err) worst = i;
        Panel p = panels[worst];
        const double mid = 0.5 * (p.a + p.b);
        if (mid <= p.a || mid >= p.b) break;  // interval exhausted at double precision
        QuadResult left = gk15(f, p.a, mid);
        QuadResult right = gk15(f, mid, p.b);
        panels[worst] = {p.a, mid, left.value, left.abs_err};
        panels.push_back({mid, p.b, right.value, right.abs_err});
        total = 0.0;
        total_err = 0.0;
        for (const Panel& q : panels) {
            total += q.value;
            total_err += q.err;
        }
    }
    return {total, total_err};
}

// Composite Simpson over tabulated values with uniform step.  Falls back to a
// trapezoid for the final cell when the point count is even.
inline double simpson_tabulated(std::span<const double> y, double step) {
    const size_t n = y.size();
    if (n < 2) return 0.0;
    if (n == 2) return 0.5 * step * (y[0] + y[1]);
    double acc = 0.0;
    size_t i = 0;
    for (; i + 2 < n; i += 2) acc += step / 3.0 * (y[i] + 4.0 * y[i + 1] + y[i + 2]);
    if (i + 1 < n) acc += 0.5 * step * (y[i] + y[i + 1]);
    return acc;
}

inline double trapezoid_tabulated(std::span<const double> y, double step) {
    const size_t n = y.size();
    if (n < 2) return 0.0;
    double acc = 0.5 * (y.front() + y.back());
    for (size_t i = 1; i + 1 < n; ++i) acc += y[i];
    return acc * step;
}

}  // namespace cylou
