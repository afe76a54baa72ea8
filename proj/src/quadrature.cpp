#include "bubbletower/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace bubbletower {

namespace {

// Gauss 7 / Kronrod 15 abscissae and weights on [-1, 1].
// Layout: {node, gauss weight, kronrod weight}; node 0 first, then pairs +/-x.
constexpr double kNW[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0, 0.204432940075298},
    {0.586087235467691, 0.0, 0.169004726639267},
    {0.864864423359769, 0.0, 0.104790010322250},
    {0.991455371120813, 0.0, 0.022935322010529},
};

struct Interval {
    double a, b;
    double value;      // K15 estimate
    double abs_value;  // K15 estimate of |f|
    double error;
    bool operator<(const Interval& o) const { return error < o.error; }
};

template <class F>
Interval gk15(const F& f, double a, double b, long& evals) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    double y0 = f(mid);
    double g7 = kNW[0][1] * y0;
    double k15 = kNW[0][2] * y0;
    double kabs = kNW[0][2] * std::abs(y0);
    for (int i = 1; i < 8; ++i) {
        const double dx = half * kNW[i][0];
        const double yp = f(mid + dx);
        const double ym = f(mid - dx);
        g7 += kNW[i][1] * (yp + ym);
        k15 += kNW[i][2] * (yp + ym);
        kabs += kNW[i][2] * (std::abs(yp) + std::abs(ym));
    }
    evals += 15;
    g7 *= half;
    k15 *= half;
    kabs *= std::abs(half);

    double err = std::abs(g7 - k15);
    // quadpack-style sharpening of the raw difference
    double scaled = 200.0 * err;
    err = std::min(err, scaled * std::sqrt(scaled));
    return {a, b, k15, kabs, err};
}

}  // namespace

QuadratureResult integrate_radial(const std::function<double(double)>& f,
                                  double lo, double hi,
                                  const std::vector<double>& breakpoints,
                                  double rel_tol, int max_intervals) {
    if (!(lo < hi)) throw std::invalid_argument("integrate_radial: lo must be < hi");
    if (!(rel_tol > 0.0)) throw std::invalid_argument("integrate_radial: rel_tol must be > 0");

    const bool infinite = std::isinf(hi);

    // Work on [t0, t1] with either the identity map or r = lo + t/(1-t).
    std::function<double(double)> g;
    double t0, t1;
    auto to_t = [&](double r) {
        if (!infinite) return r;
        const double s = r - lo;
        return s / (1.0 + s);
    };
    if (infinite) {
        g = [f, lo](double t) {
            const double om = 1.0 - t;
            const double r = lo + t / om;
            return f(r) / (om * om);
        };
        t0 = 0.0;
        t1 = 1.0;
    } else {
        g = f;
        t0 = lo;
        t1 = hi;
    }

    // Initial interval list: the breakpoints, then geometric refinement of any
    // gap spanning more than a decade.  A spike sitting at the small end of a
    // wide interval falls below the first Kronrod node and the rule converges
    // silently to the wrong value; per-decade seeding keeps every scale
    // sampled.
    std::vector<double> rcuts;
    rcuts.push_back(lo);
    for (double b : breakpoints) {
        if (b > lo && (infinite || b < hi)) rcuts.push_back(b);
    }
    if (!infinite) rcuts.push_back(hi);
    std::sort(rcuts.begin(), rcuts.end());
    rcuts.erase(std::unique(rcuts.begin(), rcuts.end()), rcuts.end());

    std::vector<double> seeded;
    for (size_t i = 0; i < rcuts.size(); ++i) {
        seeded.push_back(rcuts[i]);
        const bool last = (i + 1 == rcuts.size());
        if (last && !infinite) break;
        const double a = rcuts[i];
        const double b = last ? 1e8 * std::max(a, 1.0) : rcuts[i + 1];
        const double base = a > 0.0 ? 10.0 * a : (last ? 1e-2 : b);
        for (double s = base; s < b * 0.999; s *= 10.0) seeded.push_back(s);
        if (last) seeded.push_back(b);
    }

    // Tail probe for improper integrals: decade sums of a convergent integrand
    // decay geometrically; non-decaying decades mean the partial sums grow
    // without bound.
    if (infinite) {
        const double c0 = std::max(rcuts.back(), 1.0);
        double prev = 0.0;
        int nondecaying = 0;
        for (int k = 0; k < 3; ++k) {
            const double a = c0 * std::pow(10.0, 5 + k);
            long ev = 0;
            const Interval probe = gk15(f, a, 10.0 * a, ev);
            if (!std::isfinite(probe.value))
                throw divergence_error("integrate_radial: non-finite tail value");
            const double mag = std::abs(probe.value);
            if (k > 0 && prev > 0.0 && mag >= 0.9 * prev) ++nondecaying;
            prev = mag;
        }
        if (nondecaying == 2 && prev > 0.0)
            throw divergence_error("integrate_radial: tail decades do not decay");
    }

    std::vector<double> cuts;
    cuts.reserve(seeded.size() + 1);
    for (double s : seeded) cuts.push_back(to_t(s));
    if (infinite) cuts.push_back(std::nextafter(1.0, 0.0));
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    QuadratureResult res;
    std::priority_queue<Interval> heap;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] > cuts[i]) heap.push(gk15(g, cuts[i], cuts[i + 1], res.evaluations));
    }

    double total = 0.0, total_err = 0.0, total_abs = 0.0;
    auto recompute = [&] {
        total = total_err = total_abs = 0.0;
        std::priority_queue<Interval> copy = heap;
        while (!copy.empty()) {
            total += copy.top().value;
            total_err += copy.top().error;
            total_abs += copy.top().abs_value;
            copy.pop();
        }
    };
    recompute();

    // Divergence heuristic: the interval hugging an endpoint keeps
    // contributing as much as or more than its parent did, split after split.
    const double glo = cuts.front(), ghi = cuts.back();
    int streak_lo = 0, streak_hi = 0;
    double last_lo = std::numeric_limits<double>::infinity();
    double last_hi = std::numeric_limits<double>::infinity();

    int n_intervals = static_cast<int>(heap.size());
    while (n_intervals < max_intervals) {
        if (total_err <= rel_tol * std::abs(total) || total_err <= 1e-16 * total_abs) break;
        Interval worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {  // interval at machine width
            heap.push(worst);
            break;
        }
        Interval l = gk15(g, worst.a, mid, res.evaluations);
        Interval r = gk15(g, mid, worst.b, res.evaluations);
        if (!std::isfinite(l.value) || !std::isfinite(r.value))
            throw divergence_error("integrate_radial: non-finite integrand value");
        if (worst.a == glo) {
            streak_lo = std::abs(l.value) >= 0.99 * last_lo ? streak_lo + 1 : 0;
            last_lo = std::abs(l.value);
            if (streak_lo > 40)
                throw divergence_error("integrate_radial: partial sums grow at the lower endpoint");
        }
        if (worst.b == ghi) {
            streak_hi = std::abs(r.value) >= 0.99 * last_hi ? streak_hi + 1 : 0;
            last_hi = std::abs(r.value);
            if (streak_hi > 40)
                throw divergence_error("integrate_radial: partial sums grow at the upper endpoint");
        }
        heap.push(l);
        heap.push(r);
        ++n_intervals;

        total = total + l.value + r.value - worst.value;
        total_err = total_err + l.error + r.error - worst.error;
        total_abs = total_abs + l.abs_value + r.abs_value - worst.abs_value;
        if ((n_intervals & 0x3ff) == 0) recompute();  // shed accumulated roundoff
    }
    recompute();

    res.value = total;
    res.abs_error_estimate = total_err;
    res.converged = total_err <= rel_tol * std::abs(total) || total_err <= 1e-15 * total_abs;
    return res;
}

}  // namespace bubbletower
