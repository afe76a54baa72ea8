#include "bubbletower/inequalities.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "bubbletower/reduction.hpp"

namespace bubbletower {

Lemma lemma_from_string(const std::string& tag) {
    if (tag == "2.1a") return Lemma::L21a;
    if (tag == "2.1b") return Lemma::L21b;
    if (tag == "2.2") return Lemma::L22;
    if (tag == "2.3") return Lemma::L23;
    if (tag == "2.4a") return Lemma::L24a;
    if (tag == "2.4b") return Lemma::L24b;
    if (tag == "2.5") return Lemma::L25;
    throw std::invalid_argument("unknown lemma tag: " + tag);
}

std::string lemma_to_string(Lemma lemma) {
    switch (lemma) {
        case Lemma::L21a: return "2.1a";
        case Lemma::L21b: return "2.1b";
        case Lemma::L22: return "2.2";
        case Lemma::L23: return "2.3";
        case Lemma::L24a: return "2.4a";
        case Lemma::L24b: return "2.4b";
        case Lemma::L25: return "2.5";
    }
    return "?";
}

InequalityCheck check_inequality(Lemma lemma, std::span<const double> args, double p) {
    auto need = [&](size_t n) {
        if (args.size() != n) throw std::invalid_argument("check_inequality: wrong arg count");
    };
    auto f = [p](double s) { return nonlinearity(s, p); };
    auto fp = [p](double s) { return nonlinearity_deriv(s, p); };
    constexpr double kUlp = 8.0 * 2.22e-16;
    InequalityCheck out;
    switch (lemma) {
        case Lemma::L21a:
        case Lemma::L21b: {
            need(3);
            const double x = args[0], y = args[1], alpha = args[2];
            if (!(x > 0.0 && y > 0.0))
                throw std::invalid_argument("check_inequality: lemma 2.1 needs x, y > 0");
            out.lhs = std::pow(x + y, alpha);
            out.rhs_shape = std::pow(x, alpha) + std::pow(y, alpha);
            break;
        }
        case Lemma::L22: {
            need(2);
            const double a = args[0], b = args[1];
            const double t1 = std::pow(std::abs(a + b), p), t2 = std::pow(std::abs(a), p);
            out.lhs = std::abs(t1 - t2);
            out.lhs_floor = kUlp * (t1 + t2);
            out.rhs_shape =
                std::pow(std::abs(a), p - 1.0) * std::abs(b) + std::pow(std::abs(b), p);
            break;
        }
        case Lemma::L23: {
            need(2);
            const double a = args[0], b = args[1];
            out.lhs = std::abs(f(a + b) - f(a) - fp(a) * b);
            out.lhs_floor =
                kUlp * (std::abs(f(a + b)) + std::abs(f(a)) + std::abs(fp(a) * b));
            out.rhs_shape = std::pow(std::abs(b), p);
            break;
        }
        case Lemma::L24a: {
            need(2);
            const double a = args[0], b = args[1];
            out.lhs = std::abs(f(a - b) - f(a) + f(b));
            out.lhs_floor =
                kUlp * (std::abs(f(a - b)) + std::abs(f(a)) + std::abs(f(b)));
            out.rhs_shape =
                std::pow(std::abs(a), p - 1.0) * std::abs(b) + std::pow(std::abs(b), p);
            break;
        }
        case Lemma::L24b: {
            need(2);
            const double a = args[0], b = args[1];
            out.lhs = std::abs(f(a - b) - f(a) + f(b));
            out.lhs_floor =
                kUlp * (std::abs(f(a - b)) + std::abs(f(a)) + std::abs(f(b)));
            out.rhs_shape =
                std::pow(std::abs(b), p - 1.0) * std::abs(a) + std::pow(std::abs(a), p);
            break;
        }
        case Lemma::L25: {
            need(3);
            const double a = args[0], b1 = args[1], b2 = args[2];
            out.lhs = std::abs(f(a + b1) - f(a + b2) - fp(a) * (b1 - b2));
            out.lhs_floor = kUlp * (std::abs(f(a + b1)) + std::abs(f(a + b2)) +
                                    std::abs(fp(a) * (b1 - b2)));
            out.rhs_shape = (std::pow(std::abs(b1), p - 1.0) + std::pow(std::abs(b2), p - 1.0)) *
                            std::abs(b1 - b2);
            break;
        }
    }
    return out;
}

InequalitySuiteResult run_inequality_suite(Lemma lemma, double p, long samples,
                                           std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> logmag(-6.0, 6.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto magnitude = [&] { return std::pow(10.0, logmag(rng)); };
    auto signed_mag = [&] { return (unit(rng) < 0.5 ? -1.0 : 1.0) * magnitude(); };

    InequalitySuiteResult res;
    res.samples = samples;
    for (long k = 0; k < samples; ++k) {
        double args[3];
        size_t nargs = 0;
        switch (lemma) {
            case Lemma::L21a:
                args[0] = magnitude();
                args[1] = magnitude();
                args[2] = 0.05 + 0.95 * unit(rng);  // alpha in (0.05, 1]
                nargs = 3;
                break;
            case Lemma::L21b:
                args[0] = magnitude();
                args[1] = magnitude();
                args[2] = 2.5;
                nargs = 3;
                break;
            case Lemma::L22:
            case Lemma::L23:
            case Lemma::L24a:
            case Lemma::L24b:
                args[0] = signed_mag();
                args[1] = signed_mag();
                nargs = 2;
                break;
            case Lemma::L25:
                args[0] = signed_mag();
                args[1] = signed_mag();
                args[2] = signed_mag();
                nargs = 3;
                break;
        }
        const InequalityCheck c = check_inequality(lemma, {args, nargs}, p);
        if (c.rhs_shape == 0.0) continue;  // degenerate tuple, both sides vanish
        if (c.lhs <= c.lhs_floor) continue;  // cancellation swamped by roundoff
        const double ratio = c.lhs / c.rhs_shape;
        if (!std::isfinite(ratio)) {
            res.all_finite = false;
            continue;
        }
        res.max_ratio = std::max(res.max_ratio, ratio);
        if (lemma == Lemma::L21a && ratio > 1.0) res.bounded_by_one = false;
    }
    return res;
}

}  // namespace bubbletower
