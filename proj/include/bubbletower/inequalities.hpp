#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace bubbletower {

/// The elementary pointwise inequalities used throughout the remainder
/// estimates, checkable as randomized properties with a finite constant.
enum class Lemma { L21a, L21b, L22, L23, L24a, L24b, L25 };

Lemma lemma_from_string(const std::string& tag);  // "2.1a", "2.1b", "2.2", ...
std::string lemma_to_string(Lemma lemma);

/// Both sides of the inequality with the constant stripped from the right,
/// so callers can fit the implied c(p).  lhs_floor is the rounding scale of
/// the cancellation that forms lhs; a computed lhs at or below it only
/// certifies "zero within roundoff", not a ratio.
struct InequalityCheck {
    double lhs = 0.0;
    double rhs_shape = 0.0;
    double lhs_floor = 0.0;
};

/// Argument conventions:
///   2.1a/2.1b : {x, y, alpha}, x, y > 0
///   2.2, 2.3  : {a, b}
///   2.4a/2.4b : {a, b}
///   2.5       : {a, b1, b2}
InequalityCheck check_inequality(Lemma lemma, std::span<const double> args, double p);

struct InequalitySuiteResult {
    double max_ratio = 0.0;
    long samples = 0;
    bool all_finite = true;
    bool bounded_by_one = true;  // meaningful for 2.1a only
};

/// Draws `samples` random tuples (log-uniform magnitudes in [1e-6, 1e6],
/// random signs where the lemma permits them) and tracks the largest
/// lhs / rhs_shape ratio.
InequalitySuiteResult run_inequality_suite(Lemma lemma, double p, long samples,
                                           std::uint64_t seed);

}  // namespace bubbletower
