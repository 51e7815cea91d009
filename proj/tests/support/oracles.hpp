#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

// Independent statistical oracles, written straight from the published
// closed forms through a different algebraic route than the library.

namespace bcas::testing {

struct Interval {
    double low;
    double high;
};

/// Wilson bounds as the roots of the score equation
///   (p - phat)^2 = z^2 * p * (1 - p) / n
/// solved with the quadratic formula; independent of the library's
/// center/half-width evaluation.
inline Interval wilson_by_quadratic(std::uint64_t k, std::uint64_t n, double z) {
    if (n == 0 || k > n) {
        throw std::invalid_argument("wilson_by_quadratic: bad arguments");
    }
    const double nn = static_cast<double>(n);
    const double phat = static_cast<double>(k) / nn;
    const double z2 = z * z;
    // (1 + z2/n) p^2 - (2 phat + z2/n) p + phat^2 = 0
    const double a = 1.0 + z2 / nn;
    const double b = -(2.0 * phat + z2 / nn);
    const double c = phat * phat;
    const double disc = std::sqrt(b * b - 4.0 * a * c);
    return {(-b - disc) / (2.0 * a), (-b + disc) / (2.0 * a)};
}

/// Paired-proportion difference interval: per-arm Wilson bounds combined
/// square-and-add with the phi correction from the 2x2 table, transcribed
/// here directly from its published definition.
inline Interval newcombe_paired_by_table(std::uint64_t e, std::uint64_t f, std::uint64_t g,
                                         std::uint64_t h, double z) {
    const std::uint64_t n = e + f + g + h;
    if (n == 0) {
        throw std::invalid_argument("newcombe_paired_by_table: empty table");
    }
    const double nn = static_cast<double>(n);
    const std::uint64_t k_base = e + g;   // first arm successes
    const std::uint64_t k_var = e + f;    // second arm successes
    const double p1 = static_cast<double>(k_base) / nn;
    const double p2 = static_cast<double>(k_var) / nn;

    const Interval w1 = wilson_by_quadratic(k_base, n, z);
    const Interval w2 = wilson_by_quadratic(k_var, n, z);
    const double l1 = k_base == 0 ? 0.0 : w1.low;
    const double u1 = k_base == n ? 1.0 : w1.high;
    const double l2 = k_var == 0 ? 0.0 : w2.low;
    const double u2 = k_var == n ? 1.0 : w2.high;

    double phi = 0.0;
    const double denom = static_cast<double>(k_base) * static_cast<double>(n - k_base) *
                         static_cast<double>(k_var) * static_cast<double>(n - k_var);
    if (denom > 0.0) {
        phi = (static_cast<double>(e) * static_cast<double>(h) -
               static_cast<double>(f) * static_cast<double>(g)) /
              std::sqrt(denom);
    }

    const double diff = p2 - p1;
    const double dl = std::sqrt(std::max(
        0.0, (p2 - l2) * (p2 - l2) - 2.0 * phi * (p2 - l2) * (u1 - p1) + (u1 - p1) * (u1 - p1)));
    const double du = std::sqrt(std::max(
        0.0, (u2 - p2) * (u2 - p2) - 2.0 * phi * (u2 - p2) * (p1 - l1) + (p1 - l1) * (p1 - l1)));
    return {std::max(-1.0, diff - dl), std::min(1.0, diff + du)};
}

} // namespace bcas::testing
