/** @file
 * Distribution statistics: moments, total variation, comparison against a
 * discretized normal, and the closed-form limit density of amplitude-level
 * walks.
 */
#pragma once

#include <cmath>

#include "oqrw/walk.hpp"

namespace oqrw {

struct MomentSummary {
    double mean = 0.0;     // lattice units
    double variance = 0.0; // lattice units squared
    double total_mass = 0.0;
};

inline MomentSummary moments(const WalkDistribution& d) {
    MomentSummary m;
    double second = 0.0;
    for (const auto& [v, p] : d.probs) {
        const double x = static_cast<double>(v);
        m.total_mass += p;
        m.mean += x * p;
        second += x * x * p;
    }
    m.variance = second - m.mean * m.mean;
    if (m.variance < 0.0 && m.variance > -1e-12) m.variance = 0.0;
    return m;
}

/// (1/2) sum_i |a_i - b_i| over the union of supports.
inline double total_variation(const WalkDistribution& a, const WalkDistribution& b) {
    double s = 0.0;
    auto ia = a.probs.begin();
    auto ib = b.probs.begin();
    while (ia != a.probs.end() || ib != b.probs.end()) {
        if (ib == b.probs.end() || (ia != a.probs.end() && ia->first < ib->first)) {
            s += std::abs(ia->second);
            ++ia;
        } else if (ia == a.probs.end() || ib->first < ia->first) {
            s += std::abs(ib->second);
            ++ib;
        } else {
            s += std::abs(ia->second - ib->second);
            ++ia;
            ++ib;
        }
    }
    return 0.5 * s;
}

namespace detail {

// Mass of N(mu, sigma^2) over the unit cell centered at x.
inline double normal_cell_mass(double x, double mu, double sigma) {
    const double inv = 1.0 / (sigma * std::sqrt(2.0));
    return 0.5 * (std::erf((x + 0.5 - mu) * inv) - std::erf((x - 0.5 - mu) * inv));
}

} // namespace detail

/// Total variation between d and the discretized normal matching d's own mean
/// and variance. Nearest-neighbor walks occupy a single parity class at fixed
/// time, so the comparison first collapses onto the occupied sublattice
/// (spacing 2) when the support allows it; the fitted variance is corrected
/// for the cell-integration term so an exactly discretized normal compares
/// to itself at round-off level.
inline double gaussian_discrepancy(const WalkDistribution& d) {
    if (d.probs.empty()) throw DomainError("gaussian_discrepancy: empty distribution");

    // collapse onto the occupied-parity sublattice when there is one;
    // zero-probability entries do not count as occupied
    bool single_parity = true;
    std::int64_t parity = -1;
    for (const auto& [v, p] : d.probs) {
        if (p <= 0.0) continue;
        const auto this_parity = ((v % 2) + 2) % 2;
        if (parity < 0)
            parity = this_parity;
        else if (this_parity != parity) {
            single_parity = false;
            break;
        }
    }

    std::map<std::int64_t, double> q;
    for (const auto& [v, p] : d.probs) {
        if (p <= 0.0) continue;
        // v - parity is even whenever the support sits on one parity class
        const std::int64_t u = single_parity ? (v - parity) / 2 : v;
        q[u] += p;
    }
    if (q.empty()) throw DomainError("gaussian_discrepancy: distribution carries no mass");

    double mass = 0.0, mean = 0.0, second = 0.0;
    for (const auto& [u, p] : q) {
        const double x = static_cast<double>(u);
        mass += p;
        mean += x * p;
        second += x * x * p;
    }
    mean /= mass;
    const double variance = second / mass - mean * mean;
    const double fitted = variance - 1.0 / 12.0; // cell-integration correction
    if (fitted <= 0.0)
        throw DomainError("gaussian_discrepancy: distribution is degenerate");
    const double sigma = std::sqrt(fitted);

    double l1 = 0.0, covered = 0.0;
    for (const auto& [u, p] : q) {
        const double cell = detail::normal_cell_mass(static_cast<double>(u), mean, sigma);
        l1 += std::abs(p / mass - cell);
        covered += cell;
    }
    return 0.5 * (l1 + (1.0 - covered));
}

/// The limit density sqrt(1-a^2)(1 - lambda x) / (pi (1-x^2) sqrt(a^2-x^2)),
/// defined on |x| < a.
inline double konno_density(double a, double lambda, double x) {
    if (!(a > 0.0 && a < 1.0))
        throw DomainError("konno_density: a must lie in (0,1)");
    if (std::abs(x) >= a)
        throw DomainError("konno_density: x outside the support (-a, a)");
    const double pi = std::acos(-1.0);
    return std::sqrt(1.0 - a * a) * (1.0 - lambda * x) /
           (pi * (1.0 - x * x) * std::sqrt(a * a - x * x));
}

} // namespace oqrw
