#pragma once

#include <complex>
#include <random>
#include <vector>

#include "wadamp/lti.hpp"

// Shared helpers for randomized tests. Every generator takes an explicit
// engine so seeds stay fixed and failures reproduce.
namespace testutil {

using wadamp::lti::Complex;
using wadamp::lti::Polynomial;
using wadamp::lti::RationalTf;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Roots closed under conjugation: pairs while >= 2 slots remain, then one
// real root if the order is odd.
inline std::vector<Complex> random_conjugate_roots(std::mt19937_64& rng, int order,
                                                   double re_lo, double re_hi,
                                                   double im_lo, double im_hi) {
    std::vector<Complex> roots;
    int remaining = order;
    while (remaining >= 2) {
        double re = uniform(rng, re_lo, re_hi);
        double im = uniform(rng, im_lo, im_hi);
        roots.emplace_back(re, im);
        roots.emplace_back(re, -im);
        remaining -= 2;
    }
    if (remaining == 1) roots.emplace_back(uniform(rng, re_lo, re_hi), 0.0);
    return roots;
}

inline RationalTf random_stable_continuous_tf(std::mt19937_64& rng, int order,
                                              bool strictly_proper = false) {
    auto poles = random_conjugate_roots(rng, order, -2.0, -0.1, 0.3, 3.0);
    Polynomial den = Polynomial::from_roots(poles);
    int num_deg = strictly_proper ? order - 1 : order;
    std::vector<double> nc(static_cast<std::size_t>(num_deg) + 1);
    for (double& c : nc) c = uniform(rng, -2.0, 2.0);
    return RationalTf::continuous(Polynomial(nc), den);
}

// Discrete poles kept well inside the unit circle so realization and
// simulation tests stay comfortably stable.
inline std::vector<Complex> random_stable_discrete_poles(std::mt19937_64& rng, int order,
                                                         double max_radius = 0.9) {
    std::vector<Complex> poles;
    int remaining = order;
    while (remaining >= 2) {
        double r = uniform(rng, 0.2, max_radius);
        double th = uniform(rng, 0.2, 2.9);
        poles.emplace_back(r * std::cos(th), r * std::sin(th));
        poles.emplace_back(r * std::cos(th), -r * std::sin(th));
        remaining -= 2;
    }
    if (remaining == 1) poles.emplace_back(uniform(rng, -max_radius, max_radius), 0.0);
    return poles;
}

inline RationalTf random_stable_discrete_tf(std::mt19937_64& rng, int order, double sample_time,
                                            double max_radius = 0.9) {
    Polynomial den = Polynomial::from_roots(random_stable_discrete_poles(rng, order, max_radius));
    std::vector<double> nc(static_cast<std::size_t>(order) + 1);
    for (double& c : nc) c = uniform(rng, -2.0, 2.0);
    return RationalTf::discrete(Polynomial(nc), den, sample_time);
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

// Max coefficient difference between two polynomials, aligned at the
// low-order end and scaled by the largest coefficient involved.
inline double poly_rel_diff(const Polynomial& a, const Polynomial& b) {
    const auto& ca = a.coeffs();
    const auto& cb = b.coeffs();
    std::size_t n = std::max(ca.size(), cb.size());
    double scale = std::max({a.max_abs_coeff(), b.max_abs_coeff(), 1e-300});
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double va = i + ca.size() >= n ? ca[i + ca.size() - n] : 0.0;
        double vb = i + cb.size() >= n ? cb[i + cb.size() - n] : 0.0;
        worst = std::max(worst, std::abs(va - vb) / scale);
    }
    return worst;
}

}  // namespace testutil
