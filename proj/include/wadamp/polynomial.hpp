#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace wadamp::lti {

/// Dense real polynomial. Coefficients are stored highest power first for
/// continuous-domain polynomials in s. The identical layout doubles as the
/// ascending-powers-of-z^-1 convention used by discrete transfer functions:
/// the list [1, a1, ..., ak] reads as 1 + a1 z^-1 + ... + ak z^-k, which is
/// the same vector as the descending z-polynomial z^k + a1 z^(k-1) + ... + ak
/// after clearing the fraction. All arithmetic below therefore works for both
/// domains unchanged.
class Polynomial {
public:
    explicit Polynomial(std::vector<double> coeffs);
    Polynomial(std::initializer_list<double> coeffs);

    static Polynomial constant(double value) { return Polynomial({value}); }
    static Polynomial zero() { return Polynomial({0.0}); }

    /// Monic expansion of prod (x - r_i), scaled by `leading`. Roots must be
    /// closed under conjugation; the imaginary residue of the expansion is
    /// discarded.
    static Polynomial from_roots(const std::vector<std::complex<double>>& roots,
                                 double leading = 1.0);

    const std::vector<double>& coeffs() const { return coeffs_; }
    std::size_t size() const { return coeffs_.size(); }
    /// Storage degree (size - 1); leading zeros are kept, not trimmed.
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    double operator[](std::size_t i) const { return coeffs_[i]; }

    /// Horner evaluation treating the coefficients as descending powers.
    double operator()(double x) const;
    std::complex<double> operator()(std::complex<double> x) const;

    double max_abs_coeff() const;
    bool is_zero(double tol = 0.0) const;

private:
    std::vector<double> coeffs_;
};

Polynomial operator+(const Polynomial& a, const Polynomial& b);
Polynomial operator-(const Polynomial& a, const Polynomial& b);
Polynomial operator*(const Polynomial& a, const Polynomial& b);
Polynomial operator*(double s, const Polynomial& p);

/// d/dx of a descending-power polynomial.
Polynomial derivative(const Polynomial& p);

/// Euclidean division: num = quotient * den + remainder, deg(rem) < deg(den).
/// Leading zeros of den are trimmed first; a zero den is an error.
struct PolyDivision {
    Polynomial quotient;
    Polynomial remainder;
};
PolyDivision divide(const Polynomial& num, const Polynomial& den);

/// Drop leading coefficients with |c| <= tol (keeps at least one).
Polynomial trim_leading(const Polynomial& p, double tol = 0.0);

/// Coefficients scaled so the leading (first) one is exactly 1.
Polynomial monic(const Polynomial& p);

/// Append trailing zeros up to `size` coefficients (no-op if already longer).
Polynomial pad_trailing(const Polynomial& p, std::size_t size);

}  // namespace wadamp::lti
