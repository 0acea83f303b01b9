#include "wadamp/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include "wadamp/errors.hpp"

namespace wadamp::lti {

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) {
        throw ValidationError("Polynomial: coefficient list must be nonempty");
    }
    for (double c : coeffs_) {
        if (!std::isfinite(c)) {
            throw ValidationError("Polynomial: coefficients must be finite");
        }
    }
}

Polynomial::Polynomial(std::initializer_list<double> coeffs)
    : Polynomial(std::vector<double>(coeffs)) {}

Polynomial Polynomial::from_roots(const std::vector<std::complex<double>>& roots,
                                  double leading) {
    std::vector<std::complex<double>> c{leading};
    for (const auto& r : roots) {
        c.push_back(0.0);
        for (std::size_t i = c.size() - 1; i > 0; --i) {
            c[i] -= r * c[i - 1];
        }
    }
    std::vector<double> real(c.size());
    std::transform(c.begin(), c.end(), real.begin(),
                   [](const std::complex<double>& z) { return z.real(); });
    return Polynomial(std::move(real));
}

double Polynomial::operator()(double x) const {
    double acc = 0.0;
    for (double c : coeffs_) acc = acc * x + c;
    return acc;
}

std::complex<double> Polynomial::operator()(std::complex<double> x) const {
    std::complex<double> acc = 0.0;
    for (double c : coeffs_) acc = acc * x + c;
    return acc;
}

double Polynomial::max_abs_coeff() const {
    double m = 0.0;
    for (double c : coeffs_) m = std::max(m, std::abs(c));
    return m;
}

bool Polynomial::is_zero(double tol) const { return max_abs_coeff() <= tol; }

namespace {

// Aligns the low-order ends: trailing coefficients are the low powers.
std::vector<double> add_scaled(const Polynomial& a, const Polynomial& b, double sb) {
    std::size_t n = std::max(a.size(), b.size());
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) out[n - a.size() + i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[n - b.size() + i] += sb * b[i];
    return out;
}

}  // namespace

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    return Polynomial(add_scaled(a, b, 1.0));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) {
    return Polynomial(add_scaled(a, b, -1.0));
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            out[i + j] += a[i] * b[j];
        }
    }
    return Polynomial(std::move(out));
}

Polynomial operator*(double s, const Polynomial& p) {
    std::vector<double> out(p.coeffs());
    for (double& c : out) c *= s;
    return Polynomial(std::move(out));
}

Polynomial derivative(const Polynomial& p) {
    if (p.size() <= 1) return Polynomial::zero();
    std::vector<double> out(p.size() - 1);
    int n = p.degree();
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        out[i] = p[i] * static_cast<double>(n - static_cast<int>(i));
    }
    return Polynomial(std::move(out));
}

PolyDivision divide(const Polynomial& num, const Polynomial& den) {
    Polynomial d = trim_leading(den);
    if (d.is_zero()) {
        throw ValidationError("divide: division by zero polynomial");
    }
    std::vector<double> rem(num.coeffs());
    int qn = static_cast<int>(rem.size()) - static_cast<int>(d.size()) + 1;
    if (qn <= 0) {
        return {Polynomial::zero(), num};
    }
    std::vector<double> quot(static_cast<std::size_t>(qn), 0.0);
    for (int i = 0; i < qn; ++i) {
        double f = rem[static_cast<std::size_t>(i)] / d[0];
        quot[static_cast<std::size_t>(i)] = f;
        for (std::size_t j = 0; j < d.size(); ++j) {
            rem[static_cast<std::size_t>(i) + j] -= f * d[j];
        }
    }
    std::vector<double> r(rem.end() - static_cast<long>(d.size()) + 1, rem.end());
    if (r.empty()) r.push_back(0.0);
    return {Polynomial(std::move(quot)), Polynomial(std::move(r))};
}

Polynomial trim_leading(const Polynomial& p, double tol) {
    std::size_t i = 0;
    while (i + 1 < p.size() && std::abs(p[i]) <= tol) ++i;
    return Polynomial(std::vector<double>(p.coeffs().begin() + static_cast<long>(i),
                                          p.coeffs().end()));
}

Polynomial monic(const Polynomial& p) {
    if (p[0] == 0.0) {
        throw ValidationError("monic: leading coefficient is zero");
    }
    return (1.0 / p[0]) * p;
}

Polynomial pad_trailing(const Polynomial& p, std::size_t size) {
    if (p.size() >= size) return p;
    std::vector<double> out(p.coeffs());
    out.resize(size, 0.0);
    return Polynomial(std::move(out));
}

}  // namespace wadamp::lti
