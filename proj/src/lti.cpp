#include "wadamp/lti.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wadamp/errors.hpp"

namespace wadamp::lti {

namespace {

std::string complex_str(Complex z) {
    std::ostringstream os;
    os << z.real() << (z.imag() >= 0 ? "+" : "") << z.imag() << "i";
    return os.str();
}

void check_dims(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& C,
                const Eigen::MatrixXd& D) {
    if (A.rows() != A.cols()) throw ValidationError("StateSpaceModel: A must be square");
    if (B.rows() != A.rows()) throw ValidationError("StateSpaceModel: B row count mismatch");
    if (C.cols() != A.cols()) throw ValidationError("StateSpaceModel: C column count mismatch");
    if (D.rows() != C.rows() || D.cols() != B.cols()) {
        throw ValidationError("StateSpaceModel: D dimension mismatch");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

RationalTf RationalTf::continuous(Polynomial num, Polynomial den) {
    if (den.is_zero()) {
        throw ValidationError("RationalTf: denominator is identically zero");
    }
    return RationalTf{std::move(num), std::move(den), std::nullopt};
}

RationalTf RationalTf::discrete(Polynomial num, Polynomial den, double sample_time) {
    if (sample_time <= 0.0) {
        throw ValidationError("RationalTf: discrete sample_time must be positive");
    }
    if (den.is_zero()) {
        throw ValidationError("RationalTf: denominator is identically zero");
    }
    if (std::abs(den[0]) <= 1e-300 ||
        std::abs(den[0]) < 1e-12 * den.max_abs_coeff()) {
        throw ValidationError(
            "RationalTf: discrete denominator has (near-)zero z^0 coefficient; cannot "
            "normalize to the 1 + a1 z^-1 + ... form");
    }
    if (num.size() > den.size()) {
        throw ValidationError("RationalTf: improper discrete transfer function");
    }
    double scale = den[0];
    std::vector<double> dc(den.coeffs());
    for (double& c : dc) c /= scale;
    dc[0] = 1.0;
    Polynomial n = pad_trailing((1.0 / scale) * num, dc.size());
    return RationalTf{std::move(n), Polynomial(std::move(dc)), sample_time};
}

Complex RationalTf::eval(Complex x) const {
    // Discrete coefficients double as descending z-polynomials (same vector),
    // so a single Horner pass covers both domains.
    return num(x) / den(x);
}

StateSpaceModel StateSpaceModel::continuous(Eigen::MatrixXd A, Eigen::MatrixXd B,
                                            Eigen::MatrixXd C, Eigen::MatrixXd D) {
    check_dims(A, B, C, D);
    return StateSpaceModel{std::move(A), std::move(B), std::move(C), std::move(D), std::nullopt};
}

StateSpaceModel StateSpaceModel::continuous(Eigen::MatrixXd A, Eigen::MatrixXd B,
                                            Eigen::MatrixXd C) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(C.rows(), B.cols());
    return continuous(std::move(A), std::move(B), std::move(C), std::move(D));
}

StateSpaceModel StateSpaceModel::discrete(Eigen::MatrixXd A, Eigen::MatrixXd B,
                                          Eigen::MatrixXd C, Eigen::MatrixXd D,
                                          double sample_time) {
    if (sample_time <= 0.0) {
        throw ValidationError("StateSpaceModel: discrete sample_time must be positive");
    }
    check_dims(A, B, C, D);
    return StateSpaceModel{std::move(A), std::move(B), std::move(C), std::move(D), sample_time};
}

Complex PoleResidueForm::eval(Complex x) const {
    Complex acc = direct(x);
    for (const auto& t : terms) acc += t.residue / (x - t.pole);
    return acc;
}

// ---------------------------------------------------------------------------
// Roots
// ---------------------------------------------------------------------------

std::vector<Complex> poly_roots(const Polynomial& p) {
    Polynomial t = trim_leading(p);
    int n = t.degree();
    if (n < 1 || t.is_zero()) {
        throw ValidationError("poly_roots: polynomial degree must be >= 1");
    }
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) {
        comp(i, n - 1) = -t[static_cast<std::size_t>(n - i)] / t[0];
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, /*computeEigenvectors=*/false);
    std::vector<Complex> roots(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) roots[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return roots;
}

Polynomial characteristic_polynomial(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols()) throw ValidationError("characteristic_polynomial: A not square");
    if (A.rows() == 0) return Polynomial({1.0});
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    std::vector<Complex> eigs(static_cast<std::size_t>(A.rows()));
    for (Eigen::Index i = 0; i < A.rows(); ++i) eigs[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    return Polynomial::from_roots(eigs);
}

// ---------------------------------------------------------------------------
// ss_to_tf
// ---------------------------------------------------------------------------

std::vector<std::vector<RationalTf>> ss_to_tf(const StateSpaceModel& model) {
    const Eigen::Index n = model.n_states();
    const Eigen::Index m = model.n_outputs();
    const Eigen::Index p = model.n_inputs();

    // Faddeev-LeVerrier: p(x) = x^n + c_1 x^{n-1} + ... + c_n and
    // adj(xI - A) = sum_k M_k x^{n-1-k}, with M_0 = I,
    // c_{k+1} = -tr(A M_k)/(k+1), M_{k+1} = A M_k + c_{k+1} I.
    std::vector<double> den(static_cast<std::size_t>(n) + 1, 0.0);
    den[0] = 1.0;
    std::vector<Eigen::MatrixXd> cmb;  // C * M_k * B for each k
    cmb.reserve(static_cast<std::size_t>(n));
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        cmb.push_back(model.C * M * model.B);
        Eigen::MatrixXd AM = model.A * M;
        double c = -AM.trace() / static_cast<double>(k + 1);
        den[static_cast<std::size_t>(k) + 1] = c;
        M = AM + c * Eigen::MatrixXd::Identity(n, n);
    }
    Polynomial den_poly{std::vector<double>(den)};

    std::vector<std::vector<RationalTf>> grid;
    grid.reserve(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        std::vector<RationalTf> row;
        row.reserve(static_cast<std::size_t>(p));
        for (Eigen::Index j = 0; j < p; ++j) {
            std::vector<double> num(static_cast<std::size_t>(n) + 1, 0.0);
            double d = model.D(i, j);
            for (std::size_t k = 0; k <= static_cast<std::size_t>(n); ++k) {
                num[k] = d * den[k];
            }
            for (Eigen::Index k = 0; k < n; ++k) {
                num[static_cast<std::size_t>(k) + 1] += cmb[static_cast<std::size_t>(k)](i, j);
            }
            Polynomial num_poly{std::move(num)};
            row.push_back(model.is_discrete()
                              ? RationalTf::discrete(num_poly, den_poly, *model.sample_time)
                              : RationalTf::continuous(num_poly, den_poly));
        }
        grid.push_back(std::move(row));
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Tustin transforms
// ---------------------------------------------------------------------------

RationalTf tustin_c2d(const RationalTf& tf, double sample_time) {
    if (tf.is_discrete()) throw ValidationError("tustin_c2d: input must be continuous");
    if (sample_time <= 0.0) throw ValidationError("tustin_c2d: sample_time must be positive");

    Polynomial num = trim_leading(tf.num);
    Polynomial den = trim_leading(tf.den);
    const int n = den.degree();
    if (num.degree() > n) {
        throw ValidationError("tustin_c2d: improper transfer function");
    }

    // Substitute s = (2/Ts)(z-1)/(z+1) and clear (z+1)^n: the s^i coefficient
    // contributes (2/Ts)^i (z-1)^i (z+1)^{n-i}.
    const double c = 2.0 / sample_time;
    const Polynomial zm1({1.0, -1.0});
    const Polynomial zp1({1.0, 1.0});
    std::vector<Polynomial> zm1_pow{Polynomial::constant(1.0)};
    std::vector<Polynomial> zp1_pow{Polynomial::constant(1.0)};
    for (int i = 0; i < n; ++i) {
        zm1_pow.push_back(zm1_pow.back() * zm1);
        zp1_pow.push_back(zp1_pow.back() * zp1);
    }
    auto substitute = [&](const Polynomial& poly) {
        Polynomial acc = Polynomial::zero();
        const int deg = poly.degree();
        double ci = 1.0;  // (2/Ts)^i
        for (int i = 0; i <= deg; ++i) {
            double coeff = poly[static_cast<std::size_t>(deg - i)];
            if (coeff != 0.0) {
                acc = acc + (coeff * ci) *
                          (zm1_pow[static_cast<std::size_t>(i)] *
                           zp1_pow[static_cast<std::size_t>(n - i)]);
            }
            ci *= c;
        }
        return pad_trailing(acc, static_cast<std::size_t>(n) + 1);
    };

    Polynomial num_z = substitute(num);
    Polynomial den_z = substitute(den);
    if (std::abs(den_z[0]) <= 1e-12 * den_z.max_abs_coeff()) {
        throw NumericalError(
            "tustin_c2d: ill-conditioned substitution (continuous pole at 2/Ts maps to the "
            "z = -1 boundary)");
    }
    return RationalTf::discrete(num_z, den_z, sample_time);
}

RationalTf tustin_d2c(const RationalTf& tf) {
    if (!tf.is_discrete()) throw ValidationError("tustin_d2c: input must be discrete");
    const double Ts = *tf.sample_time;
    const double c = 2.0 / Ts;
    const int k = tf.den.degree();

    // A pole at z = -1 maps to s = infinity; detect it before substituting.
    if (std::abs(tf.den(Complex(-1.0, 0.0))) <= 1e-9 * tf.den.max_abs_coeff()) {
        auto roots = poly_roots(tf.den);
        Complex offender = roots.front();
        for (const auto& r : roots) {
            if (std::abs(r + 1.0) < std::abs(offender + 1.0)) offender = r;
        }
        throw NumericalError("tustin_d2c: pole at z = " + complex_str(offender) +
                             " maps to infinity under the inverse bilinear transform");
    }

    // z = (c+s)/(c-s); clearing (c-s)^k turns the z^{k-j} term into
    // (c+s)^{k-j} (c-s)^j.
    const Polynomial cps({1.0, c});   // s + c
    const Polynomial cms({-1.0, c});  // -s + c
    std::vector<Polynomial> cps_pow{Polynomial::constant(1.0)};
    std::vector<Polynomial> cms_pow{Polynomial::constant(1.0)};
    for (int i = 0; i < k; ++i) {
        cps_pow.push_back(cps_pow.back() * cps);
        cms_pow.push_back(cms_pow.back() * cms);
    }
    auto substitute = [&](const Polynomial& poly) {
        Polynomial acc = Polynomial::zero();
        for (int j = 0; j <= k; ++j) {
            double coeff = poly[static_cast<std::size_t>(j)];
            if (coeff != 0.0) {
                acc = acc + coeff * (cps_pow[static_cast<std::size_t>(k - j)] *
                                     cms_pow[static_cast<std::size_t>(j)]);
            }
        }
        return pad_trailing(acc, static_cast<std::size_t>(k) + 1);
    };

    Polynomial num_s = substitute(tf.num);
    Polynomial den_s = substitute(tf.den);
    if (std::abs(den_s[0]) <= 1e-12 * den_s.max_abs_coeff()) {
        throw NumericalError("tustin_d2c: degenerate substitution (denominator degree drops)");
    }
    double scale = den_s[0];
    return RationalTf::continuous((1.0 / scale) * num_s, monic(den_s));
}

Complex tustin_pole_c2d(Complex s, double sample_time) {
    if (sample_time <= 0.0) throw ValidationError("tustin_pole_c2d: sample_time must be positive");
    const double c = 2.0 / sample_time;
    if (std::abs(c - s) < 1e-12 * std::abs(c)) {
        throw NumericalError("tustin_pole_c2d: pole at s = 2/Ts has no finite image");
    }
    return (c + s) / (c - s);
}

Complex tustin_pole_d2c(Complex z, double sample_time) {
    if (sample_time <= 0.0) throw ValidationError("tustin_pole_d2c: sample_time must be positive");
    if (std::abs(z + 1.0) < 1e-12) {
        throw NumericalError("tustin_pole_d2c: pole at z = -1 maps to infinity");
    }
    return (2.0 / sample_time) * (z - 1.0) / (z + 1.0);
}

StateSpaceModel tustin_c2d_ss(const StateSpaceModel& model, double sample_time) {
    if (model.is_discrete()) throw ValidationError("tustin_c2d_ss: input must be continuous");
    if (sample_time <= 0.0) throw ValidationError("tustin_c2d_ss: sample_time must be positive");
    const Eigen::Index n = model.n_states();
    const double c = 2.0 / sample_time;
    Eigen::MatrixXd W = c * Eigen::MatrixXd::Identity(n, n) - model.A;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(W);
    // (cI - A) is singular iff A has an eigenvalue at 2/Ts.
    if (std::abs(lu.determinant()) <= 1e-300) {
        throw NumericalError("tustin_c2d_ss: continuous pole at 2/Ts, bilinear map singular");
    }
    Eigen::MatrixXd Ad = lu.solve(c * Eigen::MatrixXd::Identity(n, n) + model.A);
    Eigen::MatrixXd WB = lu.solve(model.B);
    Eigen::MatrixXd Bd = (Eigen::MatrixXd::Identity(n, n) + Ad) * WB;
    Eigen::MatrixXd Dd = model.D + model.C * WB;
    return StateSpaceModel::discrete(Ad, Bd, model.C, Dd, sample_time);
}

// ---------------------------------------------------------------------------
// Partial fractions
// ---------------------------------------------------------------------------

PoleResidueForm partial_fractions(const RationalTf& tf, double cluster_tol) {
    Polynomial num = trim_leading(tf.num);
    Polynomial den = trim_leading(tf.den);

    PoleResidueForm out;
    out.sample_time = tf.sample_time;
    if (den.degree() == 0) {
        out.direct = (1.0 / den[0]) * num;
        return out;
    }

    PolyDivision div = divide(num, den);
    out.direct = div.quotient;

    std::vector<Complex> poles = poly_roots(den);
    double max_mag = 0.0;
    for (const auto& z : poles) max_mag = std::max(max_mag, std::abs(z));
    const double sep = std::max(cluster_tol, cluster_tol * max_mag);
    for (std::size_t i = 0; i < poles.size(); ++i) {
        for (std::size_t j = i + 1; j < poles.size(); ++j) {
            if (std::abs(poles[i] - poles[j]) < sep) {
                throw ValidationError("partial_fractions: repeated pole at " +
                                      complex_str(poles[i]) +
                                      " (multiplicity > 1 is unsupported)");
            }
        }
    }

    Polynomial dden = derivative(den);
    out.terms.reserve(poles.size());
    for (const auto& pole : poles) {
        out.terms.push_back({pole, div.remainder(pole) / dden(pole)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Realization and simulation
// ---------------------------------------------------------------------------

StateSpaceModel tf_to_ss_controllable(const RationalTf& tf) {
    if (!tf.is_discrete()) {
        throw ValidationError("tf_to_ss_controllable: discrete transfer function required");
    }
    const int k = tf.den.degree();
    const Polynomial& a = tf.den;
    const Polynomial& b = tf.num;  // padded to k+1 by construction
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(k, k);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(k, 1);
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(1, k);
    Eigen::MatrixXd D(1, 1);
    D(0, 0) = b[0];
    for (int i = 0; i < k; ++i) {
        A(0, i) = -a[static_cast<std::size_t>(i) + 1];
        C(0, i) = b[static_cast<std::size_t>(i) + 1] - a[static_cast<std::size_t>(i) + 1] * b[0];
    }
    for (int i = 1; i < k; ++i) A(i, i - 1) = 1.0;
    if (k > 0) B(0, 0) = 1.0;
    return StateSpaceModel::discrete(A, B, C, D, *tf.sample_time);
}

DataWindow simulate_dt(const StateSpaceModel& model, const DataWindow& inputs,
                       const Eigen::VectorXd& x0,
                       const std::vector<std::string>& output_names) {
    if (!model.is_discrete()) throw ValidationError("simulate_dt: model must be discrete");
    if (std::abs(*model.sample_time - inputs.sample_time()) >
        1e-9 * *model.sample_time) {
        throw ValidationError("simulate_dt: input sample_time does not match the model");
    }
    if (inputs.channel_count() != model.n_inputs()) {
        throw ValidationError("simulate_dt: input channel count does not match model inputs");
    }
    if (x0.size() != model.n_states()) {
        throw ValidationError("simulate_dt: initial state has wrong dimension");
    }
    std::vector<std::string> names = output_names;
    if (names.empty()) {
        for (Eigen::Index i = 0; i < model.n_outputs(); ++i) {
            names.push_back("y_" + std::to_string(i + 1));
        }
    } else if (static_cast<Eigen::Index>(names.size()) != model.n_outputs()) {
        throw ValidationError("simulate_dt: output name count mismatch");
    }

    const Eigen::Index N = inputs.size();
    Eigen::MatrixXd Y(N, model.n_outputs());
    Eigen::VectorXd x = x0;
    for (Eigen::Index t = 0; t < N; ++t) {
        Eigen::VectorXd u = inputs.data().row(t).transpose();
        Y.row(t) = (model.C * x + model.D * u).transpose();
        x = model.A * x + model.B * u;
    }
    return DataWindow(inputs.sample_time(), inputs.start_time(), std::move(names), std::move(Y));
}

}  // namespace wadamp::lti
