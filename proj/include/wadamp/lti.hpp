#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "wadamp/data_window.hpp"
#include "wadamp/polynomial.hpp"

namespace wadamp::lti {

using Complex = std::complex<double>;

/// Rational transfer function. Continuous functions store descending powers
/// of s; discrete ones store ascending powers of z^-1 with the denominator
/// normalized so its z^0 coefficient is exactly 1 and the numerator padded to
/// the denominator length. `sample_time` empty means continuous.
struct RationalTf {
    Polynomial num;
    Polynomial den;
    std::optional<double> sample_time;

    static RationalTf continuous(Polynomial num, Polynomial den);
    static RationalTf discrete(Polynomial num, Polynomial den, double sample_time);

    bool is_discrete() const { return sample_time.has_value(); }

    /// Value at a point of the domain variable (s, or z for discrete).
    Complex eval(Complex x) const;
};

/// State-space model x' = Ax + Bu, y = Cx + Du (continuous), or the
/// difference-equation analogue when `sample_time` is set.
struct StateSpaceModel {
    Eigen::MatrixXd A, B, C, D;
    std::optional<double> sample_time;

    static StateSpaceModel continuous(Eigen::MatrixXd A, Eigen::MatrixXd B,
                                      Eigen::MatrixXd C, Eigen::MatrixXd D);
    static StateSpaceModel continuous(Eigen::MatrixXd A, Eigen::MatrixXd B,
                                      Eigen::MatrixXd C);  // D = 0
    static StateSpaceModel discrete(Eigen::MatrixXd A, Eigen::MatrixXd B,
                                    Eigen::MatrixXd C, Eigen::MatrixXd D,
                                    double sample_time);

    Eigen::Index n_states() const { return A.rows(); }
    Eigen::Index n_inputs() const { return B.cols(); }
    Eigen::Index n_outputs() const { return C.rows(); }
    bool is_discrete() const { return sample_time.has_value(); }
};

struct PoleResidueTerm {
    Complex pole;
    Complex residue;
};

/// Partial-fraction form: sum_j residue_j / (x - pole_j) + direct(x).
struct PoleResidueForm {
    std::vector<PoleResidueTerm> terms;
    Polynomial direct = Polynomial::zero();
    std::optional<double> sample_time;

    Complex eval(Complex x) const;
};

// ---------------------------------------------------------------------------
// Polynomial root finding
// ---------------------------------------------------------------------------

/// Roots via companion-matrix eigenvalues. The coefficient list is read as
/// descending powers, so a discrete denominator [1, a1, ..., ak] yields the
/// z-plane poles directly. Degree >= 1 required after leading-zero trim.
std::vector<Complex> poly_roots(const Polynomial& p);

/// Monic characteristic polynomial of A, expanded from its eigenvalues.
Polynomial characteristic_polynomial(const Eigen::MatrixXd& A);

// ---------------------------------------------------------------------------
// Conversions
// ---------------------------------------------------------------------------

/// Transfer-function grid C(xI - A)^{-1}B + D via the Faddeev-LeVerrier
/// recursion. Every entry carries the characteristic polynomial of A as its
/// denominator; common factors are never cancelled.
std::vector<std::vector<RationalTf>> ss_to_tf(const StateSpaceModel& model);

/// Bilinear (Tustin) discretization: s = 2(1 - z^-1) / (Ts (1 + z^-1)).
/// The result preserves the denominator degree and is monic in the stored
/// convention.
RationalTf tustin_c2d(const RationalTf& tf, double sample_time);

/// Exact inverse bilinear map s = (2/Ts)(z - 1)/(z + 1), done by coefficient
/// substitution. Fails for a pole at z = -1 (maps to infinity).
RationalTf tustin_d2c(const RationalTf& tf);

/// Pointwise pole maps used for mode conversion and cross-checks.
Complex tustin_pole_c2d(Complex s, double sample_time);
Complex tustin_pole_d2c(Complex z, double sample_time);

/// State-space bilinear transform consistent with tustin_c2d on the entries
/// of ss_to_tf.
StateSpaceModel tustin_c2d_ss(const StateSpaceModel& model, double sample_time);

/// Partial fractions with simple poles. Roots closer than `cluster_tol`
/// (relative to the largest root magnitude, with an absolute floor of
/// cluster_tol itself) are treated as a repeated pole and rejected.
PoleResidueForm partial_fractions(const RationalTf& tf, double cluster_tol = 1e-6);

/// Controllable-canonical realization of a proper discrete transfer function;
/// state dimension equals the denominator degree.
StateSpaceModel tf_to_ss_controllable(const RationalTf& tf);

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

/// Iterates x_{k+1} = A x_k + B u_k, y_k = C x_k + D u_k over the input
/// window. Output channels are named y_1..y_m unless names are given.
DataWindow simulate_dt(const StateSpaceModel& model, const DataWindow& inputs,
                       const Eigen::VectorXd& x0,
                       const std::vector<std::string>& output_names = {});

}  // namespace wadamp::lti
