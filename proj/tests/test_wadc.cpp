#include <doctest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"
#include "wadamp/errors.hpp"
#include "wadamp/wadc.hpp"

using namespace wadamp;
using namespace wadamp::wadc;
using lti::StateSpaceModel;

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c,
                              double lo = -1.0, double hi = 1.0) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = testutil::uniform(rng, lo, hi);
    }
    return m;
}

Eigen::MatrixXd random_stable_a(std::mt19937_64& rng, Eigen::Index n, double radius = 0.9) {
    Eigen::MatrixXd A = random_matrix(rng, n, n);
    return A * (radius / spectral_radius(A));
}

}  // namespace

// ---------------------------------------------------------------------------
// DLQR
// ---------------------------------------------------------------------------

TEST_CASE("scalar dlqr matches the closed-form Riccati root") {
    Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
    auto design = dlqr(one, one, one, one);
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    CHECK(std::abs(design.riccati(0, 0) - golden) < 1e-10);
    CHECK(std::abs(design.gain(0, 0) - (std::sqrt(5.0) - 1.0) / 2.0) < 1e-10);
}

TEST_CASE("dlqr with A = 0 returns zero gain") {
    Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 2);
    Eigen::MatrixXd B = Eigen::MatrixXd::Identity(2, 2);
    auto design = dlqr(zero, B, Eigen::MatrixXd::Identity(2, 2),
                       Eigen::MatrixXd::Identity(2, 2));
    CHECK(design.gain.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dlqr matches 500-step finite-horizon value iteration") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 4; ++trial) {
        Eigen::MatrixXd A = random_stable_a(rng, 5);
        Eigen::MatrixXd B = random_matrix(rng, 5, 1);
        Eigen::MatrixXd C = random_matrix(rng, 1, 5);
        Eigen::MatrixXd Q = C.transpose() * C + 1e-6 * Eigen::MatrixXd::Identity(5, 5);
        Eigen::MatrixXd R = Eigen::MatrixXd::Ones(1, 1);

        auto design = dlqr(A, B, Q, R);

        // Literal backward recursion from P_N = Q.
        Eigen::MatrixXd P = Q;
        for (int s = 0; s < 500; ++s) {
            Eigen::MatrixXd BtPA = B.transpose() * P * A;
            Eigen::MatrixXd G = R + B.transpose() * P * B;
            P = Q + A.transpose() * P * A - BtPA.transpose() * G.ldlt().solve(BtPA);
            P = 0.5 * (P + P.transpose());
        }
        Eigen::MatrixXd K =
            (R + B.transpose() * P * B).ldlt().solve(B.transpose() * P * A);
        CHECK((design.gain - K).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(spectral_radius(A - B * design.gain) < 1.0);

        // Riccati fixed-point residual.
        Eigen::MatrixXd BtPA = B.transpose() * design.riccati * A;
        Eigen::MatrixXd G = R + B.transpose() * design.riccati * B;
        Eigen::MatrixXd res = design.Q + A.transpose() * design.riccati * A -
                              BtPA.transpose() * G.ldlt().solve(BtPA) - design.riccati;
        CHECK(res.norm() < 1e-10 * design.riccati.norm());
    }
}

TEST_CASE("dlqr rejects non-PD R and validates dimensions") {
    Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
    CHECK_THROWS_AS(dlqr(one, one, one, -one), ValidationError);
    CHECK_THROWS_AS(dlqr(one, Eigen::MatrixXd::Ones(2, 1), one, one), ValidationError);
}

TEST_CASE("cheap-control limit: gain shrinks as rho grows") {
    std::mt19937_64 rng(62);
    auto tf = testutil::random_stable_discrete_tf(rng, 5, 0.032, 0.95);
    auto realization = lti::tf_to_ss_controllable(tf);
    double prev = 1e18;
    for (double rho : {1.0, 1e2, 1e4, 1e6}) {
        auto design = dlqr_for_loop(realization, rho);
        double norm = design.gain.norm();
        CHECK(norm < prev);
        prev = norm;
    }
}

TEST_CASE("gain vector length equals the realization order") {
    std::mt19937_64 rng(63);
    for (int order : {5, 7}) {
        auto tf = testutil::random_stable_discrete_tf(rng, order, 0.032, 0.9);
        auto design = dlqr_for_loop(lti::tf_to_ss_controllable(tf), 1.0);
        CHECK(design.gain.cols() == order);
        CHECK(design.gain.rows() == 1);
    }
}

// ---------------------------------------------------------------------------
// Kalman filter
// ---------------------------------------------------------------------------

namespace {

KalmanState make_state(Eigen::Index n, double qn, double rn) {
    KalmanState s;
    s.estimate = Eigen::VectorXd::Zero(n);
    s.covariance = Eigen::MatrixXd::Identity(n, n);
    s.process_noise = qn * Eigen::MatrixXd::Identity(n, n);
    s.measurement_noise = rn * Eigen::MatrixXd::Identity(1, 1);
    s.observation = Eigen::MatrixXd::Ones(1, n);
    return s;
}

}  // namespace

TEST_CASE("deterministic prediction propagates the exact state") {
    std::mt19937_64 rng(64);
    Eigen::MatrixXd A = random_stable_a(rng, 3);
    Eigen::MatrixXd B = random_matrix(rng, 3, 1);
    auto model = StateSpaceModel::discrete(A, B, Eigen::MatrixXd::Identity(3, 3),
                                           Eigen::MatrixXd::Zero(3, 1), 0.1);
    auto s = make_state(3, 0.0, 1.0);
    Eigen::VectorXd x = random_matrix(rng, 3, 1);
    s.estimate = x;
    Eigen::VectorXd u = random_matrix(rng, 1, 1);
    auto next = kalman_predict(s, model, u);
    CHECK((next.estimate - (A * x + B * u)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("identity prediction grows the covariance by Q_n each step") {
    auto model = StateSpaceModel::discrete(Eigen::MatrixXd::Identity(2, 2),
                                           Eigen::MatrixXd::Zero(2, 1),
                                           Eigen::MatrixXd::Identity(2, 2),
                                           Eigen::MatrixXd::Zero(2, 1), 0.1);
    auto s = make_state(2, 1.0, 1.0);
    auto next = kalman_predict(s, model, Eigen::VectorXd::Zero(1));
    CHECK((next.covariance - 2.0 * Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-15);
}

TEST_CASE("repeated prediction matches the direct covariance recursion") {
    std::mt19937_64 rng(65);
    Eigen::MatrixXd A = random_stable_a(rng, 4);
    auto model = StateSpaceModel::discrete(A, Eigen::MatrixXd::Zero(4, 1),
                                           Eigen::MatrixXd::Identity(4, 4),
                                           Eigen::MatrixXd::Zero(4, 1), 0.1);
    auto s = make_state(4, 0.3, 1.0);
    Eigen::MatrixXd L = s.covariance;
    for (int t = 0; t < 100; ++t) {
        s = kalman_predict(s, model, Eigen::VectorXd::Zero(1));
        L = A * L * A.transpose() + 0.3 * Eigen::MatrixXd::Identity(4, 4);
    }
    CHECK((s.covariance - L).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("an uninformative measurement leaves the estimate unchanged") {
    auto s = make_state(2, 0.0, 1e14);
    s.estimate << 1.0, -2.0;
    auto next = kalman_correct(s, Eigen::VectorXd::Constant(1, 100.0));
    CHECK((next.estimate - s.estimate).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("a perfect scalar measurement pins the estimate") {
    auto s = make_state(1, 0.0, 0.0);
    s.estimate << 3.0;
    auto next = kalman_correct(s, Eigen::VectorXd::Constant(1, 7.5));
    CHECK(next.estimate(0) == doctest::Approx(7.5));
}

TEST_CASE("scalar steady-state covariance reaches the golden-ratio fixed point") {
    auto model = StateSpaceModel::discrete(Eigen::MatrixXd::Ones(1, 1),
                                           Eigen::MatrixXd::Zero(1, 1),
                                           Eigen::MatrixXd::Ones(1, 1),
                                           Eigen::MatrixXd::Zero(1, 1), 0.1);
    auto s = make_state(1, 1.0, 1.0);
    double predicted = 0.0;
    for (int t = 0; t < 100; ++t) {
        s = kalman_predict(s, model, Eigen::VectorXd::Zero(1));
        predicted = s.covariance(0, 0);
        s = kalman_correct(s, Eigen::VectorXd::Zero(1));
    }
    CHECK(std::abs(predicted - (1.0 + std::sqrt(5.0)) / 2.0) < 1e-10);
}

TEST_CASE("covariance stays symmetric PSD over many random steps") {
    std::mt19937_64 rng(66);
    Eigen::MatrixXd A = random_stable_a(rng, 3, 0.95);
    auto model = StateSpaceModel::discrete(A, random_matrix(rng, 3, 1),
                                           random_matrix(rng, 1, 3),
                                           Eigen::MatrixXd::Zero(1, 1), 0.1);
    KalmanState s = make_state(3, 1e-4, 1e-2);
    s.observation = model.C;
    for (int t = 0; t < 10000; ++t) {
        s = kalman_predict(s, model, Eigen::VectorXd::Constant(1, testutil::uniform(rng, -1, 1)));
        s = kalman_correct(s, Eigen::VectorXd::Constant(1, testutil::uniform(rng, -1, 1)));
        CHECK((s.covariance - s.covariance.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.covariance);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("zero-noise estimation error collapses on an observable realization") {
    std::mt19937_64 rng(67);
    auto tf = testutil::random_stable_discrete_tf(rng, 4, 0.1, 0.9);
    auto model = lti::tf_to_ss_controllable(tf);
    const Eigen::Index n = model.n_states();

    KalmanState s;
    s.estimate = Eigen::VectorXd::Zero(n);
    s.covariance = Eigen::MatrixXd::Identity(n, n);
    s.process_noise = Eigen::MatrixXd::Zero(n, n);
    s.measurement_noise = 1e-12 * Eigen::MatrixXd::Identity(1, 1);
    s.observation = model.C;

    Eigen::VectorXd x = random_matrix(rng, n, 1);
    const double initial_error = (x - s.estimate).norm();
    Eigen::VectorXd u = Eigen::VectorXd::Zero(1);
    for (Eigen::Index t = 0; t < 10 * n; ++t) {
        Eigen::VectorXd z = model.C * x;
        s = kalman_predict(s, model, u);
        x = model.A * x;  // measurement precedes this step's propagation
        s = kalman_correct(s, (model.C * x));
    }
    CHECK((x - s.estimate).norm() < 1e-6 * initial_error);
}

// ---------------------------------------------------------------------------
// Closed loop
// ---------------------------------------------------------------------------

namespace {

WadcDesign small_design(std::mt19937_64& rng, double delay = 0.0) {
    auto tf = testutil::random_stable_discrete_tf(rng, 3, 0.05, 0.8);
    WadcDesign design;
    design.output_index = 0;
    design.input_index = 0;
    design.realization = lti::tf_to_ss_controllable(tf);
    design.dlqr = dlqr_for_loop(design.realization, 1.0);
    design.kalman.estimate = Eigen::VectorXd::Zero(3);
    design.kalman.covariance = Eigen::MatrixXd::Identity(3, 3);
    design.kalman.process_noise = 1e-6 * Eigen::MatrixXd::Identity(3, 3);
    design.kalman.measurement_noise = 1e-4 * Eigen::MatrixXd::Identity(1, 1);
    design.kalman.observation = design.realization.C;
    design.output_limit = 0.1;
    design.loop_delay = delay;
    return design;
}

StateSpaceModel small_plant(std::mt19937_64& rng) {
    auto tf = testutil::random_stable_discrete_tf(rng, 3, 0.05, 0.85);
    return lti::tf_to_ss_controllable(tf);
}

}  // namespace

TEST_CASE("closed loop at rest stays at rest") {
    std::mt19937_64 rng(68);
    auto design = small_design(rng);
    auto plant_model = small_plant(rng);
    plant::DisturbanceSpec spec{plant::DisturbanceKind::Pulse, "u_1", 0.5, 0.1, 0.0};
    auto trace = closed_loop_sim(plant_model, design, spec, 5.0, 1);
    CHECK(trace.data().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero gain reduces the closed loop to the open loop") {
    std::mt19937_64 rng(69);
    auto design = small_design(rng);
    auto plant_model = small_plant(rng);
    plant::DisturbanceSpec spec{plant::DisturbanceKind::Pulse, "u_1", 0.5, 0.1, 0.05};

    auto forced = design;
    forced.dlqr.gain.setZero();
    auto with_zero_gain = closed_loop_sim(plant_model, forced, spec, 5.0, 1);

    SimOptions off;
    off.controller_enabled = false;
    auto open_loop = closed_loop_sim(plant_model, design, spec, 5.0, 1, off);
    CHECK((with_zero_gain.data() - open_loop.data()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("closed loop validates the selected channels and sample time") {
    std::mt19937_64 rng(70);
    auto design = small_design(rng);
    auto plant_model = small_plant(rng);
    plant::DisturbanceSpec spec{plant::DisturbanceKind::Pulse, "u_7", 0.5, 0.1, 0.05};
    CHECK_THROWS_AS(closed_loop_sim(plant_model, design, spec, 5.0, 1), ValidationError);

    auto bad = design;
    bad.input_index = 5;
    plant::DisturbanceSpec ok{plant::DisturbanceKind::Pulse, "u_1", 0.5, 0.1, 0.05};
    CHECK_THROWS_AS(closed_loop_sim(plant_model, bad, ok, 5.0, 1), ValidationError);
}
