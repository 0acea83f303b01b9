#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wadamp/data_window.hpp"
#include "wadamp/lti.hpp"
#include "wadamp/plant.hpp"

namespace wadamp::wadc {

/// State-feedback design from the discrete algebraic Riccati equation, solved
/// by fixed-point iteration of the backward recursion from P = Q.
struct DlqrDesign {
    Eigen::MatrixXd gain;      // K (n_u x n)
    Eigen::MatrixXd riccati;   // P, symmetric PSD
    Eigen::MatrixXd Q;
    Eigen::MatrixXd R;
    double rho = 0.0;          // set by dlqr_for_loop
    int iterations = 0;
    double residual = 0.0;     // |P_new - P| / |P| at convergence
};

struct KalmanState {
    Eigen::VectorXd estimate;           // xhat
    Eigen::MatrixXd covariance;         // L, kept symmetric
    Eigen::MatrixXd process_noise;      // Q_n
    Eigen::MatrixXd measurement_noise;  // R_n
    Eigen::MatrixXd observation;        // H
};

/// Complete wide-area damping controller: selected plant loop, identified
/// loop realization, DLQR gain, Kalman template, saturation and loop delay.
struct WadcDesign {
    Eigen::Index output_index = 0;  // measured plant output (m)
    Eigen::Index input_index = 0;   // actuated plant input (p)
    lti::StateSpaceModel realization{Eigen::MatrixXd(), Eigen::MatrixXd(), Eigen::MatrixXd(),
                                     Eigen::MatrixXd(), std::nullopt};
    DlqrDesign dlqr;
    KalmanState kalman;             // estimate is reset per run
    std::optional<double> output_limit;  // |u_wadc| bound, pu
    double loop_delay = 0.0;        // s
};

double spectral_radius(const Eigen::MatrixXd& A);

/// Riccati fixed point from P = Q; converges when |P_new - P| < tol |P|.
/// The closed loop A - BK is verified stable before returning.
DlqrDesign dlqr(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                const Eigen::MatrixXd& R, double tol = 1e-12, int max_iters = 10000);

/// DLQR with the loop weighting Q = C^T C, R = rho I.
DlqrDesign dlqr_for_loop(const lti::StateSpaceModel& realization, double rho,
                         double tol = 1e-12, int max_iters = 10000);

KalmanState kalman_predict(const KalmanState& state, const lti::StateSpaceModel& model,
                           const Eigen::VectorXd& u);
KalmanState kalman_correct(const KalmanState& state, const Eigen::VectorXd& z);

struct SimOptions {
    double measurement_noise_std = 0.0;
    bool controller_enabled = true;
    std::vector<std::string> input_names;   // defaults u_i; resolves the disturbance target
    std::vector<std::string> output_names;  // defaults y_i
    std::vector<std::string> state_names;   // defaults x_i
};

/// Closed-loop run: measure the selected output, delay it, estimate the loop
/// state with the Kalman filter, apply u = -K xhat (saturated) to the
/// selected plant input on top of the disturbance. Returns all outputs,
/// states and the control signal as one trace.
DataWindow closed_loop_sim(const lti::StateSpaceModel& plant, const WadcDesign& design,
                           const plant::DisturbanceSpec& disturbance, double horizon,
                           std::uint64_t seed, const SimOptions& opts = {});

}  // namespace wadamp::wadc
