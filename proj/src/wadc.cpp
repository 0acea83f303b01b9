#include "wadamp/wadc.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "wadamp/errors.hpp"

namespace wadamp::wadc {

using lti::StateSpaceModel;

double spectral_radius(const Eigen::MatrixXd& A) {
    if (A.rows() == 0) return 0.0;
    return Eigen::EigenSolver<Eigen::MatrixXd>(A, false).eigenvalues().cwiseAbs().maxCoeff();
}

DlqrDesign dlqr(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                const Eigen::MatrixXd& R, double tol, int max_iters) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || B.rows() != n) throw ValidationError("dlqr: dimension mismatch");
    if (Q.rows() != n || Q.cols() != n) throw ValidationError("dlqr: Q must be n x n");
    if (R.rows() != B.cols() || R.cols() != B.cols()) {
        throw ValidationError("dlqr: R must match the input count");
    }
    Eigen::LLT<Eigen::MatrixXd> rllt(R);
    if (rllt.info() != Eigen::Success) {
        throw ValidationError("dlqr: R must be positive definite");
    }

    DlqrDesign design;
    design.Q = Q;
    design.R = R;
    Eigen::MatrixXd P = Q;
    double residual = 0.0;
    int iter = 0;
    for (; iter < max_iters; ++iter) {
        Eigen::MatrixXd BtPA = B.transpose() * P * A;
        Eigen::MatrixXd G = R + B.transpose() * P * B;
        Eigen::MatrixXd K = G.ldlt().solve(BtPA);
        Eigen::MatrixXd Pn = Q + A.transpose() * P * A - BtPA.transpose() * K;
        Pn = 0.5 * (Pn + Pn.transpose());
        residual = (Pn - P).norm() / std::max(P.norm(), 1e-300);
        P = Pn;
        if (residual < tol) break;
    }
    if (residual >= tol && n > 0) {
        std::ostringstream os;
        os << "dlqr: Riccati iteration did not converge in " << max_iters
           << " iterations (last residual " << residual << ")";
        throw NumericalError(os.str());
    }
    design.riccati = P;
    design.gain = (R + B.transpose() * P * B).ldlt().solve(B.transpose() * P * A);
    design.iterations = iter + 1;
    design.residual = residual;

    if (spectral_radius(A - B * design.gain) >= 1.0) {
        throw NumericalError("dlqr: closed loop is not stable; (A, B) likely not stabilizable");
    }
    return design;
}

DlqrDesign dlqr_for_loop(const StateSpaceModel& realization, double rho, double tol,
                         int max_iters) {
    if (rho <= 0.0) throw ValidationError("dlqr_for_loop: rho must be positive");
    if (!realization.is_discrete()) {
        throw ValidationError("dlqr_for_loop: realization must be discrete");
    }
    Eigen::MatrixXd Q = realization.C.transpose() * realization.C;
    Eigen::MatrixXd R =
        rho * Eigen::MatrixXd::Identity(realization.n_inputs(), realization.n_inputs());
    DlqrDesign design = dlqr(realization.A, realization.B, Q, R, tol, max_iters);
    design.rho = rho;
    return design;
}

KalmanState kalman_predict(const KalmanState& state, const StateSpaceModel& model,
                           const Eigen::VectorXd& u) {
    if (state.estimate.size() != model.n_states() || u.size() != model.n_inputs()) {
        throw ValidationError("kalman_predict: dimension mismatch");
    }
    KalmanState next = state;
    next.estimate = model.A * state.estimate + model.B * u;
    Eigen::MatrixXd L = model.A * state.covariance * model.A.transpose() + state.process_noise;
    next.covariance = 0.5 * (L + L.transpose());
    return next;
}

KalmanState kalman_correct(const KalmanState& state, const Eigen::VectorXd& z) {
    const Eigen::MatrixXd& H = state.observation;
    if (z.size() != H.rows() || state.estimate.size() != H.cols()) {
        throw ValidationError("kalman_correct: dimension mismatch");
    }
    Eigen::MatrixXd S = H * state.covariance * H.transpose() + state.measurement_noise;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
    if (!lu.isInvertible()) {
        throw NumericalError("kalman_correct: innovation covariance is singular");
    }
    Eigen::MatrixXd G = state.covariance * H.transpose() * lu.inverse();

    KalmanState next = state;
    next.estimate = state.estimate + G * (z - H * state.estimate);
    const Eigen::Index n = state.estimate.size();
    Eigen::MatrixXd L = (Eigen::MatrixXd::Identity(n, n) - G * H) * state.covariance;
    next.covariance = 0.5 * (L + L.transpose());
    return next;
}

DataWindow closed_loop_sim(const StateSpaceModel& plant_model, const WadcDesign& design,
                           const plant::DisturbanceSpec& disturbance, double horizon,
                           std::uint64_t seed, const SimOptions& opts) {
    disturbance.validate();
    const double Ts = *design.realization.sample_time;
    StateSpaceModel sys =
        plant_model.is_discrete() ? plant_model : lti::tustin_c2d_ss(plant_model, Ts);
    if (std::abs(*sys.sample_time - Ts) > 1e-12 * Ts) {
        throw ValidationError("closed_loop_sim: plant and design sample times differ");
    }
    if (design.output_index < 0 || design.output_index >= sys.n_outputs() ||
        design.input_index < 0 || design.input_index >= sys.n_inputs()) {
        throw ValidationError("closed_loop_sim: selected loop does not exist on the plant");
    }

    std::vector<std::string> out_names = opts.output_names;
    if (out_names.empty()) {
        for (Eigen::Index i = 0; i < sys.n_outputs(); ++i) {
            out_names.push_back("y_" + std::to_string(i + 1));
        }
    }
    std::vector<std::string> state_names = opts.state_names;
    if (state_names.empty()) {
        for (Eigen::Index i = 0; i < sys.n_states(); ++i) {
            state_names.push_back("x_" + std::to_string(i + 1));
        }
    }
    if (static_cast<Eigen::Index>(out_names.size()) != sys.n_outputs() ||
        static_cast<Eigen::Index>(state_names.size()) != sys.n_states()) {
        throw ValidationError("closed_loop_sim: label count mismatch");
    }

    std::vector<std::string> in_names = opts.input_names;
    if (in_names.empty()) {
        for (Eigen::Index i = 0; i < sys.n_inputs(); ++i) {
            in_names.push_back("u_" + std::to_string(i + 1));
        }
    }
    Eigen::Index dist_input = -1;
    for (std::size_t i = 0; i < in_names.size(); ++i) {
        if (in_names[i] == disturbance.input) dist_input = static_cast<Eigen::Index>(i);
    }
    if (dist_input < 0) {
        throw ValidationError("closed_loop_sim: unknown disturbance input '" + disturbance.input +
                              "'");
    }
    if (horizon < disturbance.start + disturbance.duration) {
        throw ValidationError("closed_loop_sim: horizon shorter than the disturbance");
    }

    const Eigen::Index N = static_cast<Eigen::Index>(std::floor(horizon / Ts)) + 1;
    const Eigen::Index d = plant::delay_samples(design.loop_delay, Ts);

    std::mt19937_64 rng(seed ^ 0xa0761d6478bd642full);
    std::normal_distribution<double> gauss(0.0, 1.0);

    KalmanState kf = design.kalman;
    kf.estimate = Eigen::VectorXd::Zero(design.realization.n_states());

    Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.n_states());
    Eigen::VectorXd u_prev = Eigen::VectorXd::Zero(sys.n_inputs());
    double u_ctrl_prev = 0.0;
    std::vector<double> meas_queue;  // measurement history for the delay block
    meas_queue.reserve(static_cast<std::size_t>(N));

    Eigen::MatrixXd trace(N, sys.n_outputs() + sys.n_states() + 1);

    for (Eigen::Index t = 0; t < N; ++t) {
        const double time = static_cast<double>(t) * Ts;

        // Measurement available at this instant: taken before the new input
        // is applied, so feedthrough uses the previous input.
        Eigen::VectorXd y_meas = sys.C * x + sys.D * u_prev;
        double z = y_meas(design.output_index);
        if (opts.measurement_noise_std > 0.0) z += opts.measurement_noise_std * gauss(rng);
        meas_queue.push_back(z);

        double u_ctrl = 0.0;
        if (opts.controller_enabled) {
            const Eigen::Index idx = t - d;
            const double z_delayed =
                idx >= 0 ? meas_queue[static_cast<std::size_t>(idx)] : 0.0;
            kf = kalman_predict(kf, design.realization,
                                Eigen::VectorXd::Constant(1, u_ctrl_prev));
            kf = kalman_correct(kf, Eigen::VectorXd::Constant(1, z_delayed));
            u_ctrl = -(design.dlqr.gain * kf.estimate)(0);
            if (design.output_limit) {
                u_ctrl = std::clamp(u_ctrl, -*design.output_limit, *design.output_limit);
            }
        }

        Eigen::VectorXd u = Eigen::VectorXd::Zero(sys.n_inputs());
        const double t_end = disturbance.start + disturbance.duration;
        switch (disturbance.kind) {
            case plant::DisturbanceKind::Pulse:
                if (time >= disturbance.start && time < t_end) u(dist_input) = disturbance.amplitude;
                break;
            case plant::DisturbanceKind::Step:
                if (time >= disturbance.start) u(dist_input) = disturbance.amplitude;
                break;
            case plant::DisturbanceKind::FilteredNoise:
                throw ValidationError(
                    "closed_loop_sim: filtered-noise disturbances are for identification runs");
        }
        u(design.input_index) += u_ctrl;

        trace.block(t, 0, 1, sys.n_outputs()) = (sys.C * x + sys.D * u).transpose();
        trace.block(t, sys.n_outputs(), 1, sys.n_states()) = x.transpose();
        trace(t, sys.n_outputs() + sys.n_states()) = u_ctrl;

        x = sys.A * x + sys.B * u;
        u_prev = u;
        u_ctrl_prev = u_ctrl;
    }

    std::vector<std::string> names = out_names;
    names.insert(names.end(), state_names.begin(), state_names.end());
    names.push_back("u_wadc");
    return DataWindow(Ts, 0.0, names, trace);
}

}  // namespace wadamp::wadc
