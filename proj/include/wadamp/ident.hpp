#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "wadamp/data_window.hpp"
#include "wadamp/lti.hpp"
#include "wadamp/polynomial.hpp"

namespace wadamp::ident {

/// Discrete MIMO transfer-function model in which every input/output loop
/// shares one denominator polynomial and carries its own numerator.
struct MimoTfModel {
    double sample_time = 0.0;
    int order = 0;                                       // k
    lti::Polynomial denominator = lti::Polynomial{{1.0}};  // [1, a1, ..., ak]
    std::vector<std::vector<lti::Polynomial>> numerators;  // [output][input], k+1 coeffs
    std::vector<std::string> output_names;
    std::vector<std::string> input_names;

    Eigen::Index n_outputs() const { return static_cast<Eigen::Index>(output_names.size()); }
    Eigen::Index n_inputs() const { return static_cast<Eigen::Index>(input_names.size()); }

    /// The (output m, input p) loop as a discrete rational function; the
    /// denominator coefficients are shared verbatim across all loops.
    lti::RationalTf loop_tf(Eigen::Index output, Eigen::Index input) const;
};

/// Regressor blocks of one loop over one window: row t holds the output
/// sample, the k+1 input lags, and the k negated output lags of the
/// equation-error form dP(t) = sum_j b_j u(t-j) - sum_j a_j dP(t-j).
struct LoopBlock {
    int output = 0;
    int input = 0;
    Eigen::VectorXd x_his;   // N
    Eigen::MatrixXd x_num;   // N x (k+1)
    Eigen::MatrixXd x_den;   // N x k
};

/// Stacked linear system over all loops: unknowns [b^1; ...; b^L; a], with
/// numerator columns block-diagonal per loop and denominator columns shared.
struct StackedSystem {
    int order = 0;
    std::vector<std::pair<int, int>> loops;  // unique (output, input) in column order
    Eigen::MatrixXd design;
    Eigen::VectorXd target;

    Eigen::Index unknown_count() const { return design.cols(); }
};

struct FitReport {
    std::vector<std::pair<int, int>> loops;
    std::vector<double> loop_errors;  // normalized output error per loop
    double condition_number = 0.0;    // of the stacked LS matrix
    int iterations = 0;
    bool converged = false;
    double objective_initial = 0.0;
    double objective_final = 0.0;
    std::vector<std::string> warnings;

    double total_error() const;  // root of final objective over output energy
};

struct IdentOptions {
    int max_iterations = 200;
    double objective_tolerance = 1e-10;  // relative objective decrease
    double stability_margin = 1e-3;      // poles kept inside radius 1 - margin
    double rank_tolerance = 1e-10;
};

/// One identification experiment per window; exactly one input channel may
/// carry energy in each window so the per-loop equation error is valid.
struct ExperimentSet {
    std::vector<std::string> input_names;
    std::vector<std::string> output_names;
    std::vector<DataWindow> windows;
    std::vector<int> excited_input;  // per window; index into input_names

    double sample_time() const;

    /// Classifies the excited input of every window by channel energy and
    /// validates the single-input-per-experiment protocol.
    static ExperimentSet from_windows(std::vector<DataWindow> windows,
                                      std::vector<std::string> input_names,
                                      std::vector<std::string> output_names);
};

/// Loops that can be estimated from the data, in the deterministic order the
/// coefficient vector uses: windows in input order, outputs within.
struct LoopSpec {
    int output = 0;
    int input = 0;
    std::vector<int> windows;  // experiments exciting this loop's input
};
std::vector<LoopSpec> enumerate_loops(const ExperimentSet& data);

LoopBlock build_regressors(const DataWindow& window, const std::string& input,
                           const std::string& output, int order);

StackedSystem stack_loops(const std::vector<LoopBlock>& blocks);

/// Least-squares initialization (equation error). Fails with the smallest
/// singular values in the message if the stacked matrix is rank deficient.
Eigen::VectorXd ls_initialize(const StackedSystem& system, double rank_tolerance = 1e-10,
                              double* condition_number = nullptr);

/// Output-error objective sum over loops of |y - (B/A) u|^2 at the packed
/// coefficient vector [b-blocks; a], plus its analytic gradient (computed via
/// sensitivity filtering; exposed separately for verification).
double refine_objective(const Eigen::VectorXd& theta, const ExperimentSet& data, int order);
Eigen::VectorXd refine_gradient(const Eigen::VectorXd& theta, const ExperimentSet& data,
                                int order);

/// Levenberg-Marquardt refinement of the output-error criterion subject to
/// max |denominator root| <= 1 - stability_margin (enforced by radial
/// projection). Non-convergence returns the best iterate flagged
/// converged = false.
std::pair<MimoTfModel, FitReport> refine(const Eigen::VectorXd& init, const ExperimentSet& data,
                                         int order, const IdentOptions& opts = {});

/// build_regressors + stack_loops + ls_initialize + refine in one call.
std::pair<MimoTfModel, FitReport> identify(const ExperimentSet& data, int order,
                                           const IdentOptions& opts = {});

struct OrderSelection {
    int order = 0;
    std::vector<std::pair<int, FitReport>> reports;
};

/// Elbow rule: the smallest candidate after which the output error improves
/// by less than 10%.
OrderSelection select_order(const ExperimentSet& data, std::vector<int> candidates,
                            const IdentOptions& opts = {});

}  // namespace wadamp::ident
