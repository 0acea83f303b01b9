#include "wadamp/ident.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wadamp/errors.hpp"

namespace wadamp::ident {

using lti::Polynomial;

// ---------------------------------------------------------------------------
// Model type
// ---------------------------------------------------------------------------

lti::RationalTf MimoTfModel::loop_tf(Eigen::Index output, Eigen::Index input) const {
    if (output < 0 || output >= n_outputs() || input < 0 || input >= n_inputs()) {
        throw ValidationError("MimoTfModel: loop index out of range");
    }
    return lti::RationalTf::discrete(
        numerators[static_cast<std::size_t>(output)][static_cast<std::size_t>(input)],
        denominator, sample_time);
}

double FitReport::total_error() const {
    double acc = 0.0;
    for (double e : loop_errors) acc += e * e;
    return loop_errors.empty() ? 0.0 : std::sqrt(acc / static_cast<double>(loop_errors.size()));
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

double ExperimentSet::sample_time() const {
    if (windows.empty()) throw ValidationError("ExperimentSet: no windows");
    return windows.front().sample_time();
}

ExperimentSet ExperimentSet::from_windows(std::vector<DataWindow> windows,
                                          std::vector<std::string> input_names,
                                          std::vector<std::string> output_names) {
    if (windows.empty()) throw ValidationError("ExperimentSet: need at least one window");
    if (input_names.empty() || output_names.empty()) {
        throw ValidationError("ExperimentSet: input and output channel lists required");
    }
    ExperimentSet set;
    set.input_names = std::move(input_names);
    set.output_names = std::move(output_names);

    const double Ts = windows.front().sample_time();
    for (std::size_t w = 0; w < windows.size(); ++w) {
        const DataWindow& win = windows[w];
        if (std::abs(win.sample_time() - Ts) > 1e-12 * Ts) {
            throw ValidationError("ExperimentSet: windows disagree on sample_time");
        }
        double max_energy = 0.0;
        std::vector<double> energy(set.input_names.size(), 0.0);
        for (std::size_t i = 0; i < set.input_names.size(); ++i) {
            energy[i] = win.channel(set.input_names[i]).squaredNorm();
            max_energy = std::max(max_energy, energy[i]);
        }
        for (const auto& name : set.output_names) win.channel_index(name);

        if (max_energy <= 0.0) {
            throw ValidationError("ExperimentSet: window " + std::to_string(w) +
                                  " has no excited input");
        }
        int excited = -1;
        for (std::size_t i = 0; i < energy.size(); ++i) {
            if (energy[i] > 1e-20 * max_energy) {
                if (excited >= 0) {
                    throw ValidationError(
                        "ExperimentSet: window " + std::to_string(w) +
                        " excites more than one input; the per-loop equation error requires "
                        "single-input experiments");
                }
                excited = static_cast<int>(i);
            }
        }
        set.excited_input.push_back(excited);
    }
    set.windows = std::move(windows);
    return set;
}

std::vector<LoopSpec> enumerate_loops(const ExperimentSet& data) {
    std::vector<LoopSpec> loops;
    for (std::size_t p = 0; p < data.input_names.size(); ++p) {
        std::vector<int> wins;
        for (std::size_t w = 0; w < data.windows.size(); ++w) {
            if (data.excited_input[w] == static_cast<int>(p)) wins.push_back(static_cast<int>(w));
        }
        if (wins.empty()) continue;
        for (std::size_t m = 0; m < data.output_names.size(); ++m) {
            loops.push_back({static_cast<int>(m), static_cast<int>(p), wins});
        }
    }
    return loops;
}

// ---------------------------------------------------------------------------
// Regressors and stacking
// ---------------------------------------------------------------------------

LoopBlock build_regressors(const DataWindow& window, const std::string& input,
                           const std::string& output, int order) {
    if (order < 0) throw ValidationError("build_regressors: order must be nonnegative");
    if (window.size() <= 2 * order + 1) {
        throw ValidationError("build_regressors: window too short for order " +
                              std::to_string(order));
    }
    Eigen::VectorXd u = window.channel(input);
    Eigen::VectorXd y = window.channel(output);

    const Eigen::Index k = order;
    const Eigen::Index N = window.size() - k;
    LoopBlock block;
    block.x_his.resize(N);
    block.x_num.resize(N, k + 1);
    block.x_den.resize(N, k);
    for (Eigen::Index r = 0; r < N; ++r) {
        const Eigen::Index t = r + k;
        block.x_his(r) = y(t);
        for (Eigen::Index j = 0; j <= k; ++j) block.x_num(r, j) = u(t - j);
        for (Eigen::Index j = 1; j <= k; ++j) block.x_den(r, j - 1) = -y(t - j);
    }
    return block;
}

StackedSystem stack_loops(const std::vector<LoopBlock>& blocks) {
    if (blocks.empty()) throw ValidationError("stack_loops: no loop blocks");
    const Eigen::Index k = blocks.front().x_den.cols();
    for (const auto& b : blocks) {
        if (b.x_den.cols() != k || b.x_num.cols() != k + 1 || b.x_his.size() != b.x_num.rows() ||
            b.x_den.rows() != b.x_num.rows()) {
            throw ValidationError("stack_loops: inconsistent block shapes");
        }
    }

    StackedSystem sys;
    sys.order = static_cast<int>(k);
    std::vector<Eigen::Index> column_of_block(blocks.size());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        std::pair<int, int> loop{blocks[i].output, blocks[i].input};
        auto it = std::find(sys.loops.begin(), sys.loops.end(), loop);
        if (it == sys.loops.end()) {
            sys.loops.push_back(loop);
            it = std::prev(sys.loops.end());
        }
        column_of_block[i] =
            static_cast<Eigen::Index>(std::distance(sys.loops.begin(), it)) * (k + 1);
    }

    Eigen::Index rows = 0;
    for (const auto& b : blocks) rows += b.x_his.size();
    const Eigen::Index L = static_cast<Eigen::Index>(sys.loops.size());
    sys.design = Eigen::MatrixXd::Zero(rows, L * (k + 1) + k);
    sys.target.resize(rows);

    Eigen::Index row = 0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& b = blocks[i];
        const Eigen::Index n = b.x_his.size();
        sys.design.block(row, column_of_block[i], n, k + 1) = b.x_num;
        sys.design.block(row, L * (k + 1), n, k) = b.x_den;
        sys.target.segment(row, n) = b.x_his;
        row += n;
    }
    return sys;
}

Eigen::VectorXd ls_initialize(const StackedSystem& system, double rank_tolerance,
                              double* condition_number) {
    if (system.design.rows() < system.design.cols()) {
        throw ValidationError("ls_initialize: fewer rows than unknowns");
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(system.design,
                                       Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    if (condition_number != nullptr) {
        *condition_number = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    }
    if (!(smin > rank_tolerance * smax)) {
        std::ostringstream os;
        os << "ls_initialize: stacked matrix is rank deficient; smallest singular values:";
        for (Eigen::Index i = std::max<Eigen::Index>(0, sv.size() - 3); i < sv.size(); ++i) {
            os << " " << sv(i);
        }
        throw NumericalError(os.str());
    }
    return svd.solve(system.target);
}

// ---------------------------------------------------------------------------
// Output-error criterion
// ---------------------------------------------------------------------------

namespace {

// y = (B/A) u with zero initial conditions; A monic with coefficients
// a = [a_1..a_k] after the implicit leading 1.
Eigen::VectorXd filter_iir(const Eigen::VectorXd& b, const Eigen::VectorXd& a,
                           const Eigen::VectorXd& u) {
    const Eigen::Index N = u.size();
    const Eigen::Index nb = b.size();
    const Eigen::Index k = a.size();
    Eigen::VectorXd y(N);
    for (Eigen::Index t = 0; t < N; ++t) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < nb && j <= t; ++j) acc += b(j) * u(t - j);
        for (Eigen::Index j = 1; j <= k && j <= t; ++j) acc -= a(j - 1) * y(t - j);
        y(t) = acc;
    }
    return y;
}

Eigen::VectorXd delayed(const Eigen::VectorXd& x, Eigen::Index shift) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
    if (shift < x.size()) out.tail(x.size() - shift) = x.head(x.size() - shift);
    return out;
}

struct LoopData {
    LoopSpec spec;
    std::vector<Eigen::VectorXd> inputs;    // per window of the spec
    std::vector<Eigen::VectorXd> outputs;
};

std::vector<LoopData> gather(const ExperimentSet& data) {
    std::vector<LoopData> out;
    for (const auto& spec : enumerate_loops(data)) {
        LoopData ld;
        ld.spec = spec;
        for (int w : spec.windows) {
            const DataWindow& win = data.windows[static_cast<std::size_t>(w)];
            ld.inputs.push_back(
                win.channel(data.input_names[static_cast<std::size_t>(spec.input)]));
            ld.outputs.push_back(
                win.channel(data.output_names[static_cast<std::size_t>(spec.output)]));
        }
        out.push_back(std::move(ld));
    }
    return out;
}

Eigen::Index theta_size(const std::vector<LoopData>& loops, int order) {
    return static_cast<Eigen::Index>(loops.size()) * (order + 1) + order;
}

void check_theta(const Eigen::VectorXd& theta, const std::vector<LoopData>& loops, int order) {
    if (theta.size() != theta_size(loops, order)) {
        throw ValidationError("refine: coefficient vector length does not match the loop set");
    }
}

}  // namespace

double refine_objective(const Eigen::VectorXd& theta, const ExperimentSet& data, int order) {
    auto loops = gather(data);
    check_theta(theta, loops, order);
    const Eigen::VectorXd a = theta.tail(order);
    double J = 0.0;
    for (std::size_t l = 0; l < loops.size(); ++l) {
        const Eigen::VectorXd b = theta.segment(static_cast<Eigen::Index>(l) * (order + 1),
                                                order + 1);
        for (std::size_t w = 0; w < loops[l].inputs.size(); ++w) {
            Eigen::VectorXd yhat = filter_iir(b, a, loops[l].inputs[w]);
            J += (loops[l].outputs[w] - yhat).squaredNorm();
        }
    }
    return J;
}

Eigen::VectorXd refine_gradient(const Eigen::VectorXd& theta, const ExperimentSet& data,
                                int order) {
    auto loops = gather(data);
    check_theta(theta, loops, order);
    const Eigen::VectorXd a = theta.tail(order);
    const Eigen::VectorXd unit = Eigen::VectorXd::Ones(1);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(theta.size());
    const Eigen::Index a_base = static_cast<Eigen::Index>(loops.size()) * (order + 1);

    for (std::size_t l = 0; l < loops.size(); ++l) {
        const Eigen::Index b_base = static_cast<Eigen::Index>(l) * (order + 1);
        const Eigen::VectorXd b = theta.segment(b_base, order + 1);
        for (std::size_t w = 0; w < loops[l].inputs.size(); ++w) {
            const Eigen::VectorXd& u = loops[l].inputs[w];
            Eigen::VectorXd yhat = filter_iir(b, a, u);
            Eigen::VectorXd r = loops[l].outputs[w] - yhat;
            // Sensitivities: dyhat/db_j = z^-j (u/A), dyhat/da_i = -z^-i (yhat/A).
            Eigen::VectorXd phi = filter_iir(unit, a, u);
            Eigen::VectorXd psi = filter_iir(unit, a, yhat);
            for (int j = 0; j <= order; ++j) {
                grad(b_base + j) += -2.0 * r.dot(delayed(phi, j));
            }
            for (int i = 1; i <= order; ++i) {
                grad(a_base + i - 1) += 2.0 * r.dot(delayed(psi, i));
            }
        }
    }
    return grad;
}

// ---------------------------------------------------------------------------
// Refinement
// ---------------------------------------------------------------------------

namespace {

// Radially project denominator roots into |z| <= 1 - margin; returns true if
// anything moved.
bool project_stable(Eigen::VectorXd& a, double margin) {
    const int k = static_cast<int>(a.size());
    if (k == 0) return false;
    std::vector<double> coeffs(static_cast<std::size_t>(k) + 1, 1.0);
    for (int i = 0; i < k; ++i) coeffs[static_cast<std::size_t>(i) + 1] = a(i);
    auto roots = lti::poly_roots(Polynomial(coeffs));
    bool moved = false;
    const double limit = 1.0 - margin;
    for (auto& z : roots) {
        const double mag = std::abs(z);
        if (mag > limit) {
            z *= limit / mag;
            moved = true;
        }
    }
    if (!moved) return false;
    Polynomial re = Polynomial::from_roots(roots);
    for (int i = 0; i < k; ++i) a(i) = re[static_cast<std::size_t>(i) + 1];
    return true;
}

}  // namespace

std::pair<MimoTfModel, FitReport> refine(const Eigen::VectorXd& init, const ExperimentSet& data,
                                         int order, const IdentOptions& opts) {
    auto loops = gather(data);
    check_theta(init, loops, order);

    FitReport report;
    Eigen::VectorXd theta = init;
    {
        Eigen::VectorXd a = theta.tail(order);
        if (project_stable(a, opts.stability_margin)) {
            theta.tail(order) = a;
            report.warnings.push_back(
                "initial denominator was outside the stability margin; roots projected");
        }
    }

    double J = refine_objective(theta, data, order);
    report.objective_initial = J;

    const Eigen::Index a_base = static_cast<Eigen::Index>(loops.size()) * (order + 1);
    const Eigen::VectorXd unit = Eigen::VectorXd::Ones(1);
    double lambda = 1e-4;
    int iter = 0;

    for (; iter < opts.max_iterations; ++iter) {
        // Assemble the residual Jacobian via the sensitivity filters.
        Eigen::Index rows = 0;
        for (const auto& l : loops) {
            for (const auto& u : l.inputs) rows += u.size();
        }
        Eigen::MatrixXd Jm = Eigen::MatrixXd::Zero(rows, theta.size());
        Eigen::VectorXd r(rows);
        const Eigen::VectorXd a = theta.tail(order);
        Eigen::Index row = 0;
        for (std::size_t l = 0; l < loops.size(); ++l) {
            const Eigen::Index b_base = static_cast<Eigen::Index>(l) * (order + 1);
            const Eigen::VectorXd b = theta.segment(b_base, order + 1);
            for (std::size_t w = 0; w < loops[l].inputs.size(); ++w) {
                const Eigen::VectorXd& u = loops[l].inputs[w];
                const Eigen::Index n = u.size();
                Eigen::VectorXd yhat = filter_iir(b, a, u);
                r.segment(row, n) = loops[l].outputs[w] - yhat;
                Eigen::VectorXd phi = filter_iir(unit, a, u);
                Eigen::VectorXd psi = filter_iir(unit, a, yhat);
                for (int j = 0; j <= order; ++j) {
                    Jm.block(row, b_base + j, n, 1) = -delayed(phi, j);
                }
                for (int i = 1; i <= order; ++i) {
                    Jm.block(row, a_base + i - 1, n, 1) = delayed(psi, i);
                }
                row += n;
            }
        }

        Eigen::MatrixXd H = Jm.transpose() * Jm;
        Eigen::VectorXd g = Jm.transpose() * r;
        Eigen::VectorXd diag = H.diagonal().cwiseMax(1e-12);

        bool accepted = false;
        for (int attempt = 0; attempt < 40; ++attempt) {
            Eigen::MatrixXd Hl = H;
            Hl.diagonal() += lambda * diag;
            Eigen::VectorXd delta = Hl.ldlt().solve(-g);
            Eigen::VectorXd candidate = theta + delta;
            Eigen::VectorXd ca = candidate.tail(order);
            project_stable(ca, opts.stability_margin);
            candidate.tail(order) = ca;
            double Jc = refine_objective(candidate, data, order);
            if (Jc < J) {
                const double drop = J - Jc;
                theta = candidate;
                J = Jc;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (drop <= opts.objective_tolerance * std::max(J, 1e-300)) {
                    report.converged = true;
                }
                break;
            }
            lambda *= 4.0;
            if (lambda > 1e14) break;
        }
        if (report.converged || !accepted) {
            if (!accepted) report.converged = true;  // no descent direction left
            ++iter;
            break;
        }
    }

    report.iterations = iter;
    report.objective_final = J;

    // Assemble the model; loops never excited get zero numerators.
    MimoTfModel model;
    model.sample_time = data.sample_time();
    model.order = order;
    model.input_names = data.input_names;
    model.output_names = data.output_names;
    std::vector<double> den(static_cast<std::size_t>(order) + 1, 1.0);
    for (int i = 0; i < order; ++i) den[static_cast<std::size_t>(i) + 1] = theta(a_base + i);
    model.denominator = Polynomial(den);
    model.numerators.assign(
        data.output_names.size(),
        std::vector<Polynomial>(data.input_names.size(),
                                pad_trailing(Polynomial::zero(), den.size())));

    std::vector<bool> input_used(data.input_names.size(), false);
    for (std::size_t l = 0; l < loops.size(); ++l) {
        const auto& spec = loops[l].spec;
        input_used[static_cast<std::size_t>(spec.input)] = true;
        std::vector<double> num(static_cast<std::size_t>(order) + 1);
        for (int j = 0; j <= order; ++j) {
            num[static_cast<std::size_t>(j)] =
                theta(static_cast<Eigen::Index>(l) * (order + 1) + j);
        }
        model.numerators[static_cast<std::size_t>(spec.output)]
                        [static_cast<std::size_t>(spec.input)] = Polynomial(num);

        // Normalized output error over the loop's windows.
        double err = 0.0, energy = 0.0;
        const Eigen::VectorXd a = theta.tail(order);
        const Eigen::VectorXd b =
            theta.segment(static_cast<Eigen::Index>(l) * (order + 1), order + 1);
        for (std::size_t w = 0; w < loops[l].inputs.size(); ++w) {
            Eigen::VectorXd yhat = filter_iir(b, a, loops[l].inputs[w]);
            err += (loops[l].outputs[w] - yhat).squaredNorm();
            energy += loops[l].outputs[w].squaredNorm();
        }
        report.loops.push_back({spec.output, spec.input});
        report.loop_errors.push_back(energy > 0.0 ? std::sqrt(err / energy) : std::sqrt(err));
    }
    for (std::size_t p = 0; p < input_used.size(); ++p) {
        if (!input_used[p]) {
            report.warnings.push_back("input '" + data.input_names[p] +
                                      "' carries no energy in any window; its loops were "
                                      "excluded and their numerators set to zero");
        }
    }
    return {std::move(model), std::move(report)};
}

std::pair<MimoTfModel, FitReport> identify(const ExperimentSet& data, int order,
                                           const IdentOptions& opts) {
    std::vector<LoopBlock> blocks;
    for (const auto& spec : enumerate_loops(data)) {
        for (int w : spec.windows) {
            blocks.push_back(build_regressors(
                data.windows[static_cast<std::size_t>(w)],
                data.input_names[static_cast<std::size_t>(spec.input)],
                data.output_names[static_cast<std::size_t>(spec.output)], order));
            blocks.back().output = spec.output;
            blocks.back().input = spec.input;
        }
    }
    StackedSystem sys = stack_loops(blocks);
    double condition = 0.0;
    Eigen::VectorXd init;
    std::string rank_warning;
    try {
        init = ls_initialize(sys, opts.rank_tolerance, &condition);
    } catch (const NumericalError&) {
        // Over-parameterized fits on clean data admit a family of exact
        // solutions (a common factor is free). Fall back to the minimum-norm
        // least-squares solution and record it.
        Eigen::BDCSVD<Eigen::MatrixXd> svd(sys.design,
                                           Eigen::ComputeThinU | Eigen::ComputeThinV);
        svd.setThreshold(opts.rank_tolerance);
        init = svd.solve(sys.target);
        condition = std::numeric_limits<double>::infinity();
        rank_warning =
            "stacked LS matrix is rank deficient; used the minimum-norm solution "
            "(model order likely exceeds the data's dynamic order)";
    }
    auto result = refine(init, data, order, opts);
    result.second.condition_number = condition;
    if (!rank_warning.empty()) result.second.warnings.push_back(rank_warning);
    return result;
}

OrderSelection select_order(const ExperimentSet& data, std::vector<int> candidates,
                            const IdentOptions& opts) {
    if (candidates.empty()) throw ValidationError("select_order: empty candidate list");
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    OrderSelection sel;
    std::vector<double> errors;
    for (int k : candidates) {
        auto [model, report] = identify(data, k, opts);
        errors.push_back(report.total_error());
        sel.reports.push_back({k, std::move(report)});
    }
    sel.order = candidates.back();
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const double prev = errors[i - 1];
        const double improvement = prev > 1e-300 ? (prev - errors[i]) / prev : 0.0;
        if (improvement < 0.10) {
            sel.order = candidates[i - 1];
            break;
        }
    }
    return sel;
}

}  // namespace wadamp::ident
