#include <doctest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"
#include "wadamp/errors.hpp"
#include "wadamp/modal.hpp"

using namespace wadamp;
using namespace wadamp::modal;
using lti::Complex;
using lti::Polynomial;

namespace {

constexpr double kTs = 0.032;

ident::MimoTfModel model_from_poles(const std::vector<Complex>& poles,
                                    const std::vector<std::vector<Polynomial>>& numerators,
                                    std::vector<std::string> outs, std::vector<std::string> ins) {
    ident::MimoTfModel model;
    model.sample_time = kTs;
    model.order = static_cast<int>(poles.size());
    model.denominator = Polynomial::from_roots(poles);
    model.numerators = numerators;
    model.output_names = std::move(outs);
    model.input_names = std::move(ins);
    for (auto& row : model.numerators) {
        for (auto& num : row) num = pad_trailing(num, model.denominator.size());
    }
    return model;
}

std::vector<Complex> printed_fifth_order_poles() {
    return {{0.9835, 0.1257}, {0.9835, -0.1257}, {0.9300, 0.2484}, {0.9300, -0.2484},
            {0.9961, 0.0}};
}

}  // namespace

// ---------------------------------------------------------------------------
// Mode extraction
// ---------------------------------------------------------------------------

TEST_CASE("extract_modes converts the printed fifth-order model") {
    auto model = model_from_poles(printed_fifth_order_poles(),
                                  {{Polynomial({1.0})}}, {"dP_1"}, {"u_4"});
    auto modes = extract_modes(model);
    REQUIRE(modes.size() == 3);  // two pairs + one real pole

    // Sorted by frequency: the real pole first.
    CHECK(modes[0].frequency_hz == doctest::Approx(0.0));
    CHECK(modes[0].continuous_pole.real() == doctest::Approx(-0.122).epsilon(0.01));

    // Inter-area pair: the paper reports 0.6362 Hz for this mode.
    CHECK(std::abs(modes[1].frequency_hz - 0.6362) <= 0.01);
    CHECK(modes[1].damping_ratio == doctest::Approx(0.067).epsilon(0.03));

    CHECK(modes[2].frequency_hz > modes[1].frequency_hz);
}

TEST_CASE("a pole on the unit circle maps to a lossless continuous mode") {
    const double theta = 0.4;
    Complex z = std::polar(1.0, theta);
    Complex s = lti::tustin_pole_d2c(z, kTs);
    CHECK(std::abs(s.real()) < 1e-12);
    CHECK(s.imag() > 0.0);
}

TEST_CASE("extract_modes rejects a pole at z = -1") {
    auto model = model_from_poles({{-1.0, 0.0}, {0.5, 0.0}}, {{Polynomial({1.0})}},
                                  {"y"}, {"u"});
    CHECK_THROWS_AS(extract_modes(model), NumericalError);
}

// ---------------------------------------------------------------------------
// Inter-area mode selection
// ---------------------------------------------------------------------------

TEST_CASE("a single in-band mode is returned regardless of damping") {
    // 0.6 Hz pair (in band) and 2 Hz pair (out of band).
    Complex z1 = lti::tustin_pole_c2d(Complex(-0.5, 2.0 * M_PI * 0.6), kTs);
    Complex z2 = lti::tustin_pole_c2d(Complex(-0.1, 2.0 * M_PI * 2.0), kTs);
    auto model = model_from_poles({z1, std::conj(z1), z2, std::conj(z2)},
                                  {{Polynomial({0.2, 0.1})}}, {"y"}, {"u"});
    auto modes = extract_modes(model);
    auto mode = inter_area_mode(model, modes);
    CHECK(mode.frequency_hz == doctest::Approx(0.6).epsilon(0.01));
}

TEST_CASE("no in-band mode is an error") {
    Complex z1 = lti::tustin_pole_c2d(Complex(-0.05, 2.0 * M_PI * 0.05), kTs);
    Complex z2 = lti::tustin_pole_c2d(Complex(-0.1, 2.0 * M_PI * 1.5), kTs);
    auto model = model_from_poles({z1, std::conj(z1), z2, std::conj(z2)},
                                  {{Polynomial({0.2, 0.1})}}, {"y"}, {"u"});
    auto modes = extract_modes(model);
    CHECK_THROWS_AS(inter_area_mode(model, modes), ValidationError);
}

TEST_CASE("dominance follows aggregate residue energy") {
    // Two in-band pairs; numerator places far more energy on the 0.7 Hz one.
    Complex za = lti::tustin_pole_c2d(Complex(-0.2, 2.0 * M_PI * 0.3), kTs);
    Complex zb = lti::tustin_pole_c2d(Complex(-0.2, 2.0 * M_PI * 0.7), kTs);
    Polynomial den_b = Polynomial::from_roots({zb, std::conj(zb)});
    // Loop numerator proportional to (z - za)(z - conj za) kills the 0.3 Hz
    // residue, leaving the 0.7 Hz pair dominant.
    Polynomial num = 0.5 * Polynomial::from_roots({za, std::conj(za)});
    auto model = model_from_poles({za, std::conj(za), zb, std::conj(zb)}, {{num}}, {"y"}, {"u"});
    auto mode = inter_area_mode(model, extract_modes(model));
    CHECK(mode.frequency_hz == doctest::Approx(0.7).epsilon(0.02));
}

// ---------------------------------------------------------------------------
// Residue table
// ---------------------------------------------------------------------------

TEST_CASE("residue table recovers constructed residues before normalization") {
    // Shared poles; per-loop continuous residues chosen up front.
    const Complex p(-0.26881, 3.9774);
    const double p3 = -0.12207;
    std::vector<std::vector<Complex>> residues{{{1859.7, -209.77}, {120.0, 35.0}},
                                               {{-440.0, 90.0}, {2100.0, -600.0}}};
    std::vector<std::vector<double>> real_residues{{-2804.3, 310.0}, {150.0, -980.0}};

    Polynomial den = Polynomial::from_roots({p, std::conj(p), {p3, 0.0}});
    std::vector<std::vector<Polynomial>> nums(2);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const Complex r = residues[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            // num = r (s - conj p)(s - p3) + conj ... + r3 (s - p)(s - conj p)
            Polynomial q1 = Polynomial::from_roots({std::conj(p), {p3, 0.0}});
            Polynomial q1i = Polynomial::from_roots({std::conj(p), {p3, 0.0}});
            // Assemble via complex arithmetic on coefficients.
            std::vector<Complex> conj_pair_roots{std::conj(p), {p3, 0.0}};
            std::vector<Complex> pair_roots{p, {p3, 0.0}};
            auto expand = [](const std::vector<Complex>& roots) {
                std::vector<Complex> c{1.0};
                for (const auto& root : roots) {
                    c.push_back(0.0);
                    for (std::size_t t = c.size() - 1; t > 0; --t) c[t] -= root * c[t - 1];
                }
                return c;
            };
            auto c1 = expand(conj_pair_roots);
            auto c2 = expand(pair_roots);
            auto c3 = expand({p, std::conj(p)});
            const double r3 =
                real_residues[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            std::vector<double> num(3, 0.0);
            for (int t = 0; t < 3; ++t) {
                Complex v = r * c1[static_cast<std::size_t>(t)] +
                            std::conj(r) * c2[static_cast<std::size_t>(t)] +
                            r3 * c3[static_cast<std::size_t>(t)];
                num[static_cast<std::size_t>(t)] = v.real();
            }
            nums[static_cast<std::size_t>(i)].push_back(Polynomial(num));
        }
    }

    // Discretize every loop with the shared denominator.
    ident::MimoTfModel model;
    model.sample_time = kTs;
    model.order = 3;
    model.output_names = {"dP_1", "dP_2"};
    model.input_names = {"u_1", "u_2"};
    auto d_first = lti::tustin_c2d(lti::RationalTf::continuous(nums[0][0], den), kTs);
    model.denominator = d_first.den;
    model.numerators.assign(2, {});
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            auto d = lti::tustin_c2d(
                lti::RationalTf::continuous(nums[static_cast<std::size_t>(i)]
                                                 [static_cast<std::size_t>(j)], den), kTs);
            model.numerators[static_cast<std::size_t>(i)].push_back(d.num);
        }
    }

    auto modes = extract_modes(model);
    REQUIRE(modes.size() == 2);
    const ModeInfo& pair_mode = modes[1];  // oscillatory mode sorts after the real pole
    auto table = residue_table(model, pair_mode);

    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const Complex want =
                residues[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            CHECK(std::abs(table.raw(i, j) - want) / std::abs(want) < 1e-6);
        }
    }
    CHECK(table.normalized.maxCoeff() == 1.0);
    CHECK(table.argmax_output == 1);  // largest constructed residue is loop (2,2)
    CHECK(table.argmax_input == 1);
}

TEST_CASE("single-loop table self-normalizes to one") {
    auto model = model_from_poles(printed_fifth_order_poles(),
                                  {{Polynomial({0.0, 0.1, -0.05, 0.2, 0.01, -0.02})}},
                                  {"dP_1"}, {"u_4"});
    auto modes = extract_modes(model);
    auto table = residue_table(model, modes[1]);
    CHECK(table.normalized.rows() == 1);
    CHECK(table.normalized(0, 0) == 1.0);
}

TEST_CASE("paper-format fixture: normalized table and optimal loop") {
    // Layout of the two-area normalized residue analysis; the numbers are
    // fixture values, not regenerated.
    ResidueTable table;
    table.output_names = {"dP_1", "dP_2"};
    table.input_names = {"u_1", "u_2", "u_3", "u_4"};
    table.normalized.resize(2, 4);
    table.normalized << 0.3335, 0.42875, 1.0, 0.44531,
        0.32973, 0.42015, 0.99597, 0.47881;
    auto [m, p] = select_loop(table);
    CHECK(m == 0);  // dP_1
    CHECK(p == 2);  // u_3
    CHECK(table.normalized.maxCoeff() == 1.0);
}

TEST_CASE("loop selection tie-breaks and scale invariance") {
    ResidueTable table;
    table.output_names = {"y_1", "y_2"};
    table.input_names = {"u_1", "u_2"};
    table.normalized = Eigen::MatrixXd::Ones(2, 2);
    auto [m, p] = select_loop(table);
    CHECK(m == 0);
    CHECK(p == 0);

    // Positive scaling of raw residues cannot change the argmax.
    Eigen::MatrixXd raw(2, 2);
    raw << 0.2, 1.4, 0.9, 0.3;
    for (double alpha : {1.0, 7.5, 1e4}) {
        Eigen::MatrixXd scaled = alpha * raw;
        Eigen::Index bi, bj;
        scaled.maxCoeff(&bi, &bj);
        CHECK(bi == 0);
        CHECK(bj == 1);
    }
}

TEST_CASE("residue table rejects a foreign mode") {
    auto model = model_from_poles(printed_fifth_order_poles(),
                                  {{Polynomial({1.0})}}, {"dP_1"}, {"u_4"});
    ModeInfo foreign;
    foreign.discrete_pole = Complex(0.5, 0.5);
    foreign.continuous_pole = lti::tustin_pole_d2c(foreign.discrete_pole, kTs);
    CHECK_THROWS_AS(residue_table(model, foreign), ValidationError);
}

// ---------------------------------------------------------------------------
// FFT peak estimation
// ---------------------------------------------------------------------------

namespace {

DataWindow damped_tone(double f, double zeta, double extra_f, double extra_amp) {
    const Eigen::Index N = 625;
    const double omega = 2.0 * M_PI * f;
    const double sigma = zeta * omega / std::sqrt(1.0 - zeta * zeta);
    Eigen::MatrixXd x(N, 1);
    for (Eigen::Index t = 0; t < N; ++t) {
        const double time = static_cast<double>(t) * kTs;
        x(t, 0) = std::exp(-sigma * time) * std::sin(omega * time) +
                  extra_amp * std::sin(2.0 * M_PI * extra_f * time);
    }
    return DataWindow(kTs, 0.0, {"dP_1"}, x);
}

}  // namespace

TEST_CASE("fft peak of a damped 0.64 Hz ring-down") {
    auto w = damped_tone(0.64, 0.05, 0.0, 0.0);
    double f = fft_dominant_frequency(w, "dP_1");
    CHECK(std::abs(f - 0.64) <= 0.02);
}

TEST_CASE("fft rejects a DC-only signal") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Constant(625, 1, 2.0);
    DataWindow w(kTs, 0.0, {"dP_1"}, x);
    CHECK_THROWS_AS(fft_dominant_frequency(w, "dP_1"), NumericalError);
}

TEST_CASE("fft returns the stronger of two in-band tones") {
    auto w = damped_tone(0.3, 1e-6, 0.8, 0.2);
    double f = fft_dominant_frequency(w, "dP_1");
    CHECK(std::abs(f - 0.3) <= 0.02);
}

TEST_CASE("fft requires two cycles of the lowest band frequency") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(100, 1);  // 3.2 s at 0.032 s
    DataWindow w(kTs, 0.0, {"dP_1"}, x);
    CHECK_THROWS_AS(fft_dominant_frequency(w, "dP_1"), ValidationError);
}
