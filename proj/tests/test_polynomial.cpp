#include <doctest.h>

#include "wadamp/errors.hpp"
#include "wadamp/polynomial.hpp"

using wadamp::ValidationError;
using namespace wadamp::lti;

TEST_CASE("polynomial arithmetic") {
    Polynomial a({1.0, 2.0, 3.0});   // x^2 + 2x + 3
    Polynomial b({1.0, -1.0});       // x - 1

    CHECK((a * b).coeffs() == std::vector<double>{1.0, 1.0, 1.0, -3.0});
    CHECK((a + b).coeffs() == std::vector<double>{1.0, 3.0, 2.0});
    CHECK((a - b).coeffs() == std::vector<double>{1.0, 1.0, 4.0});
    CHECK(a(2.0) == doctest::Approx(11.0));
    CHECK(derivative(a).coeffs() == std::vector<double>{2.0, 2.0});
}

TEST_CASE("polynomial division") {
    // (x^2 + 2x + 3) / (x - 1) = (x + 3) remainder 6
    auto d = divide(Polynomial({1.0, 2.0, 3.0}), Polynomial({1.0, -1.0}));
    CHECK(d.quotient.coeffs() == std::vector<double>{1.0, 3.0});
    CHECK(d.remainder.coeffs() == std::vector<double>{6.0});

    auto lower = divide(Polynomial({1.0, 1.0}), Polynomial({1.0, 0.0, 0.0}));
    CHECK(lower.quotient.is_zero());
    CHECK(lower.remainder.coeffs() == std::vector<double>{1.0, 1.0});

    CHECK_THROWS_AS(divide(Polynomial({1.0}), Polynomial({0.0})), ValidationError);
}

TEST_CASE("polynomial from conjugate roots is real") {
    std::vector<std::complex<double>> roots{{-1.0, 2.0}, {-1.0, -2.0}, {3.0, 0.0}};
    Polynomial p = Polynomial::from_roots(roots);
    // (x^2 + 2x + 5)(x - 3) = x^3 - x^2 - x - 15
    CHECK(p.coeffs() == std::vector<double>{1.0, -1.0, -1.0, -15.0});
}

TEST_CASE("polynomial validation") {
    CHECK_THROWS_AS(Polynomial(std::vector<double>{}), ValidationError);
    CHECK_THROWS_AS(monic(Polynomial({0.0, 1.0})), ValidationError);
    CHECK(trim_leading(Polynomial({0.0, 0.0, 2.0, 1.0})).coeffs() ==
          std::vector<double>{2.0, 1.0});
    CHECK(pad_trailing(Polynomial({1.0}), 3).coeffs() == std::vector<double>{1.0, 0.0, 0.0});
}
