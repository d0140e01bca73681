#include "doctest.h"
#include "oracles.hpp"

#include "cuq/analytic.hpp"
#include "cuq/errors.hpp"
#include "cuq/fourier.hpp"

#include <cmath>
#include <numbers>

using namespace cuq;

namespace {

constexpr double kPi = std::numbers::pi;

std::function<double(double)> gamma_signal(double r) {
    return [r](double tau) { return cuq_projections(tau, r).b_gamma; };
}
std::function<double(double)> exg_signal(double r) {
    return [r](double tau) { return cuq_projections(tau, r).b_exg; };
}

}  // namespace

TEST_CASE("closed-form coefficients") {
    // frozen from independent high-precision quadrature
    CHECK(closed_form_cn(1, 0.85) == doctest::Approx(0.690055882747784).epsilon(1e-13));
    CHECK(closed_form_cn(2, 0.85) == doctest::Approx(0.3841722237768165).epsilon(1e-13));
    CHECK(closed_form_cn(3, 0.85) == doctest::Approx(0.2138787614329606).epsilon(1e-13));
    CHECK(closed_form_d0(0.85) == doctest::Approx(-0.5567262498321918).epsilon(1e-13));
    // leading order c_n ~ (r/2)^(n-1)
    CHECK(closed_form_cn(3, 1e-3) / 1e-6 == doctest::Approx(0.2500000625).epsilon(1e-9));
    CHECK_THROWS_AS(closed_form_cn(0, 0.5), InvalidArgument);
    CHECK_THROWS_AS(closed_form_cn(1, 1.0), InvalidArgument);
}

TEST_CASE("small-r limit: only the principal harmonic survives") {
    CHECK(std::abs(closed_form_cn(1, 1e-8) - 1.0) < 1e-8);
    CHECK(closed_form_cn(2, 1e-8) < 1e-8);
    CHECK(std::abs(closed_form_d0(1e-8) + 0.5e-8) < 1e-16);
    double prev = closed_form_cn(1, 1e-6);
    for (double r = 1e-6; r < 1e-3; r *= 1.5) {
        const double c = closed_form_cn(1, r);
        CHECK(std::isfinite(c));
        CHECK(std::abs(c - prev) < 1e-6);
        prev = c;
    }
}

TEST_CASE("closed forms agree with an independent trapezoid oracle") {
    for (double r : {0.1, 0.5, 0.85, 0.95}) {
        const double P = cuq_clock(r).P_hat;
        CAPTURE(r);
        for (int n = 1; n <= 10; ++n) {
            CHECK(std::abs(closed_form_cn(n, r) - oracle::trapezoid_coefficient(gamma_signal(r), P, n, true)) < 1e-12);
            CHECK(std::abs(closed_form_cn(n, r) - oracle::trapezoid_coefficient(exg_signal(r), P, n, false)) < 1e-12);
        }
        CHECK(std::abs(closed_form_d0(r) - oracle::trapezoid_coefficient(exg_signal(r), P, 0, false)) < 1e-12);
    }
}

TEST_CASE("quadrature spectrum") {
    SUBCASE("orthonormality") {
        const double P = 7.0;
        const auto s = quadrature_spectrum([&](double t) { return std::sin(2.0 * kPi * t / P); }, P, 8, SeriesKind::Odd);
        CHECK(s.coeffs[0] == doctest::Approx(1.0).epsilon(1e-12));
        for (int n = 2; n <= 8; ++n) CHECK(std::abs(s.coefficient(n)) < 1e-10);
        CHECK(std::abs(s.d0) < 1e-10);
    }
    SUBCASE("analytic projections at r = 0.85") {
        const double r = 0.85;
        const double P = cuq_clock(r).P_hat;
        const auto odd = quadrature_spectrum(gamma_signal(r), P, 10, SeriesKind::Odd);
        const auto even = quadrature_spectrum(exg_signal(r), P, 10, SeriesKind::Even);
        for (int n = 1; n <= 10; ++n) {
            CHECK(std::abs(odd.coefficient(n) - closed_form_cn(n, r)) < 1e-8);
            CHECK(std::abs(even.coefficient(n) - closed_form_cn(n, r)) < 1e-8);
        }
        CHECK(std::abs(even.d0 - closed_form_d0(r)) < 1e-8);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(quadrature_spectrum([](double t) { return t; }, 2.0, 3, SeriesKind::Even), InvalidArgument);
        CHECK_THROWS_AS(quadrature_spectrum(gamma_signal(0.5), cuq_clock(0.5).P_hat, 65, SeriesKind::Odd),
                        InvalidArgument);
        CHECK_THROWS_AS(quadrature_spectrum(gamma_signal(0.5), cuq_clock(0.5).P_hat, 0, SeriesKind::Odd),
                        InvalidArgument);
    }
}

TEST_CASE("anharmonicity factors") {
    const auto odd = closed_form_spectrum(0.85, 6, SeriesKind::Odd);
    const auto even = closed_form_spectrum(0.85, 6, SeriesKind::Even);
    for (int n = 1; n <= 5; ++n) {
        CHECK(anharmonicity(odd, n).ratio == doctest::Approx(0.5567262498321918).epsilon(1e-13));
        CHECK(anharmonicity(even, n).ratio == doctest::Approx(0.5567262498321918).epsilon(1e-13));
    }
    const auto d0 = anharmonicity(even, 0);
    CHECK(d0.ratio == doctest::Approx(-1.239488676806205).epsilon(1e-13));
    CHECK(d0.ratio_err == 0.0);
    CHECK(d0.reliable);

    FourierSpectrum rabi;
    rabi.kind = SeriesKind::Odd;
    rabi.coeffs = {1.0, 0.0};
    CHECK(anharmonicity(rabi, 1).ratio == 0.0);
    CHECK(anharmonicity(rabi, 1).r_hat == 0.0);

    CHECK_THROWS_AS(anharmonicity(odd, 0), InvalidArgument);
    CHECK_THROWS_AS(anharmonicity(odd, 6), InvalidArgument);
}

TEST_CASE("ratio errors: propagation and reliability") {
    FourierSpectrum s;
    s.kind = SeriesKind::Even;
    s.d0 = 0.04;
    s.d0_err = 0.12;
    s.coeffs = {0.630, -0.03};
    s.errors = {0.007, 0.01};
    const auto d0 = anharmonicity(s, 0);
    CHECK_FALSE(d0.reliable);
    CHECK(d0.ratio == doctest::Approx(15.75));
    const auto d1 = anharmonicity(s, 1);
    CHECK(d1.reliable);
    // uncorrelated delta method
    const double expect = std::sqrt(std::pow(0.01 / 0.63, 2) + std::pow(0.03 * 0.007 / (0.63 * 0.63), 2));
    CHECK(d1.ratio_err == doctest::Approx(expect).epsilon(1e-12));

    // correlation term enters with the documented sign
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(3, 3);
    cov(0, 0) = 0.12 * 0.12;
    cov(1, 1) = 0.007 * 0.007;
    cov(2, 2) = 0.01 * 0.01;
    cov(1, 2) = cov(2, 1) = 2e-5;
    s.covariance = cov;
    const double with_cov = std::sqrt(expect * expect - 2.0 * (-0.03) * 2e-5 / std::pow(0.63, 3));
    CHECK(anharmonicity(s, 1).ratio_err == doctest::Approx(with_cov).epsilon(1e-12));
}

TEST_CASE("r from anharmonicity") {
    AnharmonicityEstimate e;
    e.kind = SeriesKind::Odd;
    e.order = 1;
    e.ratio = geometric_ratio(0.85);
    CHECK(r_from_anharmonicity(e).first == doctest::Approx(0.85).epsilon(1e-15));
    e.ratio = 0.01;
    CHECK(r_from_anharmonicity(e).first == doctest::Approx(0.02).epsilon(1e-3));
    e.ratio = -0.01;  // sign is ignored
    CHECK(r_from_anharmonicity(e).first == doctest::Approx(0.02).epsilon(1e-3));

    AnharmonicityEstimate d;
    d.kind = SeriesKind::Even;
    d.order = 0;
    d.ratio = -1.2395;
    CHECK(r_from_anharmonicity(d).first == doctest::Approx(0.85).epsilon(1e-4));
    // error propagation through dr/drho
    d.ratio = 15.0;
    d.ratio_err = 44.0;
    const double g = 1.0 + 15.0 * 15.0 / 4.0;
    CHECK(r_from_anharmonicity(d).second == doctest::Approx(44.0 * 3.75 / (g * std::sqrt(g))).epsilon(1e-12));
}

TEST_CASE("property: r roundtrips through every ratio route") {
    oracle::Gen gen(77);
    for (int k = 0; k < 200; ++k) {
        const double r = gen.uniform(1e-4, 0.999);
        const auto odd = closed_form_spectrum(r, 5, SeriesKind::Odd);
        const auto even = closed_form_spectrum(r, 5, SeriesKind::Even);
        CAPTURE(r);
        for (int n = 1; n <= 4; ++n) {
            CHECK(std::abs(anharmonicity(odd, n).r_hat - r) < 1e-12);
            CHECK(std::abs(anharmonicity(even, n).r_hat - r) < 1e-12);
        }
        CHECK(std::abs(anharmonicity(even, 0).r_hat - r) < 1e-12);
        // geometric progression invariant
        for (int n = 1; n < 5; ++n) {
            CHECK(std::abs(odd.coefficient(n + 1) / odd.coefficient(n) - odd.coefficient(2) / odd.coefficient(1)) <
                  1e-10);
        }
    }
}

TEST_CASE("effective-r correction") {
    CHECK(correct_effective_r(0.3, 1.0) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(correct_effective_r(0.02, 0.5) == doctest::Approx(0.04).epsilon(2e-3));
    for (double R : {0.1, 0.5, 0.9}) CHECK(correct_effective_r(1.0, R) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(correct_effective_r(0.3, 0.0), InvalidArgument);
    CHECK_THROWS_AS(correct_effective_r(1.2, 0.5), InvalidArgument);
    // ratio D_1 = 0.04 +- 0.02 at amplitude R = d_1 = 0.63
    AnharmonicityEstimate e;
    e.kind = SeriesKind::Even;
    e.order = 1;
    e.ratio = 0.04;
    e.ratio_err = 0.02;
    const auto [rt, rt_err] = r_from_anharmonicity(e);
    const auto [r, r_err] = correct_effective_r(rt, rt_err, 0.63);
    CHECK(r == doctest::Approx(0.13).epsilon(0.05));
    CHECK(r_err == doctest::Approx(0.06).epsilon(0.1));
}

TEST_CASE("weighted average") {
    CHECK_FALSE(weighted_average({}).has_value());
    CHECK_FALSE(weighted_average({{NAN, 1.0}, {1.0, 0.0}}).has_value());
    const auto m = weighted_average({{1.0, 1.0}, {3.0, 1.0}, {NAN, 0.1}});
    REQUIRE(m);
    CHECK(m->value == doctest::Approx(2.0));
    CHECK(m->error == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(m->used == 2);
}

TEST_CASE("truncated series: more harmonics reconstruct the signal better") {
    const double r = 0.85;
    const CuqClock clk = cuq_clock(r);
    const auto s2 = closed_form_spectrum(r, 2, SeriesKind::Odd);
    const auto s6 = closed_form_spectrum(r, 6, SeriesKind::Odd);
    double e2 = 0.0, e6 = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double tau = clk.P_hat * i / 1000.0;
        const double exact = cuq_projections(tau, r).b_gamma;
        e2 = std::max(e2, std::abs(s2.evaluate(clk.omega_hat * tau) - exact));
        e6 = std::max(e6, std::abs(s6.evaluate(clk.omega_hat * tau) - exact));
    }
    CHECK(e6 < e2);
    CHECK(e6 < 0.1);
}
