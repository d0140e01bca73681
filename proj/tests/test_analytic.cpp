#include "doctest.h"
#include "oracles.hpp"

#include "cuq/analytic.hpp"
#include "cuq/errors.hpp"

#include <cmath>
#include <numbers>

using namespace cuq;

namespace {

constexpr double kPi = std::numbers::pi;

// Canonical CUQ frame: e = x, gamma = y, e x gamma = z.
const Vec3 kE(1.0, 0.0, 0.0);
const Vec3 kG(0.0, 1.0, 0.0);

// theta' = -1/r - cos(theta), integrated with scalar RK4.
double theta_oracle(double tau, double r, int steps = 20000) {
    auto f = [r](double th) { return -1.0 / r - std::cos(th); };
    double th = 0.0;
    const double h = tau / steps;
    for (int i = 0; i < steps; ++i) {
        const double k1 = f(th), k2 = f(th + 0.5 * h * k1), k3 = f(th + 0.5 * h * k2), k4 = f(th + h * k3);
        th += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return th;
}

}  // namespace

TEST_CASE("CUQ clock") {
    // frozen from an independent arbitrary-precision evaluation
    CHECK(cuq_clock(0.85).P_hat == doctest::Approx(10.13835047427701).epsilon(1e-14));
    CHECK(cuq_clock(0.85).omega_hat == doctest::Approx(0.6197443384031023).epsilon(1e-14));
    CHECK(cuq_clock(0.99).P_hat == doctest::Approx(44.09491652125692).epsilon(1e-14));
    CHECK(cuq_clock(0.3).P_hat * cuq_clock(0.3).omega_hat == doctest::Approx(2.0 * kPi));
    CHECK_THROWS_AS(cuq_clock(1.0), InvalidArgument);
    CHECK_THROWS_AS(cuq_clock(0.0), InvalidArgument);
    CHECK_THROWS_AS(cuq_clock(-0.2), InvalidArgument);
}

TEST_CASE("restoring physical units") {
    CHECK(restore_units(0.85, 1.0).period_ps == doctest::Approx(5.963735573104126).epsilon(1e-14));
    // Rabi limit
    CHECK(restore_units(0.0, 2.0).period_ps == doctest::Approx(kPi / 2.0));
    CHECK(restore_units(0.0, 2.0).omega == doctest::Approx(4.0));
    oracle::Gen gen(3);
    for (int k = 0; k < 50; ++k) {
        const double r = gen.uniform(0.01, 0.99), E = gen.uniform(0.001, 20.0);
        // P = P^ / |Gamma|
        CHECK(restore_units(r, E).period_ps == doctest::Approx(cuq_clock(r).P_hat / (2.0 * r * E)).epsilon(1e-13));
        CHECK(restore_units(r, E).period_ps * restore_units(r, E).omega == doctest::Approx(2.0 * kPi));
    }
    CHECK_THROWS_AS(restore_units(1.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(restore_units(0.5, 0.0), InvalidArgument);
}

TEST_CASE("theta(tau)") {
    CHECK(cuq_theta(0.0, 0.5) == 0.0);
    CHECK(cuq_theta(1.0, 0.5) == doctest::Approx(-2.228711944585439).epsilon(1e-13));
    const double P = cuq_clock(0.7).P_hat;
    CHECK(cuq_theta(P, 0.7) == doctest::Approx(-2.0 * kPi).epsilon(1e-13));
    CHECK(cuq_theta(0.5 * P, 0.7) == doctest::Approx(-kPi).epsilon(1e-13));
    CHECK(cuq_theta(3.25 * P, 0.7) == doctest::Approx(cuq_theta(0.25 * P, 0.7) - 6.0 * kPi).epsilon(1e-13));

    oracle::Gen gen(17);
    for (int k = 0; k < 40; ++k) {
        const double r = gen.uniform(0.05, 0.98);
        const double tau = gen.uniform(0.0, 3.0 * cuq_clock(r).P_hat);
        CAPTURE(r);
        CAPTURE(tau);
        CHECK(std::abs(cuq_theta(tau, r) - theta_oracle(tau, r)) < 1e-8);
    }
}

TEST_CASE("property: theta decreases strictly and matches the projections") {
    oracle::Gen gen(23);
    for (int k = 0; k < 20; ++k) {
        const double r = gen.uniform(0.05, 0.99);
        const double P = cuq_clock(r).P_hat;
        double prev = cuq_theta(0.0, r);
        for (int i = 1; i <= 400; ++i) {
            const double tau = 2.0 * P * i / 400.0;
            const double th = cuq_theta(tau, r);
            CHECK(th < prev);
            prev = th;
            const auto p = cuq_projections(tau, r);
            CHECK(std::abs(p.b_gamma + std::sin(th)) < 1e-12);
            CHECK(std::abs(p.b_exg - std::cos(th)) < 1e-12);
        }
    }
}

TEST_CASE("asymptotic states") {
    const auto s60 = asymptotic_state(QubitModel::from_angle(kPi / 3, 0.5));
    CHECK(s60.branch == AsymptoteBranch::General);
    CHECK((s60.b_star - Vec3(0.90867701, 0.11074966, -0.40254267)).norm() < 1e-7);

    const auto al = asymptotic_state(QubitModel(kE, -kE, 0.4));
    CHECK(al.branch == AsymptoteBranch::Aligned);
    CHECK((al.b_star + kE).norm() < 1e-15);
    CHECK(asymptotic_state(QubitModel(kE, kE, 3.0)).alpha == 1.0);

    const auto over = asymptotic_state(QubitModel::from_angle(kPi / 2, 2.0));
    CHECK(over.branch == AsymptoteBranch::PerpendicularOverdamped);
    CHECK((over.b_star - Vec3(0.0, std::sqrt(3.0) / 2.0, -0.5)).norm() < 1e-15);

    const auto cuq = asymptotic_state(QubitModel::from_angle(kPi / 2, 0.85));
    CHECK(cuq.branch == AsymptoteBranch::CriticalNoStationary);
    CHECK(cuq.b_star.isZero());
    CHECK(std::string(to_string(cuq.branch)) == "CriticalNoStationary");
}

TEST_CASE("property: stationary states are pure fixed points of the flow") {
    oracle::Gen gen(41);
    int checked = 0;
    while (checked < 300) {
        const Vec3 e = gen.unit(), g = gen.unit();
        const double r = gen.uniform(0.02, 4.0);
        const QubitModel m(e, g, r);
        const auto st = asymptotic_state(m);
        if (st.branch == AsymptoteBranch::CriticalNoStationary) continue;
        ++checked;
        CHECK(std::abs(st.b_star.norm() - 1.0) < 1e-12);
        CHECK(oracle::rhs(st.b_star, e, g, r).norm() < 1e-12 * (1.0 + 1.0 / r));
        CHECK(st.b_star.dot(e) == doctest::Approx(st.alpha).epsilon(1e-12));
    }
}

TEST_CASE("fully mixed start: magnitude") {
    CHECK(mixed_magnitude(0.0, 0.85) == 0.0);
    const double P = cuq_clock(0.85).P_hat;
    CHECK(mixed_magnitude(0.5 * P, 0.85) == doctest::Approx(0.9869375907111756).epsilon(1e-14));
    CHECK(0.5 * P == doctest::Approx(5.069175237138507).epsilon(1e-14));
    // r = 1: |b|^2 = 1 - 4/(2 + tau^2)^2
    for (double tau : {0.01, 1.0, 7.0, 60.0}) {
        const double expect = std::sqrt(1.0 - 4.0 / ((2.0 + tau * tau) * (2.0 + tau * tau)));
        CHECK(mixed_magnitude(tau, 1.0) == doctest::Approx(expect).epsilon(1e-12));
    }
    CHECK_THROWS_AS(mixed_magnitude(1.0, 1.2), InvalidArgument);

    oracle::Gen gen(8);
    for (int k = 0; k < 20; ++k) {
        const double r = gen.uniform(0.05, 0.99);
        const double Pk = cuq_clock(r).P_hat;
        // maximum 2r/(1+r^2), reached at half period
        CHECK(mixed_magnitude(0.5 * Pk, r) == doctest::Approx(2.0 * r / (1.0 + r * r)).epsilon(1e-13));
        const double tau = gen.uniform(0.0, 2.0 * Pk);
        const Vec3 b = oracle::rk4(Vec3::Zero(), kE, kG, r, tau, 20000);
        CHECK(std::abs(mixed_magnitude(tau, r) - b.norm()) < 1e-9);
        // the state never leaves the (gamma, e x gamma) plane
        CHECK(std::abs(b.x()) < 1e-14);
    }
}

TEST_CASE("fully mixed start: magnitude against polar angle") {
    CHECK(mixed_magnitude_vs_angle(-kPi / 4, 0.4) == doctest::Approx(0.5237828008789241).epsilon(1e-14));
    CHECK(mixed_magnitude_vs_angle(0.0, 0.4) == 0.0);
    CHECK(mixed_magnitude_vs_angle(-kPi / 2 - 2.0 * kPi, 0.4) == doctest::Approx(0.8 / 1.16));
    CHECK_THROWS_AS(mixed_magnitude_vs_angle(kPi / 3, 0.4), InvalidArgument);

    // along an oracle trajectory
    const double r = 0.6;
    const double P = cuq_clock(r).P_hat;
    for (int i = 1; i < 20; ++i) {
        const double tau = P * i / 20.0;
        const Vec3 b = oracle::rk4(Vec3::Zero(), kE, kG, r, tau, 20000);
        const double phi = std::atan2(b.z(), b.y());
        CHECK(std::abs(mixed_magnitude_vs_angle(phi, r) - b.norm()) < 1e-9);
    }
}

TEST_CASE("fully mixed start: ellipse") {
    const MixedEllipse el = mixed_ellipse(0.6);
    CHECK(el.semi_major == doctest::Approx(0.5144957554275265).epsilon(1e-14));
    CHECK(el.semi_minor == doctest::Approx(0.4411764705882353).epsilon(1e-14));
    CHECK(el.eccentricity * el.eccentricity == doctest::Approx(0.2647058823529412).epsilon(1e-14));
    CHECK(el.implicit(0.0, 0.0) == doctest::Approx(1.0));

    oracle::Gen gen(12);
    for (int k = 0; k < 10; ++k) {
        const double r = gen.uniform(0.05, 0.95);
        const MixedEllipse e = mixed_ellipse(r);
        CHECK(1.0 - (e.semi_minor / e.semi_major) * (e.semi_minor / e.semi_major) ==
              doctest::Approx(e.eccentricity * e.eccentricity));
        const double tau = gen.uniform(0.0, cuq_clock(r).P_hat);
        const Vec3 b = oracle::rk4(Vec3::Zero(), kE, kG, r, tau, 20000);
        CHECK(std::abs(e.implicit(b.y(), b.z()) - 1.0) < 1e-10);
    }
}

TEST_CASE("polar rates agree with the Cartesian flow") {
    oracle::Gen gen(31);
    for (int k = 0; k < 200; ++k) {
        const double r = gen.uniform(0.05, 3.0);
        const double rho = gen.uniform(0.01, 1.0);
        const double phi = gen.uniform(-kPi, kPi);
        const Vec3 b(0.0, rho * std::cos(phi), rho * std::sin(phi));
        const Vec3 f = oracle::rhs(b, kE, kG, r);
        const PolarRates pr = polar_rates(rho, phi, r);
        CHECK(pr.db_mag_dtau == doctest::Approx(b.dot(f) / rho).epsilon(1e-12));
        CHECK(pr.dphi_dtau == doctest::Approx((b.y() * f.z() - b.z() * f.y()) / (rho * rho)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(polar_rates(0.0, 0.3, 0.5), InvalidArgument);
}

TEST_CASE("tilted orbit start has the requested gamma amplitude") {
    CHECK((tilted_orbit_start(0.7, 1.0) - Vec3(0.0, 0.0, 1.0)).norm() < 1e-15);
    CHECK_THROWS_AS(tilted_orbit_start(0.7, 0.0), InvalidArgument);
    for (double r : {0.3, 0.85}) {
        for (double R : {0.3, 0.7}) {
            const Vec3 b0 = tilted_orbit_start(r, R);
            CHECK(b0.norm() == doctest::Approx(1.0).epsilon(1e-14));
            const double P = cuq_clock(r).P_hat;
            double peak = 0.0;
            Vec3 b = b0;
            const int n = 4000;
            for (int i = 0; i < n; ++i) {
                b = oracle::rk4(b, kE, kG, r, P / n, 4);
                peak = std::max(peak, std::abs(b.y()));
            }
            CAPTURE(r);
            CAPTURE(R);
            CHECK(peak == doctest::Approx(R).epsilon(1e-5));
            // periodic: back at the start after one period
            CHECK((b - b0).norm() < 1e-8);
        }
    }
}
