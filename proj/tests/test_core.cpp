#include "doctest.h"
#include "oracles.hpp"

#include "cuq/core.hpp"
#include "cuq/errors.hpp"

#include <cmath>
#include <numbers>

using namespace cuq;

TEST_CASE("BlochState enforces |b| <= 1 + eps and tau >= 0") {
    CHECK_NOTHROW(BlochState(Vec3(1.0, 0.0, 0.0), 0.0));
    CHECK_NOTHROW(BlochState(Vec3(1.0 + 5e-10, 0.0, 0.0), 1.0));
    CHECK_THROWS_AS(BlochState(Vec3(1.0 + 1e-8, 0.0, 0.0), 0.0), InvalidArgument);
    CHECK_THROWS_AS(BlochState(Vec3(0.1, 0.0, 0.0), -1e-3), InvalidArgument);
    CHECK_THROWS_AS(BlochState(Vec3(NAN, 0.0, 0.0), 0.0), InvalidArgument);
    // looser tolerance admits the same vector
    CHECK_NOTHROW(BlochState(Vec3(1.0 + 1e-8, 0.0, 0.0), 0.0, 1e-6));

    const BlochState s(Vec3(0.0, 1.0 + 5e-10, 0.0), 2.0);
    CHECK(s.clamped().magnitude() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.clamped().tau() == 2.0);
}

TEST_CASE("QubitModel validation and derived quantities") {
    CHECK_THROWS_AS(QubitModel(Vec3(1.0, 1e-5, 0.0), Vec3(0.0, 1.0, 0.0), 0.5), InvalidArgument);
    CHECK_THROWS_AS(QubitModel(Vec3(1.0, 0.0, 0.0), Vec3(0.0, 1.0, 0.0), 0.0), InvalidArgument);
    CHECK_THROWS_AS(QubitModel(Vec3(1.0, 0.0, 0.0), Vec3(0.0, 1.0, 0.0), 0.5, -1.0), InvalidArgument);

    const QubitModel m = QubitModel::from_angle(std::numbers::pi / 2, 0.85, 0.253);
    CHECK(m.Gamma_mag() == doctest::Approx(2.0 * 0.85 * 0.253));
    CHECK(m.theta_eg() == doctest::Approx(std::numbers::pi / 2));
    CHECK(m.cos_theta_eg() == 0.0);
    CHECK((m.e_cross_gamma_unit() - Vec3(0.0, 0.0, 1.0)).norm() < 1e-15);

    const QubitModel par = QubitModel::from_angle(0.0, 0.3);
    CHECK(par.e_cross_gamma_unit().isZero());
    CHECK(QubitModel::from_angle(std::numbers::pi, 0.3).theta_eg() == doctest::Approx(std::numbers::pi));

    const QubitModel v = QubitModel::from_vectors(Vec3(0.0, 2.0, 0.0), Vec3(0.0, 0.0, 3.0), 5.0, 7.0);
    CHECK(v.r() == doctest::Approx(0.75));
    CHECK(v.E_mag() == doctest::Approx(2.0));
    CHECK(v.E0().value() == 5.0);
    CHECK(v.Gamma0().value() == 7.0);
    CHECK_THROWS_AS(QubitModel::from_vectors(Vec3::Zero(), Vec3(1.0, 0.0, 0.0)), InvalidArgument);
}

TEST_CASE("DensityMatrix checks and Bloch roundtrip") {
    Mat2c bad;
    bad << 0.5, 0.3, 0.1, 0.5;
    CHECK_THROWS_AS(DensityMatrix{bad}, InvalidArgument);
    Mat2c tr;
    tr << 0.6, 0.0, 0.0, 0.6;
    CHECK_THROWS_AS(DensityMatrix{tr}, InvalidArgument);
    Mat2c neg;
    neg << 1.2, 0.0, 0.0, -0.2;
    CHECK_THROWS_AS(DensityMatrix{neg}, InvalidArgument);

    oracle::Gen gen(11);
    for (int k = 0; k < 200; ++k) {
        const Vec3 b = gen.ball();
        const DensityMatrix rho = density_from_bloch(BlochState(b, 0.0));
        CHECK((rho.bloch_vector() - b).norm() < 1e-14);
        CHECK(rho.purity() == doctest::Approx(0.5 * (1.0 + b.squaredNorm())).epsilon(1e-13));
    }
    CHECK(density_from_bloch(BlochState(Vec3(0.0, 0.0, 1.0), 0.0)).is_pure());
    CHECK_FALSE(density_from_bloch(BlochState(Vec3(0.0, 0.0, 0.5), 0.0)).is_pure());
}

TEST_CASE("Pauli algebra") {
    for (int i = 0; i < 3; ++i) {
        CHECK((pauli(i) * pauli(i) - Mat2c::Identity()).norm() < 1e-15);
        CHECK(std::abs(pauli(i).trace()) < 1e-15);
    }
    // sigma_1 sigma_2 = i sigma_3
    CHECK((pauli(0) * pauli(1) - std::complex<double>(0.0, 1.0) * pauli(2)).norm() < 1e-15);
    const Vec3 v(0.3, -0.2, 0.7);
    CHECK((pauli_components(pauli_dot(v)).real() - v).norm() < 1e-15);
}

TEST_CASE("property: Pauli projection of the density-matrix flow equals the Bloch flow") {
    oracle::Gen gen(2024);
    for (int k = 0; k < 300; ++k) {
        const Vec3 e = gen.unit();
        const Vec3 g = gen.unit();
        const double r = gen.uniform(0.01, 3.0);
        const double E_mag = gen.uniform(0.01, 10.0);
        // trace parts must drop out of the normalised flow
        const QubitModel m(e, g, r, E_mag, gen.uniform(-5.0, 5.0), gen.uniform(0.0, 5.0));
        const Vec3 b = gen.ball();
        const DensityMatrix rho = density_from_bloch(BlochState(b, 0.0));
        const Mat2c drho = density_evolution_rhs(rho, m);
        CHECK(std::abs(drho.trace()) < 1e-12 * (1.0 + E_mag));
        const Vec3 db_dtau = 2.0 * pauli_components(drho).real() / m.Gamma_mag();
        const Vec3 expected = oracle::rhs(b, e, g, r);
        CHECK((db_dtau - expected).norm() < 1e-11 * (1.0 + expected.norm()));
        CHECK((bloch_derivative(b, m) - expected).norm() < 1e-13 * (1.0 + expected.norm()));
    }
}

TEST_CASE("property: purity rate and sphere invariance") {
    oracle::Gen gen(7);
    for (int k = 0; k < 300; ++k) {
        const QubitModel m(gen.unit(), gen.unit(), gen.uniform(0.05, 2.0));
        const Vec3 b = gen.ball();
        const BlochState s(b, 0.0);
        CHECK(purity_rate(s, m) == doctest::Approx(2.0 * b.dot(bloch_derivative(s, m))).epsilon(1e-12));
        // pure states stay pure: the flow is tangent to the sphere
        const Vec3 u = gen.unit();
        CHECK(std::abs(u.dot(bloch_derivative(u, m))) < 1e-13);
    }
    // the fully mixed state is pushed along gamma
    const QubitModel m = QubitModel::from_angle(std::numbers::pi / 2, 0.5);
    CHECK((bloch_derivative(Vec3::Zero(), m) - m.gamma()).norm() < 1e-15);
}
