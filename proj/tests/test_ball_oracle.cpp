#include <doctest.h>

#include "dbem/ball_oracle.hpp"
#include "dbem/clifford.hpp"
#include "dbem/quadrature.hpp"

using namespace dbem;

TEST_CASE("channel quantum numbers")
{
    CHECK(RadialChannel{-1}.l() == 0);
    CHECK(RadialChannel{-1}.lbar() == 1);
    CHECK(RadialChannel{1}.l() == 1);
    CHECK(RadialChannel{1}.lbar() == 0);
    CHECK(RadialChannel{-2}.degeneracy() == 4);
    CHECK(RadialChannel{3}.j() == doctest::Approx(2.5));
}

TEST_CASE("ODE integration agrees with the Bessel closed form")
{
    for (int kappa : {-3, -2, -1, 1, 2, 3})
        for (double E : {-0.7, 0.0, 0.45}) {
            const RadialSolution a = radial_solve(kappa, E, 1.0, 1.0);
            const RadialSolution b = radial_bessel(kappa, E, 1.0, 1.0, false);
            CHECK(a.defect < 1e-8);
            CHECK(std::abs(a.g * b.h - a.h * b.g) < 1e-8);
        }
}

TEST_CASE("spherical spinors are orthonormal on the sphere")
{
    const Rule1D& gl = gauss_legendre(24);
    const int np = 48;
    for (int k1 : {-1, 1, -2})
        for (int k2 : {-1, 1, -2}) {
            cd ip = 0;
            for (size_t i = 0; i < gl.x.size(); ++i)
                for (int j = 0; j < np; ++j) {
                    const double th = std::acos(gl.x[i]), ph = 2 * pi * j / np;
                    ip += gl.w[i] * (2 * pi / np) *
                          spherical_spinor(k1, 0.5, th, ph).dot(spherical_spinor(k2, 0.5, th, ph));
                }
            CHECK(std::abs(ip - (k1 == k2 ? 1.0 : 0.0)) < 1e-12);
        }
}

TEST_CASE("sigma . r flips the channel")
{
    for (int kappa : {-2, -1, 1, 2}) {
        const double th = 0.7, ph = 1.3;
        const Vec3 r(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
        Eigen::Matrix2cd s;
        s << r.z(), cd(r.x(), -r.y()), cd(r.x(), r.y()), -r.z();
        const Eigen::Vector2cd a = s * spherical_spinor(kappa, 0.5, th, ph);
        const Eigen::Vector2cd b = spherical_spinor(-kappa, 0.5, th, ph);
        CHECK(std::min((a - b).norm(), (a + b).norm()) < 1e-12);
    }
}

TEST_CASE("oracle roots are zeros of the boundary determinant")
{
    for (bool exterior : {false, true}) {
        const OracleResult r = oracle_eigenvalues(BoundaryForm::theta, 0.5, 1.0, 1.0, -0.95, 0.95, 6, exterior);
        CHECK_FALSE(r.roots.empty());
        for (const auto& root : r.roots) {
            CHECK(root.residual < 1e-9);
            CHECK(root.degeneracy == 2 * std::abs(root.kappa));
            const double d = 1e-6;
            const double lo = boundary_determinant(BoundaryForm::theta, 0.5, root.kappa, root.E - d, 1, 1, exterior);
            const double hi = boundary_determinant(BoundaryForm::theta, 0.5, root.kappa, root.E + d, 1, 1, exterior);
            CHECK(lo * hi <= 0);
        }
    }
}

TEST_CASE("theta -> -theta mirrors the spectrum")
{
    const auto a = expand_multiplicities(oracle_eigenvalues(BoundaryForm::theta, 0.5, 1, 1, -0.95, 0.95, 6, false).roots);
    auto b = expand_multiplicities(oracle_eigenvalues(BoundaryForm::theta, -0.5, 1, 1, -0.95, 0.95, 6, false).roots);
    REQUIRE(a.size() == b.size());
    std::sort(b.begin(), b.end(), std::greater<>());
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(-b[i]).epsilon(1e-9));
}

TEST_CASE("the MIT condition has no eigenvalues in the gap")
{
    CHECK(oracle_eigenvalues(BoundaryForm::omega, 0.0, 1, 1, -0.99, 0.99, 8, false).roots.empty());
    CHECK(oracle_eigenvalues(BoundaryForm::theta, 3.0, 1, 1, -0.99, 0.99, 8, false).roots.empty());
}

TEST_CASE("channel spinor satisfies the boundary condition at a root")
{
    const OracleResult r = oracle_eigenvalues(BoundaryForm::theta, 0.5, 1.0, 1.0, -0.95, 0.95, 4, false);
    REQUIRE_FALSE(r.roots.empty());
    const OracleRoot& root = r.roots.front();
    const RadialSolution s = radial_bessel(root.kappa, root.E, 1.0, 1.0, false);
    const double th = 0.9, ph = 2.1;
    const Vec3 nu(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
    const V4 f = channel_spinor(root.kappa, 0.5, s.g, s.h, th, ph);
    const auto P = projectors(nu);
    const V4 bc = 0.5 * (P.plus * f) - P.plus * (beta() * f);
    CHECK(bc.norm() < 1e-8 * f.norm());
}
