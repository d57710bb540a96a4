#include <doctest.h>

#include "dbem/clifford.hpp"
#include "dbem/kernel.hpp"
#include "dbem/mesh.hpp"

using namespace dbem;

namespace {

C4 fd_derivative(const SpectralParameter& p, const Vec3& x, int j, double s)
{
    Vec3 e = Vec3::Zero();
    e[j] = s;
    return (-green_kernel(p, x + 2 * e) + 8.0 * green_kernel(p, x + e) - 8.0 * green_kernel(p, x - e) +
            green_kernel(p, x - 2 * e)) /
           (12.0 * s);
}

}  // namespace

TEST_CASE("wavenumber branch and admissibility")
{
    for (cd l : {cd(0, 0), cd(0.5, 0), cd(0.2, 0.3), cd(3, 0.1), cd(-2, -1)}) {
        const cd k = wavenumber(l, 1.0);
        CHECK(k.imag() > 0);
        CHECK(std::abs(k * k - (l * l - 1.0)) < 1e-14);
    }
    CHECK(SpectralParameter{cd(0.5, 0), 1}.admissible());
    CHECK_FALSE(SpectralParameter{cd(1.5, 0), 1}.admissible());
    CHECK_FALSE(SpectralParameter{cd(-1, 0), 1}.admissible());
    CHECK_THROWS_AS(SpectralParameter({cd(2, 0), 1}).require_admissible(), Error);
}

TEST_CASE("Green function solves the free Dirac equation away from the pole")
{
    for (cd l : {cd(0, 0), cd(0.5, 0), cd(0.2, 0.3)}) {
        const SpectralParameter p{l, 1.0};
        for (const Vec3& x : {Vec3(0.5, 0.2, -0.3), Vec3(-1.1, 0.4, 0.9)}) {
            C4 Dg = beta() * green_kernel(p, x) - l * green_kernel(p, x);
            for (int j = 0; j < 3; ++j) Dg += cd(0, -1) * alpha(j) * fd_derivative(p, x, j, 1e-3);
            CHECK(max_abs(Dg) < 1e-8 * max_abs(green_kernel(p, x)));
        }
    }
}

TEST_CASE("analytic gradient matches finite differences")
{
    const SpectralParameter p{cd(0.2, 0.3), 1.0};
    const Vec3 x(0.3, -0.4, 0.6);
    const auto g = green_kernel_gradient(p, x);
    for (int j = 0; j < 3; ++j) CHECK(max_abs(g[j] - fd_derivative(p, x, j, 1e-3)) < 1e-8);
}

TEST_CASE("conjugate parameter gives the adjoint kernel")
{
    const SpectralParameter p{cd(0.2, 0.3), 1.0};
    const Vec3 x(0.3, -0.4, 0.6);
    CHECK(max_abs(green_kernel(p, x).adjoint() - green_kernel(p.conj(), -x)) < 1e-14);
}

TEST_CASE("kernel growth constants")
{
    const SpectralParameter p{cd(0.5, 0), 1.0};
    const Vec3 g(0.3, -0.2, 0.1);
    auto theta = [&](const Vec3& y) { return 0.5 + g.dot(y); };
    const MatrixKernel commutator = [&](const Vec3& x, const Vec3& y) {
        return C4(green_kernel(p, x - y) * (theta(y) - theta(x)));
    };
    const MatrixKernel raw = [&](const Vec3& x, const Vec3& y) { return green_kernel(p, x - y); };
    std::vector<double> cs, rs;
    for (int level = 1; level <= 2; ++level) {
        const SurfaceMesh m = make_sphere(1.0, level);
        const auto a = check_kernel_growth(commutator, 1.0, m.node);
        const auto b = check_kernel_growth(raw, 1.0, m.node);
        CHECK(a.pairs > 0);
        CHECK(a.triples > 0);
        cs.push_back(a.size_constant);
        rs.push_back(b.size_constant);
    }
    CHECK(cs[1] < 2 * cs[0]);
    CHECK(cs[1] > 0.5 * cs[0]);
    CHECK(rs[1] > 1.5 * rs[0]);
}
