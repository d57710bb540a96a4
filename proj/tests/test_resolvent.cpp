#include <doctest.h>

#include "dbem/resolvent.hpp"

using namespace dbem;

namespace {

VolumeSource bubble()
{
    VolumeSource src;
    src.region = {0, 1};
    src.f = [](const std::vector<Vec3>& y) {
        CMat f(4, static_cast<Eigen::Index>(y.size()));
        for (size_t a = 0; a < y.size(); ++a) {
            const double s = 1 - y[a].squaredNorm();
            const auto c = static_cast<Eigen::Index>(a);
            f(0, c) = s;
            f(1, c) = y[a][0] * s;
            f(2, c) = cd(0, y[a][1]) * s;
            f(3, c) = cd(0.5, 0.2) * s;
        }
        return f;
    };
    return src;
}

}  // namespace

TEST_CASE("extrapolated trace is exact for quadratic fields")
{
    const SurfaceMesh mesh = make_sphere(1.0, 1);
    auto f = [](const std::vector<Vec3>& p) {
        CMat v(4 * static_cast<Eigen::Index>(p.size()), 1);
        for (size_t i = 0; i < p.size(); ++i)
            for (int c = 0; c < 4; ++c) v(4 * static_cast<Eigen::Index>(i) + c, 0) = p[i].squaredNorm() + c * p[i].x();
        return v;
    };
    for (bool inside : {true, false}) {
        const CMat t = extrapolated_trace(mesh, f, inside);
        for (size_t i = 0; i < mesh.size(); ++i)
            for (int c = 0; c < 4; ++c)
                CHECK(std::abs(t(4 * static_cast<Eigen::Index>(i) + c, 0) -
                               (mesh.node[i].squaredNorm() + c * mesh.node[i].x())) < 1e-12);
    }
}

TEST_CASE("interior targets keep their distance from the boundary")
{
    const SurfaceMesh mesh = make_sphere(1.0, 2);
    const auto t = interior_targets(mesh, 20, 2.5, 7);
    CHECK(t.size() == 20);
    for (const Vec3& x : t) {
        CHECK(x.norm() < 1.0);
        CHECK(node_distance(mesh, x) > 2.5 * mesh.h);
    }
    CHECK(interior_targets(mesh, 20, 2.5, 7) == t);
}

TEST_CASE("resolvents at level 2")
{
    const SurfaceMesh mesh = make_sphere(1.0, 2);
    const ResolventSolver rs({cd(0.2, 0.3), 1.0}, mesh, bubble());
    const auto targets = interior_targets(mesh, 8, 2.5, 7);
    const size_t n = mesh.size();

    const auto mit = rs.mit();
    CHECK(pde_residual(rs, mit, targets) < 0.03);
    CHECK(bc_residual(rs, mit) < 0.05);

    const auto th = BoundaryCoefficient::constant(CoefficientKind::theta, 3.0, n);
    const auto om = BoundaryCoefficient::constant(CoefficientKind::omega, 1.0 / 3.0, n);
    const auto ft = rs.theta(th);
    const auto fo = rs.omega(om);
    CHECK(pde_residual(rs, ft, targets) < 0.03);
    CHECK(bc_residual(rs, ft, &th) < 0.05);
    CHECK(bc_residual(rs, fo, &om) < 0.05);
    CHECK((fo.sigma - ft.sigma).norm() <= 1e-8 * ft.sigma.norm());

    const DeltaPair d = theta_to_delta(3.0);
    const auto de = BoundaryCoefficient::delta(d.eta, d.tau, n);
    const auto fd = rs.delta(de);
    CHECK(fd.whole_space);
    CHECK(bc_residual(rs, fd, &de) < 0.05);
    const CMat a = rs.evaluate(ft, targets), b = rs.evaluate(fd, targets);
    CHECK((a - b).norm() < 1e-2 * a.norm());

    const CMat g1 = rs.gamma_star(GammaStarPath::trace), g2 = rs.gamma_star(GammaStarPath::direct);
    CHECK((g1 - g2).norm() < 1e-2 * g2.norm());

    // theta -> infinity recovers MIT
    const auto big = BoundaryCoefficient::constant(CoefficientKind::theta, 1e6, n);
    const CMat c = rs.evaluate(mit, targets), e = rs.evaluate(rs.theta(big), targets);
    CHECK((c - e).norm() < 1e-4 * c.norm());
}
