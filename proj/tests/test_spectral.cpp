#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "dbem/ball_oracle.hpp"
#include "dbem/spectral.hpp"

using namespace dbem;

TEST_CASE("confinement maps")
{
    for (double t : {-3.0, -0.5, 0.0, 0.3, 2.0, 7.0}) {
        const DeltaPair d = theta_to_delta(t);
        CHECK(d.eta * d.eta - d.tau * d.tau == doctest::Approx(-4.0).epsilon(1e-12));
        CHECK(delta_to_theta(d) == doctest::Approx(t).epsilon(1e-12));
        const DeltaPair e = omega_to_delta(t);
        CHECK(e.eta * e.eta - e.tau * e.tau == doctest::Approx(-4.0).epsilon(1e-12));
        CHECK(delta_to_omega(e) == doctest::Approx(t).epsilon(1e-12));
    }
    CHECK_THROWS_AS(theta_to_delta(1.0), Error);
    CHECK_THROWS_AS(omega_to_delta(-1.0), Error);
}

TEST_CASE("coefficient validation")
{
    CHECK_THROWS_AS(BoundaryCoefficient::constant(CoefficientKind::theta, 1.0, 10).validate(10), Error);
    CHECK_THROWS_AS(BoundaryCoefficient::constant(CoefficientKind::theta, 0.5, 10).validate(11), Error);
    CHECK_NOTHROW(BoundaryCoefficient::constant(CoefficientKind::omega, 0.5, 10).validate(10));
    CHECK_THROWS_AS(BoundaryCoefficient::delta(1.0, 1.0, 10).validate(10, true), Error);
    const DeltaPair d = theta_to_delta(3.0);
    CHECK_NOTHROW(BoundaryCoefficient::delta(d.eta, d.tau, 10).validate(10, true));

    const SurfaceMesh mesh = make_sphere(1.0, 1);
    const auto a = BoundaryCoefficient::affine(CoefficientKind::theta, 0.2, Vec3(0.1, 0, 0), mesh);
    CHECK_FALSE(a.is_constant());
    const auto mapped = confinement_map(a, CoefficientKind::delta_pair);
    for (size_t i = 0; i < mesh.size(); ++i)
        CHECK(mapped.value[i] * mapped.value[i] - mapped.tau[i] * mapped.tau[i] == doctest::Approx(-4.0));
    const auto bad = BoundaryCoefficient::affine(CoefficientKind::theta, 1.0, Vec3::Zero(), mesh);
    CHECK_THROWS_AS(confinement_map(bad, CoefficientKind::delta_pair), Error);
}

TEST_CASE("Chebyshev family interpolates analytic matrix functions")
{
    ChebyshevFamily f(1.0, -0.9, 0.9, 16);
    auto exact = [](cd l) {
        CMat a(2, 2);
        a << l, 1.0 / (l - 3.0), std::conj(1.0 / (std::conj(l) - 3.0)), l * l;
        return a;
    };
    for (int j = 0; j < f.nodes(); ++j) f.set(j, exact(f.node_lambda(j)));
    for (cd l : {cd(0.1, 0), cd(-0.73, 0), cd(0.3, 0.05)}) CHECK((f(l) - exact(l)).norm() < 1e-8);
    CHECK(f.tail() < 1e-7);
}

TEST_CASE("root matching and grouping")
{
    const MatchReport ok = match_roots({-0.5, 0.1, 0.1}, {0.1001, -0.5002, 0.0999}, 1e-3);
    CHECK(ok.ok);
    CHECK(ok.max_delta == doctest::Approx(2e-4).epsilon(1e-6));
    const MatchReport bad = match_roots({0.1, 0.1}, {0.1}, 1e-3);
    CHECK_FALSE(bad.ok);
    const MatchReport extra = match_roots({0.1}, {0.1, 0.4}, 1e-3);
    CHECK_FALSE(extra.ok);
    CHECK(extra.extra.size() == 1);

    std::vector<ScanRoot> roots;
    for (double l : {-0.3, -0.2999, 0.5, 0.5001, 0.5002}) roots.push_back({l, 0, {}});
    const auto g = group_roots(roots, 1e-2);
    REQUIRE(g.size() == 2);
    CHECK(g[0].second == 2);
    CHECK(g[1].second == 3);
}

namespace {

ReducedFamily::Options family_options()
{
    ReducedFamily::Options o;
    o.nodes = 12;
    return o;
}

const SurfaceMesh& level2()
{
    static const SurfaceMesh mesh = make_sphere(1.0, 2);
    return mesh;
}

const ReducedFamily& level2_family()
{
    static const ReducedFamily fam(level2(), 1.0, family_options());
    return fam;
}

}  // namespace

TEST_CASE("level-2 sphere scans")
{
    const SurfaceMesh& mesh = level2();
    const ReducedFamily::Options o = family_options();
    const ReducedFamily& fam = level2_family();
    CHECK(fam.M(Orientation::interior).tail() < 1e-5);
    CHECK(fam.Q(Orientation::interior).cols() > 0);
    const size_t n = mesh.size();

    for (bool ext : {false, true}) {
        const Orientation ori = ext ? Orientation::exterior : Orientation::interior;
        const SpectralScan s = scan(fam, ScanForm::theta, BoundaryCoefficient::constant(CoefficientKind::theta, 0.5, n), ori);
        CHECK(s.wrong_direction == 0);
        std::vector<double> found;
        for (const auto& r : s.roots) found.push_back(r.lambda);
        const auto oracle = oracle_eigenvalues(BoundaryForm::theta, 0.5, 1, 1, o.lo, o.hi, 8, ext);
        CHECK(match_roots(expand_multiplicities(oracle.roots), found, 2e-2).ok);
    }

    // MIT and strongly confining conditions: no eigenvalues in the gap
    CHECK(scan(fam, ScanForm::omega, BoundaryCoefficient::constant(CoefficientKind::omega, 0.0, n), Orientation::interior)
              .roots.empty());
    CHECK(scan(fam, ScanForm::theta, BoundaryCoefficient::constant(CoefficientKind::theta, 3.0, n), Orientation::interior)
              .roots.empty());

    // omega = 1 / theta describes the same operator
    const auto st = scan(fam, ScanForm::theta, BoundaryCoefficient::constant(CoefficientKind::theta, -0.5, n),
                         Orientation::interior);
    const auto so = scan(fam, ScanForm::omega, BoundaryCoefficient::constant(CoefficientKind::omega, -2.0, n),
                         Orientation::interior);
    REQUIRE(st.roots.size() == so.roots.size());
    for (size_t i = 0; i < st.roots.size(); ++i) CHECK(std::abs(st.roots[i].lambda - so.roots[i].lambda) < 1e-6);

    SUBCASE("eigenfunction multiplicity")
    {
        REQUIRE_FALSE(st.roots.empty());
        const auto groups = group_roots(st.roots, 2e-2);
        const Eigenfunction ef = eigenfunction(fam, ScanForm::theta,
                                               BoundaryCoefficient::constant(CoefficientKind::theta, -0.5, n),
                                               Orientation::interior, groups.front().first, 1e-6, 2e-2);
        CHECK(ef.multiplicity == groups.front().second);
        CHECK(ef.phi.cols() == ef.multiplicity);
    }

    SUBCASE("cache round trip")
    {
        const auto path = (std::filesystem::temp_directory_path() / "dbem_test_family.bin").string();
        fam.save(path);
        const ReducedFamily back = ReducedFamily::load(path, mesh, 1.0, o);
        CHECK((back.M(Orientation::exterior).value(3) - fam.M(Orientation::exterior).value(3)).norm() == 0);
        CHECK((back.C().value(5) - fam.C().value(5)).norm() == 0);
        ReducedFamily::Options other = o;
        other.degree = 5;
        CHECK_THROWS_AS(ReducedFamily::load(path, mesh, 1.0, other), Error);
        CHECK_THROWS_AS(ReducedFamily::load(path, make_sphere(1.0, 1), 1.0, o), Error);
        std::filesystem::remove(path);
    }
}
