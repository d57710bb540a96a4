#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dbem/bem.hpp"
#include "dbem/clifford.hpp"
#include "dbem/identities.hpp"

using namespace dbem;

namespace {

std::filesystem::path scratch()
{
    const auto dir = std::filesystem::temp_directory_path() / "dbem_test_bem";
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("parallel and serial assembly are bitwise identical")
{
    const SurfaceMesh mesh = make_sphere(1.0, 1);
    const SpectralParameter p{cd(0.2, 0.3), 1.0};
    const DiracBlocks a = assemble_C_blocks(p, mesh);
    const DiracBlocks b = assemble_C_blocks_serial(p, mesh);
    CHECK(a.S == b.S);
    for (int q = 0; q < 3; ++q) CHECK(a.V[q] == b.V[q]);
}

TEST_CASE("block application matches the dense matrix")
{
    const SurfaceMesh mesh = make_sphere(1.0, 1);
    const DiracBlocks C = assemble_C_blocks({cd(0.5, 0), 1.0}, mesh);
    const CMat x = CMat::Random(4 * static_cast<Eigen::Index>(mesh.size()), 3);
    CHECK((C.apply(x) - C.dense() * x).norm() < 1e-12 * (C.dense() * x).norm());
}

TEST_CASE("operator identities at level 2")
{
    const SurfaceMesh mesh = make_sphere(1.0, 2);
    for (cd l : {cd(0, 0), cd(0.5, 0), cd(0, 0.3)}) {
        const SpectralParameter p{l, 1.0};
        const DiracBlocks C = assemble_C_blocks(p, mesh);
        CHECK(residual_square(C, mesh) < 0.05);
        CHECK(residual_anticommutator(C, assemble_SL(p, mesh), mesh) < 0.02);
        CHECK(residual_jump(p, C, mesh) < 0.05);
    }
}

TEST_CASE("C does not depend on the normal orientation")
{
    const SurfaceMesh mesh = make_sphere(1.0, 1);
    const SpectralParameter p{cd(0.5, 0), 1.0};
    const CMat a = assemble_C_blocks(p, mesh).dense(), b = assemble_C_blocks(p, mesh.flipped()).dense();
    CHECK((a - b).norm() < 1e-12 * a.norm());
}

TEST_CASE("operator container round trip and tamper detection")
{
    const SurfaceMesh mesh = make_sphere(1.0, 0);
    const SpectralParameter p{cd(0.1, 0.2), 1.0};
    const BoundaryOperator op = assemble_C(p, mesh);
    const auto path = (scratch() / "c.bin").string();
    save_operator(op, path);
    const BoundaryOperator r = load_operator(path);
    CHECK(r.tag == op.tag);
    CHECK(r.lambda == op.lambda);
    CHECK(r.mesh_hash == mesh_hash(mesh));
    CHECK(r.options_hash == op.options_hash);
    CHECK(r.matrix == op.matrix);

    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(200);
        char c = 0;
        f.read(&c, 1);
        f.seekp(200);
        c = static_cast<char>(c ^ 0x10);
        f.write(&c, 1);
    }
    try {
        load_operator(path);
        FAIL("tampered file accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::io);
    }
    CHECK_THROWS_AS(load_operator((scratch() / "missing.bin").string()), Error);
}

TEST_CASE("quadrature options hash")
{
    QuadratureOptions a, b;
    CHECK(options_hash(a) == options_hash(b));
    b.polar_order = 8;
    CHECK(options_hash(a) != options_hash(b));
}

TEST_CASE("volume potential of a constant over the ball")
{
    // With m, lambda -> 0 the kernel is i (alpha . x) / (4 pi |x|^3), and the potential of a
    // constant e0 over the unit ball is i (alpha . x / 3) e0 inside.
    const SpectralParameter p{cd(0, 1e-7), 1e-9};
    VolumeSource src;
    src.region = {0, 1};
    src.f = [](const std::vector<Vec3>& y) {
        CMat f = CMat::Zero(4, static_cast<Eigen::Index>(y.size()));
        f.row(0).setOnes();
        return f;
    };
    const std::vector<Vec3> x = {Vec3(0.1, 0.2, -0.1), Vec3(0.4, 0.0, 0.3)};
    const CMat u = volume_potential(p, src, x, {24, 12, 24});
    for (size_t t = 0; t < x.size(); ++t) {
        V4 e = V4::Zero();
        e(0) = 1;
        const V4 exact = cd(0, 1.0 / 3.0) * (alpha_dot(x[t]) * e);
        const V4 got = u.block(4 * static_cast<Eigen::Index>(t), 0, 4, 1);
        CHECK((got - exact).norm() < 1e-5 * exact.norm());
    }
}
