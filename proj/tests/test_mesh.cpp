#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dbem/mesh.hpp"

using namespace dbem;

TEST_CASE("icosphere refinement")
{
    double prev_h = 1e9, prev_err = 1e9;
    for (int level = 0; level <= 3; ++level) {
        const SurfaceMesh m = make_sphere(1.0, level);
        const MeshStats s = mesh_stats(m);
        CHECK(s.panels == 20u << (2 * level));
        CHECK(s.vertices == s.panels / 2 + 2);
        CHECK(s.h < prev_h);
        CHECK(s.closure < 1e-12);
        const double err = std::abs(s.area - 4 * pi);
        CHECK(err < prev_err);
        CHECK(s.flat_area < 4 * pi);
        prev_h = s.h;
        prev_err = err;
        for (size_t i = 0; i < m.size(); ++i) {
            CHECK(std::abs(m.node[i].norm() - 1.0) < 1e-12);
            CHECK(m.normal[i].dot(m.node[i]) > 0.999);
        }
    }
}

TEST_CASE("ellipsoid nodes lie on the surface with outward normals")
{
    const SurfaceMesh m = make_ellipsoid(1.0, 0.8, 0.6, 2);
    for (size_t i = 0; i < m.size(); ++i) {
        CHECK(std::abs(m.surface.level(m.node[i]) - 1.0) < 1e-12);
        CHECK(m.normal[i].dot(m.node[i]) > 0);
    }
    CHECK(mesh_stats(m).closure < 1e-10);
}

TEST_CASE("flipping reverses the normals and changes the hash")
{
    const SurfaceMesh m = make_sphere(1.0, 1);
    const SurfaceMesh f = m.flipped();
    CHECK(f.orientation == Orientation::exterior);
    for (size_t i = 0; i < m.size(); ++i) CHECK((m.normal[i] + f.normal[i]).norm() < 1e-14);
    CHECK(mesh_hash(m) != mesh_hash(f));
    CHECK(mesh_hash(m) == mesh_hash(make_sphere(1.0, 1)));
    CHECK(mesh_hash(m) != mesh_hash(make_sphere(1.0, 2)));
}

TEST_CASE("OFF round trip and malformed input")
{
    const auto dir = std::filesystem::temp_directory_path() / "dbem_test_mesh";
    std::filesystem::create_directories(dir);
    const SurfaceMesh m = make_sphere(1.0, 1);
    save_off(m, (dir / "s.off").string());
    const SurfaceMesh r = load_off((dir / "s.off").string());
    CHECK(r.size() == m.size());
    CHECK(r.orientation == Orientation::interior);
    CHECK(std::abs(mesh_stats(r).flat_area - mesh_stats(m).flat_area) < 1e-9);

    // drop one face: no longer closed
    {
        std::ofstream o(dir / "open.off");
        o << "OFF\n" << m.vertices.size() << " " << m.size() - 1 << " 0\n";
        o.precision(17);
        for (const auto& v : m.vertices) o << v.x() << " " << v.y() << " " << v.z() << "\n";
        for (size_t i = 1; i < m.size(); ++i)
            o << "3 " << m.panels[i][0] << " " << m.panels[i][1] << " " << m.panels[i][2] << "\n";
    }
    try {
        load_off((dir / "open.off").string());
        FAIL("open mesh accepted");
    } catch (const MeshError& e) {
        CHECK(e.code() == MeshError::Code::non_closed);
    }

    {
        std::ofstream o(dir / "bad.off");
        o << "OFF\n3 1 0\n0 0 0\n1 0 0\n";
    }
    try {
        load_off((dir / "bad.off").string());
        FAIL("truncated mesh accepted");
    } catch (const MeshError& e) {
        CHECK(e.code() == MeshError::Code::malformed);
    }

    // one face with reversed winding
    {
        std::ofstream o(dir / "wind.off");
        o << "OFF\n" << m.vertices.size() << " " << m.size() << " 0\n";
        o.precision(17);
        for (const auto& v : m.vertices) o << v.x() << " " << v.y() << " " << v.z() << "\n";
        for (size_t i = 0; i < m.size(); ++i) {
            auto p = m.panels[i];
            if (i == 0) std::swap(p[1], p[2]);
            o << "3 " << p[0] << " " << p[1] << " " << p[2] << "\n";
        }
    }
    try {
        load_off((dir / "wind.off").string());
        FAIL("inconsistent winding accepted");
    } catch (const MeshError& e) {
        CHECK(e.code() == MeshError::Code::inconsistent_orientation);
    }
    std::filesystem::remove_all(dir);
}
