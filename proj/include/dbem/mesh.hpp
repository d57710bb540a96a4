#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dbem/types.hpp"

namespace dbem {

enum class Orientation { interior = 1, exterior = -1 };

// Smooth closed surface {p : s(p) = 1} with s(p) = sqrt(sum p_i^2 / a_i^2). An empty
// surface (analytic == false) means panels are treated as flat.
struct Surface {
    bool analytic = false;
    Vec3 axes = Vec3::Ones();

    double level(const Vec3& p) const;
    Vec3 project(const Vec3& p) const;
    Vec3 normal(const Vec3& y) const;
    // Area scale of the projection restricted to the plane with unit normal n at p.
    double jacobian(const Vec3& p, const Vec3& n) const;
    // Derivative of the projection applied to a direction at p.
    Vec3 differential(const Vec3& p, const Vec3& t) const;
};

struct SurfaceMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> panels;
    Orientation orientation = Orientation::interior;
    Surface surface;

    // Per panel. The flat quantities describe the planar triangle; node, normal and area
    // describe the patch of the smooth surface it parametrizes.
    std::vector<Vec3> centroid;
    std::vector<Vec3> flat_normal;
    std::vector<double> flat_area;
    std::vector<Vec3> node;
    std::vector<Vec3> normal;
    std::vector<double> area;
    std::vector<std::array<int, 3>> neighbors;
    double h = 0;

    size_t size() const { return panels.size(); }
    SurfaceMesh flipped() const;
};

struct MeshStats {
    size_t panels = 0;
    size_t vertices = 0;
    double h = 0;
    double area = 0;
    double flat_area = 0;
    double closure = 0;  // |sum area * normal|
    double centroid_offset = 0;  // max distance from a flat centroid to its surface node
};

class MeshError : public Error {
public:
    enum class Code { malformed, non_closed, inconsistent_orientation, degenerate };
    MeshError(Code code, const std::string& what) : Error(ErrorKind::io, what), code_(code) {}
    Code code() const { return code_; }

private:
    Code code_;
};

SurfaceMesh make_sphere(double radius, int level, Orientation orientation = Orientation::interior);
SurfaceMesh make_ellipsoid(double a, double b, double c, int level,
                           Orientation orientation = Orientation::interior);

// Builds panel data from raw geometry; checks closedness and consistent winding.
SurfaceMesh build_mesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> panels, Surface surface,
                       Orientation orientation);

// Flat-panel mesh. Normals follow the right-hand winding; a clockwise (inward) winding is
// read as an exterior-domain mesh.
SurfaceMesh load_off(const std::string& path);
void save_off(const SurfaceMesh& mesh, const std::string& path);

std::uint64_t mesh_hash(const SurfaceMesh& mesh);
MeshStats mesh_stats(const SurfaceMesh& mesh);

}  // namespace dbem
