#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dbem/kernel.hpp"
#include "dbem/mesh.hpp"

namespace dbem {

struct QuadratureOptions {
    double near_factor = 3.0;  // panels closer than near_factor * h get subdivided quadrature
    double near_ratio = 1.0;   // subdivide until diameter < near_ratio * distance
    int max_depth = 10;
    int polar_order = 12;      // Gauss points per direction on the self panel
    bool linear_reconstruction = true;
    double target_guard = 0.1; // potential targets closer than target_guard * h are rejected
};

// Matrix of 4x4 blocks S(i,j) (lambda + m beta) + i sum_q V[q](i,j) alpha_q.
struct DiracBlocks {
    cd lambda;
    double m = 1.0;
    CMat S;
    std::array<CMat, 3> V;

    Eigen::Index rows() const { return S.rows(); }
    Eigen::Index cols() const { return S.cols(); }
    CMat dense() const;
    // x has 4 * cols() rows; result has 4 * rows() rows.
    CMat apply(const CMat& x) const;
};

// Dense operator with provenance; the binary container round-trips it exactly.
struct BoundaryOperator {
    std::string tag;
    cd lambda;
    double m = 1.0;
    std::uint64_t mesh_hash = 0;
    std::uint64_t options_hash = 0;
    CMat matrix;
};

void save_operator(const BoundaryOperator& op, const std::string& path);
BoundaryOperator load_operator(const std::string& path);
std::uint64_t options_hash(const QuadratureOptions& q);

// Per-panel least-squares gradient weights over the two-ring of edge neighbours.
struct GradientStencil {
    std::vector<int> cols;
    Eigen::Matrix<double, 3, Eigen::Dynamic> W;
};
std::vector<GradientStencil> gradient_stencils(const SurfaceMesh& mesh);

// Principal-value operator C_lambda. The parallel and serial versions are bitwise identical.
DiracBlocks assemble_C_blocks(const SpectralParameter& p, const SurfaceMesh& mesh, const QuadratureOptions& q = {});
DiracBlocks assemble_C_blocks_serial(const SpectralParameter& p, const SurfaceMesh& mesh,
                                     const QuadratureOptions& q = {});
BoundaryOperator assemble_C(const SpectralParameter& p, const SurfaceMesh& mesh, const QuadratureOptions& q = {});

// Scalar single layer e^{ik|x-y|}/(4 pi |x-y|) with a Duffy self-panel rule; N x N.
CMat assemble_SL(const SpectralParameter& p, const SurfaceMesh& mesh, const QuadratureOptions& q = {});

// Boundary to volume: rows are targets.
DiracBlocks potential_blocks(const SpectralParameter& p, const SurfaceMesh& mesh, const std::vector<Vec3>& targets,
                             const QuadratureOptions& q = {});
std::array<DiracBlocks, 3> potential_gradient_blocks(const SpectralParameter& p, const SurfaceMesh& mesh,
                                                     const std::vector<Vec3>& targets,
                                                     const QuadratureOptions& q = {});
// Spinor values (4 per target) of Phi_lambda phi.
CVec apply_Phi(const SpectralParameter& p, const SurfaceMesh& mesh, const CVec& phi, const std::vector<Vec3>& targets,
               const QuadratureOptions& q = {});

// Distance from x to the nearest panel node, the guard used for potential targets.
double node_distance(const SurfaceMesh& mesh, const Vec3& x);

// Volume sources live on a radial region a <= |y| <= b around the origin (b may be infinite).
struct RadialRegion {
    double inner = 0;
    double outer = 1;
    bool contains(const Vec3& y) const;
};

using VolumeFunction = std::function<CMat(const std::vector<Vec3>&)>;  // returns 4 x npoints (or 4k x npoints)

struct VolumeSource {
    RadialRegion region;
    VolumeFunction f;
    int components = 1;  // number of spinor fields returned side by side
};

struct VolumeQuadrature {
    int radial = 16;
    int polar = 10;      // Gauss points per polar panel
    int azimuthal = 24;
};

// Target-centred ray rule for integrating over the region; returns nodes and weights.
void ray_rule(const Vec3& x, const RadialRegion& region, const VolumeQuadrature& vq, double decay,
              std::vector<Vec3>& nodes, std::vector<double>& weights);

// int_region G_mu(x - y) f(y) dy for each target x; 4k values per target (k = components).
CMat volume_potential(const SpectralParameter& mu, const VolumeSource& src, const std::vector<Vec3>& targets,
                      const VolumeQuadrature& vq = {});

// Phi_lambda^* f at the panel nodes: kernel G_{conj(lambda)}.
CMat apply_Phi_star(const SpectralParameter& p, const SurfaceMesh& mesh, const VolumeSource& src,
                    const VolumeQuadrature& vq = {});
// R_lambda f at targets.
CMat apply_R(const SpectralParameter& p, const VolumeSource& src, const std::vector<Vec3>& targets,
             const VolumeQuadrature& vq = {});

}  // namespace dbem
