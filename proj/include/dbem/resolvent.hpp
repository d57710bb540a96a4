#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "dbem/spectral.hpp"

namespace dbem {

// Fields evaluated at points: returns 4 x T per column block (4T x k overall).
using FieldEvaluator = std::function<CMat(const std::vector<Vec3>&)>;

// Boundary values at the nodes by Richardson extrapolation from x_i + s nu_i (outside) or
// x_i - s nu_i (inside), s = h/2, h/4, h/8; nu is the mesh normal. Result is 4N x k.
CMat extrapolated_trace(const SurfaceMesh& mesh, const FieldEvaluator& f, bool inside);

enum class ResolventKind { mit, theta, omega, delta };
enum class GammaStarPath { trace, direct };

// Output of a resolvent as R_lambda f + Phi_lambda sigma.
struct ResolventField {
    ResolventKind kind = ResolventKind::mit;
    CMat sigma;  // 4N x k
    bool whole_space = false;  // delta-shell fields live on R^3
};

// Shared state for all resolvents at one spectral parameter and one source supported in the
// closure of the interior domain.
class ResolventSolver {
public:
    ResolventSolver(const SpectralParameter& p, const SurfaceMesh& mesh, VolumeSource src,
                    const QuadratureOptions& q = {}, const VolumeQuadrature& vq = {});

    const SpectralParameter& parameter() const { return p_; }
    const SurfaceMesh& mesh() const { return mesh_; }
    const VolumeSource& source() const { return src_; }

    // (T_MIT - lambda)^{-1} f = R f - Phi (1/2 B + C)^{-1} Phi_{conj lambda}^* f.
    ResolventField mit() const;
    // gamma(conj lambda)^* f in plus coordinates (2N x k) via either path.
    CMat gamma_star(GammaStarPath path) const;
    ResolventField theta(const BoundaryCoefficient& c, GammaStarPath path = GammaStarPath::trace) const;
    ResolventField omega(const BoundaryCoefficient& c, GammaStarPath path = GammaStarPath::trace) const;
    ResolventField delta(const BoundaryCoefficient& c) const;

    CMat evaluate(const ResolventField& g, const std::vector<Vec3>& targets) const;
    CMat source_values(const std::vector<Vec3>& points) const;
    // Extrapolated traces (4N x k) from the interior or exterior side.
    CMat trace(const ResolventField& g, bool inside) const;
    double rcond() const { return weyl_.rcond(); }

private:
    const CMat& weyl_full() const;

    SpectralParameter p_;
    const SurfaceMesh& mesh_;
    VolumeSource src_;
    QuadratureOptions q_;
    VolumeQuadrature vq_;
    WeylSolver weyl_;
    PlusBasis E_;
    CMat u_;    // Phi_{conj lambda}^* f, 4N x k
    CMat psi_;  // (1/2 B + C)^{-1} u
    mutable CMat M_;
    mutable std::optional<CMat> mit_trace_;
};

struct ResidualReport {
    double pde = 0;  // ||(D - lambda) g - f|| / ||f|| at the targets
    double bc = 0;   // boundary-condition residual / ||trace||
    size_t targets = 0;
};

// Fourth-order central differences with step `step` for the PDE residual.
double pde_residual(const ResolventSolver& s, const ResolventField& g, const std::vector<Vec3>& targets,
                    double step = 0.02);
// Boundary condition of the operator behind g; c is ignored for MIT.
double bc_residual(const ResolventSolver& s, const ResolventField& g, const BoundaryCoefficient* c = nullptr);

// Deterministic interior targets whose node distance exceeds factor * h.
std::vector<Vec3> interior_targets(const SurfaceMesh& mesh, size_t count, double factor, unsigned seed);

}  // namespace dbem
