#pragma once

#include <memory>

#include "dbem/bem.hpp"
#include "dbem/linalg.hpp"

namespace dbem {

// Block-diagonal 4N x 2N isometry whose panel blocks span ran P+(nu_i). Columns are Gram-Schmidt
// images of P+ e0 and P+ e1, so the first nonzero component of each column is real and positive.
class PlusBasis {
public:
    using Block = Eigen::Matrix<cd, 4, 2>;

    PlusBasis() = default;
    explicit PlusBasis(const SurfaceMesh& mesh);

    size_t panels() const { return blocks_.size(); }
    const Block& block(size_t i) const { return blocks_[i]; }
    // 2N x k -> 4N x k and its adjoint.
    CMat apply(const CMat& x) const;
    CMat adjoint(const CMat& t) const;
    CMat dense() const;

private:
    std::vector<Block> blocks_;
};

PlusBasis plus_basis(const SurfaceMesh& mesh);

// Panel weights repeated per component: k = 2 for compressed, 4 for full densities.
RVec panel_weights(const SurfaceMesh& mesh, int k);

// Block-diagonal multiplication by a 4x4 matrix field, e.g. beta or alpha . nu.
CMat apply_pointwise(const std::vector<C4>& blocks, const CMat& x);
std::vector<C4> beta_blocks(size_t n);
std::vector<C4> alpha_nu_blocks(const SurfaceMesh& mesh);

// Factorized boundary problem at one spectral parameter: C_lambda and LU of (1/2 B + C),
// optionally also of (-1/2 B + C). C does not depend on the normal orientation, so one
// solver serves the interior and the exterior domain.
class WeylSolver {
public:
    WeylSolver(const SpectralParameter& p, const SurfaceMesh& mesh, const QuadratureOptions& q = {},
               bool inverse_form = false);
    WeylSolver(const SpectralParameter& p, const SurfaceMesh& mesh, DiracBlocks C, bool inverse_form = false);

    const SpectralParameter& parameter() const { return p_; }
    const DiracBlocks& C() const { return C_; }
    double rcond() const { return plus_.rcond(); }

    // (1/2 B + C)^{-1} x and (-1/2 B + C)^{-1} x.
    CMat solve_plus(const CMat& x) const;
    CMat solve_minus(const CMat& x) const;

    // M x = -E^H (1/2 B + C)^{-1} E x for the basis E of the chosen orientation.
    CMat M_apply(const PlusBasis& E, const CMat& x) const;
    CMat M_inverse_apply(const PlusBasis& E, const CMat& x) const;

private:
    void factor(const SurfaceMesh& mesh, bool inverse_form);

    SpectralParameter p_;
    DiracBlocks C_;
    DenseLU plus_;
    DenseLU minus_;
};

// Full 2N x 2N matrices, for meshes small enough for dense factorization.
CMat weyl_M(const SpectralParameter& p, const SurfaceMesh& mesh, const QuadratureOptions& q = {});
CMat weyl_M_inverse(const SpectralParameter& p, const SurfaceMesh& mesh, const QuadratureOptions& q = {});

// gamma(lambda) phi at targets: density (1/2 B + C)^{-1} E phi fed into Phi_lambda.
CMat gamma_field(const WeylSolver& w, const SurfaceMesh& mesh, const CMat& phi_plus, const std::vector<Vec3>& targets,
                 const QuadratureOptions& q = {});

// Boundary maps of a trace t (4N): Gamma0 = E^H t, Gamma1 = E^H beta t.
CMat gamma0(const PlusBasis& E, const CMat& trace);
CMat gamma1(const PlusBasis& E, const CMat& trace);

}  // namespace dbem
