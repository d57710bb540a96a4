#include "dbem/weyl.hpp"

#include <cmath>

#include "dbem/clifford.hpp"

namespace dbem {

PlusBasis::PlusBasis(const SurfaceMesh& mesh) : blocks_(mesh.size())
{
    for (size_t i = 0; i < mesh.size(); ++i) {
        const C4 P = projectors(mesh.normal[i]).plus;
        V4 a = P.col(0);
        a /= a.norm();
        V4 b = P.col(1);
        b -= a * a.dot(b);
        b /= b.norm();
        blocks_[i].col(0) = a;
        blocks_[i].col(1) = b;
    }
}

CMat PlusBasis::apply(const CMat& x) const
{
    if (x.rows() != static_cast<Eigen::Index>(2 * panels())) throw domain_error("PlusBasis: size mismatch");
    CMat out(4 * x.rows() / 2, x.cols());
    for (size_t i = 0; i < panels(); ++i)
        out.middleRows(static_cast<Eigen::Index>(4 * i), 4).noalias() =
            blocks_[i] * x.middleRows(static_cast<Eigen::Index>(2 * i), 2);
    return out;
}

CMat PlusBasis::adjoint(const CMat& t) const
{
    if (t.rows() != static_cast<Eigen::Index>(4 * panels())) throw domain_error("PlusBasis: size mismatch");
    CMat out(t.rows() / 2, t.cols());
    for (size_t i = 0; i < panels(); ++i)
        out.middleRows(static_cast<Eigen::Index>(2 * i), 2).noalias() =
            blocks_[i].adjoint() * t.middleRows(static_cast<Eigen::Index>(4 * i), 4);
    return out;
}

CMat PlusBasis::dense() const
{
    const auto n = static_cast<Eigen::Index>(panels());
    CMat E = CMat::Zero(4 * n, 2 * n);
    for (Eigen::Index i = 0; i < n; ++i) E.block<4, 2>(4 * i, 2 * i) = blocks_[static_cast<size_t>(i)];
    return E;
}

PlusBasis plus_basis(const SurfaceMesh& mesh) { return PlusBasis(mesh); }

RVec panel_weights(const SurfaceMesh& mesh, int k)
{
    RVec w(static_cast<Eigen::Index>(k * mesh.size()));
    for (size_t i = 0; i < mesh.size(); ++i)
        for (int a = 0; a < k; ++a) w[static_cast<Eigen::Index>(k * i) + a] = mesh.area[i];
    return w;
}

CMat apply_pointwise(const std::vector<C4>& blocks, const CMat& x)
{
    if (x.rows() != static_cast<Eigen::Index>(4 * blocks.size())) throw domain_error("apply_pointwise: size mismatch");
    CMat out(x.rows(), x.cols());
    for (size_t i = 0; i < blocks.size(); ++i)
        out.middleRows(static_cast<Eigen::Index>(4 * i), 4).noalias() = blocks[i] * x.middleRows(static_cast<Eigen::Index>(4 * i), 4);
    return out;
}

std::vector<C4> beta_blocks(size_t n) { return std::vector<C4>(n, beta()); }

std::vector<C4> alpha_nu_blocks(const SurfaceMesh& mesh)
{
    std::vector<C4> out(mesh.size());
    for (size_t i = 0; i < mesh.size(); ++i) out[i] = alpha_dot(mesh.normal[i]);
    return out;
}

WeylSolver::WeylSolver(const SpectralParameter& p, const SurfaceMesh& mesh, const QuadratureOptions& q, bool inverse_form)
    : p_(p), C_(assemble_C_blocks(p, mesh, q))
{
    factor(mesh, inverse_form);
}

WeylSolver::WeylSolver(const SpectralParameter& p, const SurfaceMesh& mesh, DiracBlocks C, bool inverse_form)
    : p_(p), C_(std::move(C))
{
    factor(mesh, inverse_form);
}

void WeylSolver::factor(const SurfaceMesh& mesh, bool inverse_form)
{
    const size_t n = mesh.size();
    CMat K = C_.dense();
    CMat K2;
    if (inverse_form) K2 = K;
    for (size_t i = 0; i < n; ++i) K.block<4, 4>(static_cast<Eigen::Index>(4 * i), static_cast<Eigen::Index>(4 * i)) += 0.5 * beta();
    plus_ = DenseLU(std::move(K));
    if (plus_.rcond() < 1e-12) throw numerical_error("WeylSolver: 1/2 beta + C is near-singular (lambda near an MIT eigenvalue)");
    if (inverse_form) {
        for (size_t i = 0; i < n; ++i)
            K2.block<4, 4>(static_cast<Eigen::Index>(4 * i), static_cast<Eigen::Index>(4 * i)) -= 0.5 * beta();
        minus_ = DenseLU(std::move(K2));
        if (minus_.rcond() < 1e-12) throw numerical_error("WeylSolver: -1/2 beta + C is near-singular");
    }
}

CMat WeylSolver::solve_plus(const CMat& x) const { return plus_.solve(x); }

CMat WeylSolver::solve_minus(const CMat& x) const
{
    if (minus_.size() == 0) throw usage_error("WeylSolver: constructed without the inverse form");
    return minus_.solve(x);
}

CMat WeylSolver::M_apply(const PlusBasis& E, const CMat& x) const { return -E.adjoint(plus_.solve(E.apply(x))); }

CMat WeylSolver::M_inverse_apply(const PlusBasis& E, const CMat& x) const
{
    const auto B = beta_blocks(E.panels());
    return E.adjoint(apply_pointwise(B, solve_minus(apply_pointwise(B, E.apply(x)))));
}

CMat weyl_M(const SpectralParameter& p, const SurfaceMesh& mesh, const QuadratureOptions& q)
{
    const WeylSolver w(p, mesh, q);
    const PlusBasis E(mesh);
    const auto n = static_cast<Eigen::Index>(2 * mesh.size());
    return w.M_apply(E, CMat::Identity(n, n));
}

CMat weyl_M_inverse(const SpectralParameter& p, const SurfaceMesh& mesh, const QuadratureOptions& q)
{
    const WeylSolver w(p, mesh, q, true);
    const PlusBasis E(mesh);
    const auto n = static_cast<Eigen::Index>(2 * mesh.size());
    return w.M_inverse_apply(E, CMat::Identity(n, n));
}

CMat gamma_field(const WeylSolver& w, const SurfaceMesh& mesh, const CMat& phi_plus, const std::vector<Vec3>& targets,
                 const QuadratureOptions& q)
{
    const CMat psi = w.solve_plus(PlusBasis(mesh).apply(phi_plus));
    return potential_blocks(w.parameter(), mesh, targets, q).apply(psi);
}

CMat gamma0(const PlusBasis& E, const CMat& trace) { return E.adjoint(trace); }

CMat gamma1(const PlusBasis& E, const CMat& trace) { return E.adjoint(apply_pointwise(beta_blocks(E.panels()), trace)); }

}  // namespace dbem
