#include "dbem/identities.hpp"

#include <cmath>
#include <random>

#include "dbem/clifford.hpp"
#include "dbem/resolvent.hpp"

namespace dbem {

namespace {

CMat pointwise(const SurfaceMesh& mesh, const CMat& x, const std::function<C4(size_t)>& block)
{
    CMat out(x.rows(), x.cols());
    for (size_t i = 0; i < mesh.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(4 * i);
        out.middleRows(k, 4) = block(i) * x.middleRows(k, 4);
    }
    return out;
}

// Weighted Gram-type matrix <a_i, b_j>_W.
CMat weighted_inner(const SurfaceMesh& mesh, const CMat& a, const CMat& b, int k)
{
    const RVec w = panel_weights(mesh, k);
    return a.adjoint() * w.cast<cd>().asDiagonal() * b;
}

double sphere_radius(const SurfaceMesh& mesh)
{
    double r = 0;
    for (const auto& y : mesh.node) r += y.norm();
    r /= static_cast<double>(mesh.size());
    for (const auto& y : mesh.node)
        if (std::abs(y.norm() - r) > 1e-9 * r) throw domain_error("derivative identity: a sphere mesh is required");
    return r;
}

}  // namespace

CMat probe_densities(const SurfaceMesh& mesh)
{
    const size_t n = mesh.size();
    CMat phi = CMat::Zero(static_cast<Eigen::Index>(4 * n), 6);
    for (size_t i = 0; i < n; ++i) {
        const Vec3& y = mesh.node[i];
        const auto r = static_cast<Eigen::Index>(4 * i);
        phi(r + 0, 0) = 1;
        phi(r + 1, 1) = y[0];
        phi(r + 2, 2) = y[1] * y[2];
        phi(r + 3, 3) = y[0] * y[0] - y[2];
        phi(r + 0, 4) = cd(y[2], y[0]);
        phi(r + 2, 5) = y[0] * y[1] * y[2];
    }
    return phi;
}

CMat random_smooth_densities(const SurfaceMesh& mesh, int count, int degree, unsigned seed)
{
    std::vector<std::array<int, 3>> powers;
    for (int a = 0; a <= degree; ++a)
        for (int b = 0; a + b <= degree; ++b)
            for (int c = 0; a + b + c <= degree; ++c) powers.push_back({a, b, c});
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    const auto np = static_cast<Eigen::Index>(powers.size());
    CMat coef(np, 4 * count);
    for (Eigen::Index j = 0; j < coef.cols(); ++j)
        for (Eigen::Index i = 0; i < np; ++i) coef(i, j) = cd(nd(rng), nd(rng));
    const auto n = static_cast<Eigen::Index>(mesh.size());
    CMat mono(n, np);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index t = 0; t < np; ++t) {
            const Vec3& y = mesh.node[static_cast<size_t>(i)];
            const auto& pw = powers[static_cast<size_t>(t)];
            mono(i, t) = std::pow(y[0], pw[0]) * std::pow(y[1], pw[1]) * std::pow(y[2], pw[2]);
        }
    const CMat v = mono * coef;  // n x 4 count
    CMat phi(4 * n, count);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int c = 0; c < count; ++c)
            for (int a = 0; a < 4; ++a) phi(4 * i + a, c) = v(i, 4 * c + a);
    return phi;
}

double weighted_relative(const SurfaceMesh& mesh, const CMat& r, const CMat& ref, int k)
{
    const RVec w = panel_weights(mesh, k);
    double num = 0, den = 0;
    for (Eigen::Index c = 0; c < r.cols(); ++c) {
        num += r.col(c).cwiseAbs2().dot(w);
        den += ref.col(c).cwiseAbs2().dot(w);
    }
    return std::sqrt(num / std::max(den, 1e-300));
}

double residual_square(const DiracBlocks& C, const SurfaceMesh& mesh)
{
    const CMat phi = probe_densities(mesh);
    auto an = [&](const CMat& x) { return pointwise(mesh, x, [&](size_t i) { return alpha_dot(mesh.normal[i]); }); };
    const CMat r = 4.0 * C.apply(an(C.apply(an(phi)))) + phi;
    return weighted_relative(mesh, r, phi);
}

double residual_anticommutator(const DiracBlocks& C, const CMat& SL, const SurfaceMesh& mesh)
{
    const CMat phi = probe_densities(mesh);
    auto b = [&](const CMat& x) { return pointwise(mesh, x, [](size_t) { return beta(); }); };
    const CMat lhs = C.apply(b(phi)) + b(C.apply(phi));
    // SL acts on each spinor component separately.
    const auto n = static_cast<Eigen::Index>(mesh.size());
    CMat sl(phi.rows(), phi.cols());
    for (Eigen::Index col = 0; col < phi.cols(); ++col)
        for (int c = 0; c < 4; ++c) {
            CVec v(n);
            for (Eigen::Index i = 0; i < n; ++i) v[i] = phi(4 * i + c, col);
            const CVec s = SL * v;
            for (Eigen::Index i = 0; i < n; ++i) sl(4 * i + c, col) = s[i];
        }
    const C4 f = 2.0 * (C.lambda * beta() + C.m * identity4());
    const CMat rhs = pointwise(mesh, sl, [&](size_t) { return f; });
    return weighted_relative(mesh, lhs - rhs, rhs);
}

double residual_inverse(const WeylSolver& w, const SurfaceMesh& mesh)
{
    const PlusBasis E(mesh);
    const CMat x = E.adjoint(probe_densities(mesh));
    const CMat y = w.M_apply(E, w.M_inverse_apply(E, x));
    return weighted_relative(mesh, y - x, x, 2);
}

double residual_jump(const SpectralParameter& p, const DiracBlocks& C, const SurfaceMesh& mesh,
                     const QuadratureOptions& q)
{
    const CMat phi = probe_densities(mesh);
    const CMat t = extrapolated_trace(mesh, [&](const std::vector<Vec3>& pts) {
        return potential_blocks(p, mesh, pts, q).apply(phi);
    }, mesh.orientation == Orientation::interior);
    const CMat ref = C.apply(phi) - pointwise(mesh, phi, [&](size_t i) {
        return C4(cd(0, 0.5) * alpha_dot(mesh.normal[i]));
    });
    return weighted_relative(mesh, t - ref, ref);
}

double residual_derivative(const SpectralParameter& p, const SurfaceMesh& mesh, const QuadratureOptions& q,
                           const VolumeQuadrature& vq, double delta)
{
    const double R = sphere_radius(mesh);
    const CMat phi = probe_densities(mesh);
    const auto k = static_cast<int>(phi.cols());
    const DiracBlocks Cp = assemble_C_blocks({p.lambda + delta, p.m}, mesh, q);
    const DiracBlocks Cm = assemble_C_blocks({p.lambda - delta, p.m}, mesh, q);
    const CMat fd = (Cp.apply(phi) - Cm.apply(phi)) / (2.0 * delta);

    QuadratureOptions qv = q;
    qv.target_guard = 0;
    VolumeSource src;
    src.components = k;
    src.f = [&](const std::vector<Vec3>& pts) {
        const CMat v = potential_blocks(p, mesh, pts, qv).apply(phi);
        CMat out(4 * k, static_cast<Eigen::Index>(pts.size()));
        for (size_t a = 0; a < pts.size(); ++a)
            for (int c = 0; c < k; ++c) out.block<4, 1>(4 * c, static_cast<Eigen::Index>(a)) = v.block<4, 1>(static_cast<Eigen::Index>(4 * a), c);
        return out;
    };
    CMat comp = CMat::Zero(fd.rows(), fd.cols());
    for (const RadialRegion region : {RadialRegion{0, R}, RadialRegion{R, std::numeric_limits<double>::infinity()}}) {
        src.region = region;
        comp += apply_Phi_star(p.conj(), mesh, src, vq);
    }
    return weighted_relative(mesh, fd - comp, comp);
}

double adjoint_defect_C(const DiracBlocks& C, const DiracBlocks& Cbar, const SurfaceMesh& mesh, const CMat& phi)
{
    const CMat a = weighted_inner(mesh, phi, C.apply(phi), 4);
    const CMat b = weighted_inner(mesh, Cbar.apply(phi), phi, 4);
    return (a - b).norm() / a.norm();
}

double adjoint_defect_C_full(const DiracBlocks& C, const DiracBlocks& Cbar, const SurfaceMesh& mesh)
{
    const RVec w = panel_weights(mesh, 4);
    const CMat a = weighted(C.dense(), w), b = weighted(Cbar.dense(), w);
    return (a - b.adjoint()).norm() / a.norm();
}

double adjoint_defect_M(const WeylSolver& w, const WeylSolver& wbar, const SurfaceMesh& mesh, const CMat& phi)
{
    const PlusBasis E(mesh);
    const CMat x = E.adjoint(phi);
    const CMat a = weighted_inner(mesh, x, w.M_apply(E, x), 2);
    const CMat b = weighted_inner(mesh, wbar.M_apply(E, x), x, 2);
    return (a - b).norm() / a.norm();
}

double adjoint_defect_M_full(const CMat& M, const CMat& Mbar, const SurfaceMesh& mesh)
{
    const RVec w = panel_weights(mesh, 2);
    const CMat a = weighted(M, w), b = weighted(Mbar, w);
    return (a - b.adjoint()).norm() / a.norm();
}

double empirical_order(double coarse, double fine, double h_coarse, double h_fine)
{
    return std::log(coarse / fine) / std::log(h_coarse / h_fine);
}

}  // namespace dbem
