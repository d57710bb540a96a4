#include "dbem/resolvent.hpp"

#include <cmath>
#include <random>

#include "dbem/clifford.hpp"

namespace dbem {

namespace {

double weighted_norm(const SurfaceMesh& mesh, const CMat& t)
{
    double s = 0;
    for (size_t i = 0; i < mesh.size(); ++i) s += mesh.area[i] * t.middleRows(static_cast<Eigen::Index>(4 * i), 4).squaredNorm();
    return std::sqrt(s);
}

// Generalized winding number of the flat triangulation around x.
double winding(const SurfaceMesh& mesh, const Vec3& x)
{
    double w = 0;
    for (const auto& t : mesh.panels) {
        const Vec3 a = mesh.vertices[static_cast<size_t>(t[0])] - x, b = mesh.vertices[static_cast<size_t>(t[1])] - x,
                   c = mesh.vertices[static_cast<size_t>(t[2])] - x;
        const double la = a.norm(), lb = b.norm(), lc = c.norm();
        const double num = a.dot(b.cross(c));
        const double den = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
        w += 2.0 * std::atan2(num, den);
    }
    return w / (4.0 * pi);
}

}  // namespace

CMat extrapolated_trace(const SurfaceMesh& mesh, const FieldEvaluator& f, bool inside)
{
    const size_t n = mesh.size();
    const double sgn = inside ? -1.0 : 1.0;
    std::vector<Vec3> pts;
    pts.reserve(3 * n);
    for (double s : {0.5, 0.25, 0.125})
        for (size_t i = 0; i < n; ++i) pts.push_back(mesh.node[i] + sgn * s * mesh.h * mesh.normal[i]);
    const CMat v = f(pts);
    const auto rows = static_cast<Eigen::Index>(4 * n);
    if (v.rows() != 3 * rows) throw domain_error("extrapolated_trace: evaluator returned the wrong shape");
    return (8.0 * v.middleRows(2 * rows, rows) - 6.0 * v.middleRows(rows, rows) + v.topRows(rows)) / 3.0;
}

ResolventSolver::ResolventSolver(const SpectralParameter& p, const SurfaceMesh& mesh, VolumeSource src,
                                 const QuadratureOptions& q, const VolumeQuadrature& vq)
    : p_(p), mesh_(mesh), src_(std::move(src)), q_(q), vq_(vq), weyl_(p, mesh, q), E_(mesh)
{
    if (mesh.orientation != Orientation::interior) throw usage_error("ResolventSolver: pass the interior-oriented mesh");
    if (!src_.f) throw domain_error("ResolventSolver: empty source");
    u_ = apply_Phi_star(p.conj(), mesh, src_, vq);
    psi_ = weyl_.solve_plus(u_);
}

ResolventField ResolventSolver::mit() const { return {ResolventKind::mit, -psi_, false}; }

CMat ResolventSolver::gamma_star(GammaStarPath path) const
{
    if (path == GammaStarPath::direct) return E_.adjoint(psi_);
    if (!mit_trace_) mit_trace_ = trace(mit(), true);
    return gamma1(E_, *mit_trace_);
}

const CMat& ResolventSolver::weyl_full() const
{
    if (M_.size() == 0) {
        const auto n = static_cast<Eigen::Index>(2 * mesh_.size());
        M_ = weyl_.M_apply(E_, CMat::Identity(n, n));
    }
    return M_;
}

ResolventField ResolventSolver::theta(const BoundaryCoefficient& c, GammaStarPath path) const
{
    if (c.kind != CoefficientKind::theta) throw usage_error("theta resolvent: theta coefficient required");
    c.validate(mesh_.size());
    if (p_.lambda.imag() == 0) throw domain_error("theta resolvent: lambda must be non-real");
    CMat A = -weyl_full();
    for (Eigen::Index i = 0; i < A.rows(); ++i) A(i, i) += c.value[i / 2];
    const DenseLU lu(std::move(A));
    if (lu.rcond() < 1e-12) throw numerical_error("theta resolvent: theta - M(lambda) is near-singular");
    const CMat x = lu.solve(gamma_star(path));
    return {ResolventKind::theta, -psi_ + weyl_.solve_plus(E_.apply(x)), false};
}

ResolventField ResolventSolver::omega(const BoundaryCoefficient& c, GammaStarPath path) const
{
    if (c.kind != CoefficientKind::omega) throw usage_error("omega resolvent: omega coefficient required");
    c.validate(mesh_.size());
    if (p_.lambda.imag() == 0) throw domain_error("omega resolvent: lambda must be non-real");
    RVec w(2 * c.value.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = c.value[i / 2];
    CMat A = -(w.cast<cd>().asDiagonal() * weyl_full());
    A.diagonal().array() += 1.0;
    const DenseLU lu(std::move(A));
    if (lu.rcond() < 1e-12) throw numerical_error("omega resolvent: I - omega M(lambda) is near-singular");
    const CMat x = lu.solve(w.cast<cd>().asDiagonal() * gamma_star(path));
    return {ResolventKind::omega, -psi_ + weyl_.solve_plus(E_.apply(x)), false};
}

ResolventField ResolventSolver::delta(const BoundaryCoefficient& c) const
{
    if (c.kind != CoefficientKind::delta_pair) throw usage_error("delta resolvent: (eta, tau) pair required");
    c.validate(mesh_.size());
    if (!c.is_constant()) throw domain_error("delta resolvent: only constant strengths are supported");
    const C4 D = c.value[0] * identity4() + c.tau[0] * beta();
    const std::vector<C4> Db(mesh_.size(), D);
    CMat A = apply_pointwise(Db, weyl_.C().dense());
    A.diagonal().array() += 1.0;
    const DenseLU lu(std::move(A));
    if (lu.rcond() < 1e-12) throw numerical_error("delta resolvent: I + D C is near-singular");
    return {ResolventKind::delta, -lu.solve(apply_pointwise(Db, u_)), true};
}

CMat ResolventSolver::source_values(const std::vector<Vec3>& points) const
{
    const int kc = src_.components;
    CMat out = CMat::Zero(static_cast<Eigen::Index>(4 * points.size()), kc);
    std::vector<Vec3> in;
    std::vector<size_t> idx;
    for (size_t i = 0; i < points.size(); ++i)
        if (src_.region.contains(points[i])) {
            in.push_back(points[i]);
            idx.push_back(i);
        }
    if (in.empty()) return out;
    const CMat f = src_.f(in);
    for (size_t a = 0; a < in.size(); ++a)
        for (int c = 0; c < kc; ++c)
            out.block<4, 1>(static_cast<Eigen::Index>(4 * idx[a]), c) = f.block<4, 1>(4 * c, static_cast<Eigen::Index>(a));
    return out;
}

CMat ResolventSolver::evaluate(const ResolventField& g, const std::vector<Vec3>& targets) const
{
    if (!g.whole_space)
        for (const auto& x : targets)
            if (winding(mesh_, x) < 0.5) throw domain_error("resolvent: target outside the interior domain");
    CMat out = apply_R(p_, src_, targets, vq_);
    out += potential_blocks(p_, mesh_, targets, q_).apply(g.sigma);
    return out;
}

CMat ResolventSolver::trace(const ResolventField& g, bool inside) const
{
    return extrapolated_trace(mesh_, [&](const std::vector<Vec3>& pts) {
        CMat out = apply_R(p_, src_, pts, vq_);
        out += potential_blocks(p_, mesh_, pts, q_).apply(g.sigma);
        return out;
    }, inside);
}

double pde_residual(const ResolventSolver& s, const ResolventField& g, const std::vector<Vec3>& targets, double step)
{
    static const double c1 = 8.0 / 12.0, c2 = -1.0 / 12.0;
    std::vector<Vec3> pts;
    for (const auto& x : targets) {
        pts.push_back(x);
        for (int j = 0; j < 3; ++j)
            for (double k : {1.0, -1.0, 2.0, -2.0}) pts.push_back(x + k * step * Vec3::Unit(j));
    }
    const CMat v = s.evaluate(g, pts);
    const CMat f = s.source_values(targets);
    const cd lam = s.parameter().lambda;
    const double m = s.parameter().m;
    double num = 0, den = 0;
    for (size_t t = 0; t < targets.size(); ++t) {
        const auto base = static_cast<Eigen::Index>(4 * 13 * t);
        auto at = [&](int k) { return v.middleRows(base + 4 * k, 4); };
        CMat dg = (m * beta() - lam * identity4()) * at(0);
        for (int j = 0; j < 3; ++j) {
            const CMat d = (c1 * (at(1 + 4 * j) - at(2 + 4 * j)) + c2 * (at(3 + 4 * j) - at(4 + 4 * j))) / step;
            dg += cd(0, -1) * alpha(j) * d;
        }
        num += (dg - f.middleRows(static_cast<Eigen::Index>(4 * t), 4)).squaredNorm();
        den += f.middleRows(static_cast<Eigen::Index>(4 * t), 4).squaredNorm();
    }
    return std::sqrt(num / std::max(den, 1e-300));
}

double bc_residual(const ResolventSolver& s, const ResolventField& g, const BoundaryCoefficient* c)
{
    const SurfaceMesh& mesh = s.mesh();
    const size_t n = mesh.size();
    const CMat t = s.trace(g, true);
    CMat r(t.rows(), t.cols());
    double scale = weighted_norm(mesh, t);
    if (g.kind != ResolventKind::mit && !c) throw usage_error("bc_residual: coefficient required");
    if (g.kind == ResolventKind::delta) {
        const CMat te = s.trace(g, false);
        const C4 D = c->value[0] * identity4() + c->tau[0] * beta();
        for (size_t i = 0; i < n; ++i) {
            const auto k = static_cast<Eigen::Index>(4 * i);
            r.middleRows(k, 4) = cd(0, 1) * alpha_dot(mesh.normal[i]) * (t.middleRows(k, 4) - te.middleRows(k, 4)) +
                                 0.5 * D * (t.middleRows(k, 4) + te.middleRows(k, 4));
        }
        scale = weighted_norm(mesh, t) + weighted_norm(mesh, te);
        return weighted_norm(mesh, r) / std::max(scale, 1e-300);
    }
    for (size_t i = 0; i < n; ++i) {
        const auto k = static_cast<Eigen::Index>(4 * i);
        const C4 P = projectors(mesh.normal[i]).plus;
        const CMat pt = P * t.middleRows(k, 4), pbt = P * beta() * t.middleRows(k, 4);
        const double v = c ? c->value[static_cast<Eigen::Index>(i)] : 0.0;
        switch (g.kind) {
        case ResolventKind::mit: r.middleRows(k, 4) = pt; break;
        case ResolventKind::theta: r.middleRows(k, 4) = v * pt - pbt; break;
        case ResolventKind::omega: r.middleRows(k, 4) = pt - v * pbt; break;
        case ResolventKind::delta: break;
        }
    }
    return weighted_norm(mesh, r) / std::max(scale, 1e-300);
}

std::vector<Vec3> interior_targets(const SurfaceMesh& mesh, size_t count, double factor, unsigned seed)
{
    Vec3 lo = Vec3::Constant(1e300), hi = Vec3::Constant(-1e300);
    for (const auto& v : mesh.vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vec3> out;
    for (size_t tries = 0; out.size() < count && tries < 200 * count; ++tries) {
        const Vec3 x = lo + Vec3(u(rng), u(rng), u(rng)).cwiseProduct(hi - lo);
        if (node_distance(mesh, x) > factor * mesh.h && winding(mesh, x) > 0.5) out.push_back(x);
    }
    if (out.size() < count) throw domain_error("interior_targets: could not place enough targets");
    return out;
}

}  // namespace dbem
