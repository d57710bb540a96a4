#include "dbem/bem.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "dbem/binio.hpp"
#include "dbem/clifford.hpp"
#include "dbem/quadrature.hpp"

namespace dbem {

namespace {

const cd I1(0, 1);

struct QuadPoint {
    Vec3 y;  // point on the surface
    Vec3 u;  // flat offset from the panel centroid
    double w;
};

// Adaptive subdivision of the flat panel j towards target; points mapped to the surface.
void subdivided_points(const SurfaceMesh& mesh, size_t j, const Vec3& target, const QuadratureOptions& q,
                       std::vector<QuadPoint>& out)
{
    out.clear();
    const TriangleRule& tr = dunavant7();
    struct Item {
        std::array<Vec3, 3> t;
        int depth;
    };
    const auto& pj = mesh.panels[j];
    std::vector<Item> stack;
    stack.push_back({{mesh.vertices[static_cast<size_t>(pj[0])], mesh.vertices[static_cast<size_t>(pj[1])],
                      mesh.vertices[static_cast<size_t>(pj[2])]},
                     0});
    while (!stack.empty()) {
        const Item it = stack.back();
        stack.pop_back();
        const auto& t = it.t;
        const Vec3 cen = (t[0] + t[1] + t[2]) / 3.0;
        const double diam = std::max({(t[0] - t[1]).norm(), (t[1] - t[2]).norm(), (t[2] - t[0]).norm()});
        if (diam < q.near_ratio * (cen - target).norm() || it.depth >= q.max_depth) {
            const double area = 0.5 * (t[1] - t[0]).cross(t[2] - t[0]).norm();
            for (size_t k = 0; k < tr.w.size(); ++k) {
                const Vec3 p = tr.bary[k][0] * t[0] + tr.bary[k][1] * t[1] + tr.bary[k][2] * t[2];
                out.push_back({mesh.surface.project(p), p - mesh.centroid[j],
                               tr.w[k] * area * mesh.surface.jacobian(p, mesh.flat_normal[j])});
            }
        } else {
            const Vec3 ab = 0.5 * (t[0] + t[1]), bc = 0.5 * (t[1] + t[2]), ca = 0.5 * (t[2] + t[0]);
            stack.push_back({{t[0], ab, ca}, it.depth + 1});
            stack.push_back({{ab, t[1], bc}, it.depth + 1});
            stack.push_back({{ca, bc, t[2]}, it.depth + 1});
            stack.push_back({{ab, bc, ca}, it.depth + 1});
        }
    }
}

// Moments of a panel integral against the flat offset, used by the linear reconstruction.
struct Moments {
    std::array<cd, 3> g{};                 // int g u_p
    Eigen::Matrix<cd, 3, 3> h = Eigen::Matrix<cd, 3, 3>::Zero();  // int h d_q u_p, (q, p)
};

struct Entry {
    cd s = 0;
    CVec3 v = CVec3::Zero();
    Moments mom;
};

void integrate_points(cd k, const Vec3& x, const std::vector<QuadPoint>& pts, Entry& e)
{
    for (const auto& qp : pts) {
        const Vec3 d = x - qp.y;
        const KernelParts kp = kernel_parts(k, d.norm());
        const cd gw = kp.g * qp.w, hw = kp.h * qp.w;
        e.s += gw;
        e.v += hw * d.cast<cd>();
        for (int p = 0; p < 3; ++p) {
            e.mom.g[static_cast<size_t>(p)] += gw * qp.u[p];
            for (int qq = 0; qq < 3; ++qq) e.mom.h(qq, p) += hw * d[qq] * qp.u[p];
        }
    }
}

// Self panel: polar rule about the centroid in the flat parameter plane. The strongly
// singular leading part a(theta)/rho is removed and its principal value added back as
// int a(theta) ln R(theta) dtheta.
Entry self_entry(cd k, const SurfaceMesh& mesh, size_t i, const QuadratureOptions& q, bool vector_part)
{
    Entry e;
    const Rule1D& gl = gauss_legendre(q.polar_order);
    const auto& pi_ = mesh.panels[i];
    const Vec3& c = mesh.centroid[i];
    const Vec3& x = mesh.node[i];
    const Vec3& nf = mesh.flat_normal[i];
    const double J0 = mesh.surface.jacobian(c, nf);
    for (int s = 0; s < 3; ++s) {
        const Vec3 a = mesh.vertices[static_cast<size_t>(pi_[static_cast<size_t>(s)])];
        const Vec3 b = mesh.vertices[static_cast<size_t>(pi_[static_cast<size_t>((s + 1) % 3)])];
        const Vec3 ua = a - c, ub = b - c;
        const Vec3 e1 = ua.normalized();
        const Vec3 nrm = ua.cross(ub).normalized();
        const Vec3 e2 = nrm.cross(e1);
        const double thb = std::atan2(ub.dot(e2), ub.dot(e1));
        const Vec3 ed = b - a;
        const Vec3 foot = ua - (ua.dot(ed) / ed.dot(ed)) * ed;
        const double dd = foot.norm();
        const double ph = std::atan2(foot.dot(e2), foot.dot(e1));
        for (size_t it = 0; it < gl.x.size(); ++it) {
            const double th = 0.5 * thb * (gl.x[it] + 1.0);
            const double wt = 0.5 * thb * gl.w[it];
            const Vec3 dir = std::cos(th) * e1 + std::sin(th) * e2;
            const double R = dd / std::cos(th - ph);
            const Vec3 Le = mesh.surface.differential(c, dir);
            const double ln = Le.norm();
            const Vec3 lead = -J0 * Le / (4.0 * pi * ln * ln * ln);
            CVec3 acc = CVec3::Zero();
            for (size_t ir = 0; ir < gl.x.size(); ++ir) {
                const double rho = 0.5 * R * (gl.x[ir] + 1.0);
                const double rw = 0.5 * R * gl.w[ir];
                const Vec3 p = c + rho * dir;
                const Vec3 y = mesh.surface.project(p);
                const double Jp = mesh.surface.jacobian(p, nf);
                const Vec3 d = x - y;
                const KernelParts kp = kernel_parts(k, d.norm());
                const double W = Jp * rho * rw * wt;
                const cd gw = kp.g * W, hw = kp.h * W;
                e.s += gw;
                if (vector_part) {
                    acc += (kp.h * Jp * rho) * rw * d.cast<cd>() - (rw / rho) * lead.cast<cd>();
                    const Vec3 u = rho * dir;
                    for (int pp = 0; pp < 3; ++pp) {
                        e.mom.g[static_cast<size_t>(pp)] += gw * u[pp];
                        for (int qq = 0; qq < 3; ++qq) e.mom.h(qq, pp) += hw * d[qq] * u[pp];
                    }
                }
            }
            if (vector_part) e.v += wt * (acc + std::log(R) * lead.cast<cd>());
        }
    }
    return e;
}

// Duffy rule for the weakly singular scalar kernel on the self panel.
cd self_scalar_duffy(cd k, const SurfaceMesh& mesh, size_t i, const QuadratureOptions& q)
{
    const Rule1D& gl = gauss_legendre(q.polar_order);
    const auto& pi_ = mesh.panels[i];
    const Vec3& c = mesh.centroid[i];
    const Vec3& x = mesh.node[i];
    cd s = 0;
    for (int t = 0; t < 3; ++t) {
        const Vec3 a = mesh.vertices[static_cast<size_t>(pi_[static_cast<size_t>(t)])];
        const Vec3 b = mesh.vertices[static_cast<size_t>(pi_[static_cast<size_t>((t + 1) % 3)])];
        const double jac = (a - c).cross(b - a).norm();
        for (size_t iu = 0; iu < gl.x.size(); ++iu) {
            const double u = 0.5 * (gl.x[iu] + 1.0);
            for (size_t iv = 0; iv < gl.x.size(); ++iv) {
                const double v = 0.5 * (gl.x[iv] + 1.0);
                const Vec3 p = c + u * ((a - c) + v * (b - a));
                const double w = 0.25 * gl.w[iu] * gl.w[iv] * u * jac * mesh.surface.jacobian(p, mesh.flat_normal[i]);
                const KernelParts kp = kernel_parts(k, (x - mesh.surface.project(p)).norm());
                s += kp.g * w;
            }
        }
    }
    return s;
}

void add_reconstruction(const GradientStencil& st, int j, const Moments& mom, Eigen::Index row, DiracBlocks& B)
{
    for (Eigen::Index kk = 0; kk < static_cast<Eigen::Index>(st.cols.size()); ++kk) {
        const int col = st.cols[static_cast<size_t>(kk)];
        cd ds = 0;
        CVec3 dv = CVec3::Zero();
        for (int p = 0; p < 3; ++p) {
            const double w = st.W(p, kk);
            ds += w * mom.g[static_cast<size_t>(p)];
            for (int qq = 0; qq < 3; ++qq) dv[qq] += w * mom.h(qq, p);
        }
        B.S(row, col) += ds;
        B.S(row, j) -= ds;
        for (int qq = 0; qq < 3; ++qq) {
            B.V[static_cast<size_t>(qq)](row, col) += dv[qq];
            B.V[static_cast<size_t>(qq)](row, j) -= dv[qq];
        }
    }
}

DiracBlocks empty_blocks(const SpectralParameter& p, Eigen::Index rows, Eigen::Index cols)
{
    DiracBlocks B;
    B.lambda = p.lambda;
    B.m = p.m;
    B.S = CMat::Zero(rows, cols);
    for (auto& v : B.V) v = CMat::Zero(rows, cols);
    return B;
}

bool is_near(const SurfaceMesh& mesh, const Vec3& x, size_t j, const QuadratureOptions& q)
{
    return (x - mesh.node[j]).norm() < q.near_factor * mesh.h;
}

struct RowContext {
    cd k;
    const SurfaceMesh& mesh;
    const QuadratureOptions& q;
    const std::vector<GradientStencil>& stencils;
};

void assemble_row(const RowContext& ctx, size_t i, DiracBlocks& B, std::vector<QuadPoint>& pts)
{
    const SurfaceMesh& mesh = ctx.mesh;
    const size_t n = mesh.size();
    const Vec3& x = mesh.node[i];
    const auto row = static_cast<Eigen::Index>(i);
    std::vector<std::pair<int, Moments>> recon;
    for (size_t j = 0; j < n; ++j) {
        const auto col = static_cast<Eigen::Index>(j);
        if (j == i) {
            const Entry e = self_entry(ctx.k, mesh, i, ctx.q, true);
            B.S(row, col) = e.s;
            for (int qq = 0; qq < 3; ++qq) B.V[static_cast<size_t>(qq)](row, col) = e.v[qq];
            recon.emplace_back(static_cast<int>(j), e.mom);
        } else if (is_near(mesh, x, j, ctx.q)) {
            subdivided_points(mesh, j, mesh.centroid[i], ctx.q, pts);
            Entry e;
            integrate_points(ctx.k, x, pts, e);
            B.S(row, col) = e.s;
            for (int qq = 0; qq < 3; ++qq) B.V[static_cast<size_t>(qq)](row, col) = e.v[qq];
            recon.emplace_back(static_cast<int>(j), e.mom);
        } else {
            const Vec3 d = x - mesh.node[j];
            const KernelParts kp = kernel_parts(ctx.k, d.norm());
            B.S(row, col) = kp.g * mesh.area[j];
            for (int qq = 0; qq < 3; ++qq) B.V[static_cast<size_t>(qq)](row, col) = kp.h * d[qq] * mesh.area[j];
        }
    }
    if (ctx.q.linear_reconstruction)
        for (const auto& [j, mom] : recon) add_reconstruction(ctx.stencils[static_cast<size_t>(j)], j, mom, row, B);
}

void check_mesh(const SurfaceMesh& mesh)
{
    if (mesh.size() == 0) throw domain_error("assembly: empty mesh");
    if (mesh.size() > 5120) throw domain_error("assembly: panel count above 5120 rejected");
}

}  // namespace

CMat DiracBlocks::dense() const
{
    const Eigen::Index r = rows(), c = cols();
    CMat out(4 * r, 4 * c);
    const C4 a0 = lambda * identity4() + m * beta();
    std::array<C4, 3> ia;
    for (int q = 0; q < 3; ++q) ia[static_cast<size_t>(q)] = I1 * alpha(q);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i)
            out.block<4, 4>(4 * i, 4 * j) =
                S(i, j) * a0 + V[0](i, j) * ia[0] + V[1](i, j) * ia[1] + V[2](i, j) * ia[2];
    return out;
}

CMat DiracBlocks::apply(const CMat& x) const
{
    const Eigen::Index r = rows(), c = cols(), nrhs = x.cols();
    if (x.rows() != 4 * c) throw domain_error("DiracBlocks::apply: size mismatch");
    CMat X(c, 4 * nrhs);
    for (Eigen::Index t = 0; t < nrhs; ++t)
        for (Eigen::Index j = 0; j < c; ++j)
            for (int b = 0; b < 4; ++b) X(j, 4 * t + b) = x(4 * j + b, t);
    const C4 a0 = lambda * identity4() + m * beta();
    CMat out = CMat::Zero(4 * r, nrhs);
    auto mix = [&](const CMat& Y, const C4& A) {
        for (Eigen::Index t = 0; t < nrhs; ++t)
            for (Eigen::Index i = 0; i < r; ++i)
                for (int a = 0; a < 4; ++a) {
                    cd s = 0;
                    for (int b = 0; b < 4; ++b)
                        if (A(a, b) != cd(0)) s += A(a, b) * Y(i, 4 * t + b);
                    out(4 * i + a, t) += s;
                }
    };
    mix(S * X, a0);
    for (int q = 0; q < 3; ++q) mix(V[static_cast<size_t>(q)] * X, C4(I1 * alpha(q)));
    return out;
}

std::vector<GradientStencil> gradient_stencils(const SurfaceMesh& mesh)
{
    std::vector<GradientStencil> out(mesh.size());
    for (size_t i = 0; i < mesh.size(); ++i) {
        std::vector<int> ring;
        for (int a : mesh.neighbors[i]) {
            ring.push_back(a);
            for (int b : mesh.neighbors[static_cast<size_t>(a)]) ring.push_back(b);
        }
        std::sort(ring.begin(), ring.end());
        ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
        ring.erase(std::remove(ring.begin(), ring.end(), static_cast<int>(i)), ring.end());
        Eigen::MatrixXd D(static_cast<Eigen::Index>(ring.size()), 3);
        for (size_t r = 0; r < ring.size(); ++r)
            D.row(static_cast<Eigen::Index>(r)) = (mesh.centroid[static_cast<size_t>(ring[r])] - mesh.centroid[i]).transpose();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(D, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        Eigen::Vector3d inv = Eigen::Vector3d::Zero();
        for (int t = 0; t < 3; ++t)
            if (sv[t] > 1e-15 * sv[0] * static_cast<double>(std::max<size_t>(ring.size(), 3))) inv[t] = 1.0 / sv[t];
        out[i].cols = ring;
        out[i].W = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
    }
    return out;
}

DiracBlocks assemble_C_blocks(const SpectralParameter& p, const SurfaceMesh& mesh, const QuadratureOptions& q)
{
    p.require_admissible();
    check_mesh(mesh);
    const auto n = static_cast<Eigen::Index>(mesh.size());
    DiracBlocks B = empty_blocks(p, n, n);
    const auto stencils = gradient_stencils(mesh);
    const RowContext ctx{p.k(), mesh, q, stencils};
#pragma omp parallel
    {
        std::vector<QuadPoint> pts;
#pragma omp for schedule(dynamic, 4)
        for (Eigen::Index i = 0; i < n; ++i) assemble_row(ctx, static_cast<size_t>(i), B, pts);
    }
    return B;
}

DiracBlocks assemble_C_blocks_serial(const SpectralParameter& p, const SurfaceMesh& mesh, const QuadratureOptions& q)
{
    p.require_admissible();
    check_mesh(mesh);
    const auto n = static_cast<Eigen::Index>(mesh.size());
    DiracBlocks B = empty_blocks(p, n, n);
    const auto stencils = gradient_stencils(mesh);
    const RowContext ctx{p.k(), mesh, q, stencils};
    std::vector<QuadPoint> pts;
    for (Eigen::Index i = 0; i < n; ++i) assemble_row(ctx, static_cast<size_t>(i), B, pts);
    return B;
}

BoundaryOperator assemble_C(const SpectralParameter& p, const SurfaceMesh& mesh, const QuadratureOptions& q)
{
    BoundaryOperator op;
    op.tag = "C_lambda";
    op.lambda = p.lambda;
    op.m = p.m;
    op.mesh_hash = mesh_hash(mesh);
    op.options_hash = options_hash(q);
    op.matrix = assemble_C_blocks(p, mesh, q).dense();
    return op;
}

CMat assemble_SL(const SpectralParameter& p, const SurfaceMesh& mesh, const QuadratureOptions& q)
{
    p.require_admissible();
    check_mesh(mesh);
    const size_t n = mesh.size();
    const cd k = p.k();
    CMat S(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
#pragma omp parallel
    {
        std::vector<QuadPoint> pts;
#pragma omp for schedule(dynamic, 4)
        for (Eigen::Index ii = 0; ii < static_cast<Eigen::Index>(n); ++ii) {
            const auto i = static_cast<size_t>(ii);
            const Vec3& x = mesh.node[i];
            for (size_t j = 0; j < n; ++j) {
                const auto jj = static_cast<Eigen::Index>(j);
                if (j == i) {
                    S(ii, jj) = self_scalar_duffy(k, mesh, i, q);
                } else if (is_near(mesh, x, j, q)) {
                    subdivided_points(mesh, j, mesh.centroid[i], q, pts);
                    cd s = 0;
                    for (const auto& qp : pts) s += kernel_parts(k, (x - qp.y).norm()).g * qp.w;
                    S(ii, jj) = s;
                } else {
                    S(ii, jj) = kernel_parts(k, (x - mesh.node[j]).norm()).g * mesh.area[j];
                }
            }
        }
    }
    return S;
}

double node_distance(const SurfaceMesh& mesh, const Vec3& x)
{
    double d = std::numeric_limits<double>::infinity();
    for (const auto& y : mesh.node) d = std::min(d, (x - y).norm());
    return d;
}

namespace {

template <class Visit>
void potential_loop(const SpectralParameter& p, const SurfaceMesh& mesh, const std::vector<Vec3>& targets,
                    const QuadratureOptions& q, Visit&& visit)
{
    p.require_admissible();
    const auto stencils = gradient_stencils(mesh);
    for (const auto& t : targets)
        if (q.target_guard > 0 && node_distance(mesh, t) < q.target_guard * mesh.h)
            throw domain_error("potential: target too close to the surface");
    const auto nt = static_cast<Eigen::Index>(targets.size());
#pragma omp parallel
    {
        std::vector<QuadPoint> pts;
        std::vector<QuadPoint> one(1);
#pragma omp for schedule(dynamic, 4)
        for (Eigen::Index it = 0; it < nt; ++it) {
            const Vec3& x = targets[static_cast<size_t>(it)];
            for (size_t j = 0; j < mesh.size(); ++j) {
                if (is_near(mesh, x, j, q)) {
                    subdivided_points(mesh, j, x, q, pts);
                    visit(it, j, x, pts, q.linear_reconstruction ? &stencils[j] : nullptr);
                } else {
                    one[0] = {mesh.node[j], Vec3::Zero(), mesh.area[j]};
                    visit(it, j, x, one, nullptr);
                }
            }
        }
    }
}

}  // namespace

DiracBlocks potential_blocks(const SpectralParameter& p, const SurfaceMesh& mesh, const std::vector<Vec3>& targets,
                             const QuadratureOptions& q)
{
    DiracBlocks B = empty_blocks(p, static_cast<Eigen::Index>(targets.size()), static_cast<Eigen::Index>(mesh.size()));
    const cd k = p.k();
    potential_loop(p, mesh, targets, q,
                   [&](Eigen::Index row, size_t j, const Vec3& x, const std::vector<QuadPoint>& pts,
                       const GradientStencil* st) {
                       Entry e;
                       integrate_points(k, x, pts, e);
                       const auto col = static_cast<Eigen::Index>(j);
                       B.S(row, col) += e.s;
                       for (int qq = 0; qq < 3; ++qq) B.V[static_cast<size_t>(qq)](row, col) += e.v[qq];
                       if (st) add_reconstruction(*st, static_cast<int>(j), e.mom, row, B);
                   });
    return B;
}

std::array<DiracBlocks, 3> potential_gradient_blocks(const SpectralParameter& p, const SurfaceMesh& mesh,
                                                     const std::vector<Vec3>& targets, const QuadratureOptions& q)
{
    const auto nt = static_cast<Eigen::Index>(targets.size());
    const auto n = static_cast<Eigen::Index>(mesh.size());
    std::array<DiracBlocks, 3> G = {empty_blocks(p, nt, n), empty_blocks(p, nt, n), empty_blocks(p, nt, n)};
    const cd k = p.k();
    potential_loop(p, mesh, targets, q,
                   [&](Eigen::Index row, size_t j, const Vec3& x, const std::vector<QuadPoint>& pts,
                       const GradientStencil* st) {
                       std::array<Entry, 3> e;
                       for (const auto& qp : pts) {
                           const Vec3 d = x - qp.y;
                           const double r = d.norm();
                           const KernelParts kp = kernel_parts(k, r);
                           const cd dg = kp.g * (I1 * k - 1.0 / r);
                           const cd dh = k * k * std::exp(I1 * k * r) / (4.0 * pi * r * r) - 3.0 * kp.h / r;
                           for (int a = 0; a < 3; ++a) {
                               const cd s = dg * d[a] / r * qp.w;
                               CVec3 v = (dh * d[a] / r * qp.w) * d.cast<cd>();
                               v[a] += kp.h * qp.w;
                               auto& ea = e[static_cast<size_t>(a)];
                               ea.s += s;
                               ea.v += v;
                               for (int pp = 0; pp < 3; ++pp) {
                                   ea.mom.g[static_cast<size_t>(pp)] += s * qp.u[pp];
                                   for (int qq = 0; qq < 3; ++qq) ea.mom.h(qq, pp) += v[qq] * qp.u[pp];
                               }
                           }
                       }
                       const auto col = static_cast<Eigen::Index>(j);
                       for (size_t a = 0; a < 3; ++a) {
                           G[a].S(row, col) += e[a].s;
                           for (int qq = 0; qq < 3; ++qq) G[a].V[static_cast<size_t>(qq)](row, col) += e[a].v[qq];
                           if (st) add_reconstruction(*st, static_cast<int>(j), e[a].mom, row, G[a]);
                       }
                   });
    return G;
}

CVec apply_Phi(const SpectralParameter& p, const SurfaceMesh& mesh, const CVec& phi, const std::vector<Vec3>& targets,
               const QuadratureOptions& q)
{
    if (phi.size() != static_cast<Eigen::Index>(4 * mesh.size())) throw domain_error("apply_Phi: density size mismatch");
    return potential_blocks(p, mesh, targets, q).apply(phi);
}

bool RadialRegion::contains(const Vec3& y) const
{
    const double r = y.norm();
    return r >= inner && r <= outer;
}

void ray_rule(const Vec3& x, const RadialRegion& region, const VolumeQuadrature& vq, double decay,
              std::vector<Vec3>& nodes, std::vector<double>& weights)
{
    nodes.clear();
    weights.clear();
    const double ax = x.norm();
    const Vec3 e3 = ax > 1e-14 ? Vec3(x / ax) : Vec3(0, 0, 1);
    const Vec3 e1 = e3.unitOrthogonal();
    const Vec3 e2 = e3.cross(e1);

    std::vector<double> bp = {0.0, pi};
    std::vector<double> spheres;
    if (region.inner > 0) spheres.push_back(region.inner);
    if (std::isfinite(region.outer)) spheres.push_back(region.outer);
    for (double R : spheres) {
        const double d = ax - R;
        if (std::abs(d) <= 1e-12 * std::max(1.0, R)) {
            bp.push_back(0.5 * pi);
            continue;
        }
        if (std::abs(d) < 0.5 * R) {
            for (double th = 0.5 * std::sqrt(std::abs(d) / R); th < 0.5 * pi; th *= 2.0)
                bp.push_back(d < 0 ? th : pi - th);
        }
        if (d > 0) bp.push_back(pi - std::asin(R / ax));
    }
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }), bp.end());

    const Rule1D& glr = gauss_legendre(vq.radial);
    const double scale = std::clamp(0.5 / std::max(decay, 1e-3), 0.25, 4.0);
    const double dphi = 2.0 * pi / vq.azimuthal;

    // r-intervals of {r >= 0 : inner <= |x + r e| <= outer} with cos(theta) = ct.
    auto intervals = [&](double ct, std::vector<std::pair<double, double>>& out) {
        out.clear();
        const double c = ax * ct;
        const double inf = std::numeric_limits<double>::infinity();
        double lo = 0, hi = inf;
        if (std::isfinite(region.outer)) {
            const double disc = c * c - ax * ax + region.outer * region.outer;
            if (disc < 0) return;
            const double s = std::sqrt(disc);
            lo = std::max(0.0, -c - s);
            hi = -c + s;
            if (hi <= lo) return;
        }
        if (region.inner > 0) {
            const double disc = c * c - ax * ax + region.inner * region.inner;
            if (disc > 0) {
                const double s = std::sqrt(disc);
                const double a = -c - s, b = -c + s;
                if (a > lo) out.push_back({lo, std::min(a, hi)});
                if (b < hi) out.push_back({std::max(b, lo), hi});
                out.erase(std::remove_if(out.begin(), out.end(), [](auto& iv) { return !(iv.second - iv.first > 1e-14); }),
                          out.end());
                return;
            }
        }
        if (hi - lo > 1e-14) out.push_back({lo, hi});
    };

    std::vector<std::pair<double, double>> ivs;
    for (size_t s = 0; s + 1 < bp.size(); ++s) {
        const Rule1D glt = gauss_legendre(vq.polar, bp[s], bp[s + 1]);
        for (size_t it = 0; it < glt.x.size(); ++it) {
            const double th = glt.x[it];
            const double st = std::sin(th), ct = std::cos(th);
            intervals(ct, ivs);
            for (const auto& [a, b] : ivs) {
                for (size_t ir = 0; ir < glr.x.size(); ++ir) {
                    double r, wr;
                    if (std::isfinite(b)) {
                        r = a + 0.5 * (b - a) * (glr.x[ir] + 1.0);
                        wr = 0.5 * (b - a) * glr.w[ir];
                    } else {
                        const double t = 0.5 * (glr.x[ir] + 1.0);
                        r = a + scale * t / (1.0 - t);
                        wr = 0.5 * glr.w[ir] * scale / ((1.0 - t) * (1.0 - t));
                    }
                    const double w = glt.w[it] * wr * r * r * st * dphi;
                    for (int ip = 0; ip < vq.azimuthal; ++ip) {
                        const double ph = dphi * (ip + 0.5);
                        const Vec3 e = st * (std::cos(ph) * e1 + std::sin(ph) * e2) + ct * e3;
                        nodes.push_back(x + r * e);
                        weights.push_back(w);
                    }
                }
            }
        }
    }
}

CMat volume_potential(const SpectralParameter& mu, const VolumeSource& src, const std::vector<Vec3>& targets,
                      const VolumeQuadrature& vq)
{
    mu.require_admissible();
    if (!src.f) throw domain_error("volume_potential: empty source");
    const int kc = src.components;
    const cd k = mu.k();
    const C4 a0 = mu.lambda * identity4() + mu.m * beta();
    CMat out = CMat::Zero(4 * kc, static_cast<Eigen::Index>(targets.size()));
    for (size_t t = 0; t < targets.size(); ++t) {
        std::vector<Vec3> nodes;
        std::vector<double> w;
        ray_rule(targets[t], src.region, vq, k.imag(), nodes, w);
        if (nodes.empty()) continue;
        const CMat f = src.f(nodes);
        if (f.rows() != 4 * kc || f.cols() != static_cast<Eigen::Index>(nodes.size()))
            throw domain_error("volume_potential: source returned the wrong shape");
        for (size_t a = 0; a < nodes.size(); ++a) {
            const Vec3 d = targets[t] - nodes[a];
            const KernelParts kp = kernel_parts(k, d.norm());
            const C4 G = (a0 * kp.g + I1 * kp.h * alpha_dot(d)) * w[a];
            for (int c = 0; c < kc; ++c)
                out.block<4, 1>(4 * c, static_cast<Eigen::Index>(t)) += G * f.block<4, 1>(4 * c, static_cast<Eigen::Index>(a));
        }
    }
    return out;
}

CMat apply_Phi_star(const SpectralParameter& p, const SurfaceMesh& mesh, const VolumeSource& src,
                    const VolumeQuadrature& vq)
{
    const CMat v = volume_potential(p.conj(), src, mesh.node, vq);
    // Rearrange to 4N x k densities.
    const int kc = src.components;
    CMat out(static_cast<Eigen::Index>(4 * mesh.size()), kc);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(mesh.size()); ++i)
        for (int c = 0; c < kc; ++c) out.block<4, 1>(4 * i, c) = v.block<4, 1>(4 * c, i);
    return out;
}

CMat apply_R(const SpectralParameter& p, const VolumeSource& src, const std::vector<Vec3>& targets,
             const VolumeQuadrature& vq)
{
    const CMat v = volume_potential(p, src, targets, vq);
    const int kc = src.components;
    CMat out(static_cast<Eigen::Index>(4 * targets.size()), kc);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(targets.size()); ++i)
        for (int c = 0; c < kc; ++c) out.block<4, 1>(4 * i, c) = v.block<4, 1>(4 * c, i);
    return out;
}

std::uint64_t options_hash(const QuadratureOptions& q)
{
    std::uint64_t h = 1469598103934665603ull;
    auto feed = [&h](const void* data, size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    feed(&q.near_factor, sizeof q.near_factor);
    feed(&q.near_ratio, sizeof q.near_ratio);
    feed(&q.max_depth, sizeof q.max_depth);
    feed(&q.polar_order, sizeof q.polar_order);
    const int lr = q.linear_reconstruction ? 1 : 0;
    feed(&lr, sizeof lr);
    return h;
}

namespace {
constexpr char kMagic[8] = {'D', 'B', 'E', 'M', 'O', 'P', '\0', '\0'};
constexpr std::uint8_t kVersion = 2;
}  // namespace

void save_operator(const BoundaryOperator& op, const std::string& path)
{
    BinaryWriter o(path);
    o.bytes(kMagic, sizeof kMagic);
    o.put(kVersion);
    o.put(static_cast<std::uint32_t>(op.tag.size()));
    o.bytes(op.tag.data(), op.tag.size());
    o.put(op.lambda.real());
    o.put(op.lambda.imag());
    o.put(op.m);
    o.put(op.mesh_hash);
    o.put(op.options_hash);
    o.matrix(op.matrix);
    o.commit();
}

BoundaryOperator load_operator(const std::string& path)
{
    BinaryReader in(path);
    char magic[8];
    in.bytes(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof magic) != 0) throw io_error("load_operator: bad magic in " + path);
    if (in.get<std::uint8_t>() != kVersion) throw io_error("load_operator: unsupported version in " + path);
    BoundaryOperator op;
    const auto len = in.get<std::uint32_t>();
    if (len > 256) throw io_error("load_operator: corrupt tag in " + path);
    op.tag.resize(len);
    in.bytes(op.tag.data(), len);
    const double re = in.get<double>(), im = in.get<double>();
    op.lambda = cd(re, im);
    op.m = in.get<double>();
    op.mesh_hash = in.get<std::uint64_t>();
    op.options_hash = in.get<std::uint64_t>();
    op.matrix = in.matrix();
    in.verify();
    return op;
}

}  // namespace dbem
