#include "dbem/spectral.hpp"

#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <cstring>
#include <limits>

#include "dbem/binio.hpp"
#include "dbem/clifford.hpp"

namespace dbem {

namespace {

RVec repeat(const RVec& v, int k)
{
    RVec out(k * v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i)
        for (int a = 0; a < k; ++a) out[k * i + a] = v[i];
    return out;
}

CMat hermitize(const CMat& a) { return 0.5 * (a + a.adjoint()); }

double rel_asymmetry(const CMat& a) { return (a - a.adjoint()).norm() / std::max(a.norm(), 1e-300); }

CMat scale_rows(const RVec& w, const CMat& x) { return w.cast<cd>().asDiagonal() * x; }

std::string panel_msg(const char* what, size_t i)
{
    return std::string(what) + " at panel " + std::to_string(i);
}

}  // namespace

BoundaryCoefficient BoundaryCoefficient::constant(CoefficientKind kind, double v, size_t panels)
{
    if (kind == CoefficientKind::delta_pair) throw usage_error("BoundaryCoefficient: use delta() for (eta, tau) pairs");
    BoundaryCoefficient c;
    c.kind = kind;
    c.value = RVec::Constant(static_cast<Eigen::Index>(panels), v);
    return c;
}

BoundaryCoefficient BoundaryCoefficient::delta(double eta, double tau, size_t panels)
{
    BoundaryCoefficient c;
    c.kind = CoefficientKind::delta_pair;
    c.value = RVec::Constant(static_cast<Eigen::Index>(panels), eta);
    c.tau = RVec::Constant(static_cast<Eigen::Index>(panels), tau);
    return c;
}

BoundaryCoefficient BoundaryCoefficient::affine(CoefficientKind kind, double c0, const Vec3& g, const SurfaceMesh& mesh)
{
    BoundaryCoefficient c = constant(kind, c0, mesh.size());
    for (size_t i = 0; i < mesh.size(); ++i) c.value[static_cast<Eigen::Index>(i)] += g.dot(mesh.node[i]);
    return c;
}

bool BoundaryCoefficient::is_constant() const
{
    const bool v = value.size() == 0 || (value.array() == value[0]).all();
    const bool t = tau.size() == 0 || (tau.array() == tau[0]).all();
    return v && t;
}

void BoundaryCoefficient::validate(size_t panels, bool confinement) const
{
    if (size() != panels) throw domain_error("coefficient: expected one value per panel");
    if (!(holder > 0.5 && holder <= 1.0)) throw domain_error("coefficient: Hoelder exponent must lie in (1/2, 1]");
    for (size_t i = 0; i < panels; ++i) {
        const double v = value[static_cast<Eigen::Index>(i)];
        if (!std::isfinite(v)) throw domain_error(panel_msg("coefficient: non-finite value", i));
        if (kind != CoefficientKind::delta_pair && std::abs(std::abs(v) - 1.0) < 1e-12)
            throw domain_error(panel_msg("coefficient: critical value |c| = 1", i));
        if (kind == CoefficientKind::delta_pair) {
            if (tau.size() != value.size()) throw domain_error("coefficient: tau must have one value per panel");
            const double t = tau[static_cast<Eigen::Index>(i)];
            if (confinement && std::abs(v * v - t * t + 4.0) > 1e-10)
                throw domain_error(panel_msg("coefficient: eta^2 - tau^2 != -4", i));
        }
    }
}

DeltaPair theta_to_delta(double theta)
{
    if (std::abs(std::abs(theta) - 1.0) < 1e-12) throw domain_error("confinement map: |theta| = 1");
    const double t2 = theta * theta;
    return {4.0 * theta / (1.0 - t2), 2.0 * (1.0 + t2) / (t2 - 1.0)};
}

double delta_to_theta(DeltaPair d)
{
    if (std::abs(d.tau - 2.0) < 1e-12) throw domain_error("confinement map: tau = 2");
    return d.eta / (2.0 - d.tau);
}

DeltaPair omega_to_delta(double omega)
{
    if (std::abs(std::abs(omega) - 1.0) < 1e-12) throw domain_error("confinement map: |omega| = 1");
    const double w2 = omega * omega;
    return {4.0 * omega / (w2 - 1.0), 2.0 * (1.0 + w2) / (1.0 - w2)};
}

double delta_to_omega(DeltaPair d)
{
    if (std::abs(d.tau + 2.0) < 1e-12) throw domain_error("confinement map: tau = -2");
    return -d.eta / (2.0 + d.tau);
}

BoundaryCoefficient confinement_map(const BoundaryCoefficient& c, CoefficientKind target)
{
    BoundaryCoefficient out;
    out.kind = target;
    out.holder = c.holder;
    const Eigen::Index n = c.value.size();
    if (c.kind == target) return c;
    out.value.resize(n);
    if (target == CoefficientKind::delta_pair) out.tau.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        try {
            if (c.kind == CoefficientKind::delta_pair) {
                const DeltaPair d{c.value[i], c.tau[i]};
                out.value[i] = target == CoefficientKind::theta ? delta_to_theta(d) : delta_to_omega(d);
            } else {
                const DeltaPair d = c.kind == CoefficientKind::theta ? theta_to_delta(c.value[i]) : omega_to_delta(c.value[i]);
                if (target == CoefficientKind::delta_pair) {
                    out.value[i] = d.eta;
                    out.tau[i] = d.tau;
                } else {
                    out.value[i] = target == CoefficientKind::theta ? delta_to_theta(d) : delta_to_omega(d);
                }
            }
        } catch (const Error& e) {
            throw domain_error(panel_msg(e.what(), static_cast<size_t>(i)));
        }
    }
    return out;
}

CMat weighted(const CMat& x, const RVec& w)
{
    const RVec s = w.array().sqrt();
    return s.cast<cd>().asDiagonal() * x * s.cwiseInverse().cast<cd>().asDiagonal();
}

CMat bs_matrix_theta(const BoundaryCoefficient& c, const WeylSolver& w, const SurfaceMesh& mesh)
{
    if (c.kind != CoefficientKind::theta) throw usage_error("bs_matrix_theta: theta coefficient required");
    c.validate(mesh.size());
    const auto n = static_cast<Eigen::Index>(2 * mesh.size());
    CMat M = weighted(w.M_apply(PlusBasis(mesh), CMat::Identity(n, n)), panel_weights(mesh, 2));
    CMat out = -M;
    out.diagonal() += repeat(c.value, 2).cast<cd>();
    return out;
}

CMat bs_matrix_omega(const BoundaryCoefficient& c, const WeylSolver& w, const SurfaceMesh& mesh)
{
    if (c.kind != CoefficientKind::omega) throw usage_error("bs_matrix_omega: omega coefficient required");
    c.validate(mesh.size());
    const auto n = static_cast<Eigen::Index>(2 * mesh.size());
    const CMat M = weighted(w.M_apply(PlusBasis(mesh), CMat::Identity(n, n)), panel_weights(mesh, 2));
    CMat out = -scale_rows(repeat(c.value, 2), M);
    out.diagonal().array() += 1.0;
    return out;
}

CMat bs_matrix_delta(const BoundaryCoefficient& c, const DiracBlocks& C, const SurfaceMesh& mesh)
{
    if (c.kind != CoefficientKind::delta_pair) throw usage_error("bs_matrix_delta: (eta, tau) pair required");
    c.validate(mesh.size());
    const size_t n = mesh.size();
    std::vector<C4> D(n);
    for (size_t i = 0; i < n; ++i)
        D[i] = c.value[static_cast<Eigen::Index>(i)] * identity4() + c.tau[static_cast<Eigen::Index>(i)] * beta();
    CMat out = apply_pointwise(D, weighted(C.dense(), panel_weights(mesh, 4)));
    out.diagonal().array() += 1.0;
    return out;
}

CMat smooth_subspace(const SurfaceMesh& mesh, int degree, double tol)
{
    if (degree < 0 || degree > 12) throw domain_error("smooth_subspace: degree must lie in [0, 12]");
    const size_t n = mesh.size();
    double scale = 0;
    for (const auto& x : mesh.node) scale = std::max(scale, x.norm());
    std::vector<std::array<int, 3>> powers;
    for (int a = 0; a <= degree; ++a)
        for (int b = 0; a + b <= degree; ++b)
            for (int c = 0; a + b + c <= degree; ++c) powers.push_back({a, b, c});
    const PlusBasis E(mesh);
    const auto cols = static_cast<Eigen::Index>(4 * powers.size());
    CMat B(static_cast<Eigen::Index>(2 * n), cols);
    for (size_t i = 0; i < n; ++i) {
        const Vec3 x = mesh.node[i] / scale;
        const double sa = std::sqrt(mesh.area[i]);
        for (size_t k = 0; k < powers.size(); ++k) {
            const double p = std::pow(x[0], powers[k][0]) * std::pow(x[1], powers[k][1]) * std::pow(x[2], powers[k][2]);
            for (int s = 0; s < 4; ++s)
                B.block<2, 1>(static_cast<Eigen::Index>(2 * i), static_cast<Eigen::Index>(4 * k) + s) =
                    sa * p * E.block(i).row(s).adjoint();
        }
    }
    Eigen::BDCSVD<CMat> svd(B, Eigen::ComputeThinU);
    const RVec& s = svd.singularValues();
    Eigen::Index r = 0;
    while (r < s.size() && s[r] > tol * s[0]) ++r;
    return svd.matrixU().leftCols(r);
}

ChebyshevFamily::ChebyshevFamily(double m, double lo, double hi, int nodes) : m_(m)
{
    if (!(lo < hi) || lo <= -m || hi >= m) throw domain_error("ChebyshevFamily: window must lie inside (-m, m)");
    if (nodes < 4 || nodes > 256) throw domain_error("ChebyshevFamily: node count must lie in [4, 256]");
    const double a = std::asin(lo / m), b = std::asin(hi / m);
    center_ = 0.5 * (a + b);
    radius_ = 0.5 * (b - a);
    t_.resize(static_cast<size_t>(nodes));
    bw_.resize(static_cast<size_t>(nodes));
    for (int j = 0; j < nodes; ++j) {
        const double phi = (2 * j + 1) * pi / (2.0 * nodes);
        t_[static_cast<size_t>(j)] = std::cos(phi);
        bw_[static_cast<size_t>(j)] = (j % 2 == 0 ? 1.0 : -1.0) * std::sin(phi);
    }
    values_.resize(static_cast<size_t>(nodes));
}

double ChebyshevFamily::node_lambda(int j) const { return m_ * std::sin(center_ + radius_ * t_[static_cast<size_t>(j)]); }

CMat ChebyshevFamily::operator()(cd lambda) const
{
    const cd x = (std::asin(lambda / m_) - center_) / radius_;
    CMat num = CMat::Zero(values_[0].rows(), values_[0].cols());
    cd den = 0;
    for (size_t j = 0; j < t_.size(); ++j) {
        const cd d = x - t_[j];
        if (std::abs(d) < 1e-15) return values_[j];
        const cd c = bw_[j] / d;
        num += c * values_[j];
        den += c;
    }
    return num / den;
}

double ChebyshevFamily::tail() const
{
    const int n = nodes();
    auto coeff = [&](int k) {
        CMat c = CMat::Zero(values_[0].rows(), values_[0].cols());
        for (int j = 0; j < n; ++j) c += std::cos(k * (2 * j + 1) * pi / (2.0 * n)) * values_[static_cast<size_t>(j)];
        return (2.0 / n) * c;
    };
    const double c0 = 0.5 * coeff(0).norm();
    return std::max(coeff(n - 1).norm(), coeff(n - 2).norm()) / std::max(c0, 1e-300);
}

ReducedFamily::ReducedFamily(const SurfaceMesh& mesh, double m, const Options& opt)
    : ReducedFamily(mesh, m, opt, true)
{
}

ReducedFamily::ReducedFamily(const SurfaceMesh& mesh, double m, const Options& opt, bool sample)
    : mesh_(&mesh), flipped_(mesh.flipped()), m_(m), opt_(opt)
{
    if (mesh.orientation != Orientation::interior) throw usage_error("ReducedFamily: pass the interior-oriented mesh");
    hash_ = dbem::mesh_hash(mesh);
    const PlusBasis Ei(mesh), Ee(flipped_);
    q_int_ = smooth_subspace(mesh, opt.degree);
    q_ext_ = smooth_subspace(flipped_, opt.degree);
    const RVec w2 = panel_weights(mesh, 2), w4 = panel_weights(mesh, 4);
    const RVec is2 = w2.array().sqrt().inverse(), is4 = w4.array().sqrt().inverse(), s4 = w4.array().sqrt();
    x_int_ = Ei.apply(scale_rows(is2, q_int_));
    x_ext_ = Ee.apply(scale_rows(is2, q_ext_));
    const Eigen::Index di = q_int_.cols(), de = q_ext_.cols();
    z_.resize(x_int_.rows(), di + de);
    z_ << Ei.apply(q_int_), Ee.apply(q_ext_);
    CMat X(x_int_.rows(), di + de);
    X << x_int_, x_ext_;

    m_int_ = ChebyshevFamily(m, opt.lo, opt.hi, opt.nodes);
    m_ext_ = ChebyshevFamily(m, opt.lo, opt.hi, opt.nodes);
    c_ = ChebyshevFamily(m, opt.lo, opt.hi, opt.nodes);
    if (!sample) return;
    for (int j = 0; j < opt.nodes; ++j) {
        const SpectralParameter p{m_int_.node_lambda(j), m};
        DiracBlocks C = assemble_C_blocks(p, mesh, opt.quadrature);
        const CMat Cz = z_.adjoint() * scale_rows(s4, C.apply(scale_rows(is4, z_)));
        const WeylSolver w(p, mesh, std::move(C));
        const CMat Y = w.solve_plus(X);
        const CMat Ri = -q_int_.adjoint() * scale_rows(w2.array().sqrt(), Ei.adjoint(Y.leftCols(di)));
        const CMat Re = -q_ext_.adjoint() * scale_rows(w2.array().sqrt(), Ee.adjoint(Y.rightCols(de)));
        asymmetry_ = std::max({asymmetry_, rel_asymmetry(Ri), rel_asymmetry(Re), rel_asymmetry(Cz)});
        m_int_.set(j, hermitize(Ri));
        m_ext_.set(j, hermitize(Re));
        c_.set(j, hermitize(Cz));
    }
}

namespace {
constexpr char kFamilyMagic[8] = {'D', 'B', 'E', 'M', 'R', 'F', '\0', '\0'};
constexpr std::uint8_t kFamilyVersion = 1;
}  // namespace

void ReducedFamily::save(const std::string& path) const
{
    BinaryWriter o(path);
    o.bytes(kFamilyMagic, sizeof kFamilyMagic);
    o.put(kFamilyVersion);
    o.put(hash_);
    o.put(m_);
    o.put(opt_.lo);
    o.put(opt_.hi);
    o.put(static_cast<std::int32_t>(opt_.nodes));
    o.put(static_cast<std::int32_t>(opt_.degree));
    o.put(options_hash(opt_.quadrature));
    o.put(asymmetry_);
    for (int j = 0; j < opt_.nodes; ++j) {
        o.matrix(m_int_.value(j));
        o.matrix(m_ext_.value(j));
        o.matrix(c_.value(j));
    }
    o.commit();
}

ReducedFamily ReducedFamily::load(const std::string& path, const SurfaceMesh& mesh, double m, const Options& opt)
{
    BinaryReader in(path);
    char magic[8];
    in.bytes(magic, sizeof magic);
    if (std::memcmp(magic, kFamilyMagic, sizeof magic) != 0) throw io_error("family cache: bad magic in " + path);
    if (in.get<std::uint8_t>() != kFamilyVersion) throw io_error("family cache: unsupported version in " + path);
    auto expect = [&](bool ok, const char* what) {
        if (!ok) throw io_error(std::string("family cache: ") + what + " mismatch in " + path);
    };
    expect(in.get<std::uint64_t>() == dbem::mesh_hash(mesh), "mesh hash");
    expect(in.get<double>() == m, "mass");
    expect(in.get<double>() == opt.lo, "window");
    expect(in.get<double>() == opt.hi, "window");
    expect(in.get<std::int32_t>() == opt.nodes, "node count");
    expect(in.get<std::int32_t>() == opt.degree, "degree");
    expect(in.get<std::uint64_t>() == options_hash(opt.quadrature), "quadrature hash");
    ReducedFamily fam(mesh, m, opt, false);
    fam.asymmetry_ = in.get<double>();
    const Eigen::Index di = fam.q_int_.cols(), de = fam.q_ext_.cols();
    for (int j = 0; j < opt.nodes; ++j) {
        CMat a = in.matrix(), b = in.matrix(), c = in.matrix();
        expect(a.rows() == di && b.rows() == de && c.rows() == di + de, "subspace dimension");
        fam.m_int_.set(j, std::move(a));
        fam.m_ext_.set(j, std::move(b));
        fam.c_.set(j, std::move(c));
    }
    in.verify();
    return fam;
}

CMat ReducedFamily::direct_M(Orientation o, cd lambda) const
{
    const SurfaceMesh& mesh = o == Orientation::interior ? *mesh_ : flipped_;
    const SpectralParameter p{lambda, m_};
    const WeylSolver w(p, *mesh_, opt_.quadrature);
    const CMat& X = o == Orientation::interior ? x_int_ : x_ext_;
    const CMat& Qo = Q(o);
    const CMat R = -Qo.adjoint() * scale_rows(panel_weights(mesh, 2).array().sqrt(), PlusBasis(mesh).adjoint(w.solve_plus(X)));
    return lambda.imag() == 0 ? hermitize(R) : R;
}

namespace {

CMat compress_diag(const CMat& Q, const RVec& v)
{
    return Q.adjoint() * scale_rows(repeat(v, 2), Q);
}

}  // namespace

CMat ReducedFamily::theta_matrix(const BoundaryCoefficient& c, Orientation o, cd lambda) const
{
    if (c.kind != CoefficientKind::theta) throw usage_error("theta_matrix: theta coefficient required");
    c.validate(mesh_->size());
    return compress_diag(Q(o), c.value) - M(o)(lambda);
}

CMat ReducedFamily::omega_matrix(const BoundaryCoefficient& c, Orientation o, cd lambda) const
{
    if (c.kind != CoefficientKind::omega) throw usage_error("omega_matrix: omega coefficient required");
    c.validate(mesh_->size());
    CMat out = -compress_diag(Q(o), c.value) * M(o)(lambda);
    out.diagonal().array() += 1.0;
    return out;
}

CMat ReducedFamily::delta_matrix(const BoundaryCoefficient& c, cd lambda) const
{
    if (c.kind != CoefficientKind::delta_pair) throw usage_error("delta_matrix: (eta, tau) pair required");
    c.validate(mesh_->size());
    const size_t n = mesh_->size();
    std::vector<C4> Dinv(n);
    for (size_t i = 0; i < n; ++i) {
        const double eta = c.value[static_cast<Eigen::Index>(i)], tau = c.tau[static_cast<Eigen::Index>(i)];
        const double det = eta * eta - tau * tau;
        if (std::abs(det) < 1e-12) throw domain_error(panel_msg("delta_matrix: eta^2 = tau^2", i));
        Dinv[i] = (eta * identity4() - tau * beta()) / det;
    }
    return z_.adjoint() * apply_pointwise(Dinv, z_) + c_(lambda);
}

namespace {

// Hermitian matrix whose inertia changes exactly at the roots, and the spec-level BS matrix.
struct FormEval {
    const ReducedFamily& fam;
    ScanForm form;
    Orientation o;
    CMat fixed;  // compressed coefficient: Theta, Omega, or D^{-1}

    FormEval(const ReducedFamily& f, ScanForm fm, const BoundaryCoefficient& c, Orientation oo) : fam(f), form(fm), o(oo)
    {
        const size_t panels = f.mesh(Orientation::interior).size();
        c.validate(panels);
        if (form == ScanForm::delta) {
            if (c.kind != CoefficientKind::delta_pair) throw usage_error("scan: delta form needs an (eta, tau) pair");
            fixed = f.delta_matrix(c, 0.0) - f.C()(0.0);
        } else {
            const CoefficientKind want = form == ScanForm::theta ? CoefficientKind::theta : CoefficientKind::omega;
            if (c.kind != want) throw usage_error("scan: coefficient kind does not match the form");
            fixed = compress_diag(f.Q(o), c.value);
        }
    }

    CMat hermitian(cd lambda) const
    {
        switch (form) {
        case ScanForm::theta: return fixed - fam.M(o)(lambda);
        case ScanForm::omega: return fixed - fixed * fam.M(o)(lambda) * fixed;
        case ScanForm::delta: return fixed + fam.C()(lambda);
        }
        return {};
    }

    CMat bs(double lambda) const
    {
        if (form != ScanForm::omega) return hermitian(lambda);
        CMat out = -fixed * fam.M(o)(lambda);
        out.diagonal().array() += 1.0;
        return out;
    }

    // +1: negative count grows with lambda.
    int direction() const { return form == ScanForm::delta ? -1 : 1; }
};

double relative_sigma_min(const CMat& a)
{
    RVec s;
    singular_values(a, s);
    return s[s.size() - 1] / std::max(s[0], 1e-300);
}

}  // namespace

SpectralScan scan(const ReducedFamily& fam, ScanForm form, const BoundaryCoefficient& c, Orientation o,
                  const ScanOptions& opt)
{
    if (opt.fine < 10) throw domain_error("scan: fine grid must have at least 10 points");
    const double m = fam.m(), lo = fam.options().lo, hi = fam.options().hi;
    if (lo < -m + 1e-3 * m || hi > m - 1e-3 * m) throw domain_error("scan: window margin from +-m below 1e-3 m");
    const FormEval ev(fam, form, c, o);
    SpectralScan out;
    out.form = form;
    out.orientation = o;
    out.subspace = static_cast<int>(form == ScanForm::delta ? fam.Z().cols() : fam.Q(o).cols());
    out.tail = form == ScanForm::delta ? fam.C().tail() : fam.M(o).tail();
    if (out.tail > opt.tail_bound)
        throw numerical_error("scan: Chebyshev tail " + std::to_string(out.tail) + " above bound; refine grid");

    std::vector<double> lam(static_cast<size_t>(opt.fine) + 1);
    std::vector<int> neg(lam.size());
    for (size_t i = 0; i < lam.size(); ++i) {
        lam[i] = lo + (hi - lo) * static_cast<double>(i) / opt.fine;
        RVec e;
        hermitian_eigen(ev.hermitian(lam[i]), e);
        neg[i] = static_cast<int>((e.array() < 0).count());
        Eigen::Index k;
        e.cwiseAbs().minCoeff(&k);
        const double smin = form == ScanForm::omega ? relative_sigma_min(ev.bs(lam[i])) : std::abs(e[k]) / e.cwiseAbs().maxCoeff();
        out.samples.push_back({lam[i], e[k], smin});
    }
    for (size_t i = 0; i + 1 < lam.size(); ++i) {
        if (neg[i] == neg[i + 1]) continue;
        if ((neg[i + 1] - neg[i]) * ev.direction() < 0) ++out.wrong_direction;
        const int j0 = std::min(neg[i], neg[i + 1]), j1 = std::max(neg[i], neg[i + 1]);
        for (int j = j0; j < j1; ++j) {
            ScanRoot r;
            auto f = [&](double x) {
                RVec e;
                hermitian_eigen(ev.hermitian(x), e);
                return e[j];
            };
            auto tol = [&](double a, double b) {
                r.history.push_back(0.5 * (a + b));
                return std::abs(b - a) < opt.tol;
            };
            boost::uintmax_t it = 100;
            const auto br = boost::math::tools::toms748_solve(f, lam[i], lam[i + 1], f(lam[i]), f(lam[i + 1]), tol, it);
            r.lambda = 0.5 * (br.first + br.second);
            r.residual = relative_sigma_min(ev.bs(r.lambda));
            out.roots.push_back(std::move(r));
        }
    }
    std::sort(out.roots.begin(), out.roots.end(), [](const ScanRoot& a, const ScanRoot& b) { return a.lambda < b.lambda; });
    return out;
}

std::vector<std::pair<double, int>> group_roots(const std::vector<ScanRoot>& roots, double gap)
{
    std::vector<std::pair<double, int>> out;
    size_t i = 0;
    while (i < roots.size()) {
        size_t j = i + 1;
        double sum = roots[i].lambda;
        while (j < roots.size() && roots[j].lambda - roots[j - 1].lambda < gap) sum += roots[j++].lambda;
        out.emplace_back(sum / static_cast<double>(j - i), static_cast<int>(j - i));
        i = j;
    }
    return out;
}

MatchReport match_roots(const std::vector<double>& oracle, const std::vector<double>& found, double tol)
{
    MatchReport rep;
    std::vector<double> a = oracle, b = found;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<bool> used(b.size(), false);
    bool all = true;
    for (double x : a) {
        size_t best = b.size();
        for (size_t k = 0; k < b.size(); ++k)
            if (!used[k] && (best == b.size() || std::abs(b[k] - x) < std::abs(b[best] - x))) best = k;
        if (best < b.size() && std::abs(b[best] - x) <= tol) {
            used[best] = true;
            rep.pairs.push_back({x, b[best], std::abs(b[best] - x)});
            rep.max_delta = std::max(rep.max_delta, std::abs(b[best] - x));
        } else {
            rep.pairs.push_back({x, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity()});
            all = false;
        }
    }
    for (size_t k = 0; k < b.size(); ++k)
        if (!used[k]) rep.extra.push_back(b[k]);
    rep.ok = all && rep.extra.empty();
    if (!all) rep.max_delta = std::numeric_limits<double>::infinity();
    return rep;
}

Eigenfunction eigenfunction(const ReducedFamily& fam, ScanForm form, const BoundaryCoefficient& c, Orientation o,
                            double lambda, double threshold, double degenerate_gap)
{
    const FormEval ev(fam, form, c, o);
    const CMat bs = ev.bs(lambda);
    RVec s;
    CMat V;
    singular_values(bs, s, &V);
    const Eigen::Index n = s.size();
    Eigenfunction out;
    out.lambda = lambda;
    out.residual = s[n - 1] / s[0];
    if (out.residual > threshold) throw numerical_error("eigenfunction: smallest singular value above threshold; not an eigenvalue");
    const double cut = std::max(10.0 * threshold, degenerate_gap) * s[0];
    int k = 0;
    while (k < n && s[n - 1 - k] <= cut) ++k;
    out.multiplicity = k;
    const CMat U = V.rightCols(k).rowwise().reverse();
    const CMat& Qb = form == ScanForm::delta ? fam.Z() : fam.Q(o);
    const Eigen::Index comp = form == ScanForm::delta ? 4 : 2;
    out.phi = Qb * U;
    for (Eigen::Index i = 0; i < out.phi.rows(); ++i) out.phi.row(i) /= std::sqrt(fam.area(static_cast<size_t>(i / comp)));
    for (Eigen::Index col = 0; col < k; ++col) {
        double amp = 0;
        for (Eigen::Index i = 0; i < out.phi.rows() / comp; ++i) amp = std::max(amp, out.phi.col(col).segment(comp * i, comp).norm());
        out.phi.col(col) /= amp;
    }
    return out;
}

EmbeddedReport embedded_eigenvalue_probe(const ReducedFamily& fam, const BoundaryCoefficient& c, Orientation o,
                                         double lambda, const std::vector<double>& eps, const CVec& phi)
{
    EmbeddedReport rep;
    const CMat theta = FormEval(fam, ScanForm::theta, c, o).fixed;
    for (double e : eps) {
        if (!(e > 0)) throw domain_error("embedded_eigenvalue_probe: eps must be positive");
        const CMat A = fam.M(o)(cd(lambda, e)) - theta;
        const CVec x = A.partialPivLu().solve(phi);
        rep.eps.push_back(e);
        rep.norms.push_back(e * x.norm());
    }
    rep.nonvanishing = !rep.norms.empty() && rep.norms.back() > 1e-3 * phi.norm() &&
                       (rep.norms.size() < 2 || rep.norms.back() > 0.5 * rep.norms[rep.norms.size() - 2]);
    return rep;
}

}  // namespace dbem
