// Acceptance suite: one PASS/FAIL line per criterion, tolerances fixed below.
// Set DBEM_ACCEPT_STRICT=1 to turn any FAIL into a nonzero exit status.
#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <map>
#include <random>
#include <string>

#include "dbem/ball_oracle.hpp"
#include "dbem/clifford.hpp"
#include "dbem/identities.hpp"
#include "dbem/resolvent.hpp"

using namespace dbem;

namespace {

namespace tol {
constexpr double algebra = 1e-13;
constexpr double square = 0.05;
constexpr double order = 0.8;
constexpr double anticommutator = 0.02;
constexpr double inverse = 0.05;
constexpr double jump = 0.05;
constexpr double derivative = 0.05;
constexpr double adjoint = 2e-2;
constexpr double oracle_l3 = 5e-3;
constexpr double oracle_l4 = 2e-3;
constexpr double confinement = 1e-4;
constexpr double mit_shell = 1e-10;
constexpr double pde = 0.03;
constexpr double bc = 0.05;
constexpr double equivalence = 1e-8;
constexpr double gamma_paths = 1e-2;
constexpr double growth_factor = 2.0;
}  // namespace tol

const double m = 1.0;
const cd lambdas[3] = {cd(0, 0), cd(0.5, 0), cd(0, 0.3)};

struct Clock {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); }
};

std::map<int, bool> verdicts;

void verdict(int id, bool pass, const std::string& what)
{
    verdicts[id] = pass;
    std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", what.c_str());
    std::fflush(stdout);
}

void note(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void note(const char* fmt, ...)
{
    va_list ap;
    va_start(ap, fmt);
    std::printf("    ");
    std::vprintf(fmt, ap);
    std::printf("\n");
    std::fflush(stdout);
    va_end(ap);
}

std::string fmt(const char* f, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

const SurfaceMesh& sphere(int level)
{
    static std::map<int, SurfaceMesh> cache;
    auto it = cache.find(level);
    if (it == cache.end()) it = cache.emplace(level, make_sphere(1.0, level)).first;
    return it->second;
}

std::vector<double> lambdas_of(const SpectralScan& s)
{
    std::vector<double> v;
    for (const auto& r : s.roots) v.push_back(r.lambda);
    return v;
}

// 1. Dirac-matrix relations for random unit normals.
void algebra()
{
    Clock clk;
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> N;
    double worst = 0;
    const C4& I = identity4();
    for (int j = 0; j < 3; ++j) {
        worst = std::max(worst, max_abs(alpha(j) * beta() + beta() * alpha(j)));
        for (int k = 0; k < 3; ++k)
            worst = std::max(worst, max_abs(alpha(j) * alpha(k) + alpha(k) * alpha(j) - (j == k ? 2.0 : 0.0) * I));
    }
    worst = std::max(worst, max_abs(beta() * beta() - I));
    for (int t = 0; t < 100; ++t) {
        const Vec3 nu = Vec3(N(rng), N(rng), N(rng)).normalized();
        const auto P = projectors(nu);
        const C4 J = cd(0, 1) * beta() * alpha_dot(nu);
        worst = std::max({worst, max_abs(P.plus * P.plus - P.plus), max_abs(P.minus * P.minus - P.minus),
                          max_abs(P.plus + P.minus - I), max_abs(P.plus * P.minus), max_abs(P.minus * P.plus),
                          max_abs(P.plus * beta() - beta() * P.minus), max_abs(J * J - I),
                          max_abs(alpha_dot(nu) * alpha_dot(nu) - I)});
    }
    const double t = clk.seconds();
    verdict(1, worst <= tol::algebra && t < 1.0,
            "max defect " + fmt("%.1e", worst) + " over 100 normals (bound 1e-13), " + fmt("%.3f s", t));
}

// 2. Operator identities on the unit sphere.
void identities()
{
    Clock clk;
    bool ok = true;
    std::map<int, std::map<int, double>> sq;  // lambda index -> level -> residual
    for (int level : {2, 3, 4}) {
        const SurfaceMesh& mesh = sphere(level);
        for (int li = 0; li < 3; ++li) {
            const SpectralParameter p{lambdas[li], m};
            const DiracBlocks C = assemble_C_blocks(p, mesh);
            sq[li][level] = residual_square(C, mesh);
            if (level != 3) continue;
            const double anti = residual_anticommutator(C, assemble_SL(p, mesh), mesh);
            const double jump = residual_jump(p, C, mesh);
            const WeylSolver w(p, mesh, C, true);
            const double inv = residual_inverse(w, mesh);
            note("level 3, lambda = %g%+gi: (b) anticommutator %.2e  (c) inverse %.2e  (d) jump %.2e", p.lambda.real(),
                 p.lambda.imag(), anti, inv, jump);
            ok = ok && anti <= tol::anticommutator && inv <= tol::inverse && jump <= tol::jump;
        }
    }
    for (int li = 0; li < 3; ++li) {
        const double o23 = empirical_order(sq[li][2], sq[li][3], sphere(2).h, sphere(3).h);
        const double o34 = empirical_order(sq[li][3], sq[li][4], sphere(3).h, sphere(4).h);
        note("(a) lambda = %g%+gi: levels 2/3/4 %.2e %.2e %.2e, orders %.2f %.2f", lambdas[li].real(),
             lambdas[li].imag(), sq[li][2], sq[li][3], sq[li][4], o23, o34);
        ok = ok && sq[li][3] <= tol::square && sq[li][2] > sq[li][3] && sq[li][3] > sq[li][4] && o23 >= tol::order &&
             o34 >= tol::order;
    }
    for (int li = 0; li < 3; ++li) {
        const double d = residual_derivative({lambdas[li], m}, sphere(2));
        note("(e) level 2, lambda = %g%+gi: derivative %.2e", lambdas[li].real(), lambdas[li].imag(), d);
        ok = ok && d <= tol::derivative;
    }
    verdict(2, ok, "identities (a)-(e) within bounds 0.05/0.02/0.05/0.05/0.05, order >= 0.8, " +
                       fmt("%.0f s", clk.seconds()));
}

// 3. Adjoint relations for random admissible lambda, Hermiticity for real lambda in the gap.
void adjoints()
{
    Clock clk;
    const SurfaceMesh& mesh = sphere(2);
    const CMat phi = random_smooth_densities(mesh, 6, 3, 99);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> re(-2.0, 2.0), im(-1.0, 1.0);
    double worst_c = 0, worst_m = 0, worst_full = 0;
    for (int t = 0; t < 10;) {
        const SpectralParameter p{cd(re(rng), im(rng)), m};
        if (!p.admissible() || std::abs(p.lambda.imag()) < 0.05) continue;
        ++t;
        const DiracBlocks C = assemble_C_blocks(p, mesh), Cbar = assemble_C_blocks(p.conj(), mesh);
        const WeylSolver w(p, mesh, C), wbar(p.conj(), mesh, Cbar);
        worst_c = std::max(worst_c, adjoint_defect_C(C, Cbar, mesh, phi));
        worst_m = std::max(worst_m, adjoint_defect_M(w, wbar, mesh, phi));
        worst_full = std::max(worst_full, adjoint_defect_C_full(C, Cbar, mesh));
    }
    double worst_h = 0;
    for (double l : {-0.7, 0.0, 0.4}) {
        const WeylSolver w({cd(l, 0), m}, mesh);
        worst_h = std::max(worst_h, adjoint_defect_M(w, w, mesh, phi));
    }
    note("C adjoint %.2e, M adjoint %.2e, M Hermitian (real lambda) %.2e; full-matrix C defect %.2e (grid modes, "
         "informational)",
         worst_c, worst_m, worst_h, worst_full);
    verdict(3, worst_c <= tol::adjoint && worst_m <= tol::adjoint && worst_h <= tol::adjoint,
            "adjoint defects on smooth densities <= 2e-2 for 10 random lambda, " + fmt("%.0f s", clk.seconds()));
}

struct Level3 {
    ReducedFamily fam;
    Level3() : fam(sphere(3), m, options()) {}
    static ReducedFamily::Options options()
    {
        ReducedFamily::Options o;
        o.nodes = 12;
        return o;
    }
};

// 4. Oracle agreement on the unit ball.
void oracle(const ReducedFamily& fam)
{
    Clock clk;
    const size_t n = fam.mesh(Orientation::interior).size();
    bool ok = true;
    double worst = 0;
    for (double theta : {0.0, 0.5, 3.0})
        for (bool ext : {false, true}) {
            const Orientation o = ext ? Orientation::exterior : Orientation::interior;
            const SpectralScan s = scan(fam, ScanForm::theta, BoundaryCoefficient::constant(CoefficientKind::theta, theta, n), o);
            const auto want = expand_multiplicities(oracle_eigenvalues(BoundaryForm::theta, theta, m, 1.0, -0.95, 0.95, 8, ext).roots);
            const MatchReport r = match_roots(want, lambdas_of(s), tol::oracle_l3);
            note("theta = %g %s: oracle %zu, scan %zu, max |dlambda| %.2e, %s", theta, ext ? "exterior" : "interior",
                 want.size(), s.roots.size(), r.max_delta, r.ok ? "matched" : "MISMATCH");
            ok = ok && r.ok;
            if (!want.empty()) worst = std::max(worst, r.max_delta);
        }
    const SpectralScan mit = scan(fam, ScanForm::omega, BoundaryCoefficient::constant(CoefficientKind::omega, 0.0, n),
                                  Orientation::interior);
    note("MIT (omega = 0): %zu roots", mit.roots.size());
    ok = ok && mit.roots.empty();
    note("level 4 (5120 panels): not run; a dense 20480 x 20480 complex LU needs 6.7 GB, above the 5 GB budget");
    verdict(4, false,
            std::string("level 3 ") + (ok ? "matched" : "NOT matched") + " (max " + fmt("%.1e", worst) +
                ", bound " + fmt("%.0e", tol::oracle_l3) + ", multiplicities exact, MIT empty); level-4 clause (" +
                fmt("%.0e", tol::oracle_l4) + ") not verified, " +
                fmt("%.0f s", clk.seconds()));
}

// 5. Confinement: delta-shell roots against the interior plus exterior theta roots.
void confinement(const ReducedFamily& fam)
{
    Clock clk;
    const size_t n = fam.mesh(Orientation::interior).size();
    bool ok = true;
    for (double theta : {3.0, 0.5}) {
        const DeltaPair d = theta_to_delta(theta);
        const double lorentz = d.eta * d.eta - d.tau * d.tau;
        const auto th = BoundaryCoefficient::constant(CoefficientKind::theta, theta, n);
        std::vector<double> both = lambdas_of(scan(fam, ScanForm::theta, th, Orientation::interior));
        const auto ext = lambdas_of(scan(fam, ScanForm::theta, th, Orientation::exterior));
        both.insert(both.end(), ext.begin(), ext.end());
        std::sort(both.begin(), both.end());
        const SpectralScan s = scan(fam, ScanForm::delta, BoundaryCoefficient::delta(d.eta, d.tau, n), Orientation::interior);
        const MatchReport r = match_roots(both, lambdas_of(s), tol::confinement);
        note("theta = %g -> (eta, tau) = (%g, %g), eta^2 - tau^2 = %.17g: delta roots %zu, interior+exterior %zu, max "
             "|dlambda| %.2e",
             theta, d.eta, d.tau, lorentz, s.roots.size(), both.size(), r.max_delta);
        ok = ok && r.ok && std::abs(lorentz + 4.0) <= 1e-14;
        if (theta == 3.0) ok = ok && d.eta == -1.5 && d.tau == 2.5 && lorentz == -4.0;
    }

    // (eta, tau) = (0, 2): I + 2 beta C against 2 beta (1/2 beta + C), and the MIT inverse through both factorizations
    const SurfaceMesh& mesh = sphere(2);
    const auto shell = BoundaryCoefficient::delta(0.0, 2.0, mesh.size());
    const auto nb = static_cast<Eigen::Index>(4 * mesh.size());
    const std::vector<C4> twobeta(mesh.size(), 2.0 * beta()), halfbeta(mesh.size(), 0.5 * beta());
    const RVec w4 = panel_weights(mesh, 4);
    double worst_matrix = 0, worst_solve = 0;
    for (cd l : {cd(-0.6, 0), cd(0, 0), cd(0.45, 0), cd(0.2, 0.3), cd(1.5, 0.2)}) {
        const SpectralParameter p{l, m};
        const DiracBlocks C = assemble_C_blocks(p, mesh);
        const CMat Cw = weighted(C.dense(), w4);
        const CMat mit = apply_pointwise(twobeta, apply_pointwise(halfbeta, CMat::Identity(nb, nb)) + Cw);
        const CMat bs = bs_matrix_delta(shell, C, mesh);
        worst_matrix = std::max(worst_matrix, (bs - mit).norm() / mit.norm());
        const WeylSolver w(p, mesh, C);
        const CMat x = random_smooth_densities(mesh, 3, 2, 5);
        const CMat a = w.solve_plus(x);
        CMat shell_raw = apply_pointwise(twobeta, C.dense());
        shell_raw.diagonal().array() += 1.0;
        const CMat b = DenseLU(shell_raw).solve(apply_pointwise(twobeta, x));
        worst_solve = std::max(worst_solve, (a - b).norm() / a.norm());
    }
    const SpectralScan s02 = scan(fam, ScanForm::delta, BoundaryCoefficient::delta(0.0, 2.0, fam.mesh(Orientation::interior).size()),
                                  Orientation::interior);
    note("(0, 2) shell vs MIT at 5 lambda: matrix %.1e, solves %.1e; (0, 2) scan roots %zu", worst_matrix, worst_solve,
         s02.roots.size());
    ok = ok && worst_matrix <= tol::mit_shell && worst_solve <= tol::mit_shell && s02.roots.empty();
    verdict(5, ok, "delta-shell multisets equal interior + exterior to 1e-4, eta^2 - tau^2 = -4 (exact for theta = 3), (0,2) = MIT, " +
                       fmt("%.0f s", clk.seconds()));
}

// 6. Resolvents on the level-3 ball.
void resolvents()
{
    Clock clk;
    const SurfaceMesh& mesh = sphere(3);
    VolumeSource src;
    src.region = {0, 1};
    src.f = [](const std::vector<Vec3>& y) {
        CMat f(4, static_cast<Eigen::Index>(y.size()));
        for (size_t a = 0; a < y.size(); ++a) {
            const double s = 1 - y[a].squaredNorm();
            const auto c = static_cast<Eigen::Index>(a);
            f(0, c) = s;
            f(1, c) = y[a][0] * s;
            f(2, c) = cd(0, y[a][1]) * s;
            f(3, c) = cd(0.5, 0.2) * s;
        }
        return f;
    };
    const ResolventSolver rs({cd(0.2, 0.3), m}, mesh, src);
    const auto targets = interior_targets(mesh, 12, 5.0, 7);
    const size_t n = mesh.size();
    const auto th = BoundaryCoefficient::constant(CoefficientKind::theta, 3.0, n);
    const auto om = BoundaryCoefficient::constant(CoefficientKind::omega, 1.0 / 3.0, n);
    const DeltaPair d = theta_to_delta(3.0);
    const auto de = BoundaryCoefficient::delta(d.eta, d.tau, n);

    bool ok = true;
    const auto check = [&](const char* name, const ResolventField& g, const BoundaryCoefficient* c) {
        const double pde = pde_residual(rs, g, targets), bc = bc_residual(rs, g, c);
        note("%-6s pde %.2e  bc %.2e", name, pde, bc);
        ok = ok && pde <= tol::pde && bc <= tol::bc;
    };
    const auto mit = rs.mit();
    check("MIT", mit, nullptr);
    const auto ft = rs.theta(th);
    check("theta", ft, &th);
    const auto fo = rs.omega(om);
    check("omega", fo, &om);
    check("delta", rs.delta(de), &de);
    const double eq = (fo.sigma - ft.sigma).norm() / ft.sigma.norm();
    const CMat g1 = rs.gamma_star(GammaStarPath::trace), g2 = rs.gamma_star(GammaStarPath::direct);
    const double gp = (g1 - g2).norm() / g2.norm();
    note("omega = 1/theta equivalence %.1e, gamma* paths %.2e, %zu targets at distance > 5h", eq, gp, targets.size());
    ok = ok && eq <= tol::equivalence && gp <= tol::gamma_paths && targets.size() == 12;
    verdict(6, ok, "PDE <= 3%, BC <= 5%, omega = 1/theta <= 1e-8, gamma* paths <= 1e-2, " + fmt("%.0f s", clk.seconds()));
}

std::uint64_t bits_hash(const std::vector<double>& v, std::uint64_t h)
{
    for (double x : v) {
        std::uint64_t u;
        std::memcpy(&u, &x, sizeof u);
        h = (h ^ u) * 1099511628211ull;
    }
    return h;
}

struct CountRow {
    std::string name;
    std::vector<size_t> counts;
    std::uint64_t hash = 1469598103934665603ull;
};

std::vector<CountRow> count_roots(const ReducedFamily& fam)
{
    const size_t n = fam.mesh(Orientation::interior).size();
    std::vector<CountRow> rows;
    auto add = [&](std::string name, const SpectralScan& s) {
        CountRow r{std::move(name), {s.roots.size()}};
        r.hash = bits_hash(lambdas_of(s), r.hash);
        rows.push_back(r);
    };
    for (double theta : {0.0, 0.5, -0.5, 3.0})
        for (Orientation o : {Orientation::interior, Orientation::exterior})
            add("theta " + fmt("%g", theta) + (o == Orientation::interior ? " int" : " ext"),
                scan(fam, ScanForm::theta, BoundaryCoefficient::constant(CoefficientKind::theta, theta, n), o));
    for (double omega : {0.0, 2.0})
        add("omega " + fmt("%g", omega),
            scan(fam, ScanForm::omega, BoundaryCoefficient::constant(CoefficientKind::omega, omega, n), Orientation::interior));
    for (double theta : {3.0, 0.5}) {
        const DeltaPair d = theta_to_delta(theta);
        add("delta(theta " + fmt("%g", theta) + ")",
            scan(fam, ScanForm::delta, BoundaryCoefficient::delta(d.eta, d.tau, n), Orientation::interior));
    }
    return rows;
}

// 7. Root counts on the two finest feasible meshes; bitwise repeatability.
void stability(const ReducedFamily& fam3)
{
    Clock clk;
    const auto rows3 = count_roots(fam3);
    const ReducedFamily a(sphere(2), m, Level3::options());
    const auto rows2 = count_roots(a);
    const ReducedFamily b(sphere(2), m, Level3::options());
    const auto again = count_roots(b);
    bool counts = true, same = true;
    for (size_t i = 0; i < rows3.size(); ++i) {
        note("%-18s level 2: %2zu  level 3: %2zu", rows3[i].name.c_str(), rows2[i].counts[0], rows3[i].counts[0]);
        counts = counts && rows2[i].counts == rows3[i].counts;
        same = same && rows2[i].hash == again[i].hash;
    }
    note("repeat of the level-2 pipeline: roots %s", same ? "bitwise identical" : "DIFFER");
    verdict(7, counts && same,
            "counts equal on levels 2 and 3 (level 4 not factorizable), repeat bitwise identical, " +
                fmt("%.0f s", clk.seconds()));
}

// 8. Kernel growth constants.
void growth()
{
    Clock clk;
    const SpectralParameter p{cd(0.5, 0), m};
    const Vec3 g(0.3, -0.2, 0.1);
    const MatrixKernel commutator = [&](const Vec3& x, const Vec3& y) {
        return C4(green_kernel(p, x - y) * (g.dot(y) - g.dot(x)));
    };
    const MatrixKernel raw = [&](const Vec3& x, const Vec3& y) { return green_kernel(p, x - y); };
    std::vector<GrowthReport> c, r;
    for (int level : {2, 3, 4}) {
        c.push_back(check_kernel_growth(commutator, 1.0, sphere(level).node));
        r.push_back(check_kernel_growth(raw, 1.0, sphere(level).node));
        note("level %d: commutator size %.3e continuity %.3e | raw size %.3e continuity %.3e", level,
             c.back().size_constant, c.back().continuity_constant, r.back().size_constant, r.back().continuity_constant);
    }
    auto within = [](double a, double b) { return a <= tol::growth_factor * b && b <= tol::growth_factor * a; };
    bool ok = true;
    for (size_t i = 1; i < c.size(); ++i)
        for (size_t j = 0; j < i; ++j)
            ok = ok && within(c[i].size_constant, c[j].size_constant) &&
                 within(c[i].continuity_constant, c[j].continuity_constant);
    const bool diverges = r[2].size_constant > tol::growth_factor * r[0].size_constant &&
                          r[1].size_constant > r[0].size_constant && r[2].size_constant > r[1].size_constant;
    verdict(8, ok && diverges, "commutator constants within a factor 2 over levels 2-4, raw control diverges, " +
                                   fmt("%.0f s", clk.seconds()));
}

}  // namespace

int main()
{
    std::setvbuf(stdout, nullptr, _IOLBF, 0);
    Clock total;
    try {
        algebra();
        identities();
        adjoints();
        {
            Clock clk;
            const Level3 l3;
            note("level-3 family: %.0f s, subspace %ld/%ld, asymmetry %.1e, tails %.1e %.1e", clk.seconds(),
                 static_cast<long>(l3.fam.Q(Orientation::interior).cols()),
                 static_cast<long>(l3.fam.Q(Orientation::exterior).cols()), l3.fam.asymmetry(),
                 l3.fam.M(Orientation::interior).tail(), l3.fam.M(Orientation::exterior).tail());
            oracle(l3.fam);
            confinement(l3.fam);
            resolvents();
            stability(l3.fam);
        }
        growth();
    } catch (const std::exception& e) {
        std::printf("acceptance suite aborted: %s\n", e.what());
        return 2;
    }
    int passed = 0;
    std::string failed;
    for (const auto& [id, ok] : verdicts) {
        passed += ok;
        if (!ok) failed += " " + std::to_string(id);
    }
    std::printf("summary: %d/%zu criteria pass%s%s, %.0f s\n", passed, verdicts.size(), failed.empty() ? "" : "; FAIL:",
                failed.c_str(), total.seconds());
    const char* strict = std::getenv("DBEM_ACCEPT_STRICT");
    return strict && std::string(strict) == "1" && !failed.empty() ? 1 : 0;
}
