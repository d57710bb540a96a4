#include "commands.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "dbem/ball_oracle.hpp"
#include "dbem/binio.hpp"
#include "dbem/identities.hpp"

#ifndef DBEM_VERSION
#define DBEM_VERSION "0.0.0"
#endif

namespace dbem::cli {

using J = nlohmann::ordered_json;
namespace fs = std::filesystem;

const char* version() { return DBEM_VERSION; }

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

namespace {

class Stopwatch {
public:
    double lap(const std::string& name)
    {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        timing_[name] = timing_.contains(name) ? timing_[name].get<double>() + s : s;
        return s;
    }
    J json() const
    {
        J t = timing_;
        t["total_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        return t;
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now(), last_ = start_;
    J timing_ = J::object();
};

J complex_json(cd z) { return J::array({z.real(), z.imag()}); }

const char* orientation_name(Orientation o) { return o == Orientation::interior ? "interior" : "exterior"; }

J mesh_json(const SurfaceMesh& mesh)
{
    const MeshStats st = mesh_stats(mesh);
    return {{"hash", hex64(mesh_hash(mesh))},
            {"panels", st.panels},
            {"vertices", st.vertices},
            {"h", st.h},
            {"area", st.area},
            {"flat_area", st.flat_area},
            {"closure", st.closure},
            {"orientation", orientation_name(mesh.orientation)}};
}

fs::path prepare_out(const RunConfig& c)
{
    fs::path dir(c.out);
    fs::create_directories(dir);
    return dir;
}

// Results first, timing last; the numerical part is deterministic for a fixed config.
void write_bundle(const RunConfig& c, const std::string& command, J results, const Stopwatch& sw)
{
    J j;
    j["version"] = version();
    j["command"] = command;
    j["config"] = to_json(c);
    for (auto& [k, v] : results.items()) j[k] = v;
    j["timing"] = sw.json();
    const fs::path path = prepare_out(c) / (command + ".json");
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream o(tmp);
        if (!o) throw io_error("cannot write " + tmp.string());
        o << j.dump(2) << "\n";
    }
    fs::rename(tmp, path);
    std::cout << "wrote " << path.string() << "\n";
}

void write_text(const fs::path& path, const std::string& text)
{
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream o(tmp);
        if (!o) throw io_error("cannot write " + tmp.string());
        o << text;
    }
    fs::rename(tmp, path);
}

std::string fmt(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

// C_lambda blocks, from the cache directory when present. Cached files carry the mesh hash,
// quadrature hash, lambda and m in the header plus a checksum; any mismatch is refused.
DiracBlocks cached_C(const RunConfig& c, const SpectralParameter& p, const SurfaceMesh& mesh)
{
    if (c.cache.empty()) return assemble_C_blocks(p, mesh, c.quadrature);
    fs::create_directories(c.cache);
    const std::uint64_t mh = mesh_hash(mesh), oh = options_hash(c.quadrature);
    Fnv64 key;
    const double vals[3] = {p.lambda.real(), p.lambda.imag(), p.m};
    key.feed(vals, sizeof vals);
    key.feed(&mh, sizeof mh);
    key.feed(&oh, sizeof oh);
    const fs::path path = fs::path(c.cache) / ("C_" + hex64(key.value()) + ".bin");
    const auto n = static_cast<Eigen::Index>(mesh.size());
    if (fs::exists(path)) {
        const BoundaryOperator op = load_operator(path.string());
        if (op.tag != "C_blocks" || op.mesh_hash != mh || op.options_hash != oh || op.lambda != p.lambda ||
            op.m != p.m || op.matrix.rows() != n || op.matrix.cols() != 4 * n)
            throw io_error("cached operator " + path.string() + " does not match the requested mesh/parameters; refusing");
        DiracBlocks B{p.lambda, p.m, op.matrix.leftCols(n), {}};
        for (Eigen::Index q = 0; q < 3; ++q) B.V[static_cast<size_t>(q)] = op.matrix.middleCols((q + 1) * n, n);
        return B;
    }
    DiracBlocks B = assemble_C_blocks(p, mesh, c.quadrature);
    BoundaryOperator op{"C_blocks", p.lambda, p.m, mh, oh, CMat(n, 4 * n)};
    op.matrix << B.S, B.V[0], B.V[1], B.V[2];
    save_operator(op, path.string());
    return B;
}

ReducedFamily::Options family_options(const RunConfig& c)
{
    ReducedFamily::Options o;
    o.lo = c.scan.lo;
    o.hi = c.scan.hi;
    o.nodes = c.scan.nodes;
    o.degree = c.scan.degree;
    o.quadrature = c.quadrature;
    return o;
}

ReducedFamily cached_family(const RunConfig& c, const SurfaceMesh& mesh)
{
    const ReducedFamily::Options o = family_options(c);
    if (c.cache.empty()) return ReducedFamily(mesh, c.m, o);
    fs::create_directories(c.cache);
    Fnv64 key;
    const std::uint64_t mh = mesh_hash(mesh), oh = options_hash(o.quadrature);
    const double vals[3] = {c.m, o.lo, o.hi};
    const int ints[2] = {o.nodes, o.degree};
    key.feed(vals, sizeof vals);
    key.feed(ints, sizeof ints);
    key.feed(&mh, sizeof mh);
    key.feed(&oh, sizeof oh);
    const fs::path path = fs::path(c.cache) / ("family_" + hex64(key.value()) + ".bin");
    if (fs::exists(path)) return ReducedFamily::load(path.string(), mesh, c.m, o);
    ReducedFamily fam(mesh, c.m, o);
    fam.save(path.string());
    return fam;
}

std::uint64_t family_hash(const ReducedFamily& fam)
{
    Fnv64 f;
    for (const auto* cf : {&fam.M(Orientation::interior), &fam.M(Orientation::exterior), &fam.C()})
        for (int j = 0; j < cf->nodes(); ++j) {
            const CMat& v = cf->value(j);
            f.feed(v.data(), sizeof(cd) * static_cast<size_t>(v.size()));
        }
    return f.value();
}

double sphere_radius(const RunConfig& c)
{
    if (c.geometry.kind != "sphere") throw usage_error("this comparison needs geometry.kind = \"sphere\"");
    return c.geometry.radius;
}

}  // namespace

int cmd_mesh(const RunConfig& c)
{
    Stopwatch sw;
    const SurfaceMesh mesh = build_geometry(c.geometry);
    sw.lap("mesh_s");
    const fs::path off = prepare_out(c) / "mesh.off";
    save_off(mesh, off.string());
    const J mj = mesh_json(mesh);
    std::cout << "panels " << mj["panels"] << "\nvertices " << mj["vertices"] << "\nh " << fmt(mesh.h) << "\narea "
              << fmt(mj["area"].get<double>()) << "\nclosure " << fmt(mj["closure"].get<double>()) << "\norientation "
              << orientation_name(mesh.orientation) << "\nwrote " << off.string() << "\n";
    write_bundle(c, "mesh", {{"mesh", mj}, {"off", off.filename().string()}}, sw);
    return Exit::ok;
}

int cmd_identities(const RunConfig& c)
{
    Stopwatch sw;
    const auto& id = c.identities;
    std::vector<IdentityRow> rows;
    J meshes = J::array();
    std::map<int, double> h_of;
    for (int level : id.levels) {
        GeometryConfig g = c.geometry;
        g.level = level;
        g.orientation = Orientation::interior;
        const SurfaceMesh mesh = build_geometry(g);
        meshes.push_back(mesh_json(mesh));
        h_of[level] = mesh.h;
        for (cd lam : id.lambdas) {
            const SpectralParameter p{lam, c.m};
            p.require_admissible();
            const DiracBlocks C = cached_C(c, p, mesh);
            const CMat SL = assemble_SL(p, mesh, c.quadrature);
            rows.push_back({"square", level, lam, residual_square(C, mesh), id.square_bound});
            rows.push_back({"anticommutator", level, lam, residual_anticommutator(C, SL, mesh), id.anticommutator_bound});
            rows.push_back({"jump", level, lam, residual_jump(p, C, mesh, c.quadrature), id.jump_bound});
            if (level <= id.inverse_max_level) {
                const WeylSolver w(p, mesh, C, true);
                rows.push_back({"inverse", level, lam, residual_inverse(w, mesh), id.inverse_bound});
            }
            if (id.derivative && level == id.derivative_level && c.geometry.kind == "sphere")
                rows.push_back({"derivative", level, lam, residual_derivative(p, mesh, c.quadrature, c.volume),
                                id.derivative_bound});
            std::cout << "level " << level << " lambda " << lam << " done\n" << std::flush;
        }
        sw.lap("level_" + std::to_string(level) + "_s");
    }
    // Empirical order against the previous level for the same identity and lambda.
    bool ok = true;
    J table = J::array();
    std::ostringstream csv;
    csv << "identity,level,lambda_re,lambda_im,residual,bound,order\n";
    for (auto& r : rows) {
        for (const auto& prev : rows)
            if (prev.name == r.name && prev.lambda == r.lambda && prev.level == r.level - 1)
                r.order = empirical_order(prev.residual, r.residual, h_of.at(prev.level), h_of.at(r.level));
        const bool within = r.residual <= r.bound;
        const bool order_ok = r.order == 0 || (r.name != "square" && r.name != "anticommutator") || r.order >= id.order_bound;
        ok = ok && within && order_ok;
        table.push_back({{"identity", r.name},
                         {"level", r.level},
                         {"lambda", complex_json(r.lambda)},
                         {"residual", r.residual},
                         {"bound", r.bound},
                         {"order", r.order},
                         {"pass", within && order_ok}});
        csv << r.name << "," << r.level << "," << fmt(r.lambda.real()) << "," << fmt(r.lambda.imag()) << ","
            << fmt(r.residual) << "," << fmt(r.bound) << "," << fmt(r.order) << "\n";
        std::printf("%-15s level %d lambda (%g,%g)  residual %.3e  bound %.2e  order %5.2f  %s\n", r.name.c_str(),
                    r.level, r.lambda.real(), r.lambda.imag(), r.residual, r.bound, r.order,
                    within && order_ok ? "ok" : "VIOLATION");
    }
    write_text(prepare_out(c) / "identities.csv", csv.str());
    write_bundle(c, "identities", {{"meshes", meshes}, {"rows", table}, {"pass", ok}}, sw);
    return ok ? Exit::ok : Exit::violation;
}

int cmd_scan(const RunConfig& c)
{
    Stopwatch sw;
    GeometryConfig g = c.geometry;
    g.orientation = Orientation::interior;
    const SurfaceMesh mesh = build_geometry(g);
    const ReducedFamily fam = cached_family(c, mesh);
    sw.lap("family_s");
    const BoundaryCoefficient coef = build_coefficient(c.coefficient, mesh);

    ScanOptions so;
    so.fine = c.scan.grid;
    so.tol = c.scan.tol;
    so.tail_bound = c.scan.tail_bound;
    so.residual_bound = c.scan.residual_bound;

    std::vector<Orientation> orients;
    if (c.scan.orientation != "exterior") orients.push_back(Orientation::interior);
    if (c.scan.orientation != "interior") orients.push_back(Orientation::exterior);
    const bool delta = coef.kind == CoefficientKind::delta_pair;
    if (delta) orients = {Orientation::interior};
    const ScanForm form = delta ? ScanForm::delta : coef.kind == CoefficientKind::theta ? ScanForm::theta : ScanForm::omega;

    J scans = J::array();
    std::ostringstream roots_csv, samples_csv;
    roots_csv << "form,orientation,lambda,residual\n";
    samples_csv << "form,orientation,lambda,indicator,sigma_min\n";
    const char* form_name = delta ? "delta" : form == ScanForm::theta ? "theta" : "omega";
    std::vector<SpectralScan> results;
    for (Orientation o : orients) {
        const SpectralScan s = scan(fam, form, coef, o, so);
        const char* on = delta ? "coupled" : orientation_name(o);
        J roots = J::array(), groups = J::array();
        for (const auto& r : s.roots) {
            roots.push_back({{"lambda", r.lambda}, {"residual", r.residual}});
            roots_csv << form_name << "," << on << "," << fmt(r.lambda) << "," << fmt(r.residual) << "\n";
        }
        for (const auto& [lam, mult] : group_roots(s.roots, 2e-2)) {
            double at = s.roots.front().lambda;
            for (const auto& r : s.roots)
                if (std::abs(r.lambda - lam) < std::abs(at - lam)) at = r.lambda;
            const Eigenfunction ef = eigenfunction(fam, form, coef, o, at, c.scan.residual_bound, 2e-2);
            groups.push_back({{"lambda", lam}, {"multiplicity", mult}, {"kernel_dimension", ef.multiplicity},
                              {"residual", ef.residual}});
        }
        for (const auto& smp : s.samples)
            samples_csv << form_name << "," << on << "," << fmt(smp.lambda) << "," << fmt(smp.indicator) << ","
                        << fmt(smp.sigma_min) << "\n";
        scans.push_back({{"form", form_name},
                         {"orientation", on},
                         {"subspace", s.subspace},
                         {"tail", s.tail},
                         {"wrong_direction", s.wrong_direction},
                         {"root_count", s.roots.size()},
                         {"roots", roots},
                         {"groups", groups}});
        std::printf("%s scan (%s): %zu roots, wrong-direction crossings %d, tail %.2e\n", form_name, on, s.roots.size(),
                    s.wrong_direction, s.tail);
        for (const auto& [lam, mult] : group_roots(s.roots, 2e-2)) std::printf("  %+.6f  x%d\n", lam, mult);
        results.push_back(s);
    }
    sw.lap("scan_s");

    J out = {{"mesh", mesh_json(mesh)},
             {"operators", {{"family", hex64(family_hash(fam))}, {"asymmetry", fam.asymmetry()}}},
             {"scans", scans}};
    bool ok = true;
    if (c.scan.compare_oracle) {
        J cmp = J::array();
        if (!delta) {
            if (!coef.is_constant()) throw usage_error("--compare-oracle needs a constant coefficient");
            const double R = sphere_radius(c);
            const BoundaryForm bf = form == ScanForm::theta ? BoundaryForm::theta : BoundaryForm::omega;
            for (size_t k = 0; k < orients.size(); ++k) {
                const bool ext = orients[k] == Orientation::exterior;
                const OracleResult orc =
                    oracle_eigenvalues(bf, c.coefficient.value, c.m, R, c.scan.lo, c.scan.hi, c.scan.kappa_max, ext);
                std::vector<double> found;
                for (const auto& r : results[k].roots) found.push_back(r.lambda);
                const MatchReport rep = match_roots(expand_multiplicities(orc.roots), found, c.scan.match_tol);
                J pairs = J::array();
                for (const auto& pr : rep.pairs)
                    pairs.push_back({{"oracle", pr.oracle},
                                     {"scan", std::isnan(pr.scan) ? J(nullptr) : J(pr.scan)},
                                     {"delta", std::isnan(pr.delta) ? J(nullptr) : J(pr.delta)}});
                cmp.push_back({{"orientation", orientation_name(orients[k])},
                               {"pairs", pairs},
                               {"extra", rep.extra},
                               {"max_delta", rep.max_delta},
                               {"tolerance", c.scan.match_tol},
                               {"kappa_max_suspect", orc.kappa_max_suspect},
                               {"pass", rep.ok}});
                std::printf("oracle comparison (%s): %zu oracle roots, %zu extra scan roots, max |dlambda| %.3e -> %s\n",
                            orientation_name(orients[k]), rep.pairs.size(), rep.extra.size(), rep.max_delta,
                            rep.ok ? "ok" : "VIOLATION");
                ok = ok && rep.ok;
            }
        } else {
            const double eta = coef.value[0], tau = coef.tau[0];
            const double conf = eta * eta - tau * tau + 4.0;
            if (std::abs(conf) > 1e-10)
                throw usage_error("--compare-oracle for the delta shell needs a confinement pair (eta^2 - tau^2 = -4)");
            const double th = delta_to_theta({eta, tau});
            const auto tc = BoundaryCoefficient::constant(CoefficientKind::theta, th, mesh.size());
            std::vector<double> split, coupled;
            for (Orientation o : {Orientation::interior, Orientation::exterior})
                for (const auto& r : scan(fam, ScanForm::theta, tc, o, so).roots) split.push_back(r.lambda);
            for (const auto& r : results[0].roots) coupled.push_back(r.lambda);
            const MatchReport rep = match_roots(split, coupled, c.scan.confinement_tol);
            cmp.push_back({{"theta", th},
                           {"confinement_defect", conf},
                           {"interior_plus_exterior", split.size()},
                           {"coupled", coupled.size()},
                           {"max_delta", rep.max_delta},
                           {"tolerance", c.scan.confinement_tol},
                           {"pass", rep.ok}});
            std::printf("confinement: theta %.6g, interior+exterior %zu roots, coupled %zu, max |dlambda| %.3e -> %s\n",
                        th, split.size(), coupled.size(), rep.max_delta, rep.ok ? "ok" : "VIOLATION");
            ok = ok && rep.ok;
        }
        out["comparison"] = cmp;
        out["pass"] = ok;
        sw.lap("compare_s");
    }
    const fs::path dir = prepare_out(c);
    write_text(dir / "scan_roots.csv", roots_csv.str());
    write_text(dir / "scan_samples.csv", samples_csv.str());
    write_bundle(c, "scan", out, sw);
    return ok ? Exit::ok : Exit::violation;
}

int cmd_oracle(const RunConfig& c)
{
    Stopwatch sw;
    const double R = sphere_radius(c);
    if (c.coefficient.kind == "delta") throw usage_error("oracle: theta or omega coefficient required");
    if (c.coefficient.gradient.norm() > 0) throw usage_error("oracle: constant coefficient required");
    const BoundaryForm bf = c.coefficient.kind == "theta" ? BoundaryForm::theta : BoundaryForm::omega;
    J res = J::array();
    std::ostringstream csv;
    csv << "orientation,E,kappa,degeneracy,residual\n";
    for (bool ext : {false, true}) {
        if ((ext && c.scan.orientation == "interior") || (!ext && c.scan.orientation == "exterior")) continue;
        const OracleResult o =
            oracle_eigenvalues(bf, c.coefficient.value, c.m, R, c.scan.lo, c.scan.hi, c.scan.kappa_max, ext);
        J roots = J::array();
        for (const auto& r : o.roots) {
            roots.push_back({{"E", r.E}, {"kappa", r.kappa}, {"degeneracy", r.degeneracy}, {"residual", r.residual}});
            csv << (ext ? "exterior" : "interior") << "," << fmt(r.E) << "," << r.kappa << "," << r.degeneracy << ","
                << fmt(r.residual) << "\n";
            std::printf("%s  E %+.10f  kappa %+d  degeneracy %d\n", ext ? "exterior" : "interior", r.E, r.kappa,
                        r.degeneracy);
        }
        res.push_back({{"orientation", ext ? "exterior" : "interior"},
                       {"roots", roots},
                       {"kappa_max_suspect", o.kappa_max_suspect}});
    }
    sw.lap("oracle_s");
    write_text(prepare_out(c) / "oracle.csv", csv.str());
    write_bundle(c, "oracle", {{"radius", R}, {"results", res}}, sw);
    return Exit::ok;
}

int cmd_resolvent(const RunConfig& c)
{
    Stopwatch sw;
    const double R = sphere_radius(c);
    GeometryConfig g = c.geometry;
    g.orientation = Orientation::interior;
    const SurfaceMesh mesh = build_geometry(g);
    const auto& rc = c.resolvent;
    VolumeSource src;
    src.region = {0, R};
    src.f = [R](const std::vector<Vec3>& y) {
        CMat f(4, static_cast<Eigen::Index>(y.size()));
        for (size_t a = 0; a < y.size(); ++a) {
            const double s = 1.0 - y[a].squaredNorm() / (R * R);
            const auto k = static_cast<Eigen::Index>(a);
            f(0, k) = s;
            f(1, k) = y[a][0] * s;
            f(2, k) = cd(0, y[a][1]) * s;
            f(3, k) = cd(0.5, 0.2) * s;
        }
        return f;
    };
    const SpectralParameter p{rc.lambda, c.m};
    const ResolventSolver rs(p, mesh, src, c.quadrature, c.volume);
    const auto targets = interior_targets(mesh, static_cast<size_t>(rc.targets), rc.target_factor, c.seed);
    sw.lap("setup_s");

    const auto th = BoundaryCoefficient::constant(CoefficientKind::theta, rc.theta, mesh.size());
    const auto om = BoundaryCoefficient::constant(CoefficientKind::omega, 1.0 / rc.theta, mesh.size());
    const DeltaPair d = theta_to_delta(rc.theta);
    const auto de = BoundaryCoefficient::delta(d.eta, d.tau, mesh.size());

    bool ok = true;
    J rows = J::array();
    auto report = [&](const char* name, const ResolventField& f, const BoundaryCoefficient* cf) {
        const double pde = pde_residual(rs, f, targets), bc = bc_residual(rs, f, cf);
        const bool pass = pde <= rc.pde_bound && bc <= rc.bc_bound;
        ok = ok && pass;
        rows.push_back({{"operator", name}, {"pde", pde}, {"bc", bc}, {"pass", pass}});
        std::printf("%-6s pde %.3e (bound %.2e)  bc %.3e (bound %.2e)  %s\n", name, pde, rc.pde_bound, bc, rc.bc_bound,
                    pass ? "ok" : "VIOLATION");
    };
    const ResolventField mit = rs.mit();
    report("mit", mit, nullptr);
    const ResolventField ft = rs.theta(th);
    report("theta", ft, &th);
    const ResolventField fo = rs.omega(om);
    report("omega", fo, &om);
    const ResolventField fd = rs.delta(de);
    report("delta", fd, &de);
    sw.lap("resolvents_s");

    const double eq = (fo.sigma - ft.sigma).norm() / ft.sigma.norm();
    const CMat g1 = rs.gamma_star(GammaStarPath::trace), g2 = rs.gamma_star(GammaStarPath::direct);
    const double gp = (g1 - g2).norm() / g2.norm();
    const bool eq_ok = eq <= rc.equivalence_bound, gp_ok = gp <= rc.gamma_bound;
    ok = ok && eq_ok && gp_ok;
    std::printf("omega = 1/theta equivalence %.3e (bound %.1e) %s\n", eq, rc.equivalence_bound, eq_ok ? "ok" : "VIOLATION");
    std::printf("gamma* paths agreement %.3e (bound %.1e) %s\n", gp, rc.gamma_bound, gp_ok ? "ok" : "VIOLATION");

    J tj = J::array();
    for (const auto& x : targets) tj.push_back({x[0], x[1], x[2]});
    write_bundle(c, "resolvent",
                 {{"mesh", mesh_json(mesh)},
                  {"lambda", complex_json(rc.lambda)},
                  {"delta_pair", {d.eta, d.tau}},
                  {"rcond", rs.rcond()},
                  {"targets", tj},
                  {"rows", rows},
                  {"omega_theta_equivalence", eq},
                  {"gamma_star_agreement", gp},
                  {"pass", ok}},
                 sw);
    return ok ? Exit::ok : Exit::violation;
}

}  // namespace dbem::cli
