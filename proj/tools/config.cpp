#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

namespace dbem::cli {

namespace {

// Reads keys of one table and remembers which were consumed.
class Section {
public:
    Section(const toml::table* t, std::string name) : t_(t), name_(std::move(name)) {}

    bool present() const { return t_ != nullptr; }

    template <class T>
    void get(const char* key, T& out)
    {
        const toml::node* n = find(key);
        if (!n) return;
        if constexpr (std::is_same_v<T, bool>) {
            if (!n->is_boolean()) fail(key, "expected a boolean");
            out = n->as_boolean()->get();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!n->is_string()) fail(key, "expected a string");
            out = n->as_string()->get();
        } else if constexpr (std::is_integral_v<T>) {
            if (!n->is_integer()) fail(key, "expected an integer");
            out = static_cast<T>(n->as_integer()->get());
        } else {
            out = number(n, key);
        }
    }

    void get_vec3(const char* key, Vec3& out)
    {
        const toml::node* n = find(key);
        if (!n) return;
        const toml::array* a = n->as_array();
        if (!a || a->size() != 3) fail(key, "expected an array of 3 numbers");
        for (size_t i = 0; i < 3; ++i) out[static_cast<Eigen::Index>(i)] = number(a->get(i), key);
    }

    void get_complex(const char* key, cd& out)
    {
        const toml::node* n = find(key);
        if (!n) return;
        out = complex(n, key);
    }

    void get_complex_list(const char* key, std::vector<cd>& out)
    {
        const toml::node* n = find(key);
        if (!n) return;
        const toml::array* a = n->as_array();
        if (!a || a->empty()) fail(key, "expected a non-empty array of [re, im] pairs");
        out.clear();
        for (const auto& e : *a) out.push_back(complex(&e, key));
    }

    void get_int_list(const char* key, std::vector<int>& out)
    {
        const toml::node* n = find(key);
        if (!n) return;
        const toml::array* a = n->as_array();
        if (!a || a->empty()) fail(key, "expected a non-empty array of integers");
        out.clear();
        for (const auto& e : *a) {
            if (!e.is_integer()) fail(key, "expected a non-empty array of integers");
            out.push_back(static_cast<int>(e.as_integer()->get()));
        }
    }

    void finish() const
    {
        if (!t_) return;
        for (const auto& [k, v] : *t_)
            if (!used_.count(std::string(k.str()))) fail(std::string(k.str()).c_str(), "unknown key");
    }

    [[noreturn]] void fail(const char* key, const std::string& msg) const
    {
        throw ConfigError(name_ + (name_.empty() ? "" : ".") + key + ": " + msg);
    }

private:
    const toml::node* find(const char* key)
    {
        used_.insert(key);
        return t_ ? t_->get(key) : nullptr;
    }

    double number(const toml::node* n, const char* key) const
    {
        if (n && n->is_floating_point()) return n->as_floating_point()->get();
        if (n && n->is_integer()) return static_cast<double>(n->as_integer()->get());
        fail(key, "expected a number");
    }

    cd complex(const toml::node* n, const char* key) const
    {
        if (n->is_number()) return {number(n, key), 0.0};
        const toml::array* a = n->as_array();
        if (!a || a->size() != 2) fail(key, "expected a number or an [re, im] pair");
        return {number(a->get(0), key), number(a->get(1), key)};
    }

    const toml::table* t_;
    std::string name_;
    std::set<std::string> used_;
};

Orientation parse_orientation(const std::string& s, const char* field)
{
    if (s == "interior") return Orientation::interior;
    if (s == "exterior") return Orientation::exterior;
    throw ConfigError(std::string(field) + ": expected \"interior\" or \"exterior\", got \"" + s + "\"");
}

void positive(double v, const char* field)
{
    if (!(v > 0)) throw ConfigError(std::string(field) + ": must be positive");
}

std::string orientation_name(Orientation o) { return o == Orientation::interior ? "interior" : "exterior"; }

nlohmann::ordered_json complex_json(cd z) { return nlohmann::ordered_json::array({z.real(), z.imag()}); }

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin)
{
    toml::table root;
    try {
        root = toml::parse(text, origin);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << "config parse error in " << origin << " at line " << e.source().begin.line << ": " << e.description();
        throw ConfigError(os.str());
    }
    RunConfig c;
    c.source_text = text;
    c.source_path = origin;

    Section top(&root, "");
    top.get("out", c.out);
    top.get("cache", c.cache);
    top.get("seed", c.seed);
    top.get("threads", c.threads);
    top.get("m", c.m);

    auto section = [&](const char* name) {
        const toml::node* n = root.get(name);
        if (n && !n->is_table()) throw ConfigError(std::string(name) + ": expected a table");
        return Section(n ? n->as_table() : nullptr, name);
    };
    std::set<std::string> tables = {"geometry", "coefficient", "scan", "identities", "resolvent", "quadrature", "volume"};
    for (const auto& [k, v] : root) {
        const std::string key(k.str());
        if (tables.count(key)) continue;
        if (key == "out" || key == "cache" || key == "seed" || key == "threads" || key == "m") continue;
        throw ConfigError(key + ": unknown key");
    }

    {
        Section s = section("geometry");
        s.get("kind", c.geometry.kind);
        s.get("radius", c.geometry.radius);
        s.get_vec3("axes", c.geometry.axes);
        s.get("path", c.geometry.path);
        std::string o = orientation_name(c.geometry.orientation);
        s.get("orientation", o);
        c.geometry.orientation = parse_orientation(o, "geometry.orientation");
        s.get("level", c.geometry.level);
        s.finish();
    }
    {
        Section s = section("coefficient");
        s.get("kind", c.coefficient.kind);
        s.get("value", c.coefficient.value);
        s.get_vec3("gradient", c.coefficient.gradient);
        s.get("eta", c.coefficient.eta);
        s.get("tau", c.coefficient.tau);
        double th = std::numeric_limits<double>::quiet_NaN();
        s.get("confinement_theta", th);
        if (!std::isnan(th)) c.coefficient.confinement_theta = th;
        s.finish();
    }
    {
        Section s = section("scan");
        auto& k = c.scan;
        s.get("lo", k.lo);
        s.get("hi", k.hi);
        s.get("grid", k.grid);
        s.get("nodes", k.nodes);
        s.get("degree", k.degree);
        s.get("tol", k.tol);
        s.get("tail_bound", k.tail_bound);
        s.get("residual_bound", k.residual_bound);
        s.get("match_tol", k.match_tol);
        s.get("confinement_tol", k.confinement_tol);
        s.get("orientation", k.orientation);
        s.get("compare_oracle", k.compare_oracle);
        s.get("kappa_max", k.kappa_max);
        s.finish();
    }
    {
        Section s = section("identities");
        auto& k = c.identities;
        s.get_int_list("levels", k.levels);
        s.get_complex_list("lambdas", k.lambdas);
        s.get("derivative", k.derivative);
        s.get("derivative_level", k.derivative_level);
        s.get("inverse_max_level", k.inverse_max_level);
        s.get("square_bound", k.square_bound);
        s.get("anticommutator_bound", k.anticommutator_bound);
        s.get("inverse_bound", k.inverse_bound);
        s.get("jump_bound", k.jump_bound);
        s.get("derivative_bound", k.derivative_bound);
        s.get("order_bound", k.order_bound);
        s.finish();
    }
    {
        Section s = section("resolvent");
        auto& k = c.resolvent;
        s.get_complex("lambda", k.lambda);
        s.get("targets", k.targets);
        s.get("target_factor", k.target_factor);
        s.get("theta", k.theta);
        s.get("pde_bound", k.pde_bound);
        s.get("bc_bound", k.bc_bound);
        s.get("equivalence_bound", k.equivalence_bound);
        s.get("gamma_bound", k.gamma_bound);
        s.finish();
    }
    {
        Section s = section("quadrature");
        auto& q = c.quadrature;
        s.get("near_factor", q.near_factor);
        s.get("near_ratio", q.near_ratio);
        s.get("max_depth", q.max_depth);
        s.get("polar_order", q.polar_order);
        s.get("linear_reconstruction", q.linear_reconstruction);
        s.get("target_guard", q.target_guard);
        s.finish();
    }
    {
        Section s = section("volume");
        s.get("radial", c.volume.radial);
        s.get("polar", c.volume.polar);
        s.get("azimuthal", c.volume.azimuthal);
        s.finish();
    }
    validate(c);
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

void validate(const RunConfig& c)
{
    const auto& g = c.geometry;
    if (g.kind != "sphere" && g.kind != "ellipsoid" && g.kind != "off")
        throw ConfigError("geometry.kind: expected \"sphere\", \"ellipsoid\" or \"off\"");
    if (g.kind != "off" && (g.level < 0 || g.level > 4))
        throw ConfigError("geometry.level: " + std::to_string(g.level) + " outside [0, 4] (at most 5120 panels)");
    if (g.kind == "off" && g.path.empty()) throw ConfigError("geometry.path: required for kind \"off\"");
    positive(g.radius, "geometry.radius");
    for (int i = 0; i < 3; ++i) positive(g.axes[i], "geometry.axes");
    positive(c.m, "m");

    const auto& k = c.coefficient;
    if (k.kind != "theta" && k.kind != "omega" && k.kind != "delta")
        throw ConfigError("coefficient.kind: expected \"theta\", \"omega\" or \"delta\"");
    if (k.kind == "delta" && k.gradient.norm() > 0)
        throw ConfigError("coefficient.gradient: delta-shell strengths are constants");
    if (k.kind != "delta" && k.gradient.norm() == 0 && std::abs(std::abs(k.value) - 1.0) < 1e-12)
        throw ConfigError("coefficient.value: critical value |" + k.kind + "| = 1");

    const auto& s = c.scan;
    if (!(-c.m < s.lo && s.lo < s.hi && s.hi < c.m)) throw ConfigError("scan.lo/hi: need -m < lo < hi < m");
    if (s.grid < 10) throw ConfigError("scan.grid: at least 10 samples");
    if (s.nodes < 4 || s.nodes > 64) throw ConfigError("scan.nodes: expected 4..64");
    if (s.degree < 1 || s.degree > 12) throw ConfigError("scan.degree: expected 1..12");
    positive(s.tol, "scan.tol");
    positive(s.tail_bound, "scan.tail_bound");
    positive(s.residual_bound, "scan.residual_bound");
    positive(s.match_tol, "scan.match_tol");
    positive(s.confinement_tol, "scan.confinement_tol");
    if (s.orientation != "interior" && s.orientation != "exterior" && s.orientation != "both")
        throw ConfigError("scan.orientation: expected \"interior\", \"exterior\" or \"both\"");
    if (s.kappa_max < 1 || s.kappa_max > 8) throw ConfigError("scan.kappa_max: expected 1..8");

    const auto& id = c.identities;
    for (int l : id.levels)
        if (l < 0 || l > 4) throw ConfigError("identities.levels: " + std::to_string(l) + " outside [0, 4]");
    for (cd l : id.lambdas)
        if (!SpectralParameter{l, c.m}.admissible())
            throw ConfigError("identities.lambdas: lambda lies on the essential spectrum (-inf, -m] or [m, inf)");
    for (double b : {id.square_bound, id.anticommutator_bound, id.inverse_bound, id.jump_bound, id.derivative_bound,
                     id.order_bound})
        positive(b, "identities.*_bound");

    const auto& r = c.resolvent;
    if (r.lambda.imag() == 0) throw ConfigError("resolvent.lambda: must be non-real");
    if (r.targets < 1) throw ConfigError("resolvent.targets: at least 1");
    positive(r.target_factor, "resolvent.target_factor");
    for (double b : {r.pde_bound, r.bc_bound, r.equivalence_bound, r.gamma_bound}) positive(b, "resolvent.*_bound");

    positive(c.quadrature.near_factor, "quadrature.near_factor");
    positive(c.quadrature.near_ratio, "quadrature.near_ratio");
    if (c.quadrature.max_depth < 1 || c.quadrature.max_depth > 16) throw ConfigError("quadrature.max_depth: expected 1..16");
    if (c.quadrature.polar_order < 2 || c.quadrature.polar_order > 64)
        throw ConfigError("quadrature.polar_order: expected 2..64");
    positive(c.quadrature.target_guard, "quadrature.target_guard");
    if (c.volume.radial < 2 || c.volume.radial > 64 || c.volume.polar < 2 || c.volume.polar > 64 ||
        c.volume.azimuthal < 2)
        throw ConfigError("volume: orders outside the supported range");
    if (c.threads < 0) throw ConfigError("threads: must be non-negative");
}

nlohmann::ordered_json to_json(const RunConfig& c)
{
    using J = nlohmann::ordered_json;
    J j;
    j["source"] = c.source_path;
    j["text"] = c.source_text;
    const auto& g = c.geometry;
    j["geometry"] = {{"kind", g.kind},
                     {"radius", g.radius},
                     {"axes", {g.axes[0], g.axes[1], g.axes[2]}},
                     {"path", g.path},
                     {"orientation", orientation_name(g.orientation)},
                     {"level", g.level}};
    j["m"] = c.m;
    const auto& k = c.coefficient;
    j["coefficient"] = {{"kind", k.kind},
                        {"value", k.value},
                        {"gradient", {k.gradient[0], k.gradient[1], k.gradient[2]}},
                        {"eta", k.eta},
                        {"tau", k.tau},
                        {"confinement_theta", k.confinement_theta ? J(*k.confinement_theta) : J(nullptr)}};
    const auto& s = c.scan;
    j["scan"] = {{"lo", s.lo},
                 {"hi", s.hi},
                 {"grid", s.grid},
                 {"nodes", s.nodes},
                 {"degree", s.degree},
                 {"tol", s.tol},
                 {"tail_bound", s.tail_bound},
                 {"residual_bound", s.residual_bound},
                 {"match_tol", s.match_tol},
                 {"confinement_tol", s.confinement_tol},
                 {"orientation", s.orientation},
                 {"compare_oracle", s.compare_oracle},
                 {"kappa_max", s.kappa_max}};
    const auto& id = c.identities;
    J lams = J::array();
    for (cd z : id.lambdas) lams.push_back(complex_json(z));
    j["identities"] = {{"levels", id.levels},
                       {"lambdas", lams},
                       {"derivative", id.derivative},
                       {"derivative_level", id.derivative_level},
                       {"inverse_max_level", id.inverse_max_level},
                       {"square_bound", id.square_bound},
                       {"anticommutator_bound", id.anticommutator_bound},
                       {"inverse_bound", id.inverse_bound},
                       {"jump_bound", id.jump_bound},
                       {"derivative_bound", id.derivative_bound},
                       {"order_bound", id.order_bound}};
    const auto& r = c.resolvent;
    j["resolvent"] = {{"lambda", complex_json(r.lambda)},
                      {"targets", r.targets},
                      {"target_factor", r.target_factor},
                      {"theta", r.theta},
                      {"pde_bound", r.pde_bound},
                      {"bc_bound", r.bc_bound},
                      {"equivalence_bound", r.equivalence_bound},
                      {"gamma_bound", r.gamma_bound}};
    const auto& q = c.quadrature;
    j["quadrature"] = {{"near_factor", q.near_factor},
                       {"near_ratio", q.near_ratio},
                       {"max_depth", q.max_depth},
                       {"polar_order", q.polar_order},
                       {"linear_reconstruction", q.linear_reconstruction},
                       {"target_guard", q.target_guard}};
    j["volume"] = {{"radial", c.volume.radial}, {"polar", c.volume.polar}, {"azimuthal", c.volume.azimuthal}};
    j["out"] = c.out;
    j["cache"] = c.cache;
    j["seed"] = c.seed;
    return j;
}

SurfaceMesh build_geometry(const GeometryConfig& g)
{
    if (g.kind == "sphere") return make_sphere(g.radius, g.level, g.orientation);
    if (g.kind == "ellipsoid") return make_ellipsoid(g.axes[0], g.axes[1], g.axes[2], g.level, g.orientation);
    SurfaceMesh mesh = load_off(g.path);
    if (mesh.orientation != g.orientation) mesh = mesh.flipped();
    return mesh;
}

BoundaryCoefficient build_coefficient(const CoefficientConfig& c, const SurfaceMesh& mesh)
{
    if (c.kind == "delta") {
        if (c.confinement_theta) {
            const DeltaPair d = theta_to_delta(*c.confinement_theta);
            return BoundaryCoefficient::delta(d.eta, d.tau, mesh.size());
        }
        return BoundaryCoefficient::delta(c.eta, c.tau, mesh.size());
    }
    const CoefficientKind kind = c.kind == "theta" ? CoefficientKind::theta : CoefficientKind::omega;
    if (c.gradient.norm() == 0) return BoundaryCoefficient::constant(kind, c.value, mesh.size());
    return BoundaryCoefficient::affine(kind, c.value, c.gradient, mesh);
}

}  // namespace dbem::cli
