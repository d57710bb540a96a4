#include "dbem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "dbem/quadrature.hpp"

namespace dbem {

double Surface::level(const Vec3& p) const
{
    if (!analytic) return 1.0;
    return p.cwiseQuotient(axes).norm();
}

Vec3 Surface::project(const Vec3& p) const { return analytic ? Vec3(p / level(p)) : p; }

Vec3 Surface::normal(const Vec3& y) const
{
    const Vec3 g = y.cwiseQuotient(axes.cwiseProduct(axes));
    return g / g.norm();
}

Vec3 Surface::differential(const Vec3& p, const Vec3& t) const
{
    if (!analytic) return t;
    const double s = level(p);
    const Vec3 grad = p.cwiseQuotient(axes.cwiseProduct(axes)) / s;
    return t / s - p * (grad.dot(t) / (s * s));
}

double Surface::jacobian(const Vec3& p, const Vec3& n) const
{
    if (!analytic) return 1.0;
    const Vec3 t1 = n.unitOrthogonal();
    const Vec3 t2 = n.cross(t1);
    return differential(p, t1).cross(differential(p, t2)).norm();
}

namespace {

void icosahedron(std::vector<Vec3>& v, std::vector<std::array<int, 3>>& f)
{
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    const double raw[12][3] = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                               {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
    v.clear();
    for (const auto& p : raw) v.push_back(Vec3(p[0], p[1], p[2]).normalized());
    f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
         {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
         {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
}

void subdivide(std::vector<Vec3>& v, std::vector<std::array<int, 3>>& f)
{
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
        const auto key = std::minmax(a, b);
        auto it = mid.find(key);
        if (it != mid.end()) return it->second;
        v.push_back((v[static_cast<size_t>(a)] + v[static_cast<size_t>(b)]).normalized());
        const int id = static_cast<int>(v.size()) - 1;
        mid.emplace(key, id);
        return id;
    };
    std::vector<std::array<int, 3>> out;
    out.reserve(4 * f.size());
    for (const auto& t : f) {
        const int ab = midpoint(t[0], t[1]), bc = midpoint(t[1], t[2]), ca = midpoint(t[2], t[0]);
        out.push_back({t[0], ab, ca});
        out.push_back({t[1], bc, ab});
        out.push_back({t[2], ca, bc});
        out.push_back({ab, bc, ca});
    }
    f = std::move(out);
}

SurfaceMesh ellipsoid_mesh(const Vec3& axes, int level, Orientation orientation)
{
    if (level < 0) throw domain_error("mesh: subdivision level must be non-negative");
    if (level > 8) throw domain_error("mesh: subdivision level above 8 rejected");
    if (!(axes.minCoeff() > 0) || !axes.allFinite()) throw domain_error("mesh: axes must be positive");
    std::vector<Vec3> v;
    std::vector<std::array<int, 3>> f;
    icosahedron(v, f);
    for (int l = 0; l < level; ++l) subdivide(v, f);
    for (auto& p : v) p = p.cwiseProduct(axes);
    if (orientation == Orientation::exterior)
        for (auto& t : f) std::swap(t[1], t[2]);
    Surface s;
    s.analytic = true;
    s.axes = axes;
    return build_mesh(std::move(v), std::move(f), s, orientation);
}

double signed_volume(const std::vector<Vec3>& v, const std::vector<std::array<int, 3>>& f)
{
    double vol = 0;
    for (const auto& t : f)
        vol += v[static_cast<size_t>(t[0])].dot(v[static_cast<size_t>(t[1])].cross(v[static_cast<size_t>(t[2])]));
    return vol / 6.0;
}

}  // namespace

SurfaceMesh build_mesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> panels, Surface surface,
                       Orientation orientation)
{
    SurfaceMesh m;
    m.vertices = std::move(vertices);
    m.panels = std::move(panels);
    m.surface = surface;
    m.orientation = orientation;
    const size_t n = m.panels.size();
    const int nv = static_cast<int>(m.vertices.size());
    if (n == 0) throw MeshError(MeshError::Code::malformed, "mesh: no panels");

    std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> edges;
    for (size_t i = 0; i < n; ++i) {
        const auto& t = m.panels[i];
        for (int k = 0; k < 3; ++k) {
            if (t[k] < 0 || t[k] >= nv)
                throw MeshError(MeshError::Code::malformed, "mesh: panel " + std::to_string(i) + " has an invalid vertex index");
            const int a = t[k], b = t[(k + 1) % 3];
            if (a == b) throw MeshError(MeshError::Code::degenerate, "mesh: panel " + std::to_string(i) + " repeats a vertex");
            edges[std::minmax(a, b)].push_back({static_cast<int>(i), k});
        }
    }
    m.neighbors.assign(n, {-1, -1, -1});
    for (const auto& [key, uses] : edges) {
        if (uses.size() != 2)
            throw MeshError(MeshError::Code::non_closed, "mesh: non-closed surface, edge (" + std::to_string(key.first) +
                                                             "," + std::to_string(key.second) + ") is used by " +
                                                             std::to_string(uses.size()) + " panel(s)");
        const auto& p = m.panels[static_cast<size_t>(uses[0].first)];
        const auto& q = m.panels[static_cast<size_t>(uses[1].first)];
        const int pa = p[uses[0].second], qa = q[uses[1].second];
        if (pa == qa)
            throw MeshError(MeshError::Code::inconsistent_orientation,
                            "mesh: inconsistent orientation between panels " + std::to_string(uses[0].first) + " and " +
                                std::to_string(uses[1].first));
        m.neighbors[static_cast<size_t>(uses[0].first)][static_cast<size_t>(uses[0].second)] = uses[1].first;
        m.neighbors[static_cast<size_t>(uses[1].first)][static_cast<size_t>(uses[1].second)] = uses[0].first;
    }
    const double vol = signed_volume(m.vertices, m.panels);
    if ((vol > 0) != (orientation == Orientation::interior))
        throw MeshError(MeshError::Code::inconsistent_orientation, "mesh: winding does not match the requested orientation");

    const double sign = static_cast<double>(static_cast<int>(orientation));
    const TriangleRule& tr = dunavant7();
    m.centroid.resize(n);
    m.flat_normal.resize(n);
    m.flat_area.resize(n);
    m.node.resize(n);
    m.normal.resize(n);
    m.area.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const Vec3& a = m.vertices[static_cast<size_t>(m.panels[i][0])];
        const Vec3& b = m.vertices[static_cast<size_t>(m.panels[i][1])];
        const Vec3& c = m.vertices[static_cast<size_t>(m.panels[i][2])];
        const Vec3 cr = (b - a).cross(c - a);
        const double fa = 0.5 * cr.norm();
        if (!(fa > 0)) throw MeshError(MeshError::Code::degenerate, "mesh: panel " + std::to_string(i) + " has zero area");
        m.flat_area[i] = fa;
        m.flat_normal[i] = cr / cr.norm();
        m.centroid[i] = (a + b + c) / 3.0;
        const double la = (b - c).norm(), lb = (c - a).norm(), lc = (a - b).norm();
        m.h = std::max(m.h, la * lb * lc / (4.0 * fa));
        if (surface.analytic) {
            m.node[i] = surface.project(m.centroid[i]);
            m.normal[i] = sign * surface.normal(m.node[i]);
            // Patch area: degree-5 rule on the four midpoint children.
            const Vec3 ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
            const std::array<std::array<Vec3, 3>, 4> kids = {{{a, ab, ca}, {ab, b, bc}, {ca, bc, c}, {ab, bc, ca}}};
            double s = 0;
            for (const auto& kid : kids)
                for (size_t q = 0; q < tr.w.size(); ++q) {
                    const Vec3 p = tr.bary[q][0] * kid[0] + tr.bary[q][1] * kid[1] + tr.bary[q][2] * kid[2];
                    s += tr.w[q] * surface.jacobian(p, m.flat_normal[i]);
                }
            m.area[i] = 0.25 * fa * s;
        } else {
            m.node[i] = m.centroid[i];
            m.normal[i] = m.flat_normal[i];
            m.area[i] = fa;
        }
    }
    return m;
}

SurfaceMesh SurfaceMesh::flipped() const
{
    auto f = panels;
    for (auto& t : f) std::swap(t[1], t[2]);
    const Orientation o = orientation == Orientation::interior ? Orientation::exterior : Orientation::interior;
    return build_mesh(vertices, std::move(f), surface, o);
}

SurfaceMesh make_sphere(double radius, int level, Orientation orientation)
{
    if (!(radius > 0)) throw domain_error("make_sphere: radius must be positive");
    return ellipsoid_mesh(Vec3::Constant(radius), level, orientation);
}

SurfaceMesh make_ellipsoid(double a, double b, double c, int level, Orientation orientation)
{
    if (!(a > 0 && b > 0 && c > 0)) throw domain_error("make_ellipsoid: degenerate axes");
    return ellipsoid_mesh(Vec3(a, b, c), level, orientation);
}

SurfaceMesh load_off(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw io_error("load_off: cannot open " + path);
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) tokens.push_back(tok);
    }
    auto bad = [&](const std::string& why) { return MeshError(MeshError::Code::malformed, "load_off: " + why + " in " + path); };
    size_t pos = 0;
    auto next_int = [&]() -> long {
        if (pos >= tokens.size()) throw bad("unexpected end of file");
        size_t used = 0;
        long v = 0;
        try {
            v = std::stol(tokens[pos], &used);
        } catch (const std::exception&) {
            throw bad("expected an integer, got '" + tokens[pos] + "'");
        }
        if (used != tokens[pos].size()) throw bad("expected an integer, got '" + tokens[pos] + "'");
        ++pos;
        return v;
    };
    auto next_double = [&]() -> double {
        if (pos >= tokens.size()) throw bad("unexpected end of file");
        size_t used = 0;
        double v = 0;
        try {
            v = std::stod(tokens[pos], &used);
        } catch (const std::exception&) {
            throw bad("expected a number, got '" + tokens[pos] + "'");
        }
        if (used != tokens[pos].size() || !std::isfinite(v)) throw bad("expected a number, got '" + tokens[pos] + "'");
        ++pos;
        return v;
    };
    if (tokens.empty() || tokens[0] != "OFF") throw bad("missing OFF header");
    pos = 1;
    const long nv = next_int(), nf = next_int();
    next_int();
    if (nv <= 0 || nf <= 0) throw bad("non-positive element counts");
    std::vector<Vec3> v(static_cast<size_t>(nv));
    for (auto& p : v) {
        const double x = next_double(), y = next_double(), z = next_double();
        p = Vec3(x, y, z);
    }
    std::vector<std::array<int, 3>> f(static_cast<size_t>(nf));
    for (auto& t : f) {
        if (next_int() != 3) throw bad("only triangular faces are supported");
        for (auto& idx : t) {
            const long k = next_int();
            if (k < 0 || k >= nv) throw bad("vertex index out of range");
            idx = static_cast<int>(k);
        }
    }
    if (pos != tokens.size()) throw bad("trailing data");
    const Orientation o = signed_volume(v, f) >= 0 ? Orientation::interior : Orientation::exterior;
    return build_mesh(std::move(v), std::move(f), Surface{}, o);
}

void save_off(const SurfaceMesh& mesh, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw io_error("save_off: cannot open " + path);
    out << "OFF\n" << mesh.vertices.size() << ' ' << mesh.panels.size() << " 0\n";
    out << std::setprecision(17);
    for (const auto& p : mesh.vertices) out << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
    for (const auto& t : mesh.panels) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    if (!out) throw io_error("save_off: write failed for " + path);
}

std::uint64_t mesh_hash(const SurfaceMesh& mesh)
{
    std::uint64_t h = 1469598103934665603ull;
    auto feed = [&h](const void* data, size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    for (const auto& p : mesh.vertices) feed(p.data(), 3 * sizeof(double));
    for (const auto& t : mesh.panels) feed(t.data(), 3 * sizeof(int));
    const int o = static_cast<int>(mesh.orientation);
    feed(&o, sizeof o);
    const int an = mesh.surface.analytic ? 1 : 0;
    feed(&an, sizeof an);
    if (mesh.surface.analytic) feed(mesh.surface.axes.data(), 3 * sizeof(double));
    return h;
}

MeshStats mesh_stats(const SurfaceMesh& mesh)
{
    MeshStats s;
    s.panels = mesh.size();
    s.vertices = mesh.vertices.size();
    s.h = mesh.h;
    Vec3 closure = Vec3::Zero();
    for (size_t i = 0; i < mesh.size(); ++i) {
        s.area += mesh.area[i];
        s.flat_area += mesh.flat_area[i];
        closure += mesh.area[i] * mesh.normal[i];
        s.centroid_offset = std::max(s.centroid_offset, (mesh.node[i] - mesh.centroid[i]).norm());
    }
    s.closure = closure.norm();
    return s;
}

}  // namespace dbem
