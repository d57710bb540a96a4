#include "dbem/ball_oracle.hpp"

#include <array>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/spherical_harmonic.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>

namespace dbem {

namespace {

void check_channel(int kappa, double E, double m)
{
    if (kappa == 0 || std::abs(kappa) > 8) throw domain_error("radial: kappa must satisfy 1 <= |kappa| <= 8");
    if (!(m > 0) || !(std::abs(E) < m)) throw domain_error("radial: energy must lie in the gap (-m, m)");
}

using State = std::array<double, 2>;

}  // namespace

RadialSolution radial_solve(int kappa, double E, double m, double R)
{
    check_channel(kappa, E, m);
    if (!(R > 0)) throw domain_error("radial_solve: radius must be positive");
    const RadialChannel ch{kappa};
    const double r0 = 1e-3 * R;

    // Frobenius series g = r^s sum a_n r^n, h = r^s sum b_n r^n.
    const int s = kappa < 0 ? ch.l() : ch.lbar();
    std::array<double, 8> a{}, b{};
    if (kappa < 0)
        a[0] = 1.0;
    else
        b[0] = 1.0;
    for (int n = 1; n < 8; ++n) {
        const double da = s + n + 1 + kappa, db = s + n + 1 - kappa;
        a[static_cast<size_t>(n)] = (E + m) * b[static_cast<size_t>(n - 1)] / da;
        b[static_cast<size_t>(n)] = -(E - m) * a[static_cast<size_t>(n - 1)] / db;
    }
    double g0 = 0, h0 = 0, rp = std::pow(r0, s);
    for (int n = 0; n < 8; ++n) {
        g0 += a[static_cast<size_t>(n)] * rp;
        h0 += b[static_cast<size_t>(n)] * rp;
        rp *= r0;
    }
    const double scale = std::max(std::abs(g0), std::abs(h0));
    State y = {g0 / scale, h0 / scale};

    auto rhs = [&](const State& u, State& du, double r) {
        du[0] = -(1.0 + kappa) / r * u[0] + (E + m) * u[1];
        du[1] = -(1.0 - kappa) / r * u[1] - (E - m) * u[0];
    };
    using namespace boost::numeric::odeint;
    auto stepper = make_controlled(1e-12, 1e-10, runge_kutta_dopri5<State>());
    RadialSolution out;
    out.E = E;
    out.m = m;
    out.R = R;
    auto observer = [&](const State&, double) { ++out.steps; };
    integrate_adaptive(stepper, rhs, y, r0, R, 1e-3 * R, observer);
    const double nrm = std::hypot(y[0], y[1]);
    out.g = y[0] / nrm;
    out.h = y[1] / nrm;
    const RadialSolution ref = radial_bessel(kappa, E, m, R, false);
    out.defect = std::hypot(out.g - ref.g, out.h - ref.h);
    return out;
}

RadialSolution radial_bessel(int kappa, double E, double m, double R, bool exterior)
{
    check_channel(kappa, E, m);
    const RadialChannel ch{kappa};
    const double gam = std::sqrt(m * m - E * E);
    const double x = gam * R;
    using boost::math::cyl_bessel_i;
    using boost::math::cyl_bessel_k;
    // i_n(x) = sqrt(pi/2x) I_{n+1/2}(x), k_n(x) = sqrt(pi/2x) K_{n+1/2}(x); the common factor drops out.
    double g, h;
    if (!exterior) {
        g = cyl_bessel_i(ch.l() + 0.5, x);
        h = gam * cyl_bessel_i(ch.lbar() + 0.5, x) / (E + m);
    } else {
        g = cyl_bessel_k(ch.l() + 0.5, x);
        h = -gam * cyl_bessel_k(ch.lbar() + 0.5, x) / (E + m);
    }
    const double nrm = std::hypot(g, h);
    RadialSolution out;
    out.g = g / nrm;
    out.h = h / nrm;
    out.E = E;
    out.m = m;
    out.R = R;
    return out;
}

double boundary_determinant(BoundaryForm form, double value, int kappa, double E, double m, double R, bool exterior)
{
    const RadialSolution s = exterior ? radial_bessel(kappa, E, m, R, true) : radial_solve(kappa, E, m, R);
    const double sgn = exterior ? -1.0 : 1.0;
    if (form == BoundaryForm::theta) return (value - 1.0) * s.g + sgn * (value + 1.0) * s.h;
    return (1.0 - value) * s.g + sgn * (1.0 + value) * s.h;
}

OracleResult oracle_eigenvalues(BoundaryForm form, double value, double m, double R, double lo, double hi,
                                int kappa_max, bool exterior)
{
    if (!(lo < hi) || lo <= -m || hi >= m) throw domain_error("oracle: window must lie inside (-m, m)");
    if (kappa_max < 1 || kappa_max > 8) throw domain_error("oracle: kappa_max must lie in [1, 8]");
    if (form == BoundaryForm::theta && std::abs(std::abs(value) - 1.0) < 1e-12)
        throw domain_error("oracle: critical coefficient |theta| = 1");
    OracleResult res;
    const int ngrid = static_cast<int>(std::ceil((hi - lo) / 1e-3));
    for (int kappa = -kappa_max; kappa <= kappa_max; ++kappa) {
        if (kappa == 0) continue;
        auto f = [&](double E) { return boundary_determinant(form, value, kappa, E, m, R, exterior); };
        double ea = lo, fa = f(ea);
        for (int i = 1; i <= ngrid; ++i) {
            const double eb = lo + (hi - lo) * i / ngrid;
            const double fb = f(eb);
            if (fa == 0) {
                res.roots.push_back({ea, kappa, RadialChannel{kappa}.degeneracy(), 0.0});
            } else if (fa * fb < 0) {
                boost::uintmax_t it = 200;
                auto tol = [](double a, double b) { return std::abs(b - a) < 1e-13; };
                const auto br = boost::math::tools::toms748_solve(f, ea, eb, fa, fb, tol, it);
                const double E = 0.5 * (br.first + br.second);
                res.roots.push_back({E, kappa, RadialChannel{kappa}.degeneracy(), std::abs(f(E))});
                if (std::abs(kappa) == kappa_max && (E - lo < 0.05 * (hi - lo) || hi - E < 0.05 * (hi - lo)))
                    res.kappa_max_suspect = true;
            }
            ea = eb;
            fa = fb;
        }
    }
    std::sort(res.roots.begin(), res.roots.end(), [](const OracleRoot& a, const OracleRoot& b) { return a.E < b.E; });
    return res;
}

std::vector<double> expand_multiplicities(const std::vector<OracleRoot>& roots)
{
    std::vector<double> out;
    for (const auto& r : roots)
        for (int d = 0; d < r.degeneracy; ++d) out.push_back(r.E);
    std::sort(out.begin(), out.end());
    return out;
}

Eigen::Vector2cd spherical_spinor(int kappa, double mj, double theta, double phi)
{
    const RadialChannel ch{kappa};
    const int l = ch.l();
    const double den = 2.0 * l + 1.0;
    const int mlo = static_cast<int>(std::lround(mj - 0.5)), mhi = static_cast<int>(std::lround(mj + 0.5));
    auto Y = [&](int mm) -> cd {
        if (std::abs(mm) > l) return 0.0;
        return boost::math::spherical_harmonic(static_cast<unsigned>(l), mm, theta, phi);
    };
    Eigen::Vector2cd out;
    if (kappa < 0) {
        out << std::sqrt((l + mj + 0.5) / den) * Y(mlo), std::sqrt((l - mj + 0.5) / den) * Y(mhi);
    } else {
        out << -std::sqrt((l - mj + 0.5) / den) * Y(mlo), std::sqrt((l + mj + 0.5) / den) * Y(mhi);
    }
    return out;
}

V4 channel_spinor(int kappa, double mj, double g, double h, double theta, double phi)
{
    V4 f;
    f.head<2>() = g * spherical_spinor(kappa, mj, theta, phi);
    f.tail<2>() = cd(0, 1) * h * spherical_spinor(-kappa, mj, theta, phi);
    return f;
}

}  // namespace dbem
