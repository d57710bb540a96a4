#include "dbem/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <map>
#include <mutex>
#include <utility>

namespace dbem {

namespace {

template <int N>
Rule1D make_rule()
{
    using G = boost::math::quadrature::gauss<double, N>;
    const auto& xs = G::abscissa();
    const auto& ws = G::weights();
    Rule1D r;
    for (size_t i = xs.size(); i-- > 0;) {
        if (xs[i] == 0) continue;
        r.x.push_back(-xs[i]);
        r.w.push_back(ws[i]);
    }
    if (N % 2 == 1) {
        r.x.push_back(0.0);
        r.w.push_back(ws[0]);
    }
    for (size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] == 0) continue;
        r.x.push_back(xs[i]);
        r.w.push_back(ws[i]);
    }
    return r;
}

template <int... Ns>
Rule1D dispatch(int n, std::integer_sequence<int, Ns...>)
{
    Rule1D out;
    bool found = ((n == Ns + 2 ? (out = make_rule<Ns + 2>(), true) : false) || ...);
    if (!found) throw domain_error("gauss_legendre: unsupported order");
    return out;
}

}  // namespace

const Rule1D& gauss_legendre(int n)
{
    static std::mutex mu;
    static std::map<int, Rule1D> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) {
        if (n < 2 || n > 64) throw domain_error("gauss_legendre: order must lie in [2, 64]");
        it = cache.emplace(n, dispatch(n, std::make_integer_sequence<int, 63>{})).first;
    }
    return it->second;
}

Rule1D gauss_legendre(int n, double a, double b)
{
    Rule1D r = gauss_legendre(n);
    for (size_t i = 0; i < r.x.size(); ++i) {
        r.x[i] = a + 0.5 * (b - a) * (r.x[i] + 1.0);
        r.w[i] *= 0.5 * (b - a);
    }
    return r;
}

const TriangleRule& dunavant7()
{
    static const TriangleRule rule = [] {
        const double a1 = 0.059715871789770, b1 = 0.470142064105115;
        const double a2 = 0.797426985353087, b2 = 0.101286507323456;
        const double w1 = 0.132394152788506, w2 = 0.125939180544827;
        TriangleRule t;
        t.bary = {{{1.0 / 3, 1.0 / 3, 1.0 / 3},
                   {a1, b1, b1},
                   {b1, a1, b1},
                   {b1, b1, a1},
                   {a2, b2, b2},
                   {b2, a2, b2},
                   {b2, b2, a2}}};
        t.w = {0.225, w1, w1, w1, w2, w2, w2};
        return t;
    }();
    return rule;
}

}  // namespace dbem
