#include "dbem/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "dbem/clifford.hpp"

namespace dbem {

cd wavenumber(cd lambda, double m)
{
    const cd mu = lambda * lambda - m * m;
    if (mu.real() <= 0 && std::abs(mu.imag()) <= 1e-14 * std::max(1.0, std::abs(mu)))
        return cd(0, std::sqrt(std::max(0.0, -mu.real())));
    cd k = std::sqrt(mu);
    if (k.imag() < 0) k = -k;
    return k;
}

bool SpectralParameter::admissible() const
{
    if (!(m > 0)) return false;
    if (std::abs(lambda.imag()) > 0) return true;
    return std::abs(lambda.real()) < m;
}

void SpectralParameter::require_admissible() const
{
    if (!(m > 0)) throw domain_error("spectral parameter: mass must be positive");
    if (!admissible()) throw domain_error("spectral parameter: lambda lies on the essential spectrum");
}

cd SpectralParameter::k() const { return wavenumber(lambda, m); }

C4 green_kernel(const SpectralParameter& p, const Vec3& x)
{
    p.require_admissible();
    const double r = x.norm();
    if (r == 0) throw domain_error("green_kernel: singular at x = 0");
    const KernelParts kp = kernel_parts(p.k(), r);
    return (p.lambda * identity4() + p.m * beta()) * kp.g + cd(0, 1) * kp.h * alpha_dot(x);
}

std::array<C4, 3> green_kernel_gradient(const SpectralParameter& p, const Vec3& x)
{
    p.require_admissible();
    const double r = x.norm();
    if (r == 0) throw domain_error("green_kernel_gradient: singular at x = 0");
    const cd k = p.k();
    const cd iu(0, 1);
    const KernelParts kp = kernel_parts(k, r);
    const cd dg = kp.g * (iu * k - 1.0 / r);
    const cd dh = k * k * std::exp(iu * k * r) / (4.0 * pi * r * r) - 3.0 * kp.h / r;
    const C4 a0 = p.lambda * identity4() + p.m * beta();
    const C4 ax = alpha_dot(x);
    std::array<C4, 3> out;
    for (int j = 0; j < 3; ++j)
        out[j] = a0 * (dg * x[j] / r) + iu * kp.h * alpha(j) + iu * dh * (x[j] / r) * ax;
    return out;
}

cd helmholtz_sl_kernel(const SpectralParameter& p, const Vec3& x)
{
    p.require_admissible();
    const double r = x.norm();
    if (r == 0) throw domain_error("helmholtz_sl_kernel: singular at x = 0");
    return std::exp(cd(0, 1) * p.k() * r) / (4.0 * pi * r);
}

GrowthReport check_kernel_growth(const MatrixKernel& kernel, double a, const std::vector<Vec3>& samples, int near)
{
    GrowthReport rep;
    const size_t n = samples.size();
    std::vector<C4> row(n);
    for (size_t i = 0; i < n; ++i) {
        const Vec3& x = samples[i];
        std::vector<std::pair<double, size_t>> dist;
        dist.reserve(n);
        for (size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double r = (x - samples[j]).norm();
            row[j] = kernel(x, samples[j]);
            rep.size_constant = std::max(rep.size_constant, max_abs(row[j]) * std::pow(r, 2.0 - a));
            ++rep.pairs;
            dist.emplace_back(r, j);
        }
        const size_t nn = std::min<size_t>(static_cast<size_t>(near), dist.size());
        std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(nn), dist.end());
        for (size_t q = 0; q < nn; ++q) {
            const double rxy = dist[q].first;
            const Vec3& y = samples[dist[q].second];
            for (size_t l = 0; l < n; ++l) {
                if (l == i) continue;
                const double rxz = (x - samples[l]).norm();
                if (!(4.0 * rxy < rxz)) continue;
                const C4 diff = row[l] - kernel(y, samples[l]);
                rep.continuity_constant =
                    std::max(rep.continuity_constant, max_abs(diff) * rxz * rxz / std::pow(rxy, a));
                ++rep.triples;
            }
        }
    }
    return rep;
}

}  // namespace dbem
