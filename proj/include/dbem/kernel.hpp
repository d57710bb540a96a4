#pragma once

#include <array>
#include <functional>
#include <vector>

#include "dbem/types.hpp"

namespace dbem {

// Spectral parameter lambda with mass m; admissible means lambda lies off (-inf,-m] and [m,inf).
struct SpectralParameter {
    cd lambda;
    double m = 1.0;

    bool admissible() const;
    void require_admissible() const;
    // k = sqrt(lambda^2 - m^2) on the branch Im k > 0.
    cd k() const;
    SpectralParameter conj() const { return {std::conj(lambda), m}; }
};

cd wavenumber(cd lambda, double m);

// G = (lambda + m beta) g + i (alpha . x) h with g, h radial.
struct KernelParts {
    cd g;
    cd h;
};

inline KernelParts kernel_parts(cd k, double r)
{
    const cd e = std::exp(cd(0, 1) * k * r) / (4.0 * pi * r);
    return {e, (1.0 - cd(0, 1) * k * r) * e / (r * r)};
}

C4 green_kernel(const SpectralParameter& p, const Vec3& x);
std::array<C4, 3> green_kernel_gradient(const SpectralParameter& p, const Vec3& x);
cd helmholtz_sl_kernel(const SpectralParameter& p, const Vec3& x);

using MatrixKernel = std::function<C4(const Vec3& x, const Vec3& y)>;

struct GrowthReport {
    double size_constant = 0;       // sup |k(x,y)| |x-y|^(2-a)
    double continuity_constant = 0; // sup |k(x,z)-k(y,z)| |x-z|^2 / |x-y|^a over 4|x-y| < |x-z|
    size_t pairs = 0;
    size_t triples = 0;
};

// Empirical constants of the kernel growth conditions, evaluated componentwise on the
// sample points. Second-condition pairs (x,y) use the `near` closest samples to x.
GrowthReport check_kernel_growth(const MatrixKernel& kernel, double a, const std::vector<Vec3>& samples,
                                 int near = 6);

}  // namespace dbem
