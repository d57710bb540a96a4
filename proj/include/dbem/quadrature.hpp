#pragma once

#include <array>
#include <vector>

#include "dbem/types.hpp"

namespace dbem {

// Gauss-Legendre rule on [-1, 1]. Supported orders: 2..64.
struct Rule1D {
    std::vector<double> x;
    std::vector<double> w;
};

const Rule1D& gauss_legendre(int n);

// Same rule mapped to [a, b].
Rule1D gauss_legendre(int n, double a, double b);

// Seven-point degree-5 rule on the reference triangle; barycentric points, weights summing to 1.
struct TriangleRule {
    std::array<std::array<double, 3>, 7> bary;
    std::array<double, 7> w;
};

const TriangleRule& dunavant7();

}  // namespace dbem
