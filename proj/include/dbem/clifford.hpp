#pragma once

#include "dbem/types.hpp"

namespace dbem {

// Dirac matrices in the standard representation.
const C4& alpha(int j);
const C4& beta();
const C4& gamma5();
const C4& identity4();

C4 alpha_dot(const Vec3& x);
C4 alpha_dot(const CVec3& x);

struct Projectors {
    C4 plus;
    C4 minus;
};

// P± = (I ± iβ(α·ν))/2. Throws if |ν| differs from 1 by more than 1e-12.
Projectors projectors(const Vec3& nu);

// Largest absolute entry, the norm used by the algebra checks.
double max_abs(const C4& a);

}  // namespace dbem
