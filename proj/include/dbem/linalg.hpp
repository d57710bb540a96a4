#pragma once

#include <vector>

#include "dbem/types.hpp"

namespace dbem {

// LU factorization with partial pivoting (LAPACK zgetrf) and a reciprocal condition
// estimate in the 1-norm.
class DenseLU {
public:
    DenseLU() = default;
    explicit DenseLU(CMat a);

    CMat solve(const CMat& b) const;
    // Solves A^H x = b.
    CMat solve_adjoint(const CMat& b) const;
    double rcond() const { return rcond_; }
    Eigen::Index size() const { return lu_.rows(); }

private:
    CMat lu_;
    std::vector<int> piv_;
    double rcond_ = 0;
};

// Eigenvalues (ascending) and optionally eigenvectors of a Hermitian matrix (LAPACK zheevd).
void hermitian_eigen(const CMat& a, RVec& values, CMat* vectors = nullptr);

// Singular values (descending) and optionally the right singular vectors (LAPACK zgesdd).
void singular_values(const CMat& a, RVec& s, CMat* v = nullptr);

}  // namespace dbem
