#include "dbem/linalg.hpp"

#include <string>

extern "C" {
void zgetrf_(const int* m, const int* n, std::complex<double>* a, const int* lda, int* ipiv, int* info);
void zgetrs_(const char* trans, const int* n, const int* nrhs, const std::complex<double>* a, const int* lda,
             const int* ipiv, std::complex<double>* b, const int* ldb, int* info);
void zgecon_(const char* norm, const int* n, const std::complex<double>* a, const int* lda, const double* anorm,
             double* rcond, std::complex<double>* work, double* rwork, int* info);
void zheevd_(const char* jobz, const char* uplo, const int* n, std::complex<double>* a, const int* lda, double* w,
             std::complex<double>* work, const int* lwork, double* rwork, const int* lrwork, int* iwork,
             const int* liwork, int* info);
void zgesdd_(const char* jobz, const int* m, const int* n, std::complex<double>* a, const int* lda, double* s,
             std::complex<double>* u, const int* ldu, std::complex<double>* vt, const int* ldvt,
             std::complex<double>* work, const int* lwork, double* rwork, int* iwork, int* info);
}

namespace dbem {

DenseLU::DenseLU(CMat a) : lu_(std::move(a))
{
    if (lu_.rows() != lu_.cols()) throw domain_error("DenseLU: matrix must be square");
    const int n = static_cast<int>(lu_.rows());
    const double anorm = lu_.cwiseAbs().colwise().sum().maxCoeff();
    piv_.resize(static_cast<size_t>(n));
    int info = 0;
    zgetrf_(&n, &n, lu_.data(), &n, piv_.data(), &info);
    if (info < 0) throw numerical_error("DenseLU: zgetrf argument error");
    if (info > 0) {
        rcond_ = 0;
        return;
    }
    std::vector<cd> work(2 * static_cast<size_t>(n));
    std::vector<double> rwork(2 * static_cast<size_t>(n));
    const char norm = '1';
    zgecon_(&norm, &n, lu_.data(), &n, &anorm, &rcond_, work.data(), rwork.data(), &info);
    if (info != 0) throw numerical_error("DenseLU: zgecon failed");
}

namespace {
CMat getrs(const CMat& lu, const std::vector<int>& piv, const CMat& b, char trans)
{
    if (b.rows() != lu.rows()) throw domain_error("DenseLU::solve: size mismatch");
    CMat x = b;
    const int n = static_cast<int>(lu.rows()), nrhs = static_cast<int>(b.cols());
    if (nrhs == 0) return x;
    int info = 0;
    zgetrs_(&trans, &n, &nrhs, lu.data(), &n, piv.data(), x.data(), &n, &info);
    if (info != 0) throw numerical_error("DenseLU: zgetrs failed");
    return x;
}
}  // namespace

CMat DenseLU::solve(const CMat& b) const
{
    if (rcond_ == 0) throw numerical_error("DenseLU: matrix is singular");
    return getrs(lu_, piv_, b, 'N');
}

CMat DenseLU::solve_adjoint(const CMat& b) const
{
    if (rcond_ == 0) throw numerical_error("DenseLU: matrix is singular");
    return getrs(lu_, piv_, b, 'C');
}

void hermitian_eigen(const CMat& a, RVec& values, CMat* vectors)
{
    if (a.rows() != a.cols()) throw domain_error("hermitian_eigen: matrix must be square");
    CMat w = 0.5 * (a + a.adjoint());
    const int n = static_cast<int>(w.rows());
    values.resize(n);
    if (n == 0) return;
    const char jobz = vectors ? 'V' : 'N', uplo = 'L';
    int info = 0, lwork = -1, lrwork = -1, liwork = -1;
    cd wq;
    double rq;
    int iq;
    zheevd_(&jobz, &uplo, &n, w.data(), &n, values.data(), &wq, &lwork, &rq, &lrwork, &iq, &liwork, &info);
    lwork = static_cast<int>(wq.real());
    lrwork = static_cast<int>(rq);
    liwork = iq;
    std::vector<cd> work(static_cast<size_t>(lwork));
    std::vector<double> rwork(static_cast<size_t>(lrwork));
    std::vector<int> iwork(static_cast<size_t>(liwork));
    zheevd_(&jobz, &uplo, &n, w.data(), &n, values.data(), work.data(), &lwork, rwork.data(), &lrwork, iwork.data(),
            &liwork, &info);
    if (info != 0) throw numerical_error("hermitian_eigen: zheevd failed with info " + std::to_string(info));
    if (vectors) *vectors = std::move(w);
}

void singular_values(const CMat& a, RVec& s, CMat* v)
{
    CMat w = a;
    const int m = static_cast<int>(w.rows()), n = static_cast<int>(w.cols());
    const int k = std::min(m, n);
    s.resize(k);
    if (k == 0) return;
    const char jobz = v ? 'S' : 'N';
    CMat u(v ? m : 1, v ? k : 1), vt(v ? k : 1, v ? n : 1);
    const int ldu = static_cast<int>(u.rows()), ldvt = static_cast<int>(vt.rows());
    const int mx = std::max(m, n);
    const size_t lrwork = v ? static_cast<size_t>(std::max(5 * k * k + 5 * k, 2 * mx * k + 2 * k * k + k)) : static_cast<size_t>(7 * k);
    std::vector<double> rwork(lrwork);
    std::vector<int> iwork(static_cast<size_t>(8 * k));
    int info = 0, lwork = -1;
    cd wq;
    zgesdd_(&jobz, &m, &n, w.data(), &m, s.data(), u.data(), &ldu, vt.data(), &ldvt, &wq, &lwork, rwork.data(),
            iwork.data(), &info);
    lwork = static_cast<int>(wq.real());
    std::vector<cd> work(static_cast<size_t>(lwork));
    zgesdd_(&jobz, &m, &n, w.data(), &m, s.data(), u.data(), &ldu, vt.data(), &ldvt, work.data(), &lwork, rwork.data(),
            iwork.data(), &info);
    if (info != 0) throw numerical_error("singular_values: zgesdd failed with info " + std::to_string(info));
    if (v) *v = vt.adjoint();
}

}  // namespace dbem
