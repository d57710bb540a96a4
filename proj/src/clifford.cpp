#include "dbem/clifford.hpp"

#include <array>
#include <cmath>

namespace dbem {

namespace {

using C2 = Eigen::Matrix<cd, 2, 2>;

C4 block(const C2& a, const C2& b, const C2& c, const C2& d)
{
    C4 m;
    m << a, b, c, d;
    return m;
}

struct Tables {
    std::array<C4, 3> alpha;
    C4 beta;
    C4 gamma5;
    C4 id;

    Tables()
    {
        const cd iu(0, 1);
        C2 s1, s2, s3, z = C2::Zero(), e = C2::Identity();
        s1 << 0, 1, 1, 0;
        s2 << 0, -iu, iu, 0;
        s3 << 1, 0, 0, -1;
        alpha[0] = block(z, s1, s1, z);
        alpha[1] = block(z, s2, s2, z);
        alpha[2] = block(z, s3, s3, z);
        beta = block(e, z, z, -e);
        gamma5 = block(z, e, e, z);
        id = C4::Identity();
    }
};

const Tables& tables()
{
    static const Tables t;
    return t;
}

}  // namespace

const C4& alpha(int j) { return tables().alpha.at(static_cast<size_t>(j)); }
const C4& beta() { return tables().beta; }
const C4& gamma5() { return tables().gamma5; }
const C4& identity4() { return tables().id; }

C4 alpha_dot(const Vec3& x)
{
    const auto& t = tables();
    return x[0] * t.alpha[0] + x[1] * t.alpha[1] + x[2] * t.alpha[2];
}

C4 alpha_dot(const CVec3& x)
{
    const auto& t = tables();
    return x[0] * t.alpha[0] + x[1] * t.alpha[1] + x[2] * t.alpha[2];
}

Projectors projectors(const Vec3& nu)
{
    if (std::abs(nu.norm() - 1.0) > 1e-12)
        throw domain_error("projectors: normal is not a unit vector");
    const C4 t = cd(0, 1) * beta() * alpha_dot(nu);
    return {0.5 * (identity4() + t), 0.5 * (identity4() - t)};
}

double max_abs(const C4& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace dbem
