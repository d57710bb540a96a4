#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace dbem {

using cd = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using C4 = Eigen::Matrix<cd, 4, 4>;
using V4 = Eigen::Matrix<cd, 4, 1>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

enum class ErrorKind { usage, domain, numerical, io };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline Error domain_error(const std::string& s) { return Error(ErrorKind::domain, s); }
inline Error numerical_error(const std::string& s) { return Error(ErrorKind::numerical, s); }
inline Error usage_error(const std::string& s) { return Error(ErrorKind::usage, s); }
inline Error io_error(const std::string& s) { return Error(ErrorKind::io, s); }

constexpr double pi = 3.14159265358979323846;

}  // namespace dbem
