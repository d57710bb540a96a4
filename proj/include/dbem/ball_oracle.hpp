#pragma once

#include <vector>

#include "dbem/types.hpp"

namespace dbem {

struct RadialChannel {
    int kappa;

    int l() const { return kappa < 0 ? -kappa - 1 : kappa; }
    int lbar() const { return kappa < 0 ? -kappa : kappa - 1; }
    double j() const { return std::abs(kappa) - 0.5; }
    int degeneracy() const { return 2 * std::abs(kappa); }
};

// Upper/lower radial amplitudes at r = R of the solution regular at the origin, normalized to
// g^2 + h^2 = 1; defect is the distance to the closed-form Bessel solution.
struct RadialSolution {
    double g = 0;
    double h = 0;
    double E = 0;
    double m = 1;
    double R = 1;
    double defect = 0;
    int steps = 0;
};

// Radial system g' + (1+kappa)/r g = (E+m) h, h' + (1-kappa)/r h = -(E-m) g, integrated with
// adaptive Dormand-Prince from a Frobenius start at r = 1e-3 R.
RadialSolution radial_solve(int kappa, double E, double m, double R);

// Closed forms via modified spherical Bessel functions (first kind inside, second kind outside).
RadialSolution radial_bessel(int kappa, double E, double m, double R, bool exterior);

enum class BoundaryForm { theta, omega };

// Real function of E whose zeros are the eigenvalues in channel kappa for the constant
// boundary condition theta P+ f = P+ beta f (or P+ f = omega P+ beta f).
double boundary_determinant(BoundaryForm form, double value, int kappa, double E, double m, double R, bool exterior);

struct OracleRoot {
    double E;
    int kappa;
    int degeneracy;
    double residual;
};

struct OracleResult {
    std::vector<OracleRoot> roots;  // sorted by E
    bool kappa_max_suspect = false;  // a top-channel root sits within 5% of a window edge
};

OracleResult oracle_eigenvalues(BoundaryForm form, double value, double m, double R, double lo, double hi,
                                int kappa_max, bool exterior);

// Total multiplicity-expanded list of eigenvalues.
std::vector<double> expand_multiplicities(const std::vector<OracleRoot>& roots);

// Spherical spinor Omega_{kappa, mj} at the unit direction (theta, phi); mj half-integer.
Eigen::Vector2cd spherical_spinor(int kappa, double mj, double theta, double phi);

// Four-spinor (g Omega_{kappa,mj}, i h Omega_{-kappa,mj}) at radius R in direction (theta, phi).
V4 channel_spinor(int kappa, double mj, double g, double h, double theta, double phi);

}  // namespace dbem
