#pragma once

#include <string>
#include <vector>

#include "dbem/spectral.hpp"

namespace dbem {

// Six smooth spinor densities (4N x 6) with polynomial components in the node coordinates.
CMat probe_densities(const SurfaceMesh& mesh);

// Random smooth densities: each component a polynomial of total degree <= degree with
// standard complex Gaussian coefficients (mt19937_64 seeded with seed).
CMat random_smooth_densities(const SurfaceMesh& mesh, int count, int degree, unsigned seed);

// Area-weighted relative norm ||r|| / ||ref||; k is the number of components per panel.
double weighted_relative(const SurfaceMesh& mesh, const CMat& r, const CMat& ref, int k = 4);

// ||4 (C (alpha.nu))^2 phi + phi|| / ||phi|| over the probes.
double residual_square(const DiracBlocks& C, const SurfaceMesh& mesh);
// ||(C beta + beta C) phi - 2 (lambda beta + m) SL phi|| / ||2 (lambda beta + m) SL phi||.
double residual_anticommutator(const DiracBlocks& C, const CMat& SL, const SurfaceMesh& mesh);
// ||M M^{-1} x - x|| / ||x|| for the compressed probes; w must carry the inverse form.
double residual_inverse(const WeylSolver& w, const SurfaceMesh& mesh);
// Extrapolated interior trace of Phi phi against C phi - (i/2)(alpha.nu) phi.
double residual_jump(const SpectralParameter& p, const DiracBlocks& C, const SurfaceMesh& mesh,
                     const QuadratureOptions& q = {});
// Central difference of C in lambda against Phi*_{conj lambda} Phi_lambda composed over the ball
// and its exterior (the sphere mesh is required).
double residual_derivative(const SpectralParameter& p, const SurfaceMesh& mesh, const QuadratureOptions& q = {},
                           const VolumeQuadrature& vq = {8, 6, 12}, double delta = 1e-4);

// Weighted adjoint defects on densities phi (4N x k): <phi_a, X(lambda) phi_b> against
// <X(conj lambda) phi_a, phi_b>, relative in the Frobenius norm.
double adjoint_defect_C(const DiracBlocks& C, const DiracBlocks& Cbar, const SurfaceMesh& mesh, const CMat& phi);
// Full-matrix version in weighted coordinates: ||W^1/2 C W^-1/2 - (W^1/2 Cbar W^-1/2)^H||_F / ||C||_F.
double adjoint_defect_C_full(const DiracBlocks& C, const DiracBlocks& Cbar, const SurfaceMesh& mesh);
// Same for the Weyl function on the compressed densities E^H phi.
double adjoint_defect_M(const WeylSolver& w, const WeylSolver& wbar, const SurfaceMesh& mesh, const CMat& phi);
double adjoint_defect_M_full(const CMat& M, const CMat& Mbar, const SurfaceMesh& mesh);

struct IdentityRow {
    std::string name;
    int level = 0;
    cd lambda;
    double residual = 0;
    double bound = 0;
    double order = 0;  // empirical order against the previous level (0 when not available)
};

// log(coarse / fine) / log(h_coarse / h_fine).
double empirical_order(double coarse, double fine, double h_coarse, double h_fine);

}  // namespace dbem
