#pragma once

#include <string>
#include <vector>

#include "dbem/weyl.hpp"

namespace dbem {

enum class CoefficientKind { theta, omega, delta_pair };

// Boundary coefficient sampled at the panels. For delta_pair, value holds eta and tau holds tau.
struct BoundaryCoefficient {
    CoefficientKind kind = CoefficientKind::theta;
    RVec value;
    RVec tau;
    double holder = 1.0;

    static BoundaryCoefficient constant(CoefficientKind kind, double v, size_t panels);
    static BoundaryCoefficient delta(double eta, double tau, size_t panels);
    // v(x) = c + g . x at the panel nodes (Lipschitz, exponent 1).
    static BoundaryCoefficient affine(CoefficientKind kind, double c, const Vec3& g, const SurfaceMesh& mesh);

    size_t size() const { return static_cast<size_t>(value.size()); }
    bool is_constant() const;
    // Rejects critical values |v| = 1 and, with confinement set, pairs off eta^2 - tau^2 = -4.
    void validate(size_t panels, bool confinement = false) const;
};

struct DeltaPair {
    double eta;
    double tau;
};

DeltaPair theta_to_delta(double theta);
double delta_to_theta(DeltaPair d);
DeltaPair omega_to_delta(double omega);
double delta_to_omega(DeltaPair d);
// Pointwise versions; the error names the first offending panel.
BoundaryCoefficient confinement_map(const BoundaryCoefficient& c, CoefficientKind target);

// W^{1/2} X W^{-1/2} with w the (repeated) panel areas.
CMat weighted(const CMat& x, const RVec& w);

// Full matrices in area-weighted coordinates (2N for theta/omega, 4N for delta).
CMat bs_matrix_theta(const BoundaryCoefficient& c, const WeylSolver& w, const SurfaceMesh& mesh);
CMat bs_matrix_omega(const BoundaryCoefficient& c, const WeylSolver& w, const SurfaceMesh& mesh);
CMat bs_matrix_delta(const BoundaryCoefficient& c, const DiracBlocks& C, const SurfaceMesh& mesh);

// Orthonormal basis (weighted 2N coordinates) of the compressed traces of spinor fields whose
// components are polynomials of degree <= degree in the node coordinates.
CMat smooth_subspace(const SurfaceMesh& mesh, int degree = 7, double tol = 1e-8);

// Hermitian matrix family sampled at Chebyshev nodes in t = asin(lambda / m) and evaluated by
// barycentric interpolation (also at complex lambda).
class ChebyshevFamily {
public:
    ChebyshevFamily() = default;
    ChebyshevFamily(double m, double lo, double hi, int nodes);

    int nodes() const { return static_cast<int>(t_.size()); }
    double node_lambda(int j) const;
    void set(int j, CMat value) { values_[static_cast<size_t>(j)] = std::move(value); }
    const CMat& value(int j) const { return values_[static_cast<size_t>(j)]; }

    CMat operator()(cd lambda) const;
    // max of the last two Chebyshev coefficient norms relative to the first.
    double tail() const;
    bool empty() const { return values_.empty() || values_.front().size() == 0; }

private:
    double m_ = 1;
    double center_ = 0;
    double radius_ = 1;
    std::vector<double> t_;
    std::vector<double> bw_;
    std::vector<CMat> values_;
};

// Ritz-reduced Weyl functions (interior and exterior) and the reduced C on the combined
// subspace, all from one factorization per node. The mesh must be the interior orientation.
class ReducedFamily {
public:
    struct Options {
        double lo = -0.95;
        double hi = 0.95;
        int nodes = 24;
        int degree = 7;
        QuadratureOptions quadrature;
    };

    ReducedFamily(const SurfaceMesh& mesh, double m, const Options& opt);

    // Binary cache of the sampled matrices. load() rebuilds the subspaces and refuses files whose
    // mesh hash, mass, window, node count, degree, quadrature hash or checksum disagree.
    void save(const std::string& path) const;
    static ReducedFamily load(const std::string& path, const SurfaceMesh& mesh, double m, const Options& opt);

    double m() const { return m_; }
    const Options& options() const { return opt_; }
    const ChebyshevFamily& M(Orientation o) const { return o == Orientation::interior ? m_int_ : m_ext_; }
    const ChebyshevFamily& C() const { return c_; }
    // Basis of the subspace in weighted coordinates: 2N x d (per orientation), 4N x (d_int + d_ext).
    const CMat& Q(Orientation o) const { return o == Orientation::interior ? q_int_ : q_ext_; }
    const CMat& Z() const { return z_; }
    double asymmetry() const { return asymmetry_; }  // max relative anti-Hermitian part before symmetrization
    std::uint64_t mesh_hash() const { return hash_; }
    const SurfaceMesh& mesh(Orientation o) const { return o == Orientation::interior ? *mesh_ : flipped_; }
    double area(size_t i) const { return mesh_->area[i]; }

    // Reduced Birman-Schwinger matrices at lambda.
    CMat theta_matrix(const BoundaryCoefficient& c, Orientation o, cd lambda) const;
    CMat omega_matrix(const BoundaryCoefficient& c, Orientation o, cd lambda) const;
    CMat delta_matrix(const BoundaryCoefficient& c, cd lambda) const;

    // Direct (uninterpolated) reduced Weyl function, one factorization.
    CMat direct_M(Orientation o, cd lambda) const;

private:
    ReducedFamily(const SurfaceMesh& mesh, double m, const Options& opt, bool sample);

    const SurfaceMesh* mesh_;
    SurfaceMesh flipped_;
    double m_;
    Options opt_;
    CMat q_int_, q_ext_, z_, x_int_, x_ext_;
    ChebyshevFamily m_int_, m_ext_, c_;
    double asymmetry_ = 0;
    std::uint64_t hash_ = 0;
};

enum class ScanForm { theta, omega, delta };

struct ScanOptions {
    int fine = 800;             // evaluations of the interpolant across the window
    double tol = 1e-8;          // root tolerance in lambda
    double tail_bound = 1e-5;   // Chebyshev tail above this is a "refine grid" error
    double residual_bound = 1e-6;
};

struct ScanSample {
    double lambda;
    double indicator;  // signed eigenvalue nearest zero (Hermitian forms) or smallest singular value
    double sigma_min;
};

struct ScanRoot {
    double lambda;
    double residual;  // sigma_min / ||BS|| at the root
    std::vector<double> history;  // bracket midpoints during refinement
};

struct SpectralScan {
    ScanForm form = ScanForm::theta;
    Orientation orientation = Orientation::interior;
    std::vector<ScanSample> samples;
    std::vector<ScanRoot> roots;  // sorted, one entry per multiplicity
    int wrong_direction = 0;      // crossings against the expected monotonicity
    double tail = 0;
    int subspace = 0;
};

SpectralScan scan(const ReducedFamily& fam, ScanForm form, const BoundaryCoefficient& c, Orientation o,
                  const ScanOptions& opt = {});

// Group nearly equal roots: returns (lambda, multiplicity) with roots closer than gap merged.
std::vector<std::pair<double, int>> group_roots(const std::vector<ScanRoot>& roots, double gap);

struct RootMatch {
    double oracle;
    double scan;  // NaN when unmatched
    double delta;
};

// Greedy multiset matching of sorted lists within tol; unmatched entries on either side reported.
struct MatchReport {
    std::vector<RootMatch> pairs;
    std::vector<double> extra;  // scan roots without oracle partner
    double max_delta = 0;
    bool ok = false;
};
MatchReport match_roots(const std::vector<double>& oracle, const std::vector<double>& found, double tol);

struct Eigenfunction {
    double lambda;
    CMat phi;          // 2N plus-coordinates, max panel amplitude 1, one column per null vector
    double residual;
    int multiplicity;
};

// Null vectors of the reduced matrix at a root; columns whose singular values fall below
// 10 x the residual threshold are counted as multiplicity.
Eigenfunction eigenfunction(const ReducedFamily& fam, ScanForm form, const BoundaryCoefficient& c, Orientation o,
                            double lambda, double threshold = 1e-6, double degenerate_gap = 0);

struct EmbeddedReport {
    std::vector<double> eps;
    std::vector<double> norms;
    bool nonvanishing = false;
};

// Sequence ||i eps (M(lambda + i eps) - Theta)^{-1} phi|| on the reduced interpolant.
EmbeddedReport embedded_eigenvalue_probe(const ReducedFamily& fam, const BoundaryCoefficient& c, Orientation o,
                                         double lambda, const std::vector<double>& eps, const CVec& phi);

}  // namespace dbem
