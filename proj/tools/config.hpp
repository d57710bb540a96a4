#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbem/resolvent.hpp"

namespace dbem::cli {

struct GeometryConfig {
    std::string kind = "sphere";  // sphere | ellipsoid | off
    double radius = 1.0;
    Vec3 axes = Vec3(1.0, 0.8, 0.6);
    std::string path;
    Orientation orientation = Orientation::interior;
    int level = 2;
};

struct CoefficientConfig {
    std::string kind = "theta";  // theta | omega | delta
    double value = 0.0;          // theta or omega: c in c + g . x
    Vec3 gradient = Vec3::Zero();
    double eta = 0.0;            // delta-shell strengths
    double tau = 0.0;
    std::optional<double> confinement_theta;  // delta: (eta, tau) from the confinement map of theta
};

struct ScanConfig {
    double lo = -0.95;
    double hi = 0.95;
    int grid = 800;
    int nodes = 12;
    int degree = 7;
    double tol = 1e-8;
    double tail_bound = 1e-5;
    double residual_bound = 1e-6;
    double match_tol = 5e-3;
    double confinement_tol = 1e-4;
    std::string orientation = "both";  // interior | exterior | both
    bool compare_oracle = false;
    int kappa_max = 8;
};

struct IdentityConfig {
    std::vector<int> levels = {2, 3};
    std::vector<cd> lambdas = {cd(0, 0), cd(0.5, 0), cd(0, 0.3)};
    bool derivative = true;
    int derivative_level = 2;
    int inverse_max_level = 3;
    double square_bound = 0.05;
    double anticommutator_bound = 0.02;
    double inverse_bound = 0.05;
    double jump_bound = 0.05;
    double derivative_bound = 0.05;
    double order_bound = 0.8;
};

struct ResolventConfig {
    cd lambda = cd(0.2, 0.3);
    int targets = 12;
    double target_factor = 5.0;
    double theta = 3.0;
    double pde_bound = 0.03;
    double bc_bound = 0.05;
    double equivalence_bound = 1e-8;
    double gamma_bound = 1e-2;
};

struct RunConfig {
    GeometryConfig geometry;
    double m = 1.0;
    CoefficientConfig coefficient;
    ScanConfig scan;
    IdentityConfig identities;
    ResolventConfig resolvent;
    QuadratureOptions quadrature;
    VolumeQuadrature volume;
    std::string out = "out";
    std::string cache;
    unsigned seed = 7;
    int threads = 0;
    std::string source_text;  // config file contents, echoed verbatim
    std::string source_path;
};

// Field-level schema errors (unknown keys, wrong types, non-positive tolerances, bad ranges).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

RunConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");
RunConfig load_config(const std::string& path);
// Re-checks ranges after command-line overrides.
void validate(const RunConfig& c);

nlohmann::ordered_json to_json(const RunConfig& c);

SurfaceMesh build_geometry(const GeometryConfig& g);
BoundaryCoefficient build_coefficient(const CoefficientConfig& c, const SurfaceMesh& mesh);

}  // namespace dbem::cli
