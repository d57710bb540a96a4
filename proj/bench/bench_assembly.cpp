// Serial against OpenMP assembly of C_lambda and of the potential matrix.
#include <chrono>
#include <cstdio>
#include <cstdlib>

#include <omp.h>

#include "dbem/bem.hpp"

using namespace dbem;

namespace {

template <class F>
double best_of(int reps, F&& f)
{
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

double max_diff(const DiracBlocks& a, const DiracBlocks& b)
{
    double d = (a.S - b.S).cwiseAbs().maxCoeff();
    for (size_t q = 0; q < 3; ++q) d = std::max(d, (a.V[q] - b.V[q]).cwiseAbs().maxCoeff());
    return d;
}

}  // namespace

int main(int argc, char** argv)
{
    const int max_level = argc > 1 ? std::atoi(argv[1]) : 3;
    const int reps = argc > 2 ? std::atoi(argv[2]) : 3;
    const SpectralParameter p{cd(0.3, 0.1), 1.0};
    std::printf("threads available: %d\n", omp_get_max_threads());
    std::printf("%5s %7s %12s %12s %8s %10s\n", "level", "panels", "serial_s", "openmp_s", "speedup", "max_diff");
    for (int level = 1; level <= max_level; ++level) {
        const SurfaceMesh mesh = make_sphere(1.0, level);
        DiracBlocks ser, par;
        const double ts = best_of(reps, [&] { ser = assemble_C_blocks_serial(p, mesh); });
        const double tp = best_of(reps, [&] { par = assemble_C_blocks(p, mesh); });
        std::printf("%5d %7zu %12.4f %12.4f %8.2f %10.1e\n", level, mesh.size(), ts, tp, ts / tp, max_diff(ser, par));
    }
    return 0;
}
