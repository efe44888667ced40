// Temporary pipeline smoke driver (removed once the CLI lands).
#include <cstdio>

#include "kvdg/analysis.hpp"

int main(int argc, char** argv) {
    using namespace kvdg;
    int example = argc > 1 ? std::atoi(argv[1]) : 1;
    int levels = argc > 2 ? std::atoi(argv[2]) : 3;
    SolverConfig base;
    base.nu = argc > 3 ? std::atof(argv[3]) : 1.0;
    base.kappa = argc > 4 ? std::atof(argv[4]) : 0.01;
    base.sigma_e = 10.0;
    base.pressure_degree = argc > 5 ? std::atoi(argv[5]) : 0;
    ConvergenceReport rep = convergence_study(example, base, levels);
    for (size_t i = 0; i < rep.levels.size(); ++i) {
        const auto& l = rep.levels[i];
        if (!l.solved) {
            std::printf("n=%d FAILED: %s\n", l.n, l.failure.c_str());
            continue;
        }
        std::printf("n=%2d  energy %.4e (%5.3f)  l2 %.4e (%5.3f)  p %.4e (%5.3f)  div %.2e  %.2fs\n",
                    l.n, l.err_energy, i ? rep.order_energy[i - 1] : 0.0, l.err_l2,
                    i ? rep.order_l2[i - 1] : 0.0, l.err_p, i ? rep.order_p[i - 1] : 0.0,
                    l.max_div_residual, l.seconds);
    }
    return 0;
}
