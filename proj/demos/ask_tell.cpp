// Drives the solver by hand on a custom problem through ask/tell: minimize a
// shifted sphere inside a disk constraint, pretending the closed forms are
// black boxes. The same loop shape works for lab hardware or a simulator:
// evaluate wherever ask() points, feed the observations back with tell().

#include <cstdio>

#include "smgo/smgo.hpp"

namespace {

void sphere_in_disk(const double* x, double& z, double* c) {
    const double dx = x[0] - 0.3;
    const double dy = x[1] + 0.7;
    z = dx * dx + dy * dy;
    // satisfied (>= 0) inside the disk of radius 1.5 around the origin
    c[0] = 1.5 * 1.5 - (x[0] * x[0] + x[1] * x[1]);
}

} // namespace

int main() {
    smgo::ProblemSpec problem{"sphere-in-disk", 2, 1, {-2.0, -2.0}, {2.0, 2.0},
                              std::nullopt, sphere_in_disk};

    smgo::SolverConfig cfg;
    cfg.budget = 80;
    cfg.seed = 42;

    smgo::Solver solver(problem, cfg);
    double z = 0.0;
    smgo::Vec c(problem.n_constraints);
    while (!solver.done()) {
        const smgo::Vec x = solver.ask();
        sphere_in_disk(x.data(), z, c.data());  // the "experiment"
        const smgo::IterationRecord& rec = solver.tell(z, c);
        if (rec.n % 20 == 0 && rec.z_best)
            std::printf("iter %3zu  best z so far %.6f\n", rec.n, *rec.z_best);
    }

    const smgo::Sample& best = solver.dataset().best_sample();
    std::printf("best z %.6f at (%.4f, %.4f), true optimum 0 at (0.3, -0.7)\n",
                best.z, -2.0 + 4.0 * best.x[0], -2.0 + 4.0 * best.x[1]);
    return 0;
}
