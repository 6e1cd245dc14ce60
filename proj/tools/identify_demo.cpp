// Generate a random 8-state, 4-input system, simulate it, identify it and
// print the estimation errors next to the sqrt(T_delta / T) prediction.

#include <iostream>

#include "bilinear_id/bilinear_id.hpp"

int main() {
    using namespace bilinear_id;

    const BilinearSystem sys = generate_system(8, 4, 0.6, 0.25, 7);
    const NoiseParams noise(1.0, 0.3);

    const StabilityProfile profile = stability_profile(sys, noise.sigma_u(), 200);
    std::cout << "rho(At) = " << profile.rho_tilde << ", C_hat = " << profile.c_tilde_hat << '\n';
    if (auto smax = sigma_u_max(sys)) {
        std::cout << "sigma_u,max = " << *smax << '\n';
    }

    for (long long T : {100, 400, 1600, 6400}) {
        const Trajectory traj = simulate(sys, noise, T, /*seed=*/11);
        const EstimationResult est = error_metrics(estimate(traj), sys);
        const BoundReport bound =
            bound_report(profile, static_cast<double>(sys.n()), noise.sigma_w(), sys.n(), sys.m(), T);
        std::cout << "T = " << T << "  err0 = " << est.err0_normalized()
                  << "  errk = " << est.errk_avg_normalized()
                  << "  composite = " << *est.composite_error
                  << "  sqrt(T_delta/T) = " << bound.predicted_error
                  << "  cond = " << est.design_condition << '\n';
    }
}
