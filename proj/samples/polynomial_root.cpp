// Root of R(z) = -(z-2)^7 + 2(z-2)^6 - 5(z-2)^5 - 3(z-2) observed with
// Student-t noise, using step 1/(3t) and the expanding bounds [-log 3t, log 3t].

#include <iostream>

#include <truncsa/truncsa.hpp>

int main() {
    using namespace truncsa;
    SaConfig config;
    config.initial = scalar_vector(0.0);
    config.field = polynomial_field(2.0, study_polynomial_coefficients(), make_noise_student_t(7.0));
    config.step_rule = rule_scalar([](Index t) { return 3.0 * static_cast<double>(t); });
    config.truncation = schedule_expanding([](Index t) { return std::log(3.0 * static_cast<double>(t)); }, 1);
    config.horizon = 100000;
    config.seed = 42;

    const Trajectory traj = sa_run(config);
    for (Index t : log_checkpoints(config.horizon))
        std::cout << "t=" << t << "  Z_t=" << traj.iterate(t)(0) << "\n";
    std::cout << "truncated steps: " << traj.truncation_count() << "\n";
}
