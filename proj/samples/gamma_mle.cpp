// Recursive likelihood estimate of a Gamma shape parameter with bounds
// [0.1 / sqrt(log(t+2)), t+2], fed one observation at a time.

#include <iostream>
#include <random>

#include <truncsa/truncsa.hpp>

int main() {
    using namespace truncsa;
    const double theta = 0.1;
    GammaMleState state;
    state.theta_hat = 1.0;
    state.schedule = schedule_gamma_mt(0.1, 1.0);

    SplitMix64 eng(7);
    Index truncations = 0;
    for (Index t = 1; t <= 100000; ++t) {
        state = gamma_mle_step(state, sample_gamma(theta, eng));
        truncations += state.truncated;
        if (t == 10 || t == 1000 || t == 100000)
            std::cout << "t=" << t << "  theta_hat=" << state.theta_hat << "\n";
    }
    std::cout << "truncated steps: " << truncations << "\n";
}
