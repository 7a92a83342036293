// Recursive least squares for X_t = theta X_{t-1} + xi_t next to the batch
// formula it reproduces.

#include <iomanip>
#include <iostream>

#include <truncsa/truncsa.hpp>

int main() {
    using namespace truncsa;
    const std::vector<double> x = simulate_ar1(0.5, 2000, 11);
    const std::vector<Ar1State> rec = ar1_replay(x, Ar1State{});

    double num = 0.0, den = 1.0;
    for (std::size_t t = 1; t < x.size(); ++t) {
        num += x[t - 1] * x[t];
        den += x[t - 1] * x[t - 1];
    }
    std::cout << std::setprecision(15) << "recursive: " << rec.back().theta_hat << "\n"
              << "batch:     " << num / den << "\n";
}
