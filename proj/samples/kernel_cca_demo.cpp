// Randomized CCA converging to exact kernel CCA as the feature count grows.
#include <iostream>

#include "rnca/rnca.hpp"

int main() {
    const rnca::Index n = 200;
    const rnca::Matrix x = rnca::standard_normal(n, 1, 1);
    rnca::Matrix y = x.array().square().matrix() + 0.1 * rnca::standard_normal(n, 1, 2);

    const auto sx = rnca::median_bandwidth(x).spec;
    const auto sy = rnca::median_bandwidth(y).spec;
    const double gamma = 1e-3;
    const rnca::Vector exact = rnca::kcca_exact(x, y, sx, sy, gamma, gamma, 1);
    std::cout << "exact KCCA rho_1 = " << exact(0) << '\n';
    for (rnca::Index m : {50, 200, 1000, 4000}) {
        const auto model = rnca::rcca_fit(x, y, rnca::sample_fourier(1, m, sx, 10 + m),
                                          rnca::sample_fourier(1, m, sy, 20 + m), gamma, gamma, 1);
        std::cout << "m = " << m << "  RCCA rho_1 = " << model.correlations(0) << '\n';
    }
}
