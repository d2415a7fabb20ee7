// Dependence measured by RDC on a few synthetic relationships.
#include <cmath>
#include <iostream>
#include <random>

#include "rnca/rnca.hpp"

int main() {
    const rnca::Index n = 1000;
    std::mt19937_64 eng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::normal_distribution<double> noise(0.0, 0.05);

    rnca::Matrix x(n, 1), linear(n, 1), parabola(n, 1), sine(n, 1), indep(n, 1);
    for (rnca::Index i = 0; i < n; ++i) {
        x(i, 0) = u(eng);
        linear(i, 0) = 2.0 * x(i, 0) + noise(eng);
        parabola(i, 0) = x(i, 0) * x(i, 0) + noise(eng);
        sine(i, 0) = std::sin(6.0 * x(i, 0)) + noise(eng);
        indep(i, 0) = u(eng);
    }
    auto show = [&](const char* name, const rnca::Matrix& y) {
        const rnca::RdcResult r = rnca::rdc(x, y, 200, 1e-3, 7);
        std::cout << name << ": rdc = " << r.value << "  |pearson| = "
                  << std::abs(rnca::pearson(x.col(0), y.col(0))) << '\n';
    };
    show("linear     ", linear);
    show("parabola   ", parabola);
    show("sine       ", sine);
    show("independent", indep);
}
