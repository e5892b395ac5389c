#include "qes/poly.hpp"

#include <algorithm>
#include <cmath>

namespace qes::poly {

std::vector<Cx> roots(std::span<const double> coeffs, double tol, int max_iter) {
    // strip leading zeros
    int deg = degree(coeffs);
    if (deg <= 0) return {};
    std::vector<Cx> c(coeffs.begin(), coeffs.begin() + deg + 1);
    for (auto& v : c) v /= coeffs[deg];

    // Cauchy bound for the initial circle
    double bound = 0.0;
    for (int k = 0; k < deg; ++k) bound = std::max(bound, std::abs(c[k]));
    bound += 1.0;

    std::vector<Cx> z(deg);
    for (int i = 0; i < deg; ++i) {
        double ang = 2.0 * M_PI * (i + 0.25) / deg;
        z[i] = 0.7 * bound * Cx(std::cos(ang), std::sin(ang));
    }

    auto eval_monic = [&](Cx x) {
        Cx acc = 1.0;
        for (int k = deg - 1; k >= 0; --k) acc = acc * x + c[k];
        return acc;
    };

    for (int it = 0; it < max_iter; ++it) {
        double shift = 0.0;
        for (int i = 0; i < deg; ++i) {
            Cx denom = 1.0;
            for (int j = 0; j < deg; ++j)
                if (j != i) denom *= (z[i] - z[j]);
            if (std::abs(denom) < 1e-280) continue;
            Cx dz = eval_monic(z[i]) / denom;
            z[i] -= dz;
            shift = std::max(shift, std::abs(dz));
        }
        if (shift < tol * bound) break;
    }
    std::sort(z.begin(), z.end(), [](Cx a, Cx b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return z;
}

} // namespace qes::poly
