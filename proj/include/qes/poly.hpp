#pragma once
#include <complex>
#include <span>
#include <vector>

namespace qes::poly {

using Cx = std::complex<double>;

// Coefficients are stored lowest power first: c[0] + c[1] x + c[2] x^2 + ...

template <typename Coef>
Cx eval(std::span<const Coef> c, Cx x) {
    Cx acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + Cx(*it);
    return acc;
}

inline int degree(std::span<const double> c, double tol = 0.0) {
    for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k)
        if (std::abs(c[k]) > tol) return k;
    return -1; // zero polynomial
}

inline std::vector<double> derivative(std::span<const double> c) {
    if (c.size() <= 1) return {0.0};
    std::vector<double> d(c.size() - 1);
    for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = static_cast<double>(k) * c[k];
    return d;
}

inline std::vector<Cx> derivative(std::span<const Cx> c) {
    if (c.size() <= 1) return {Cx(0.0)};
    std::vector<Cx> d(c.size() - 1);
    for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = static_cast<double>(k) * c[k];
    return d;
}

inline std::vector<Cx> convolve(std::span<const Cx> a, std::span<const Cx> b) {
    std::vector<Cx> out(a.size() + b.size() - 1, Cx(0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

// Monic polynomial with the given roots.
inline std::vector<Cx> from_roots(std::span<const Cx> roots) {
    std::vector<Cx> c{Cx(1.0)};
    for (const Cx& r : roots) {
        std::vector<Cx> next(c.size() + 1, Cx(0.0));
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i] -= r * c[i];
            next[i + 1] += c[i];
        }
        c = std::move(next);
    }
    return c;
}

// All complex roots of a real-coefficient polynomial (Durand-Kerner).
// Intended for the small degrees that appear here (<= 6).
std::vector<Cx> roots(std::span<const double> coeffs, double tol = 1e-13, int max_iter = 400);

} // namespace qes::poly
