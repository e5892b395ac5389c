#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "qes/bethe.hpp"
#include "qes/poly.hpp"
#include "support.hpp"

using namespace qes;
using bethe::make_poly_ode;
using bethe::make_root_set;
using Cx = std::complex<double>;

namespace {

// Reduced ODE of the Gaussian-tail cubic regime (polynomial-factor equation)
bethe::PolyODE cubic_oscillator_ode(double a, double alpha, double e, double eps2) {
    return make_poly_ode({0, 0, 1, 0, 0}, {-2 * e, 2 * alpha + 1, 0, 2 * a, 0, 0},
                         {2 * alpha - 1, -4 * a * e, 4 * a * alpha - 2 * a + eps2, 0, 0});
}

// Exponential-tail cubic regime with explicit W.
bethe::PolyODE cubic_coulomb_ode(double B, double alpha, double e, double w0, double w1) {
    return make_poly_ode({0, 0, 1, 0, 0}, {-2 * e, 2 * alpha + 1, 2 * B, 0, 0, 0},
                         {w0, w1, 0, 0, 0});
}

} // namespace

TEST_CASE("make_poly_ode validates the degree ordering") {
    // reduced-cubic coefficients with e = 0, alpha = 1/2, a = -1
    auto ode = make_poly_ode({0, 0, 1, 0, 0}, {0, 2, 0, -2, 0, 0}, {0, 0, 4, 0, 0});
    CHECK(ode.deg_p == 2);
    CHECK(ode.deg_q == 3);
    CHECK(ode.deg_w == 2);

    // zero Q with nonzero W is rejected
    CHECK_THROWS_AS(make_poly_ode({1, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0}, {1, 0, 0, 0, 0}),
                    DegreeViolation);
    // deg Q == deg W is rejected too
    CHECK_THROWS_AS(make_poly_ode({1, 0, 0, 0, 0}, {0, 1, 0, 0, 0, 0}, {0, 1, 0, 0, 0}),
                    DegreeViolation);
    // all-zero W is fine
    CHECK_NOTHROW(make_poly_ode({1, 0, 0, 0, 0}, {1, 1, 0, 0, 0, 0}, {0, 0, 0, 0, 0}));
}

TEST_CASE("bethe_residuals") {
    SUBCASE("empty set has no residuals") {
        auto ode = cubic_oscillator_ode(-1, 1, -1, 0);
        auto res = bethe::bethe_residuals(ode, make_root_set(0, {}));
        CHECK(res.empty());
    }
    SUBCASE("root of the printed quadratic solves the n=1 equation") {
        // B=-1, alpha=1, e=-1: Q = -2r^2 + 3r + 2, same zeros as 2r^2 - 3r - 2
        auto ode = cubic_coulomb_ode(-1, 1, -1, 0, 0);
        auto roots = support::quadratic_roots(2, -3, -2); // oracle
        REQUIRE(roots.size() == 2);
        CHECK(roots[1] == doctest::Approx(2.0));
        auto res = bethe::bethe_residuals(ode, make_root_set(1, {Cx(2.0)}));
        CHECK(std::abs(res[0]) < 1e-14);
    }
    SUBCASE("non-root value leaves magnitude-3 residual") {
        auto ode = cubic_coulomb_ode(-1, 1, -1, 0, 0);
        auto res = bethe::bethe_residuals(ode, make_root_set(1, {Cx(1.0)}));
        CHECK(std::abs(res[0]) == doctest::Approx(3.0)); // Q(1)/P(1)
    }
    SUBCASE("pole collision raises") {
        auto ode = cubic_coulomb_ode(-1, 1, -1, 0, 0);
        CHECK_THROWS_AS(bethe::bethe_residuals(ode, make_root_set(1, {Cx(0.0)})), SingularRoot);
    }
}

TEST_CASE("solve_bethe_roots finds every branch of the printed quadratics") {
    SUBCASE("exponential-tail cubic, n = 1") {
        auto ode = cubic_coulomb_ode(-1, 1, -1, 0, 0);
        auto sols = bethe::solve_bethe_roots(ode, 1);
        auto expected = support::quadratic_roots(2, -3, -2); // -0.5, 2.0
        REQUIRE(sols.size() == 2);
        CHECK(sols[0].roots[0].real() == doctest::Approx(expected[0]).epsilon(1e-12));
        CHECK(sols[1].roots[0].real() == doctest::Approx(expected[1]).epsilon(1e-12));
        for (const auto& s : sols) CHECK(s.max_bethe_residual < 1e-12);
    }
    SUBCASE("reduced quartic, n = 1, positive root near 2.8508") {
        // a=-1, lambda2=0.5, e=-1: Q/P = (-t^2 + 2.5 t + 1)/t^2
        auto ode = make_poly_ode({0, 0, 4, 0, 0}, {4, 10, -4, 0, 0, 0}, {0, 0, 0, 0, 0});
        auto sols = bethe::solve_bethe_roots(ode, 1);
        auto expected = support::quadratic_roots(-1, 2.5, 1);
        REQUIRE(expected.size() == 2);
        bool found = false;
        for (const auto& s : sols)
            if (std::abs(s.roots[0] - Cx(expected[1])) < 1e-10) found = true;
        CHECK(found);
        CHECK(expected[1] == doctest::Approx(2.85078).epsilon(1e-5));
    }
    SUBCASE("n = 0 gives the single empty solution") {
        auto ode = cubic_coulomb_ode(-1, 1, -1, 0, 0);
        auto sols = bethe::solve_bethe_roots(ode, 0);
        REQUIRE(sols.size() == 1);
        CHECK(sols[0].roots.empty());
        CHECK(sols[0].max_bethe_residual == 0.0);
    }
}

TEST_CASE("coefficient_constraints") {
    SUBCASE("n = 0 requires W to vanish identically") {
        auto ode = make_poly_ode({0, 0, 1, 0, 0}, {0, 2, 0, -2, 0, 0}, {0, 0, 0, 0, 0});
        auto rep = bethe::coefficient_constraints(ode, make_root_set(0, {}));
        CHECK(rep.satisfied);
        auto bad = make_poly_ode({0, 0, 1, 0, 0}, {1, 2, 0, -2, 0, 0}, {0.5, 0, 0, 0, 0});
        CHECK_FALSE(bethe::coefficient_constraints(bad, make_root_set(0, {})).satisfied);
    }
    SUBCASE("Gaussian-tail cubic relations come out exactly") {
        // The generic relations must reproduce the three printed ones:
        //   2a(2alpha+n-1)+eps2 = 0, 4ae = 2a sum r, 2a sum r^2 + (2alpha+n-1)(n+1) = 0
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> U(-1.5, 1.5);
        for (int trial = 0; trial < 40; ++trial) {
            double a = U(rng) - 2.0, alpha = std::abs(U(rng)) + 0.1, e = U(rng);
            double eps2 = U(rng);
            int n = 1 + trial % 3;
            std::vector<Cx> roots;
            for (int j = 0; j < n; ++j) roots.emplace_back(U(rng) * 2 + 3.0 * j + 0.4, 0.0);
            auto ode = cubic_oscillator_ode(a, alpha, e, eps2);
            auto rep = bethe::coefficient_constraints(ode, make_root_set(n, roots));

            double s1 = 0, s2 = 0;
            for (const auto& r : roots) {
                s1 += r.real();
                s2 += r.real() * r.real();
            }
            CHECK(rep.w_residuals[2] ==
                  doctest::Approx(std::abs(2 * a * (2 * alpha + n - 1) + eps2)).epsilon(1e-12));
            CHECK(rep.w_residuals[1] ==
                  doctest::Approx(std::abs(4 * a * e - 2 * a * s1)).epsilon(1e-12));
            CHECK(rep.w_residuals[0] ==
                  doctest::Approx(std::abs(2 * a * s2 + (2 * alpha + n - 1) * (n + 1)))
                      .epsilon(1e-12));
            CHECK(rep.w_residuals[3] == 0.0);
            CHECK(rep.w_residuals[4] == 0.0);
        }
    }
    SUBCASE("residuals scale linearly in a root perturbation") {
        std::mt19937_64 rng(5);
        auto inst = support::plant(rng);
        auto rs0 = make_root_set(static_cast<int>(inst.roots.size()), inst.roots);
        CHECK(bethe::coefficient_constraints(inst.ode, rs0).satisfied);

        auto perturbed = [&](double delta) {
            auto roots = inst.roots;
            roots[0] += delta;
            auto rep = bethe::coefficient_constraints(
                inst.ode, make_root_set(static_cast<int>(roots.size()), roots));
            double worst = 0;
            for (double v : rep.w_residuals) worst = std::max(worst, v);
            return worst;
        };
        auto shifted = inst.roots;
        shifted[0] += 1e-3;
        CHECK_FALSE(bethe::coefficient_constraints(
                        inst.ode, make_root_set(static_cast<int>(shifted.size()), shifted))
                        .satisfied);
        double r1 = perturbed(1e-3), r2 = perturbed(5e-4);
        CHECK(r1 / r2 == doctest::Approx(2.0).epsilon(0.05));
    }
}

TEST_CASE("verify_polynomial_solution") {
    SUBCASE("constant solution leaves W itself") {
        auto ode = make_poly_ode({0, 0, 1, 0, 0}, {0, 2, 0, -2, 0, 0}, {0.25, -0.5, 3.0, 0, 0});
        CHECK(bethe::verify_polynomial_solution(ode, make_root_set(0, {})) ==
              doctest::Approx(3.0));
    }
    SUBCASE("certified single-root solution expands to zero") {
        // B=-1, alpha=1, e=-1, root 2: required W = (1, 2)
        auto ode = cubic_coulomb_ode(-1, 1, -1, 1, 2);
        auto rs = make_root_set(1, {Cx(2.0)});
        CHECK(bethe::verify_polynomial_solution(ode, rs) < 1e-10);
        CHECK(bethe::coefficient_constraints(ode, rs).satisfied);
        // offsetting w_0 by delta adds delta * S(r); largest coefficient of
        // S = r - 2 is 2, so the residual moves linearly with that factor
        auto bad = cubic_coulomb_ode(-1, 1, -1, 2, 2);
        CHECK(bethe::verify_polynomial_solution(bad, rs) == doctest::Approx(2.0).epsilon(1e-9));
        auto bad_half = cubic_coulomb_ode(-1, 1, -1, 1.5, 2);
        CHECK(bethe::verify_polynomial_solution(bad_half, rs) ==
              doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("permutation symmetry of the residual map") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        auto inst = support::plant(rng);
        const int n = static_cast<int>(inst.roots.size());
        if (n < 2) continue;
        bethe::RootSet fwd;
        fwd.level = n;
        fwd.roots = inst.roots;
        bethe::RootSet rev = fwd;
        std::reverse(rev.roots.begin(), rev.roots.end());
        auto a = bethe::bethe_residuals(inst.ode, fwd);
        auto b = bethe::bethe_residuals(inst.ode, rev);
        for (int j = 0; j < n; ++j) CHECK(std::abs(a[j] - b[n - 1 - j]) < 1e-13);
    }
}

TEST_CASE("analytic Jacobian agrees with central differences") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    int checked = 0;
    while (checked < 25) {
        auto inst = support::plant(rng);
        const int n = static_cast<int>(inst.roots.size());
        std::vector<Cx> pt(n);
        for (int j = 0; j < n; ++j) pt[j] = Cx(U(rng), 0.2 * U(rng));
        bool nearpole = false;
        for (const auto& z : pt) nearpole = nearpole || std::abs(inst.ode.P(z)) < 1e-2;
        double gap = 1e9;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) gap = std::min(gap, std::abs(pt[i] - pt[j]));
        if (nearpole || gap < 0.2) continue;

        auto J = bethe::bethe_jacobian(inst.ode, pt);
        for (int col = 0; col < n; ++col) {
            double h = 1e-6 * std::max(1.0, std::abs(pt[col]));
            auto plus = pt, minus = pt;
            plus[col] += h;
            minus[col] -= h;
            bethe::RootSet rp, rm;
            rp.level = rm.level = n;
            rp.roots = plus;
            rm.roots = minus;
            auto fp = bethe::bethe_residuals(inst.ode, rp);
            auto fm = bethe::bethe_residuals(inst.ode, rm);
            for (int row = 0; row < n; ++row) {
                Cx fd = (fp[row] - fm[row]) / (2 * h);
                Cx an = J[static_cast<std::size_t>(row) * n + col];
                CHECK(std::abs(fd - an) <= 1e-5 * std::max(1.0, std::abs(an)));
            }
        }
        ++checked;
    }
}

TEST_CASE("equivalence: residuals + constraints imply an exact polynomial solution") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 60; ++trial) {
        auto inst = support::plant(rng);
        auto rs = make_root_set(static_cast<int>(inst.roots.size()), inst.roots);
        auto res = bethe::bethe_residuals(inst.ode, rs);
        double rmax = 0;
        for (const auto& v : res) rmax = std::max(rmax, std::abs(v));
        rs.max_bethe_residual = rmax;
        auto rep = bethe::coefficient_constraints(inst.ode, rs);
        REQUIRE(rmax < bethe::kBetheTol);
        REQUIRE(rep.satisfied);
        CHECK(bethe::verify_polynomial_solution(inst.ode, rs) <
              10 * bethe::kConstraintTol * inst.ode.coefficient_scale());
    }
}

TEST_CASE("n = 1 solutions coincide with direct polynomial root extraction") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> U(-1.5, 1.5);
    for (int trial = 0; trial < 20; ++trial) {
        double a = -0.2 - std::abs(U(rng)), l2 = 0.1 + std::abs(U(rng));
        double e = -0.1 - std::abs(U(rng));
        auto ode = make_poly_ode({0, 0, 4, 0, 0}, {-4 * e, 4 * (2 + l2), 4 * a, 0, 0, 0},
                                 {0, 0, 0, 0, 0});
        auto sols = bethe::solve_bethe_roots(ode, 1);
        auto direct = poly::roots(std::span<const double>(ode.q));
        for (const auto& z : direct) {
            if (std::abs(ode.P(z)) < 1e-6) continue;
            bool matched = false;
            for (const auto& s : sols) matched = matched || std::abs(s.roots[0] - z) < 1e-10;
            CHECK(matched);
        }
    }
}
