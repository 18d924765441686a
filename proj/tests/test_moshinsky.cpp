#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "qdecay/moshinsky.hpp"

using namespace qdecay;
using c64 = std::complex<double>;

namespace {

double mixed_tol(double eps, const c64& ref) { return eps * (1.0 + std::abs(ref)); }

// the auxiliary damping trident e^{i a k^2} + e^{-i a k^2} + e^{-a k^2},
// refined here independently of the pole machinery
c64 trident(c64 k, double a) {
    c64 k2 = k * k;
    return std::exp(c64(0, a) * k2) + std::exp(c64(0, -a) * k2) + std::exp(-a * k2);
}
c64 trident_d(c64 k, double a) {
    c64 k2 = k * k;
    return 2.0 * k *
           (c64(0, a) * std::exp(c64(0, a) * k2) - c64(0, a) * std::exp(c64(0, -a) * k2) -
            a * std::exp(-a * k2));
}

}  // namespace

TEST_CASE("kernel value at the closed-form reference point") {
    // k = i, r = 0, beta = 1 collapses to e * erfc(1)
    c64 got = mosh(MoshArgs<c64>{c64(0, 1), 0.0, c64(1, 0)});
    REQUIRE(std::abs(got - c64(0.4275835761558070044108, 0)) < 1e-14);

    // same point in the 50-digit context
    mpc50 got50 = mosh(MoshArgs<mpc50>{mpc50(0, 1), mp50(0), mpc50(1)});
    mp50 want50("0.42758357615580700441075034449051518082015950316425");
    REQUIRE(abs_c(got50 - mpc50(want50)) < mp50(1e-45));
}

TEST_CASE("kernel split form is bounded and consistent") {
    std::mt19937 gen(2468);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 60; ++i) {
        c64 k((u(gen) - 0.5) * 6.0, (u(gen) - 0.5) * 4.0);
        if (std::fabs(k.imag()) < 0.05) continue;
        double r = 3.0 * u(gen);
        c64 beta(0.05 + 2.0 * u(gen), (u(gen) - 0.5) * 6.0);
        MoshArgs<c64> a{k, r, beta};
        auto sp = mosh_split(a);
        REQUIRE(std::abs(sp.bounded) <= 1.3);
        REQUIRE((sp.unit == -2 || sp.unit == 0 || sp.unit == 2));
        c64 v = mosh(a);
        REQUIRE(std::abs(sp.value() - v) == 0.0);  // same assembly path
        // odd part plus the half-plane sign reproduces the full kernel
        auto odd = mosh_split_erf(a);
        int sg = k.imag() > 0 ? 1 : -1;
        c64 rebuilt = double(odd.unit + sg) * odd.expo.value() + odd.bounded;
        REQUIRE(std::abs(rebuilt - v) <= mixed_tol(1e-12, v));
    }
}

TEST_CASE("domain violations are rejected") {
    REQUIRE_THROWS_AS(mosh(MoshArgs<c64>{c64(1.0, 0.0), 0.5, c64(1, 0)}),
                      std::domain_error);  // contour pinch
    REQUIRE_THROWS_AS(mosh(MoshArgs<c64>{c64(1, 1), 0.5, c64(0, 0)}), std::domain_error);
    REQUIRE_THROWS_AS(mosh(MoshArgs<c64>{c64(1, 1), 0.5, c64(-0.1, 1)}),
                      std::domain_error);
    REQUIRE_THROWS_AS(mosh(MoshArgs<c64>{c64(1, 1), -0.5, c64(1, 0)}), std::domain_error);
    // the quadrature oracle additionally needs strict damping
    REQUIRE_THROWS_AS(mosh_quadrature(MoshArgs<c64>{c64(1, 1), 0.5, c64(0, 2)}),
                      std::domain_error);
    // boundary Re beta = 0 is fine for the closed form
    REQUIRE_NOTHROW(mosh(MoshArgs<c64>{c64(1, 1), 0.5, c64(0, 2)}));
}

TEST_CASE("closed form against the defining integral, upper half plane rows") {
    for (c64 k : {c64(0, 1), c64(0.7, 1.3), c64(-1.4, 0.6)}) {
        for (double r : {0.0, 1.0}) {
            MoshArgs<c64> a{k, r, c64(1, 0)};
            c64 closed = mosh(a);
            auto q = mosh_quadrature(a, mixed_tol(1e-12, closed));
            REQUIRE(std::abs(closed - q.value) <= mixed_tol(1e-10, closed));
        }
    }
    // the dedicated oracle row: k = 10i, r = 1, beta = 1/2
    MoshArgs<c64> a{c64(0, 10), 1.0, c64(0.5, 0)};
    c64 closed = mosh(a);
    auto q = mosh_quadrature(a, mixed_tol(1e-12, closed));
    REQUIRE(std::abs(closed - q.value) <= mixed_tol(1e-10, closed));
}

TEST_CASE("oracle inherits the reality of a symmetric integrand") {
    // r = 0, k on the positive imaginary axis, beta real: the integrand pairs
    // p with -p into a real value
    auto q = mosh_quadrature(MoshArgs<c64>{c64(0, 1), 0.0, c64(0.7, 0)}, 1e-13);
    REQUIRE(std::fabs(q.value.imag()) < 1e-12);
    c64 closed = mosh(MoshArgs<c64>{c64(0, 1), 0.0, c64(0.7, 0)});
    REQUIRE(std::fabs(closed.imag()) < 1e-12);
    REQUIRE(std::abs(closed - q.value) <= mixed_tol(1e-10, closed));
}

TEST_CASE("closed form matches the integral across the acceptance grid") {
    const std::vector<c64> ks = {c64(0.8, 0.6), c64(-1.1, 0.7), c64(-0.9, -0.8),
                                 c64(1.2, -0.5), c64(2.0, 1.5)};
    const std::vector<double> rs = {0.0, 0.1, 0.5, 1.0, 2.0};
    const std::vector<c64> betas = {c64(1, 0), c64(1, 10), c64(0.1, 100), c64(0.5, 0),
                                    c64(2, 0.3)};
    for (const c64& k : ks)
        for (double r : rs)
            for (const c64& beta : betas) {
                MoshArgs<c64> a{k, r, beta};
                c64 closed = mosh(a);
                auto q = mosh_quadrature(a, mixed_tol(5e-12, closed));
                REQUIRE(std::abs(closed - q.value) <= mixed_tol(1e-10, closed));
            }
}

TEST_CASE("closed form against the integral at 50 digits") {
    MoshArgs<mpc50> a{mpc50(0.8, 0.6), mp50(0.5), mpc50(1.0, 0.3)};
    mpc50 closed = mosh(a);
    auto q = mosh_quadrature(a, mp50(1e-30));
    REQUIRE(abs_c(closed - q.value) < mp50(1e-28) * (1 + abs_c(closed)));
}

TEST_CASE("reflecting k across the imaginary axis conjugates the kernel") {
    // conjugating the defining integral and substituting p -> -p sends the
    // pole to -conj(k), so that is where the mirror image lives
    std::mt19937 gen(97531);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int done = 0;
    while (done < 20) {
        c64 k((u(gen) - 0.5) * 6.0, (u(gen) - 0.5) * 4.0);
        if (std::fabs(k.imag()) < 0.05) continue;
        double r = 3.0 * u(gen);
        c64 beta(0.05 + 2.0 * u(gen), (u(gen) - 0.5) * 6.0);
        c64 direct = mosh(MoshArgs<c64>{k, r, beta});
        c64 mirrored = mosh(MoshArgs<c64>{-std::conj(k), r, std::conj(beta)});
        REQUIRE(std::abs(mirrored - std::conj(direct)) <= mixed_tol(1e-12, direct));
        ++done;
    }
}

TEST_CASE("regulated integral converges to the boundary closed form") {
    // Re beta = 0 sits outside the oracle's domain; approach it with a small
    // damping regulator and extrapolate the regulator away
    MoshArgs<c64> a{c64(0.9, 0.7), 0.5, c64(0, 0.8)};
    c64 closed = mosh(a);
    double e1 = 2e-3, e2 = 1e-3;
    c64 v1 = mosh_quadrature(MoshArgs<c64>{a.k, a.r, a.beta + e1}, 1e-12).value;
    c64 v2 = mosh_quadrature(MoshArgs<c64>{a.k, a.r, a.beta + e2}, 1e-12).value;
    REQUIRE(std::abs(v2 - closed) < std::abs(v1 - closed));
    c64 extrap = 2.0 * v2 - v1;  // first-order elimination of the regulator
    REQUIRE(std::abs(extrap - closed) < 1e-4 * (1.0 + std::abs(closed)));
    REQUIRE(std::abs(extrap - closed) < 0.2 * std::abs(v2 - closed));
}

TEST_CASE("kernel stays finite deep into the time domain") {
    std::vector<c64> ks;
    for (double ph : {-2.8, -2.0, -1.2, -0.7, -0.1, 0.1, 0.7, 1.2, 2.0, 2.8})
        ks.push_back(std::polar(1e3, ph));
    ks.push_back(c64(3.710483798846757, -0.2494723792530086));
    ks.push_back(c64(0.51, -1.23));
    for (const c64& k : ks)
        for (double t : {1e2, 1e4, 1e6})
            for (double r : {0.0, 1.0}) {
                c64 v = mosh(MoshArgs<c64>{k, r, c64(0, t)});
                REQUIRE(finite_c(v));
            }
}

TEST_CASE("late-time form approximates the kernel near a resonance") {
    c64 k(3.710483798846757, -0.2494723792530086);
    double r = 0.5, t = 1e3;
    MoshArgs<c64> a{k, r, c64(1.25, t)};
    int nu = nu_sector(k);
    c64 exact = mosh(a);
    c64 approx = mosh_asymptotic(a, nu);
    REQUIRE(std::abs(approx - exact) < 1e-3 * std::abs(exact));

    MoshArgs<mpc50> a50{mpc50(mp50("3.710483798846757"), mp50("-0.2494723792530086")),
                        mp50(0.5), mpc50(mp50(1.25), mp50(t))};
    mpc50 exact50 = mosh(a50);
    mpc50 approx50 = mosh_asymptotic(a50, nu);
    REQUIRE(abs_c(approx50 - exact50) < mp50(1e-3) * abs_c(exact50));
}

TEST_CASE("late-time error decreases along a time ladder") {
    c64 k(3.710483798846757, -0.2494723792530086);
    int nu = nu_sector(k);
    double prev = 1e30;
    for (double t : {1e2, 1e3, 1e4}) {
        MoshArgs<c64> a{k, 0.5, c64(1.25, t)};
        double err = std::abs(mosh_asymptotic(a, nu) - mosh(a)) / std::abs(mosh(a));
        REQUIRE(err < prev);
        prev = err;
    }
}

TEST_CASE("reflection index sectors") {
    REQUIRE(nu_sector(std::polar(1.0, -0.785398163397448)) == -1);  // boundary ray, in
    REQUIRE(nu_sector(std::polar(1.0, 2.356194490192345)) == 1);    // boundary ray, out
    REQUIRE(nu_sector(std::polar(1.0, 0.3)) == -1);
    REQUIRE(nu_sector(std::polar(1.0, 1.5)) == -1);
    REQUIRE(nu_sector(std::polar(1.0, -0.9)) == 1);
    REQUIRE(nu_sector(std::polar(1.0, 2.0)) == -1);
    REQUIRE(nu_sector(std::polar(1.0, -3.0)) == 1);
    REQUIRE(nu_sector(std::polar(1.0, 3.0)) == 1);
}

TEST_CASE("exponential summand cancels over a damping triple at a trident zero") {
    const double alpha = 1.25;
    c64 k = std::polar(std::sqrt(3.141592653589793 / (std::sqrt(2.0) * alpha)),
                       -3 * 3.141592653589793 / 8);
    for (int i = 0; i < 40; ++i) k -= trident(k, alpha) / trident_d(k, alpha);
    REQUIRE(std::abs(trident(k, alpha)) < 1e-13);

    const double r = 0.7, t = 0.3;
    const std::vector<c64> gammas = {c64(alpha, 0), c64(0, alpha), c64(0, -alpha)};

    // at this zero the natural sector index nullifies each summand outright
    for (const c64& g : gammas) {
        c64 f = mosh_asymptotic_first(MoshArgs<c64>{k, r, g + c64(0, t)}, nu_sector(k));
        REQUIRE(f == c64(0, 0));
    }

    // forcing the summand on, the triple still cancels through the zero itself
    c64 total(0, 0);
    double biggest = 0;
    for (const c64& g : gammas) {
        c64 f = mosh_asymptotic_first(MoshArgs<c64>{k, r, g + c64(0, t)}, -1);
        REQUIRE(f != c64(0, 0));
        total += f;
        biggest = std::max(biggest, std::abs(f));
    }
    REQUIRE(std::abs(total) < 1e-11 * biggest);
}

TEST_CASE("algebraic descent carries the inverse-root time law at the origin") {
    c64 k(0.9, -1.2);  // sector makes the exponential summand vanish exactly
    int nu = nu_sector(k);
    double t1 = 4e3, t2 = 1.6e4;
    c64 v1 = mosh_asymptotic(MoshArgs<c64>{k, 0.0, c64(0, t1)}, nu);
    c64 v2 = mosh_asymptotic(MoshArgs<c64>{k, 0.0, c64(0, t2)}, nu);
    double s1 = std::abs(v1) * std::sqrt(3.141592653589793 * t1) * std::abs(k);
    double s2 = std::abs(v2) * std::sqrt(3.141592653589793 * t2) * std::abs(k);
    REQUIRE(std::fabs(s1 - 1.0) < 1e-2);
    REQUIRE(std::fabs(s2 - 1.0) < 1e-2);
    REQUIRE(std::fabs(std::abs(v2) / std::abs(v1) - 0.5) < 1e-2);
}
