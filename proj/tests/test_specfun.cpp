#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "qdecay/specfun.hpp"

using namespace qdecay;
using c64 = std::complex<double>;

static double rel(const c64& got, const c64& want) {
    return std::abs(got - want) / std::abs(want);
}

TEST_CASE("erf at reference points") {
    REQUIRE(std::abs(erf_c(c64(0, 0))) == 0.0);
    REQUIRE(rel(erf_c(c64(1, 0)), c64(0.8427007929497149, 0)) < 1e-14);
    REQUIRE(rel(erf_c(c64(0, 2)), c64(0, 18.564802414575553)) < 1e-14);
    REQUIRE(rel(erf_c(c64(3, 0.5)),
                c64(1.0000280653614764, -2.6284897222588231e-7)) < 1e-13);
    REQUIRE(rel(erf_c(c64(-1.2, 2.4)),
                c64(13.209014372650634, 8.0896203862834915)) < 1e-13);
    REQUIRE(rel(erf_c(c64(2.5, 2.5)),
                c64(0.8763631953504213, 0.0999287737915975)) < 1e-13);
}

TEST_CASE("erf symmetries") {
    for (double x : {0.3, 1.7, 2.9}) {
        for (double y : {-2.2, 0.4, 3.1}) {
            c64 z(x, y);
            REQUIRE(std::abs(erf_c(-z) + erf_c(z)) < 1e-13 * std::abs(erf_c(z)));
            REQUIRE(std::abs(erf_c(std::conj(z)) - std::conj(erf_c(z))) <
                    1e-13 * std::abs(erf_c(z)));
        }
    }
}

TEST_CASE("erf agrees with Maclaurin oracle inside |z| <= 3") {
    // grid of 100 points per quadrant
    for (int qx : {-1, 1})
        for (int qy : {-1, 1})
            for (int i = 1; i <= 10; ++i)
                for (int j = 1; j <= 10; ++j) {
                    c64 z(qx * 0.21 * i, qy * 0.21 * j);
                    if (std::abs(z) > 3.0) continue;
                    c64 oracle = detail::erf_maclaurin(z);
                    REQUIRE(std::abs(erf_c(z) - oracle) <=
                            1e-12 * std::max(1.0, std::abs(oracle)));
                }
}

TEST_CASE("erfcx against frozen oracle values") {
    REQUIRE(rel(erfcx(c64(0.3, 0)), c64(0.7345993345676551, 0)) < 1e-14);
    REQUIRE(rel(erfcx(c64(3, 0)), c64(0.1790011511813900, 0)) < 1e-14);
    REQUIRE(rel(erfcx(c64(1, 2)), c64(0.1402395813662779, -0.2222134401798991)) <
            1e-14);
    // thin strip along the imaginary axis, including a lattice-node collision
    REQUIRE(rel(erfcx(c64(0.01, 4.647)),
                c64(2.8195011118753728e-4, -0.1244424553262449)) < 1e-13);
    REQUIRE(rel(erfcx(c64(0, 5)),
                c64(1.3887943864964021e-11, -0.1152459618309366)) < 1e-13);
    REQUIRE(rel(erfcx(c64(0.2, 11)),
                c64(9.4402978105592960e-4, -0.0514872041053577)) < 1e-13);
    REQUIRE(rel(erfcx(c64(8, 3)), c64(0.0616125384767702, -0.0227966421770545)) <
            1e-14);
    REQUIRE(rel(erfcx(c64(1e-4, 0.1256)),
                c64(0.9842391137761856, -0.1402185598388079)) < 1e-13);
    REQUIRE(std::abs(erfcx(c64(0, 0)) - c64(1, 0)) < 1e-15);
}

TEST_CASE("erfcx double agrees with 50-digit evaluation on a sweep") {
    for (int i = 0; i <= 20; ++i) {
        for (int j = -20; j <= 20; j += 2) {
            c64 z(0.35 * i, 0.3 * j);
            mpc50 zm(mp50(z.real()), mp50(z.imag()));
            mpc50 wm = erfcx(zm);
            c64 w50(static_cast<double>(wm.real()), static_cast<double>(wm.imag()));
            REQUIRE(std::abs(erfcx(z) - w50) <= 2e-14 * std::abs(w50));
        }
    }
}

TEST_CASE("erf asymptotic expansion") {
    auto r5 = erf_asymptotic(c64(5, 0), 3);
    REQUIRE(std::abs(r5.value - erf_c(c64(5, 0))) < 1e-12);
    REQUIRE(std::abs(r5.value - erf_c(c64(5, 0))) <= r5.bound + 1e-18);

    // near the origin the expansion is useless and must say so
    auto r01 = erf_asymptotic(c64(0.1, 0), 3);
    REQUIRE(r01.bound > 1e-1);

    // M = 0 reproduces the classical leading term
    c64 z(4, 1);
    auto r0 = erf_asymptotic(z, 0);
    c64 lead = c64(1) - std::exp(-z * z) / (std::sqrt(M_PI) * z);
    REQUIRE(rel(r0.value, lead) < 1e-13);

    // honest bound across the validity sector, |z| >= 3
    for (double ph : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
        c64 w = std::polar(3.5, ph);
        auto rr = erf_asymptotic(w, 4);
        REQUIRE(std::abs(rr.value - erf_c(w)) <= rr.bound * 1.01 + 1e-16);
    }
    REQUIRE_THROWS_AS(erf_asymptotic(c64(-3, 0.1), 3, 1), std::domain_error);
}

TEST_CASE("pochhammer base cases") {
    REQUIRE(pochhammer(c64(0.5, 0), 0) == c64(1, 0));
    REQUIRE(pochhammer(c64(0.5, 0), 1) == c64(0.5, 0));
    REQUIRE(std::abs(pochhammer(c64(2, 1), 3) - c64(2, 1) * c64(3, 1) * c64(4, 1)) <
            1e-14);
}

TEST_CASE("hyp2f1 basics") {
    REQUIRE(hyp2f1(c64(0.3, 1), c64(2, -1), c64(0.7, 0.2), 0.0) == c64(1, 0));
    REQUIRE(rel(hyp2f1(c64(1, 0), c64(1, 0), c64(2, 0), 0.5),
                c64(1.3862943611198906, 0)) < 1e-14);
    // a = 0 degenerates to 1
    REQUIRE(hyp2f1(c64(0, 0), c64(2, 3), c64(1, 1), 0.5) == c64(1, 0));

    c64 a(0.5, -7), b(0.5, 7);
    REQUIRE(rel(hyp2f1(a, b, c64(0.8, 0.6), 0.7),
                c64(-66232.067294937120, -206347.064274805074)) < 1e-12);
    REQUIRE(rel(hyp2f1(a, b, c64(1, 0) - c64(0, 2) * c64(1, 0.5), 0.5),
                c64(-414.14469698813134, 211.49894743085610)) < 1e-13);

    REQUIRE_THROWS_AS(hyp2f1(a, b, c64(-2, 1e-14), 0.5), hyp_c_pole);
    REQUIRE_THROWS_AS(hyp2f1(a, b, c64(0.5, 0), 1.0), std::domain_error);
}

TEST_CASE("hyp2f1 Euler transformation") {
    // F(a,b;c;z) = (1-z)^(c-a-b) F(c-a, c-b; c; z) on a parameter sample
    std::vector<std::array<c64, 3>> ps;
    for (int i = 0; i < 20; ++i) {
        double s = 0.1 * i;
        ps.push_back({c64(0.5 + 0.1 * s, -1.0 - s), c64(0.5 - 0.1 * s, 1.0 + s),
                      c64(1.2 + s, 0.7 - 0.05 * s)});
    }
    for (auto& [a, b, c] : ps) {
        double z = 0.55;
        c64 lhs = hyp2f1(a, b, c, z);
        c64 pref = std::pow(c64(1 - z, 0), c - a - b);
        c64 rhs = pref * hyp2f1(c - a, c - b, c, z);
        REQUIRE(std::abs(lhs - rhs) <= 1e-10 * std::abs(lhs));
    }
}

TEST_CASE("hyp2f1_dc matches finite differences") {
    c64 a(0.5, -7), b(0.5, 7);
    for (c64 c : {c64(1.5, -2), c64(0.8, 0.6), c64(1, -4)}) {
        double z = 0.5;
        c64 an = hyp2f1_dc(a, b, c, z);
        double hstep = 1e-6;
        c64 fd = (hyp2f1(a, b, c + c64(hstep, 0), z) -
                  hyp2f1(a, b, c - c64(hstep, 0), z)) /
                 (2 * hstep);
        REQUIRE(std::abs(an - fd) <= 1e-6 * std::abs(an));
    }
    REQUIRE(hyp2f1_dc(c64(0.5, 1), c64(1, 0), c64(0.7, -1), 0.0) == c64(0, 0));
    REQUIRE(std::abs(hyp2f1_dc(c64(0, 0), c64(2, 1), c64(0.9, 0.1), 0.5)) == 0.0);
}

TEST_CASE("lambert W lower branch") {
    REQUIRE(std::abs(lambert_w_m1(-std::exp(-1.0)) - (-1.0)) < 1e-7);
    REQUIRE(std::abs(lambert_w_m1(-0.1) - (-3.577152063957297)) < 1e-14);
    REQUIRE(std::abs(lambert_w_m1(-1e-8) - (-21.488183944009797)) < 1e-13);

    // defining identity on a log-spaced sweep
    for (int i = 0; i < 20; ++i) {
        double x = -std::exp(-1.0) * std::pow(10.0, -0.35 * i);
        if (x <= -std::exp(-1.0)) x = -std::exp(-1.0) + 1e-12;
        double w = lambert_w_m1(x);
        REQUIRE(w <= -1.0 + 1e-9);
        REQUIRE(std::abs(w * std::exp(w) - x) <= 1e-12 * std::abs(x));
    }
    // monotone decreasing in x
    REQUIRE(lambert_w_m1(-0.2) < lambert_w_m1(-0.3));
    REQUIRE_THROWS_AS(lambert_w_m1(0.1), std::domain_error);
    REQUIRE_THROWS_AS(lambert_w_m1(-1.0), std::domain_error);
}

TEST_CASE("lambert W at 50 digits") {
    mp50 x("-0.1");
    mp50 w = lambert_w_m1(x);
    REQUIRE(static_cast<double>(fabs(w * exp(w) - x)) < 1e-45);
}
