#pragma once

// Complex special functions: error function, scaled complementary error
// function, the Gauss hypergeometric series on real z in [0,1), its
// c-parameter derivative, Pochhammer symbols, and the lower branch of
// Lambert W.  Everything is templated on the complex context type and
// reaches full working accuracy at both double and 50-digit precision.

#include <stdexcept>
#include <string>
#include <vector>

#include "qdecay/scalar.hpp"

namespace qdecay {

template <class C>
C pochhammer(const C& a, int n) {
    C p(1);
    for (int m = 0; m < n; ++m) p *= a + real_of<C>(m);
    return p;
}

namespace detail {

// Maclaurin series for erf; relative accuracy degrades like exp(|z|^2),
// so callers keep |z| below the context radius.
template <class C>
C erf_maclaurin(const C& z) {
    using R = real_of<C>;
    const R two_over_sqrt_pi = R(2) / sqrt(pi_v<R>());
    C z2 = z * z;
    C term = z, sum = z;
    for (int n = 1; n < 400; ++n) {
        term *= -z2 / R(n);
        C add = term / R(2 * n + 1);
        sum += add;
        if (abs_c(add) <= scalar_pack<C>::eps() * abs_c(sum)) break;
    }
    return two_over_sqrt_pi * sum;
}

// Divergent inverse-power series for erfcx, fully accurate once
// |z|^2 > digits * ln(10); used for the sector near the imaginary axis
// where the lattice correction term would be ill-conditioned.
template <class C>
C erfcx_asymptotic(const C& z) {
    using R = real_of<C>;
    C iz2 = C(1) / (z * z);
    C term(1), sum(1);
    R prev = R(1e30);
    for (int m = 0; m < 600; ++m) {
        term *= -(R(m) + R(0.5)) * iz2;
        R mag = abs_c(term);
        if (mag > prev) break;  // passed the smallest term
        sum += term;
        prev = mag;
        if (mag <= scalar_pack<C>::eps() * abs_c(sum)) break;
    }
    return sum / (z * sqrt(pi_v<R>()));
}

template <class C>
struct erfcx_lattice {
    using R = real_of<C>;
    R h;
    R radius_asym;          // switch to the inverse-power series beyond this
    std::vector<R> tau, wgt;   // midpoint nodes (j+1/2)h and exp(-tau^2)
    erfcx_lattice() {
        const R ln10 = log(R(10));
        const int D = scalar_pack<C>::digits10;
        h = pi_v<R>() / (2 * sqrt((D + 2) * ln10));
        radius_asym = sqrt((D + 3) * ln10);
        R t = h / 2;
        while (t * t < (D + 4) * ln10) {
            tau.push_back(t);
            wgt.push_back(exp(-t * t));
            t += h;
        }
    }
};

template <class C>
C erfcx_main(const C& z);  // forward, for the Taylor transport below

// Near the imaginary axis the lattice denominators z^2 + tau^2 and the
// correction term both become singular; step sideways to a safe abscissa
// and Taylor back using erfcx' = 2 z erfcx - 2/sqrt(pi).
template <class C>
C erfcx_transport(const C& z, const real_of<C>& x0) {
    using R = real_of<C>;
    C z0 = make_c<C>(x0, im_c(z));
    C f0 = erfcx_main(z0);
    C f1 = R(2) * z0 * f0 - R(2) / sqrt(pi_v<R>());
    C delta = z - z0;
    C sum = f0, pw(1);
    C fn_1 = f0, fn = f1;
    for (int n = 1; n < 80; ++n) {
        pw *= delta / R(n);
        C add = fn * pw;
        sum += add;
        if (abs_c(add) <= scalar_pack<C>::eps() * abs_c(sum)) break;
        C fn1 = R(2) * (z0 * fn + R(n) * fn_1);
        fn_1 = fn;
        fn = fn1;
    }
    return sum;
}

template <class C>
C erfcx_main(const C& z) {
    using R = real_of<C>;
    static const erfcx_lattice<C> L;
    R x = re_c(z), y = im_c(z);
    if (abs_c(z) >= L.radius_asym) return erfcx_asymptotic(z);
    if (x < R(0.3) * L.h) {
        // only dangerous when |Im z| sits on a node
        R ay = fabs(y);
        R frac = ay / L.h;
        R near = fabs(frac - (floor(frac) + R(0.5)));
        if (near < R(0.25)) return erfcx_transport(z, R(0.6) * L.h);
    }
    C z2 = z * z;
    CompSum<C> acc;
    for (std::size_t j = 0; j < L.tau.size(); ++j)
        acc.add(C(L.wgt[j]) / (z2 + L.tau[j] * L.tau[j]));
    C s = (2 * L.h / pi_v<R>()) * z * acc.total();
    C corr = R(2) * exp_c(z2) / (C(1) + exp_c(2 * pi_v<R>() / L.h * z));
    return s + corr;
}

}  // namespace detail

// Scaled complementary error function, erfcx(z) = exp(z^2) erfc(z).
// Contract: Re z >= 0 (callers reflect; keeping the reflection outside makes
// the exponentially large branch explicit where it matters).
template <class C>
C erfcx(const C& z) {
    return detail::erfcx_main(z);
}

// Complex error function.  Odd reflection onto Re z >= 0, Maclaurin series
// inside the well-conditioned radius, erfcx beyond.  For |z| large along the
// imaginary directions the value itself overflows the context range; the
// result then carries infinities per IEEE semantics rather than throwing.
template <class C>
C erf_c(const C& z) {
    using R = real_of<C>;
    if (!finite_c(z)) throw std::domain_error("erf_c: nonfinite argument");
    if (re_c(z) < R(0)) return -erf_c(C(-z));
    const R radius = scalar_pack<C>::digits10 <= 20 ? R(3) : R(2.5);
    if (abs_c(z) <= radius) return detail::erf_maclaurin(z);
    // erf = 1 - exp(-z^2) erfcx(z), fused through logs so the huge and tiny
    // factors combine before exponentiation
    LogC<C> tail = LogC<C>::from_log(-z * z) * LogC<C>::from_value(erfcx(z));
    return C(1) - tail.value();
}

template <class C>
struct BoundedValue {
    C value;
    real_of<C> bound;  // magnitude of the first omitted term
};

// Truncated asymptotic expansion of erf with an honest remainder bound.
// sign = +1 expands around +1, sign = -1 around -1; the phase of sign*z must
// lie strictly inside (-3pi/4, 3pi/4).
template <class C>
BoundedValue<C> erf_asymptotic(const C& z, int M, int sign = 1) {
    using R = real_of<C>;
    C w = sign >= 0 ? z : C(-z);
    R ph = fabs(arg_c(w));
    if (!(ph < 3 * pi_v<R>() / 4))
        throw std::domain_error(
            "erf_asymptotic: phase of signed argument outside (-3pi/4, 3pi/4)");
    C iw2 = C(1) / (w * w);
    C term = C(1) / w;
    C sum = term;
    for (int m = 1; m <= M; ++m) {
        term *= -(R(m) - R(0.5)) * iw2;
        sum += term;
    }
    C omitted = term * (R(M) + R(0.5)) * iw2;
    LogC<C> pre = LogC<C>::from_log(-w * w);
    C val = C(sign >= 0 ? 1 : -1) -
            (pre * LogC<C>::from_value(sum)).value() / sqrt(pi_v<R>());
    // Beyond |ph| = pi/4 the first-omitted-term estimate is no longer a bound
    // (Re z^2 can turn negative); inflate by a contour-rotation factor that
    // blows up toward the sector edge, keeping the report conservative.
    R sector = fabs(ph) <= pi_v<R>() / 4
                   ? R(1)
                   : pow(R(1) / cos(ph - pi_v<R>() / 4), R(2 * M + 3));
    R bnd = (pre * LogC<C>::from_value(omitted)).log_abs();
    return {val, exp(bnd) / sqrt(pi_v<R>()) * sector};
}

// Raised when the hypergeometric c parameter sits on a nonpositive integer,
// which is where the Jost function has its spurious k = -i n/2 poles; callers
// recover via the regularized ratio path.
struct hyp_c_pole : std::domain_error {
    int n;  // the offending nonpositive integer
    explicit hyp_c_pole(int n_)
        : std::domain_error("hyp2f1: c within tolerance of nonpositive integer " +
                            std::to_string(n_)),
          n(n_) {}
};

namespace detail {
template <class C>
void check_c_pole(const C& c) {
    using R = real_of<C>;
    R cr = re_c(c);
    if (cr > R(0.5)) return;
    R nearest = floor(cr + R(0.5));
    if (nearest > R(0) || fabs(cr - nearest) + fabs(im_c(c)) >= R(1e-12)) return;
    throw hyp_c_pole(static_cast<int>(to_dbl<C>(nearest)));
}
}  // namespace detail

// Gauss hypergeometric series for real z in [0,1).  The application only
// needs z = 1/(1+e^{r-rho}) <= z(0) < 1, so no connection formulas.
template <class C>
C hyp2f1(const C& a, const C& b, const C& c, const real_of<C>& z) {
    using R = real_of<C>;
    if (z < R(0) || z >= R(1)) throw std::domain_error("hyp2f1: z outside [0,1)");
    detail::check_c_pole(c);
    C term(1), sum(1);
    for (int n = 0; n < 100000; ++n) {
        term *= (a + R(n)) * (b + R(n)) * z / ((c + R(n)) * R(n + 1));
        sum += term;
        if (abs_c(term) <= scalar_pack<C>::eps() * abs_c(sum) && n > 4) return sum;
    }
    throw std::runtime_error("hyp2f1: series failed to converge");
}

// d/dc of the series, term by term: each term picks up -sum_{m<n} 1/(c+m).
template <class C>
C hyp2f1_dc(const C& a, const C& b, const C& c, const real_of<C>& z) {
    using R = real_of<C>;
    if (z < R(0) || z >= R(1)) throw std::domain_error("hyp2f1_dc: z outside [0,1)");
    detail::check_c_pole(c);
    C term(1), hsum(0), sum(0);
    for (int n = 0; n < 100000; ++n) {
        hsum += C(1) / (c + R(n));
        term *= (a + R(n)) * (b + R(n)) * z / ((c + R(n)) * R(n + 1));
        C add = -term * hsum;
        sum += add;
        if (abs_c(add) <= scalar_pack<C>::eps() * (abs_c(sum) + R(1e-300)) && n > 4)
            return sum;
    }
    throw std::runtime_error("hyp2f1_dc: series failed to converge");
}

// Lambert W, branch -1: the decreasing real branch on [-1/e, 0).
template <class R>
R lambert_w_m1(const R& x) {
    const R minus_inv_e = -exp(R(-1));
    if (!(x >= minus_inv_e && x < R(0)))
        throw std::domain_error("lambert_w_m1: argument outside [-1/e, 0)");
    R w;
    R p2 = 2 * (exp(R(1)) * x + 1);
    if (p2 < R(0)) p2 = R(0);  // rounding below the branch point
    const R tol = 4 * std::numeric_limits<R>::epsilon();
    if (p2 < R(0.04)) {
        // branch-point series in p = -sqrt(2(ex+1)); keeps the seed on the
        // w < -1 side, which the log-log seed cannot guarantee here
        R p = -sqrt(p2);
        w = R(-1) + p - p * p / 3 + 11 * p * p * p / 72 - 43 * p2 * p2 / 540;
        // Halley's denominator vanishes at the branch point itself and the
        // series is already at full precision there, so skip the polish.
        if (p2 <= pow(tol, R(2) / 5)) return w;
    } else {
        w = log(-x) - log(-log(-x));
    }
    for (int it = 0; it < 200; ++it) {
        R ew = exp(w);
        R g = w * ew - x;
        // Halley step
        R denom = ew * (w + 1) - (w + 2) * g / (2 * w + 2);
        R dw = g / denom;
        w -= dw;
        if (fabs(dw) <= tol * fabs(w)) break;
    }
    return w;
}

}  // namespace qdecay
