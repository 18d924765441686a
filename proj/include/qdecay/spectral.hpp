// Overlap coefficients of an initial state with the regular scattering
// solutions, plus the continuum integral that evolves the state directly.
// The direct integral is slow but method independent, which is exactly what
// makes it a useful oracle for the faster resonance expansion.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jost.hpp"
#include "quadrature.hpp"
#include "scalar.hpp"

namespace qdecay {

// A state on the half line with a stretched-exponential tail bound
// |psi0(r)| = O(exp(-c2 r^c3)).  The tail data is load bearing: it sets the
// truncation radius of every overlap integral and decides whether the factor
// exp(|Im k| r) against that tail is representable in the working precision.
// c3 >= 2 keeps the coefficients entire in k, which the resonance expansion
// depends on, so smaller exponents are rejected outright.
template <class C>
struct InitialState {
    using R = real_of<C>;
    std::function<C(const R&)> psi0;
    R c2 = R(0);
    R c3 = R(0);
    bool normalized = false;
};

namespace sdetail {

template <class C>
void check_state(const InitialState<C>& s) {
    using R = real_of<C>;
    if (!s.psi0) throw std::domain_error("initial state has no wave function");
    if (!(s.c2 > R(0))) throw std::domain_error("initial state needs a positive tail rate");
    if (!(s.c3 >= R(2))) throw std::domain_error("initial state tail must fall at least like a Gaussian");
}

// Peak log-magnitude of the envelope exp(y r - c2 r^c3) over r >= 0.
template <class R>
R envelope_peak(const R& c2, const R& c3, const R& y) {
    if (!(y > R(0))) return R(0);
    R rs = pow(y / (c2 * c3), R(1) / (c3 - R(1)));
    return y * rs - c2 * pow(rs, c3);
}

// Radius past which the envelope has dropped 25 decades below its peak.
template <class R>
R overlap_radius(const R& c2, const R& c3, const R& y) {
    const R drop = envelope_peak(c2, c3, y) - R(25) * log(R(10));
    auto env = [&](const R& r) { return y * r - c2 * pow(r, c3); };
    R rs = y > R(0) ? pow(y / (c2 * c3), R(1) / (c3 - R(1))) : R(0);
    R hi = rs + R(1);
    while (env(hi) > drop) hi *= R(2);
    R lo = rs;
    for (int i = 0; i < 48; ++i) {
        R mid = (lo + hi) / R(2);
        (env(mid) > drop ? lo : hi) = mid;
    }
    return hi;
}

// Boundary data of the regular solution at fixed k, hoisted so a radial
// sweep prices two plane-wave solutions per node instead of four.
// Mirrors u_from_f, including its small-|k| switch to the k = 0 limit form.
template <class M>
struct regular_eval {
    using C = typename M::complex_type;
    using R = typename M::real_type;
    const M* m;
    C k;
    bool limit;
    C fp, fm;       // f(k,0), f(-k,0); in the limit branch f(0,0), f'(0,0)
    C half_inv_ik;

    regular_eval(const M& model, const C& kk) : m(&model), k(lattice_safe_k(model, kk)) {
        limit = abs_c(k) < R(1e-4);
        if (limit) {
            fp = m->f0(C(0));
            fm = m->dk_f0(C(0));
            half_inv_ik = C(0);
        } else {
            fp = m->f0(k);
            fm = m->f0(-k);
            half_inv_ik = C(1) / (C(0, 2) * k);
        }
    }

    C operator()(const R& r) const {
        if (limit)
            return C(0, -1) * (fp * m->dk_f(C(0), r) - fm * m->f(C(0), r));
        return (fm * m->f(k, r) - fp * m->f(-k, r)) * half_inv_ik;
    }

    // Roundoff floor of one evaluation.  The quotient cancels products of
    // size |f(k,0) f(-k,0)|, so the noise scales with that product over
    // 2|k|; the limit branch cancels f(0,0) against the k-derivative factor
    // instead, which measures a few hundred times eps |f(0,0)| at small r.
    R noise_floor() const {
        const R eps = scalar_pack<C>::eps();
        if (limit) return eps * abs_c(fp) * R(300);
        return R(2) * eps * abs_c(fp) * abs_c(fm) * abs_c(half_inv_ik);
    }

    // Product of the two boundary values, the spectral weight denominator.
    C boundary_product() const { return fp * fm; }
};

// Shared overlap quadrature: psi0 against the regular solution held by ev.
template <class M>
QuadOutcome<typename M::complex_type, typename M::real_type>
overlap(const regular_eval<M>& ev, const InitialState<typename M::complex_type>& s,
        const typename M::real_type& tol) {
    using R = typename M::real_type;
    const R r_cut = overlap_radius(s.c2, s.c3, fabs(im_c(ev.k)));
    const R k_osc = fabs(re_c(ev.k));
    R dr = pi_v<R>() / (k_osc + R(1));
    if (dr > R(0.5)) dr = R(0.5);
    std::vector<R> pts;
    for (R r = R(0); r < r_cut; r += dr) pts.push_back(r);
    pts.push_back(r_cut);
    auto f = [&](const R& r) { return s.psi0(r) * ev(r); };
    return adaptive_integrate(f, pts, tol, 4 * pts.size() + 2000);
}

}  // namespace sdetail

// One overlap coefficient: the projection of the state on the regular
// solution at wavenumber k, with the quadrature's own error estimate.  For a
// real-valued state the companion coefficient built from the conjugated
// solution equals this one, so a single value is stored; on the real axis it
// is real up to roundoff.  The estimate covers truncation only: in double,
// wavenumbers below the small-|k| switch cancel boundary products of order
// |f(0,0) f'(0,0)| (about 4e11 for the barrier of interest), leaving
// roundoff near 1e-4 that the estimate cannot see.  The 50-digit contexts
// are clean.
template <class C>
struct SpectralCoefficient {
    C k;
    C value;
    real_of<C> abs_err;
};

template <potential_model M>
SpectralCoefficient<typename M::complex_type>
coefficient_C(const M& m, const InitialState<typename M::complex_type>& state,
              const typename M::complex_type& k,
              const real_of<typename M::complex_type>& tol = real_of<typename M::complex_type>(1e-11)) {
    using C = typename M::complex_type;
    using R = typename M::real_type;
    sdetail::check_state(state);

    // exp(|Im k| r) against the tail swings the integrand this far above the
    // result; refuse once more than half the context's digits would cancel.
    const R peak = sdetail::envelope_peak(state.c2, state.c3, fabs(im_c(k)));
    const double decades = static_cast<double>(peak / log(R(10)));
    if (decades > 0.5 * scalar_pack<C>::digits10) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "overlap integrand peaks %.0f decades above the coefficient; "
                      "use a scalar context with at least %d digits",
                      decades, static_cast<int>(decades + 20.0));
        throw std::domain_error(buf);
    }

    sdetail::regular_eval<M> ev(m, k);
    auto q = sdetail::overlap(ev, state, tol);
    return {k, q.value, q.abs_err};
}

// The unit-norm state r exp(-2 (r/rho)^2), the standard launch state for a
// barrier of range rho: node at the origin, essentially no support past 3 rho.
template <class C>
InitialState<C> gaussian_state(const real_of<C>& rho) {
    using R = real_of<C>;
    if (!(rho > R(0))) throw std::domain_error("gaussian state needs a positive width");
    const R amp = sqrt(R(32) / (sqrt(pi_v<R>()) * rho * rho * rho));
    InitialState<C> s;
    s.psi0 = [amp, rho](const R& r) { return C(amp * r * exp(R(-2) * r * r / (rho * rho))); };
    s.c2 = R(2) / (rho * rho);
    s.c3 = R(2);
    s.normalized = true;
    return s;
}

// Mix of two such states weighted so the zero-energy coefficient cancels.
// With the k = 0 overlap gone, the long-time behaviour is carried entirely
// by the next order, which otherwise hides under the leading algebraic tail.
template <potential_model M>
InitialState<typename M::complex_type>
gaussian_difference_state(const M& m, const real_of<typename M::complex_type>& rho1,
                          const real_of<typename M::complex_type>& rho2) {
    using C = typename M::complex_type;
    using R = typename M::real_type;
    if (!(fabs(rho1 - rho2) > R(1e-8) * (rho1 + rho2)))
        throw std::domain_error("difference state needs two distinct widths");
    InitialState<C> g1 = gaussian_state<C>(rho1);
    InitialState<C> g2 = gaussian_state<C>(rho2);
    const R tol = R(1e-12);
    const R w1 = re_c(coefficient_C(m, g2, C(0), tol).value);
    const R w2 = -re_c(coefficient_C(m, g1, C(0), tol).value);

    InitialState<C> s;
    s.c2 = rho1 > rho2 ? R(2) / (rho1 * rho1) : R(2) / (rho2 * rho2);
    s.c3 = R(2);
    auto f1 = g1.psi0, f2 = g2.psi0;
    auto mix = [f1, f2, w1, w2](const R& r) { return re_c(w1 * f1(r) + w2 * f2(r)); };
    const R r_cut = sdetail::overlap_radius(s.c2, s.c3, R(0));
    auto norm2 = adaptive_integrate([&](const R& r) {
        R v = mix(r);
        return v * v;
    }, R(0), r_cut, R(1e-13));
    const R scale = R(1) / sqrt(norm2.value);
    s.psi0 = [mix, scale](const R& r) { return C(scale * mix(r)); };
    s.normalized = true;
    return s;
}

// Diagnostic sweep of the coefficient's behaviour over the k ranges the
// evolution machinery visits.  Nothing consumes the report automatically; it
// exists so a state whose coefficients fall too slowly for the resonance
// expansion is caught here rather than as a mysterious divergence later.
struct DecayReport {
    double tail_exponent = 0;   // least-squares slope of log|C| against log k
    double k6_plateau = 0;      // median |C| k^6 over the sampled tail
    bool growth_bounded = true; // log|C(i y)| minus the tail-bound parabola stays flat
    bool vanishes = false;      // every sample negligible: the zero state
};

template <potential_model M>
DecayReport decay_check_C(const M& m, const InitialState<typename M::complex_type>& state) {
    using C = typename M::complex_type;
    using R = typename M::real_type;
    const double ks[] = {5, 7.5, 10, 15, 20, 30, 40, 50};
    const int n = 8;
    double la[n], lc[n], plateau[4];
    DecayReport rep;
    rep.vanishes = true;
    for (int i = 0; i < n; ++i) {
        auto c = coefficient_C(m, state, C(R(ks[i])), R(1e-13));
        const double a = static_cast<double>(abs_c(c.value));
        if (a > 1e-18) rep.vanishes = false;
        la[i] = std::log(ks[i]);
        lc[i] = std::log(a + 1e-300);
        if (i >= 4) plateau[i - 4] = a * std::pow(ks[i], 6.0);
    }
    if (rep.vanishes) return rep;

    double ma = 0, mc = 0;
    for (int i = 0; i < n; ++i) { ma += la[i]; mc += lc[i]; }
    ma /= n; mc /= n;
    double num = 0, den = 0;
    for (int i = 0; i < n; ++i) {
        num += (la[i] - ma) * (lc[i] - mc);
        den += (la[i] - ma) * (la[i] - ma);
    }
    rep.tail_exponent = num / den;

    std::sort(plateau, plateau + 4);
    rep.k6_plateau = 0.5 * (plateau[1] + plateau[2]);

    // Up the imaginary axis the coefficient may grow like the envelope peak
    // exp(y^2 / (4 c2)) but no faster.  The residual after removing that
    // parabola drifts only through slowly varying prefactors (a 1/(2y) from
    // the standing-wave amplitude, order-one scattering factors), so a
    // spread beyond a few log units flags genuine excess growth.  Samples
    // sit between the half-integer points where the plane-wave
    // normalization has its removable lattice poles.
    double g[5];
    for (int i = 0; i < 5; ++i) {
        const double y = 2.0 * (i + 1) - 0.2;
        auto c = coefficient_C(m, state, C(R(0), R(y)), R(1e-13));
        g[i] = std::log(static_cast<double>(abs_c(c.value)) + 1e-300)
             - y * y / (4.0 * static_cast<double>(state.c2));
    }
    double gmin = g[0], gmax = g[0];
    for (int i = 1; i < 5; ++i) {
        if (g[i] < gmin) gmin = g[i];
        if (g[i] > gmax) gmax = g[i];
    }
    rep.growth_bounded = gmax - gmin <= 4.0;
    return rep;
}

template <class C>
struct DirectOutcome {
    C value;
    real_of<C> abs_err;
};

// Propagated value of the state at one point by direct continuum quadrature,
//   psi(r,t) = (2/pi) Int k^2 / (f(k,0) f(-k,0)) C(k) e^{-i k^2 t} u(k,r) dk.
// Each outer node recomputes its coefficient, so the cost grows with t
// through the phase resolution; usable as an oracle to t of order 1e2.
template <potential_model M>
DirectOutcome<typename M::complex_type>
psi_direct(const M& m, const InitialState<typename M::complex_type>& state,
           const typename M::real_type& r, const typename M::real_type& t,
           const typename M::real_type& k_max,
           const typename M::real_type& tol = typename M::real_type(1e-6)) {
    using C = typename M::complex_type;
    using R = typename M::real_type;
    sdetail::check_state(state);
    if (!(t >= R(0))) throw std::domain_error("direct evolution runs forward from t = 0");
    if (!(r >= R(0))) throw std::domain_error("direct evolution needs r >= 0");
    if (!(k_max > R(0))) throw std::domain_error("direct evolution needs a positive cutoff");

    // A tolerance under the context's own roundoff floor cannot be met no
    // matter how hard the quadrature works; say so before trying.
    const R floor_err = R(2) / pi_v<R>() * scalar_pack<C>::eps() * k_max * k_max;
    if (floor_err >= tol) {
        char buf[120];
        std::snprintf(buf, sizeof buf,
                      "direct evolution integral reached %.3e against a tolerance of %.3e",
                      static_cast<double>(floor_err), static_cast<double>(tol));
        throw std::runtime_error(buf);
    }

    // Panel edges keyed to the local phase k^2 t + k r so each panel sees at
    // most a fraction of an oscillation before refinement starts.
    std::vector<R> pts;
    pts.push_back(R(0));
    for (R k = R(0); k < k_max;) {
        R dk = pi_v<R>() / (R(2) * k * t + r + R(1));
        if (dk > R(0.7)) dk = R(0.7);
        k += dk;
        pts.push_back(k < k_max ? k : k_max);
        if (pts.size() > 400000)
            throw std::domain_error("phase resolution wants too many panels; "
                                    "this deep in t use the resonance expansion");
    }

    // An inner coefficient error of size e contributes at most
    // e k^2 / |f(k,0) f(-k,0)| per unit k, so budget the inner tolerance
    // against the integrated weight.  Below the per-k roundoff floor a
    // tighter request would only make the inner quadrature flail, and the
    // same boundary product that sets the floor divides it away again, so
    // the floor costs the outer result only eps-level terms.
    const R tol_inner = tol / (R(1) + k_max * k_max * k_max / R(3));
    auto f = [&](const R& k) -> C {
        sdetail::regular_eval<M> ev(m, C(k));
        R tk = ev.noise_floor();
        if (tk < tol_inner) tk = tol_inner;
        auto c = sdetail::overlap(ev, state, tk);
        const C phase = exp_c(C(R(0), -k * k * t));
        return C(k * k) / ev.boundary_product() * c.value * phase * ev(r);
    };
    auto q = adaptive_integrate(f, pts, tol, 2 * pts.size() + 4000);

    const R two_over_pi = R(2) / pi_v<R>();
    R err = two_over_pi * (q.abs_err + tol_inner * k_max * k_max * k_max / R(3)
                           + scalar_pack<C>::eps() * k_max * k_max);
    if (!q.converged || err > tol) {
        char buf[120];
        std::snprintf(buf, sizeof buf,
                      "direct evolution integral reached %.3e against a tolerance of %.3e",
                      static_cast<double>(err), static_cast<double>(tol));
        throw std::runtime_error(buf);
    }
    return {two_over_pi * q.value, err};
}

}  // namespace qdecay
