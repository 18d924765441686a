#pragma once
// Jost solutions of -f'' + V f = k^2 f on r > 0, normalized so that
// e^{-ikr} f(k,r) -> 1 as r -> infinity.  The Eckart barrier
// V(r) = A e^{r-rho} / (1 + e^{r-rho})^2 admits a closed form: with
// z = 1/(1 + e^{r-rho}) (so dz/dr = -z(1-z) and V = A z(1-z)) the substitution
// f = e^{ikr} w(z) turns the wave equation into the hypergeometric equation
//   z(1-z) w'' + [(1-2ik) - 2z] w' - A w = 0,
// i.e. f(k,r) = e^{ikr} 2F1(1/2 - i delta, 1/2 + i delta; 1 - 2ik; z) with
// delta = sqrt(A - 1/4).  Everything downstream (regular solution, residue
// expansion, spectral coefficients) is built from f and its k-derivative.
//
// The regular solution
//   u(k,r) = [f(-k,0) f(k,r) - f(k,0) f(-k,r)] / (2ik)
// vanishes at the origin with u'(0) = 1; it is entire and even in k, so the
// removable k = 0 point is crossed on a derivative formula.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <stdexcept>
#include <vector>

#include <boost/numeric/odeint/integrate/integrate_adaptive.hpp>
#include <boost/numeric/odeint/stepper/controlled_runge_kutta.hpp>
#include <boost/numeric/odeint/stepper/generation.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_dopri5.hpp>

#include "qdecay/scalar.hpp"
#include "qdecay/specfun.hpp"

namespace qdecay {

// A scattering model: real potential with integrable first moment, analytic
// Jost solution f(k,r) and its k-derivative.  conj(f(k,r)) = f(-conj k, r)
// holds for all of them (real V), and e^{-ikr} f(k,r) -> 1 as r -> infinity.
template <class M>
concept potential_model =
    requires(const M& m, const typename M::complex_type& k,
             const typename M::real_type& r) {
        { m.V(r) } -> std::convertible_to<typename M::real_type>;
        { m.f(k, r) } -> std::convertible_to<typename M::complex_type>;
        { m.f0(k) } -> std::convertible_to<typename M::complex_type>;
        { m.dk_f(k, r) } -> std::convertible_to<typename M::complex_type>;
        { m.dk_f0(k) } -> std::convertible_to<typename M::complex_type>;
    };

// V(r) = A e^{r-rho}/(1+e^{r-rho})^2.  delta is stored complex so that
// A < 1/4 (imaginary delta) needs no special casing; for the barrier of
// interest A = 49.25, rho = 1, delta = 7 exactly.
template <class C>
struct EckartModel {
    using complex_type = C;
    using real_type = real_of<C>;
    using R = real_type;

    R A, rho;
    C delta;  // sqrt(A - 1/4), imaginary when A < 1/4
    C a, b;   // 1/2 -+ i delta

    EckartModel(const R& A_, const R& rho_) : A(A_), rho(rho_) {
        delta = sqrt_c(make_c<C>(A - R(0.25), R(0)));
        C idelta = make_c<C>(R(0), R(1)) * delta;
        a = C(R(0.5)) - idelta;
        b = C(R(0.5)) + idelta;
    }

    // 1/(1+e^{r-rho}), evaluated on the branch that never overflows
    R z_of(const R& r) const {
        R x = r - rho;
        if (x > R(0)) {
            R e = exp(-x);
            return e / (1 + e);
        }
        return 1 / (1 + exp(x));
    }

    C c_of(const C& k) const { return C(1) - make_c<C>(R(0), R(2)) * k; }

    R V(const R& r) const {
        R z = z_of(r);
        return A * z * (1 - z);
    }

    C f(const C& k, const R& r) const {
        if (r < R(0)) throw std::domain_error("eckart: r must be nonnegative");
        return exp_c(make_c<C>(R(0), r) * k) * hyp2f1(a, b, c_of(k), z_of(r));
    }

    C f0(const C& k) const { return f(k, R(0)); }

    // d/dk f = e^{ikr} (ir 2F1 - 2i d/dc 2F1), chain rule through c = 1-2ik
    C dk_f(const C& k, const R& r) const {
        if (r < R(0)) throw std::domain_error("eckart: r must be nonnegative");
        R z = z_of(r);
        C c = c_of(k);
        C e = exp_c(make_c<C>(R(0), r) * k);
        return e * (make_c<C>(R(0), r) * hyp2f1(a, b, c, z) -
                    make_c<C>(R(0), R(2)) * hyp2f1_dc(a, b, c, z));
    }

    C dk_f0(const C& k) const { return dk_f(k, R(0)); }

    // The hypergeometric factor of f alone, with the plane wave removed
    // exactly; stays finite where e^{ikr} would under- or overflow.
    C f_reduced(const C& k, const R& r) const {
        if (r < R(0)) throw std::domain_error("eckart: r must be nonnegative");
        return hyp2f1(a, b, c_of(k), z_of(r));
    }

    // Asymptotic guesses for the lower half plane zeros of f(-k, 0).  The
    // zeros track the line (s + i log(2 cosh(pi delta)) / (2 pi)) / (i +
    // rho / pi) at integer spaced s; a guess whose imaginary part is not
    // clearly negative seeds nothing (the first one sits above the axis).
    std::vector<C> resonance_seeds(const R& K) const {
        std::vector<C> out;
        const R pi = pi_v<R>();
        const C t = C(pi) * delta;
        const C lc = t + log1p_c(exp_c(C(-2) * t));
        const C den = make_c<C>(rho / pi, R(1));
        for (long n = 1;; ++n) {
            const C s = C(R(n) - R(0.25)) + make_c<C>(R(0), R(1)) * lc / C(2 * pi);
            const C k = s / den;
            if (abs_c(k) > K) break;
            if (im_c(k) < R(-0.02)) out.push_back(k);
        }
        return out;
    }

    // int_0^inf r |V| dr = A (rho + log(1+e^{-rho})), finite: f exists for all k
    R int_r_abs_V() const {
        R x = -rho;
        R sp = x > R(0) ? x + log(1 + exp(-x)) : log(1 + exp(x));
        return A * (rho + sp);
    }
};

template <class C>
struct FreeModel {
    using complex_type = C;
    using real_type = real_of<C>;
    using R = real_type;

    R V(const R&) const { return R(0); }
    C f(const C& k, const R& r) const {
        if (r < R(0)) throw std::domain_error("free: r must be nonnegative");
        return exp_c(make_c<C>(R(0), r) * k);
    }
    C f0(const C&) const { return C(1); }
    C dk_f(const C& k, const R& r) const {
        if (r < R(0)) throw std::domain_error("free: r must be nonnegative");
        return make_c<C>(R(0), r) * exp_c(make_c<C>(R(0), r) * k);
    }
    C dk_f0(const C&) const { return C(0); }
    C f_reduced(const C&, const R& r) const {
        if (r < R(0)) throw std::domain_error("free: r must be nonnegative");
        return C(1);
    }
    R int_r_abs_V() const { return R(0); }
};

// The plane-wave normalizations have removable poles where a model's
// hypergeometric c parameter lands on a nonpositive integer (k on the
// lattice -i n/2 for the barrier).  The regular solution itself is entire
// there, so a wavenumber within reach of the lattice is shifted radially.
// The shift balances series roundoff, which grows as eps times the boundary
// product scale over the distance through the near-pole cancellation,
// against the linear change of the solution, which shrinks with it:
// eps^(1/4) in c units sits near the measured optimum.  For the barrier's
// imaginary lattice the products reach 1e11, so double values within a few
// shift widths of a lattice point carry parts-in-1e3 errors; the wide
// contexts ride their floor, the series' own pole guard, where the shift
// costs ~1e-10 relative.  Models without a c parameter pass through.
template <class M>
typename M::complex_type lattice_safe_k(const M& m, typename M::complex_type k) {
    using C = typename M::complex_type;
    using R = typename M::real_type;
    if constexpr (requires { m.c_of(k); }) {
        for (int pass = 0; pass < 2; ++pass) {
            const C c = pass ? m.c_of(-k) : m.c_of(k);
            const R cr = re_c(c);
            if (cr > R(0.5)) continue;
            const R nearest = floor(cr + R(0.5));
            const R dist = fabs(cr - nearest) + fabs(im_c(c));
            R tau = sqrt(sqrt(scalar_pack<C>::eps()));
            if (tau < R(2e-11)) tau = R(2e-11);
            tau *= R(1) - nearest;
            if (nearest <= R(0) && dist < tau) k *= R(1) + tau / abs_c(k);
        }
    }
    return k;
}

// Regular solution from the Jost pair.  Below |k| = 1e-4 the 0/0 form is
// traded for the symmetric limit u(0,r) = -i [f0 dk_f - dk_f0 f](0,r).  The
// limit branch is exact at k = 0 and, since u is even in k, off by genuine
// k^2 curvature near the switch (~1e-5 relative at moderate radii for the
// barrier).  Just above the switch the quotient cancels products of size
// |f0(-k) f(k,r)|, so in double it carries roundoff at eps times that scale
// over 2|k|, fading like 1/|k|; the multiprecision contexts are clean there.
template <potential_model M>
typename M::complex_type u_from_f(const M& m, const typename M::complex_type& k_in,
                                  const typename M::real_type& r) {
    using C = typename M::complex_type;
    using R = typename M::real_type;
    if (r < R(0)) throw std::domain_error("u_from_f: r must be nonnegative");
    const C k = lattice_safe_k(m, k_in);
    if (abs_c(k) < R(1e-4)) {
        C k0(0);
        return make_c<C>(R(0), R(-1)) *
               (m.f0(k0) * m.dk_f(k0, r) - m.dk_f0(k0) * m.f(k0, r));
    }
    C num = m.f0(-k) * m.f(k, r) - m.f0(k) * m.f(-k, r);
    return num / (make_c<C>(R(0), R(2)) * k);
}

namespace jdetail {

// sum_{j>=m+1} (a)_j (b)_j z^j / (j! (j-m-1)!): the c -> -m residue of the
// hypergeometric series up to a factor common to numerator and denominator
// of the Jost ratio, which is all the ratio limit needs.
template <class C>
C hyp_residue_sum(const C& a, const C& b, int m, const real_of<C>& z) {
    using R = real_of<C>;
    if (z == R(0)) return C(0);
    C term(1);
    for (int l = 0; l <= m; ++l) term *= (a + R(l)) * (b + R(l));
    R pref(1);
    for (int l = 2; l <= m + 1; ++l) pref *= R(l);
    term *= pow(z, R(m + 1)) / pref;
    C sum = term;
    for (int j = m + 1; j < 100000; ++j) {
        term *= (a + R(j)) * (b + R(j)) * z / (R(j + 1) * R(j - m));
        sum += term;
        if (abs_c(term) <= scalar_pack<C>::eps() * abs_c(sum) && j > m + 5)
            return sum;
    }
    throw std::runtime_error("hyp_residue_sum: series failed to converge");
}

template <potential_model M>
typename M::complex_type plain_ratio(const M& m,
                                     const typename M::complex_type& k,
                                     const typename M::real_type& r) {
    using C = typename M::complex_type;
    using R = typename M::real_type;
    C num = m.f(k, r);
    C den = m.f0(k);
    if (abs_c(den) <= R(1e-9) * std::max(R(1), abs_c(num)))
        throw std::domain_error("f_ratio: f(k,0) vanishes (resonance zero)");
    return num / den;
}

}  // namespace jdetail

// f(k,r)/f(k,0).  The hypergeometric parameter poles at k = -i(n+1)/2 cancel
// between numerator and denominator; exactly on one, both are replaced by
// their common residue and the ratio stays analytic.  Near (but not on) a
// pole the plain quotient is already accurate: the divergent parts dominate
// both factors equally.
template <potential_model M>
typename M::complex_type f_ratio(const M& m, const typename M::complex_type& k,
                                 const typename M::real_type& r) {
    using C = typename M::complex_type;
    using R = typename M::real_type;
    if (r < R(0)) throw std::domain_error("f_ratio: r must be nonnegative");
    if (r == R(0)) return C(1);  // identically 1, even at a resonance zero
    return jdetail::plain_ratio(m, k, r);
}

template <class C>
C f_ratio(const EckartModel<C>& m, const C& k, const real_of<C>& r) {
    using R = real_of<C>;
    if (r < R(0)) throw std::domain_error("f_ratio: r must be nonnegative");
    if (r == R(0)) return C(1);
    try {
        return jdetail::plain_ratio(m, k, r);
    } catch (const hyp_c_pole& p) {
        int mm = -p.n;
        return exp_c(make_c<C>(R(0), r) * k) *
               jdetail::hyp_residue_sum(m.a, m.b, mm, m.z_of(r)) /
               jdetail::hyp_residue_sum(m.a, m.b, mm, m.z_of(R(0)));
    }
}

namespace jdetail {

// Backward integration of -f'' + V f = k^2 f from a radius r_inf where
// r |V(r)| < 1e-14, starting on the plane wave f = e^{ikr}.  Integrating
// toward the origin keeps the wanted solution on the growing side, so the
// contaminating second solution cannot take over.  Returns (f, f') at each
// grid point; double precision only, this is the cross-validation oracle.
template <class VF>
std::vector<std::array<std::complex<double>, 2>> integrate_jost(
    VF&& V, std::complex<double> k, const std::vector<double>& r_grid) {
    namespace ode = boost::numeric::odeint;
    if (r_grid.empty())
        throw std::domain_error("numerical_jost: empty grid");
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        if (!(r_grid[i] >= 0))
            throw std::domain_error("numerical_jost: r must be nonnegative");
        if (i && r_grid[i] < r_grid[i - 1])
            throw std::domain_error("numerical_jost: grid must be nondecreasing");
    }
    double r_inf = std::max(r_grid.back() + 5.0, 10.0);
    while (std::fabs(V(r_inf)) * r_inf >= 1e-14) {
        r_inf += 0.5;
        if (r_inf > 200.0)
            throw std::domain_error(
                "numerical_jost: r |V(r)| stays above 1e-14 out to r = 200");
    }
    if (std::fabs(k.imag()) * r_inf > 690.0)
        throw std::domain_error(
            "numerical_jost: e^{ikr} not representable at the matching radius");

    const std::complex<double> I(0, 1);
    std::complex<double> e = std::exp(I * k * r_inf);
    std::complex<double> fp = I * k * e;
    std::array<double, 4> y{e.real(), e.imag(), fp.real(), fp.imag()};
    const double k2r = (k * k).real(), k2i = (k * k).imag();
    // f'' = (V - k^2) f split into real and imaginary parts
    auto sys = [&V, k2r, k2i](const std::array<double, 4>& x,
                              std::array<double, 4>& dx, double r) {
        double wre = V(r) - k2r;
        dx[0] = x[2];
        dx[1] = x[3];
        dx[2] = wre * x[0] + k2i * x[1];
        dx[3] = wre * x[1] - k2i * x[0];
    };
    // relative control only: the seed value e^{ik r_inf} can sit far below
    // any fixed absolute floor, and contamination at that floor would ride
    // along as the solution grows backward
    auto ctrl = ode::make_controlled(
        1e-300, 1e-13, ode::runge_kutta_dopri5<std::array<double, 4>>());

    std::vector<std::array<std::complex<double>, 2>> out(r_grid.size());
    double r_hi = r_inf;
    for (std::size_t i = r_grid.size(); i-- > 0;) {
        double r_lo = r_grid[i];
        if (r_lo < r_hi)
            ode::integrate_adaptive(ctrl, sys, y, r_hi, r_lo, -0.05);
        if (!(std::isfinite(y[0]) && std::isfinite(y[1]) &&
              std::isfinite(y[2]) && std::isfinite(y[3])))
            throw std::runtime_error(
                "numerical_jost: integration lost stability");
        out[i] = {std::complex<double>(y[0], y[1]),
                  std::complex<double>(y[2], y[3])};
        r_hi = r_lo;
    }
    return out;
}

}  // namespace jdetail

template <class VF>
std::vector<std::complex<double>> numerical_jost(
    VF&& V, std::complex<double> k, const std::vector<double>& r_grid) {
    auto both = jdetail::integrate_jost(V, k, r_grid);
    std::vector<std::complex<double>> f(both.size());
    for (std::size_t i = 0; i < both.size(); ++i) f[i] = both[i][0];
    return f;
}

}  // namespace qdecay
