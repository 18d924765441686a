// Poles of the expansion function g(k,r) = k C(k) e^{-ikr} f(k,r) /
// (h_alpha(k) f(k,0)): the three zero lattices of the regulator trident
// h_alpha plus the resonance zeros of the plane-wave normalization.  Zeros
// are located from closed-form seeds, refined by Newton, and certified
// complete by argument-principle counting on rectangles.  Residues carry a
// growth screen so summands suppressed by hundreds of decades never price
// an overlap integral they cannot move.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qdecay/jost.hpp"
#include "qdecay/scalar.hpp"
#include "qdecay/spectral.hpp"

namespace qdecay {

enum class PoleKind { aux1, aux2, aux3, resonance };

inline const char* pole_kind_name(PoleKind k) {
    switch (k) {
        case PoleKind::aux1: return "aux1";
        case PoleKind::aux2: return "aux2";
        case PoleKind::aux3: return "aux3";
        default: return "resonance";
    }
}

// One pole of the expansion denominator h_alpha(k) f(k,0).  The derivative
// of the denominator is kept in split form, denom_deriv = e^{log_scale} *
// scaled part, because the trident grows like exp(alpha |k|^2 / sqrt 2) on
// the diagonal lattices; the plain member saturates honestly in double once
// that scale passes the overflow line.
template <class C>
struct Pole {
    using R = real_of<C>;
    C k{};
    PoleKind kind = PoleKind::aux3;
    C seed{};
    bool refined = false;
    C denom_deriv{};
    R denom_log_scale{};
    C denom_deriv_scaled{};
    R alpha{};
};

// Regulator trident h_alpha(k) = e^{i a k^2} + e^{-i a k^2} + e^{-a k^2},
// evaluated with the largest exponent factored out so the parts never
// overflow: h = e^{log_scale} value, h' = e^{log_scale} dvalue.
template <class C>
struct TridentParts {
    real_of<C> log_scale;
    C value;
    C dvalue;
};

template <class C>
TridentParts<C> h_alpha_scaled(const C& k, const real_of<C>& alpha) {
    using R = real_of<C>;
    if (!(alpha > R(0))) throw std::domain_error("trident regulator must be positive");
    const C s = k * k;
    const C e1 = make_c<C>(R(0), alpha) * s;
    const C e2 = -e1;
    const C e3 = C(-alpha) * s;
    R m = re_c(e1);
    if (re_c(e2) > m) m = re_c(e2);
    if (re_c(e3) > m) m = re_c(e3);
    const C t1 = exp_c(make_c<C>(re_c(e1) - m, im_c(e1)));
    const C t2 = exp_c(make_c<C>(re_c(e2) - m, im_c(e2)));
    const C t3 = exp_c(make_c<C>(re_c(e3) - m, im_c(e3)));
    const C ia = make_c<C>(R(0), alpha);
    TridentParts<C> out;
    out.log_scale = m;
    out.value = t1 + t2 + t3;
    out.dvalue = C(2) * k * (ia * t1 - ia * t2 - C(alpha) * t3);
    return out;
}

template <class C>
C h_alpha(const C& k, const real_of<C>& alpha) {
    auto p = h_alpha_scaled(k, alpha);
    return C(exp(p.log_scale)) * p.value;
}

template <class C>
C dk_h_alpha(const C& k, const real_of<C>& alpha) {
    auto p = h_alpha_scaled(k, alpha);
    return C(exp(p.log_scale)) * p.dvalue;
}

// The three zero lattices of the trident, from the pairwise balance of its
// exponents: two diagonal families at phases -3pi/8 and +3pi/8 (with their
// negatives) of magnitude sqrt(pi (2n-1) / (sqrt 2 alpha)), and a real pair
// at sqrt(pi (2n-1) / (2 alpha)).  Seeds are emitted out to 1.05 K_max so a
// boundary zero can still be pulled inside by refinement.
template <class C>
std::vector<Pole<C>> aux_pole_seeds(const real_of<C>& alpha, const real_of<C>& K_max) {
    using R = real_of<C>;
    if (!(alpha > R(0))) throw std::domain_error("trident regulator must be positive");
    if (!(K_max > R(0))) throw std::domain_error("seed emission needs a positive radius");
    const R cap = K_max * R(1.05);
    const R pi = pi_v<R>();
    const C ph1 = exp_c(make_c<C>(R(0), R(-3) * pi / R(8)));
    const C ph2 = conj_c(ph1);
    std::vector<Pole<C>> out;
    auto push = [&](const C& s, PoleKind kind) {
        Pole<C> p;
        p.k = s;
        p.kind = kind;
        p.seed = s;
        p.alpha = alpha;
        out.push_back(p);
    };
    for (long n = 1;; ++n) {
        const R odd = pi * R(2 * n - 1);
        const R diag = sqrt(odd / (sqrt(R(2)) * alpha));
        const R axis = sqrt(odd / (R(2) * alpha));
        bool any = false;
        if (diag <= cap) {
            push(C(diag) * ph1, PoleKind::aux1);
            push(C(-diag) * ph1, PoleKind::aux1);
            push(C(diag) * ph2, PoleKind::aux2);
            push(C(-diag) * ph2, PoleKind::aux2);
            any = true;
        }
        if (axis <= cap) {
            push(C(axis), PoleKind::aux3);
            push(C(-axis), PoleKind::aux3);
            any = true;
        }
        if (!any) break;
    }
    return out;
}

namespace pdetail {

template <class C>
std::pair<C, bool> refine_trident(C k, const real_of<C>& alpha) {
    using R = real_of<C>;
    const R eps = scalar_pack<C>::eps();
    for (int it = 0; it < 80; ++it) {
        auto h = h_alpha_scaled(k, alpha);
        if (!(abs_c(h.dvalue) > R(0))) return {k, false};
        const C step = h.value / h.dvalue;
        k -= step;
        if (abs_c(step) <= R(32) * eps * (R(1) + abs_c(k))) return {k, true};
    }
    return {k, false};
}

// Newton on the normalization f(k,0).  An iterate that wanders onto one of
// the normalization's own singularities or out of the finite range just
// fails the seed; the winding certificate decides whether that mattered.
template <class M>
std::pair<typename M::complex_type, bool> refine_normal_zero(const M& m,
                                                             typename M::complex_type k) {
    using C = typename M::complex_type;
    using R = typename M::real_type;
    const R eps = scalar_pack<C>::eps();
    try {
        for (int it = 0; it < 80; ++it) {
            if (!finite_c(k)) return {k, false};
            const C d = m.dk_f0(k);
            if (!(abs_c(d) > R(0))) return {k, false};
            const C step = m.f0(k) / d;
            k -= step;
            if (abs_c(step) <= R(32) * eps * (R(1) + abs_c(k))) return {k, true};
        }
    } catch (const std::domain_error&) {
        return {k, false};
    }
    return {k, false};
}

// Raised when a contour node lands on a value too small to carry a phase;
// the caller shifts its grid and tries again.
struct edge_hit {};

// Phase turn of D along the chord [z0, z1].  A chord is accepted only when
// it is short, its endpoint turn is below a quarter circle, and the two
// half-chord turns agree with it; endpoint agreement alone can fold away a
// full turn when the phase spins fast between samples.  A fold passing all
// three checks would need opposite whole turns inside a sub-chord, which
// puts a zero essentially on the contour; that case surfaces through the
// integer test on the total.
template <class F, class C>
real_of<C> walk_edge(F& D, const C& z0, const C& z1, const C& v0, const C& v1, int depth) {
    using R = real_of<C>;
    const R half_pi = pi_v<R>() / R(2);
    const R dphi = arg_c(v1 / v0);
    if (depth >= 44) return dphi;
    const C zm = (z0 + z1) / C(2);
    const C vm = D(zm);
    if (!(abs_c(vm) > R(0))) throw edge_hit{};
    const R s = arg_c(vm / v0);
    const R t = arg_c(v1 / vm);
    if (abs_c(z1 - z0) <= R(0.15) && fabs(dphi) < half_pi && fabs(s) < half_pi &&
        fabs(t) < half_pi && fabs(s + t - dphi) < R(1e-6))
        return dphi;
    return walk_edge(D, z0, zm, v0, vm, depth + 1) +
           walk_edge(D, zm, z1, vm, v1, depth + 1);
}

// Winding number of D around an axis-aligned rectangle, counter-clockwise.
// The result must sit within 1e-3 of an integer; anything looser means a
// zero rides the contour, reported as edge_hit.
template <class F, class C>
long winding_rectangle(F& D, const real_of<C>& x0, const real_of<C>& x1,
                       const real_of<C>& y0, const real_of<C>& y1) {
    using R = real_of<C>;
    const C c00 = make_c<C>(x0, y0), c10 = make_c<C>(x1, y0);
    const C c11 = make_c<C>(x1, y1), c01 = make_c<C>(x0, y1);
    const C v00 = D(c00), v10 = D(c10), v11 = D(c11), v01 = D(c01);
    if (!(abs_c(v00) > R(0)) || !(abs_c(v10) > R(0)) || !(abs_c(v11) > R(0)) ||
        !(abs_c(v01) > R(0)))
        throw edge_hit{};
    const R total = walk_edge(D, c00, c10, v00, v10, 0) + walk_edge(D, c10, c11, v10, v11, 0) +
                    walk_edge(D, c11, c01, v11, v01, 0) + walk_edge(D, c01, c00, v01, v00, 0);
    const R w = total / (R(2) * pi_v<R>());
    const R rounded = floor(w + R(0.5));
    if (fabs(w - rounded) > R(1e-3)) throw edge_hit{};
    return static_cast<long>(static_cast<double>(rounded));
}

}  // namespace pdetail

// All zeros of the normalization f(k, 0) with |k| <= K_max in the lower
// half plane, both the fourth-quadrant arm and its mirror across the
// imaginary axis (the models here have real potentials, so the mirror zeros
// are exact reflections).  Seeds from the model's own asymptotic guesses
// are refined by Newton; completeness is then certified by matching the
// winding number of every scanned rectangle against the zeros refined
// inside it, subdividing and reseeding from centroids where the counts
// disagree.  A persistent disagreement raises an error rather than
// returning a short list.  The scan starts a small offset to the right of
// the imaginary axis: the normalization may carry poles on that axis (the
// closed-form model here does), and a pole inside a contour corrupts the
// count; a zero hugging the axis closer than the offset sits outside the
// certificate.  The regulator, when supplied, completes denom_deriv with
// the trident factor.
template <class M>
std::vector<Pole<typename M::complex_type>> find_resonances(
    const M& m, const typename M::real_type& K_max,
    const typename M::real_type& alpha = typename M::real_type(0)) {
    using C = typename M::complex_type;
    using R = typename M::real_type;
    if (!(K_max > R(0))) throw std::domain_error("resonance search needs a positive radius");
    auto D = [&m](const C& z) { return m.f0(z); };

    std::vector<Pole<C>> zeros;
    auto remember = [&](const C& z, const C& seed) {
        if (!(im_c(z) < R(0)) || !(re_c(z) > R(0))) return;
        for (const auto& p : zeros)
            if (abs_c(p.k - z) < R(1e-7) * (R(1) + abs_c(z))) return;
        Pole<C> p;
        p.k = z;
        p.kind = PoleKind::resonance;
        p.seed = seed;
        p.refined = true;
        p.alpha = alpha;
        zeros.push_back(p);
    };

    if constexpr (requires { m.resonance_seeds(K_max); }) {
        for (const C& s : m.resonance_seeds(K_max * R(1.05) + R(6)))
            if (im_c(s) < R(-0.02)) {
                auto [z, ok] = pdetail::refine_normal_zero(m, s);
                if (ok) remember(z, s);
            }
    }

    const R cap = K_max * R(1.05);
    const R tile = R(2);

    std::function<void(R, R, R, R, int)> verify = [&](R x0, R x1, R y0, R y1, int depth) {
        const long w = pdetail::winding_rectangle<decltype(D), C>(D, x0, x1, y0, y1);
        auto count = [&] {
            long c = 0;
            for (const auto& p : zeros)
                if (re_c(p.k) >= x0 && re_c(p.k) < x1 && im_c(p.k) >= y0 && im_c(p.k) < y1) ++c;
            return c;
        };
        if (count() == w) return;
        if (count() < w) {
            const C mid = make_c<C>((x0 + x1) / R(2), (y0 + y1) / R(2));
            auto [z, ok] = pdetail::refine_normal_zero(m, mid);
            if (ok) remember(z, mid);
        }
        if (count() == w) return;
        if (count() < w && depth < 11) {
            const R xm = (x0 + x1) / R(2), ym = (y0 + y1) / R(2);
            verify(x0, xm, y0, ym, depth + 1);
            verify(xm, x1, y0, ym, depth + 1);
            verify(x0, xm, ym, y1, depth + 1);
            verify(xm, x1, ym, y1, depth + 1);
            if (count() == w) return;
        }
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "resonance count mismatch on [%.3f,%.3f]x[%.3f,%.3f]: winding %ld, "
                      "refined %ld",
                      static_cast<double>(x0), static_cast<double>(x1), static_cast<double>(y0),
                      static_cast<double>(y1), w, count());
        throw std::runtime_error(buf);
    };

    R off = R(0.0137);
    for (int attempt = 0;; ++attempt) {
        try {
            for (R x0 = off; x0 < cap + R(1); x0 += tile)
                for (R y1 = off; y1 > -(cap + R(1)); y1 -= tile) {
                    const R x1 = x0 + tile, y0 = y1 - tile;
                    const R nx = x0 > R(0) ? x0 : R(0);
                    const R ny = y1 < R(0) ? -y1 : R(0);
                    if (hypot(nx, ny) > cap + R(0.7)) continue;
                    verify(x0, x1, y0, y1, 0);
                }
            break;
        } catch (pdetail::edge_hit&) {
            if (attempt >= 3)
                throw std::runtime_error(
                    "winding contours kept landing on zeros of the normalization");
            off = off * R(1.7) + R(0.0041);
        }
    }

    std::vector<Pole<C>> out;
    for (const auto& p : zeros)
        if (abs_c(p.k) <= K_max) {
            out.push_back(p);
            Pole<C> q = p;
            q.k = -conj_c(p.k);
            q.seed = -conj_c(p.seed);
            out.push_back(q);
        }
    if (alpha > R(0))
        for (auto& p : out) {
            auto parts = h_alpha_scaled(p.k, alpha);
            p.denom_log_scale = parts.log_scale;
            p.denom_deriv_scaled = parts.value * (-m.dk_f0(-p.k));
            p.denom_deriv = C(exp(parts.log_scale)) * p.denom_deriv_scaled;
        }
    std::sort(out.begin(), out.end(), [](const Pole<C>& a, const Pole<C>& b) {
        const R ra = abs_c(a.k), rb = abs_c(b.k);
        if (ra < rb) return true;
        if (rb < ra) return false;
        return arg_c(a.k) < arg_c(b.k);
    });
    return out;
}

// The full pole collection of the expansion denominator, ordered by |k| and
// then phase.  Aux seeds are Newton-refined on the trident and must stay in
// their seed basin; every zero must drive the scale-relative residual
// |D(k)| / (1 + |k D'(k)|) below tol_zero.  If a resonance lands within
// 1e-6 of an aux pole the residue would not be simple, so the regulator is
// nudged up one percent and the whole collection is rebuilt; alpha is a free
// parameter and the expansion does not depend on it.
template <class C>
struct PoleSet {
    using R = real_of<C>;
    std::vector<Pole<C>> poles;
    R alpha{};
    R tol_zero{};
};

template <class M>
PoleSet<typename M::complex_type> all_poles(
    const M& m, typename M::real_type alpha, const typename M::real_type& K_max,
    const typename M::real_type& tol_zero =
        pow(scalar_pack<typename M::complex_type>::eps(), real_of<typename M::complex_type>(0.75))) {
    using C = typename M::complex_type;
    using R = typename M::real_type;
    for (int nudge = 0; nudge < 6; ++nudge, alpha *= R(1.01)) {
        std::vector<Pole<C>> poles;
        for (auto p : aux_pole_seeds<C>(alpha, K_max)) {
            auto [k, ok] = pdetail::refine_trident(p.seed, alpha);
            if (!ok) throw std::runtime_error("trident refinement stalled");
            if (abs_c(k - p.seed) > R(0.15) * abs_c(p.seed))
                throw std::runtime_error("trident refinement left its seed basin");
            auto parts = h_alpha_scaled(k, alpha);
            if (!(abs_c(parts.value) <= tol_zero * (R(1) + abs_c(k * parts.dvalue))))
                throw std::runtime_error("trident zero residual above tolerance");
            if (abs_c(k) > K_max) continue;
            p.k = k;
            p.refined = true;
            p.denom_log_scale = parts.log_scale;
            p.denom_deriv_scaled = parts.dvalue * m.f0(-k);
            p.denom_deriv = C(exp(parts.log_scale)) * p.denom_deriv_scaled;
            poles.push_back(p);
        }
        auto res = find_resonances(m, K_max, alpha);
        for (const auto& p : res) {
            const R scale = R(1) + abs_c(p.k * m.dk_f0(-p.k));
            if (!(abs_c(m.f0(-p.k)) <= tol_zero * scale))
                throw std::runtime_error("resonance zero residual above tolerance");
        }

        R sep = R(1);
        for (const auto& r : res)
            for (const auto& a : poles) {
                const R d = abs_c(r.k - a.k);
                if (d < sep) sep = d;
            }
        if (sep < R(1e-6)) continue;

        poles.insert(poles.end(), res.begin(), res.end());
        std::sort(poles.begin(), poles.end(), [](const Pole<C>& a, const Pole<C>& b) {
            const R ra = abs_c(a.k), rb = abs_c(b.k);
            if (ra < rb) return true;
            if (rb < ra) return false;
            return arg_c(a.k) < arg_c(b.k);
        });
        PoleSet<C> out;
        out.poles = std::move(poles);
        out.alpha = alpha;
        out.tol_zero = tol_zero;
        return out;
    }
    throw std::runtime_error("regulator nudges failed to separate the pole families");
}

namespace pdetail {

// Scaled derivative of the expansion denominator at a pole, with exactly one
// factor vanishing there: D' = e^{log_scale} S.  Throws when the wrong
// factor vanishes or both do (a non-simple pole the collection builder
// should have nudged away).
template <class M>
std::pair<real_of<typename M::complex_type>, typename M::complex_type> denom_deriv_scaled_at(
    const M& m, const Pole<typename M::complex_type>& p) {
    using C = typename M::complex_type;
    using R = typename M::real_type;
    if (!(p.alpha > R(0)))
        throw std::domain_error("pole carries no regulator; build it through the collection");
    auto parts = h_alpha_scaled(p.k, p.alpha);
    const C f0m = m.f0(-p.k);
    const C df0m = m.dk_f0(-p.k);
    const bool h_zero = abs_c(parts.value) <= R(1e-6) * (R(1) + abs_c(p.k * parts.dvalue));
    const bool n_zero = abs_c(f0m) <= R(1e-6) * (R(1) + abs_c(p.k * df0m));
    if (h_zero && n_zero)
        throw std::runtime_error("two denominator factors vanish together; nudge the regulator");
    if (p.kind == PoleKind::resonance) {
        if (!n_zero) throw std::runtime_error("resonance pole without a normalization zero");
        return {parts.log_scale, parts.value * (-df0m)};
    }
    if (!h_zero) throw std::runtime_error("aux pole without a trident zero");
    return {parts.log_scale, parts.dvalue * f0m};
}

// ln bound of |C(k)|.  The regular solution pairs each plane-wave factor
// with the normalization at the opposite wavenumber, so the piece growing
// like e^{|Im k| r} always carries the normalization evaluated in the upper
// half plane, which stays small; the normalization from the lower half
// plane, which can be large, multiplies the decaying piece whose overlap is
// order one.  Taking the larger of the two keeps the bound a true ceiling
// while staying tight enough that every pole it leaves alive also fits the
// overlap's cancellation budget.
template <class M>
real_of<typename M::complex_type> coefficient_log_bound(
    const M& m, const InitialState<typename M::complex_type>& state,
    const typename M::complex_type& k) {
    using C = typename M::complex_type;
    using R = typename M::real_type;
    const R y = fabs(im_c(k));
    const C kup = im_c(k) < R(0) ? C(-k) : k;
    const R grow = sdetail::envelope_peak(state.c2, state.c3, y) +
                   log(R(1) + abs_c(m.f0(kup)));
    const R decay = log(R(1) + abs_c(m.f0(-kup)));
    return (grow > decay ? grow : decay) + R(7);
}

}  // namespace pdetail

// Default discard line: terms certified this many e-folds below unity can
// never move a sum this context resolves, with twenty five decades to spare
// for small-magnitude results.
template <class C>
real_of<C> residue_drop_line() {
    using R = real_of<C>;
    return -(R(scalar_pack<C>::digits10) + R(25)) * log(R(10));
}

// ln bound of the residue magnitude |a(r)| at one pole, from scaled parts
// only: no overlap is priced.  At r = 0 this is the r-independent core
// bound, which also caps every term of the time expansion: there the
// regulator-trio cancellation removes the bare e^{2 Im k r} growth of upper
// half plane residues, so only consumers of bare a(r) values add it.
template <class M>
real_of<typename M::complex_type> residue_log_bound(
    const Pole<typename M::complex_type>& pole, const M& m,
    const InitialState<typename M::complex_type>& state,
    const real_of<typename M::complex_type>& r) {
    using R = typename M::real_type;
    auto [ls, S] = pdetail::denom_deriv_scaled_at(m, pole);
    R b = log(R(1) + abs_c(pole.k)) + pdetail::coefficient_log_bound(m, state, pole.k);
    const R up = im_c(pole.k);
    if (up > R(0)) b += R(2) * up * r;
    return b - ls - log(abs_c(S));
}

// Residue of g at one pole, with the expensive r-independent pieces (the
// overlap coefficient and the inverted denominator derivative) hoisted into
// the closure, so a radial sweep prices two hypergeometric series per node.
// A pole whose residue bound stays below log_floor out to r_horizon is
// returned dead: its overlap is never priced, a(r) is exactly zero there,
// and asking past the horizon throws instead of silently extending the
// screen.  Time-expansion assemblies, whose terms the core bound alone
// caps, screen with r_horizon = 0; consumers of bare a(r) values keep a
// horizon covering their radii.  A live pole's overlap can still exceed
// the context's cancellation budget, in which case the coefficient
// evaluation refuses with the wider-context message rather than returning
// noise.
template <class M>
struct Residue {
    using C = typename M::complex_type;
    using R = typename M::real_type;
    Pole<C> pole;
    SpectralCoefficient<C> coefficient;
    bool dead = false;
    std::function<C(const R&)> a;
    std::function<std::pair<R, C>(const R&)> a_scaled;

    std::vector<C> a_at(const std::vector<R>& grid) const {
        std::vector<C> out;
        out.reserve(grid.size());
        for (const auto& r : grid) out.push_back(a(r));
        return out;
    }
};

template <potential_model M>
Residue<M> make_residue(const Pole<typename M::complex_type>& pole, const M& m,
                        const InitialState<typename M::complex_type>& state,
                        const real_of<typename M::complex_type>& tol =
                            real_of<typename M::complex_type>(1e-11),
                        const real_of<typename M::complex_type>& r_horizon =
                            real_of<typename M::complex_type>(1),
                        const real_of<typename M::complex_type>& log_floor =
                            residue_drop_line<typename M::complex_type>()) {
    using C = typename M::complex_type;
    using R = typename M::real_type;
    sdetail::check_state(state);
    auto [ls, S] = pdetail::denom_deriv_scaled_at(m, pole);
    if (!(abs_c(S) > R(0)))
        throw std::runtime_error("denominator derivative vanished; pole is not simple");

    Residue<M> out;
    out.pole = pole;
    R bound = log(R(1) + abs_c(pole.k)) + pdetail::coefficient_log_bound(m, state, pole.k);
    const R up = im_c(pole.k);
    if (up > R(0)) bound += R(2) * up * r_horizon;
    if (bound - ls - log(abs_c(S)) < log_floor) {
        out.dead = true;
        out.coefficient = {pole.k, C(0), R(0)};
        out.a = [r_horizon](const R& r) -> C {
            if (r > r_horizon)
                throw std::domain_error("residue screened only out to the horizon; rebuild wider");
            return C(0);
        };
        out.a_scaled = [r_horizon](const R& r) -> std::pair<R, C> {
            if (r > r_horizon)
                throw std::domain_error("residue screened only out to the horizon; rebuild wider");
            return {R(0), C(0)};
        };
        return out;
    }

    out.coefficient = coefficient_C(m, state, pole.k, tol);
    const C k = pole.k;
    const C pre = k * out.coefficient.value / S;
    const R neg_ls = -ls;
    const M* mp = &m;
    auto scaled = [mp, k, pre, neg_ls](const R& r) -> std::pair<R, C> {
        const C w = make_c<C>(R(0), R(-2)) * k * C(r);
        C hyp;
        if constexpr (requires { mp->f_reduced(k, r); })
            hyp = mp->f_reduced(-k, r);
        else
            hyp = mp->f(-k, r) * exp_c(make_c<C>(R(0), R(1)) * k * C(r));
        const C phase = exp_c(make_c<C>(R(0), im_c(w)));
        return {re_c(w) + neg_ls, pre * phase * hyp};
    };
    out.a = [scaled](const R& r) -> C {
        auto [sc, v] = scaled(r);
        return C(exp(sc)) * v;
    };
    out.a_scaled = scaled;
    return out;
}

// One-shot residue a_n(r) = k C(k) e^{-ikr} f(-k,r) / D'(k) at the pole.
template <potential_model M>
typename M::complex_type residue_a(const Pole<typename M::complex_type>& pole, const M& m,
                                   const InitialState<typename M::complex_type>& state,
                                   const typename M::real_type& r,
                                   const real_of<typename M::complex_type>& tol =
                                       real_of<typename M::complex_type>(1e-11)) {
    return make_residue(pole, m, state, tol, r).a(r);
}

// Survival residue b_n = i k^2 C(k)^2 / D_s'(k) at a pole of the survival
// integrand k^2 C(k)^2 / (pi f(k,0) f(-k,0) h_alpha(k)); the factor i pi
// against the 1/pi of the integrand leaves i.  The pole set here also
// contains the mirrors of the resonances in the upper half plane, where
// f(k,0) rather than f(-k,0) vanishes, so the vanishing factor is detected
// from the values instead of trusted from the kind tag.
template <potential_model M>
typename M::complex_type residue_b(const Pole<typename M::complex_type>& pole, const M& m,
                                   const InitialState<typename M::complex_type>& state,
                                   const real_of<typename M::complex_type>& tol =
                                       real_of<typename M::complex_type>(1e-11),
                                   const real_of<typename M::complex_type>& log_floor =
                                       residue_drop_line<typename M::complex_type>()) {
    using C = typename M::complex_type;
    using R = typename M::real_type;
    sdetail::check_state(state);
    if (!(pole.alpha > R(0)))
        throw std::domain_error("pole carries no regulator; build it through the collection");
    const C k = pole.k;
    auto parts = h_alpha_scaled(k, pole.alpha);
    const C f0p = m.f0(k), f0m = m.f0(-k);
    const C dp = m.dk_f0(k), dm = m.dk_f0(-k);
    const bool h_zero = abs_c(parts.value) <= R(1e-6) * (R(1) + abs_c(k * parts.dvalue));
    const bool p_zero = abs_c(f0p) <= R(1e-6) * (R(1) + abs_c(k * dp));
    const bool m_zero = abs_c(f0m) <= R(1e-6) * (R(1) + abs_c(k * dm));
    if (int(h_zero) + int(p_zero) + int(m_zero) != 1)
        throw std::runtime_error("survival denominator must have exactly one vanishing factor");
    const R ls = parts.log_scale;
    C S;
    if (h_zero)
        S = parts.dvalue * f0p * f0m;
    else if (m_zero)
        S = parts.value * f0p * (-dm);
    else
        S = parts.value * dp * f0m;
    if (!(abs_c(S) > R(0)))
        throw std::runtime_error("denominator derivative vanished; pole is not simple");

    const R bound = R(2) * log(R(1) + abs_c(k)) +
                    R(2) * pdetail::coefficient_log_bound(m, state, k) - ls - log(abs_c(S));
    if (bound < log_floor) return C(0);

    const C cv = coefficient_C(m, state, k, tol).value;
    return make_c<C>(R(0), R(1)) * k * k * cv * cv / S * C(exp(-ls));
}

namespace pdetail {

// Print 10^l10 in fixed mantissa-exponent form even when the value itself
// would overflow or underflow the native range.
inline void print_pow10(std::ostream& os, double l10) {
    if (l10 != l10) {
        os << "nan";
        return;
    }
    if (l10 < -9000.0) {
        os << "0";
        return;
    }
    double e = std::floor(l10);
    double mant = std::pow(10.0, l10 - e);
    if (mant > 9.9995) {
        mant /= 10.0;
        e += 1.0;
    }
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3fe%+05d", mant, static_cast<int>(e));
    os << buf;
}

}  // namespace pdetail

// Pole table export: kind, location, the refinement residual of the full
// denominator, and the expansion residue at a reference radius.  Values are
// printed through double; the table is a report, not an archive of the wide
// contexts.
template <potential_model M>
void pole_table_csv(std::ostream& os, const PoleSet<typename M::complex_type>& set, const M& m,
                    const InitialState<typename M::complex_type>& state,
                    const typename M::real_type& r_ref,
                    const real_of<typename M::complex_type>& tol =
                        real_of<typename M::complex_type>(1e-11)) {
    using C = typename M::complex_type;
    using R = typename M::real_type;
    os << "kind,re_k,im_k,abs_denominator,re_a,im_a\n";
    char buf[160];
    for (const auto& p : set.poles) {
        auto parts = h_alpha_scaled(p.k, set.alpha);
        const R resid = abs_c(parts.value * m.f0(-p.k));
        double l10 = -1e9;
        if (resid > R(0))
            l10 = static_cast<double>((parts.log_scale + log(resid)) / log(R(10)));
        const C a = residue_a(p, m, state, r_ref, tol);
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,", pole_kind_name(p.kind),
                      static_cast<double>(re_c(p.k)), static_cast<double>(im_c(p.k)));
        os << buf;
        pdetail::print_pow10(os, l10);
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", static_cast<double>(re_c(a)),
                      static_cast<double>(im_c(a)));
        os << buf;
    }
}

}  // namespace qdecay
