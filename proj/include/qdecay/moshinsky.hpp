#pragma once

// The decay kernel
//
//     M(k, r, beta) = (1/(i pi)) \int e^{i p r - beta p^2} / (p - k) dp
//
// over the real line, the building block every pole of the spectral sum
// contributes through.  Closed form for Im k != 0:
//
//     M = e^{i k r - beta k^2} [ sgn(Im k) + erf(zeta) ],
//     zeta = (r + 2 i k beta) / (2 sqrt(beta)),  principal square root.
//
// Evaluated naively the two factors overflow and cancel; everything here goes
// through the split representation
//
//     M = (sigma + s) e^{i k r - beta k^2}  -  s e^{-r^2/(4 beta)} erfcx(s zeta)
//
// with s = +-1 chosen so Re(s zeta) >= 0.  The erfcx factor is then bounded by
// 1.3, the damping factor by 1 (Re beta >= 0), and the integer coefficient
// sigma + s vanishes exactly in every parameter region where the pure
// exponential would outgrow the integral itself.  Mode sums cancel the
// exponential pieces across kernel triples symbolically; they take the split
// form, not the assembled value.

#include <sstream>
#include <stdexcept>
#include <vector>

#include "quadrature.hpp"
#include "scalar.hpp"
#include "specfun.hpp"

namespace qdecay {

template <class C>
struct MoshArgs {
    C k;
    real_of<C> r;
    C beta;
};

namespace mdetail {

template <class C>
void check_mosh_domain(const MoshArgs<C>& a) {
    using R = real_of<C>;
    if (!(a.r >= R(0))) throw std::domain_error("mosh: r must be nonnegative");
    if (re_c(a.beta) < R(0)) throw std::domain_error("mosh: Re beta must be nonnegative");
    if (abs_c(a.beta) == R(0)) throw std::domain_error("mosh: beta must be nonzero");
}

template <class C>
int half_plane(const C& k) {
    using R = real_of<C>;
    if (im_c(k) == R(0))
        throw std::domain_error("mosh: k on the real axis pinches the contour");
    return im_c(k) > R(0) ? 1 : -1;
}

}  // namespace mdetail

// value = unit * expo.value() + bounded, with |bounded| <= 1.3 always and
// unit a small integer that is exactly zero whenever expo is the growing
// branch.  Summation layers cancel the expo parts before materializing.
template <class C>
struct MoshSplit {
    int unit = 0;
    LogC<C> expo;
    C bounded{};

    C value() const {
        using R = real_of<C>;
        if (unit == 0) return bounded;
        return R(unit) * expo.value() + bounded;
    }
};

// Split form of e^{i k r - beta k^2} erf(zeta): the odd part of the kernel in
// sgn(Im k), well defined for real k too, where it equals the principal-value
// integral.  unit carries s alone.
template <class C>
MoshSplit<C> mosh_split_erf(const MoshArgs<C>& a) {
    using R = real_of<C>;
    mdetail::check_mosh_domain(a);
    const C ik = make_c<C>(R(0), R(1)) * a.k;
    const C sb = sqrt_c(a.beta);
    const C zeta = (C(a.r) + R(2) * ik * a.beta) / (R(2) * sb);
    const int s = re_c(zeta) >= R(0) ? 1 : -1;
    const C damp = exp_c(-C(a.r) * C(a.r) / (R(4) * a.beta));

    MoshSplit<C> out;
    out.unit = s;
    out.expo = LogC<C>::from_log(ik * C(a.r) - a.beta * a.k * a.k);
    out.bounded = -R(s) * damp * erfcx(s == 1 ? zeta : C(-zeta));
    return out;
}

template <class C>
MoshSplit<C> mosh_split(const MoshArgs<C>& a) {
    MoshSplit<C> out = mosh_split_erf(a);
    out.unit += mdetail::half_plane(a.k);
    return out;
}

template <class C>
C mosh(const MoshArgs<C>& a) {
    return mosh_split(a).value();
}

template <class C>
struct MoshQuad {
    C value;
    real_of<C> abs_err;
};

// Direct evaluation of the defining integral.  Needs strict Gaussian damping
// on the contour, so Re beta > 0; the boundary case is reached by a small
// positive regulator and extrapolation on the caller's side.  The tail is cut
// where |e^{-beta p^2}| drops below 1e-20 and the seed panels resolve the
// local phase r - 2 Im(beta) p, leaving the adaptive pass only polishing work.
template <class C>
MoshQuad<C> mosh_quadrature(const MoshArgs<C>& a, real_of<C> tol = real_of<C>(1e-11)) {
    using R = real_of<C>;
    mdetail::check_mosh_domain(a);
    mdetail::half_plane(a.k);
    if (!(re_c(a.beta) > R(0)))
        throw std::domain_error("mosh_quadrature: Re beta must be strictly positive");

    const R ln_cut = R(46.0517018598809137);  // log(1e20)
    const R P0 = sqrt(ln_cut / re_c(a.beta));
    const R P = P0 + fabs(re_c(a.k)) + R(1);

    std::vector<R> pts;
    const R freq = a.r + 2 * fabs(im_c(a.beta)) * P;
    std::size_t n = std::size_t(to_dbl<C>(P * freq) / 9.0) + 8;
    if (n > 20000) n = 20000;
    for (std::size_t i = 0; i <= n; ++i) pts.push_back(-P + (2 * P) * R(i) / R(n));
    // make sure the pole vicinity has its own panel boundaries
    const R kx = re_c(a.k), ky = fabs(im_c(a.k));
    for (R extra : {kx - 4 * ky, kx, kx + 4 * ky})
        if (extra > -P && extra < P) pts.push_back(extra);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    const C ipi_inv = C(1) / (make_c<C>(R(0), R(1)) * pi_v<R>());
    auto integrand = [&](R p) -> C {
        C phase = exp_c(make_c<C>(R(0), R(1)) * C(p) * C(a.r) - a.beta * C(p) * C(p));
        return ipi_inv * phase / (C(p) - a.k);
    };
    auto out = adaptive_integrate(integrand, pts, tol, std::size_t(60000));
    if (!out.converged) {
        std::ostringstream msg;
        msg << "mosh_quadrature: tolerance not reached, achieved "
            << to_dbl<C>(out.abs_err);
        throw std::runtime_error(msg.str());
    }
    return MoshQuad<C>{out.value, out.abs_err};
}

// Sector rule for the reflection index nu used by the late-time expansion:
// -1 on ph(k) in [-pi/4, 3pi/4), +1 elsewhere.  Half-open by convention so a
// boundary ray gets a deterministic value.
template <class C>
int nu_sector(const C& k) {
    using R = real_of<C>;
    const R ph = arg_c(k);
    const R quarter = pi_v<R>() / 4;
    return (ph >= -quarter && ph < 3 * quarter) ? -1 : 1;
}

// The pure exponential summand of the late-time form, kept separate so sums
// over kernel triples can cancel it exactly before anything is materialized.
template <class C>
C mosh_asymptotic_first(const MoshArgs<C>& a, int nu) {
    using R = real_of<C>;
    mdetail::check_mosh_domain(a);
    const int sg = mdetail::half_plane(a.k);
    if (sg + nu == 0) return C(0);
    const C ik = make_c<C>(R(0), R(1)) * a.k;
    LogC<C> e = LogC<C>::from_log(ik * C(a.r) - a.beta * a.k * a.k);
    return R(sg + nu) * e.value();
}

// Two-term large-|beta| form: the exponential summand above plus the leading
// algebraic descent
//
//     - sqrt(beta) e^{-r^2/(4 beta)} / (sqrt(pi) X) * (1 - beta / (2 X^2)),
//     X = r/2 + i k beta,
//
// which carries the t^{-3/2} physics once the caller sums over poles.
template <class C>
C mosh_asymptotic(const MoshArgs<C>& a, int nu) {
    using R = real_of<C>;
    const C first = mosh_asymptotic_first(a, nu);
    const C ik = make_c<C>(R(0), R(1)) * a.k;
    const C X = C(a.r) / R(2) + ik * a.beta;
    const C damp = exp_c(-C(a.r) * C(a.r) / (R(4) * a.beta));
    const C second =
        -sqrt_c(a.beta) * damp / (sqrt(pi_v<R>()) * X) * (C(1) - a.beta / (R(2) * X * X));
    return first + second;
}

}  // namespace qdecay
