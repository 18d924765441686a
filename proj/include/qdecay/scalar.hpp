#pragma once

// Arithmetic contexts used throughout the library.
//
// All spectral quantities are computed in a complex scalar type C chosen at
// compile time per instantiation and selected at runtime by requested digit
// count: std::complex<double> for up to 17 digits, a 50-digit software float
// beyond that.  Generic code pulls the matching real type and constants from
// scalar_pack<C> and calls the *_c elementary functions below, which keeps
// every transcendental on one audited code path for both backends.
//
// LogC<C> carries a value as its complex logarithm so products with exponents
// of order 10^4 (pole suppression factors against Gaussian growth of the
// spectral coefficient) never leave the representable range.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <type_traits>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

namespace qdecay {

// make the double overloads visible to unqualified calls in templates below;
// multiprecision overloads arrive via argument-dependent lookup
using std::acos;
using std::atan2;
using std::cos;
using std::exp;
using std::fabs;
using std::hypot;
using std::log;
using std::pow;
using std::sin;
using std::sqrt;

using mp50  = boost::multiprecision::cpp_bin_float_50;
using mpc50 = boost::multiprecision::cpp_complex_50;

// 100-digit tier, used internally only for the worst hypergeometric
// cancellations; never exposed through the CLI.
using mp100  = boost::multiprecision::cpp_bin_float_100;
using mpc100 = boost::multiprecision::cpp_complex_100;

template <class C>
struct scalar_pack;

template <>
struct scalar_pack<std::complex<double>> {
    using real = double;
    using cplx = std::complex<double>;
    static constexpr int digits10 = 16;
    static real eps() { return std::numeric_limits<double>::epsilon(); }
    // log of the largest usable magnitude, with headroom for products
    static real log_huge() { return 690.0; }
};

template <>
struct scalar_pack<mpc50> {
    using real = mp50;
    using cplx = mpc50;
    static constexpr int digits10 = 50;
    static real eps() { return std::numeric_limits<mp50>::epsilon(); }
    static real log_huge() { return real(1e8); }
};

template <>
struct scalar_pack<mpc100> {
    using real = mp100;
    using cplx = mpc100;
    static constexpr int digits10 = 100;
    static real eps() { return std::numeric_limits<mp100>::epsilon(); }
    static real log_huge() { return real(1e8); }
};

template <class C>
using real_of = typename scalar_pack<C>::real;

template <class R>
R pi_v() {
    static const R v = acos(R(-1));
    return v;
}
template <>
inline double pi_v<double>() {
    return 3.141592653589793238462643383279502884;
}

template <class C>
C make_c(real_of<C> re, real_of<C> im) {
    return C(re, im);
}

// elementary complex functions, one implementation per backend

inline double re_c(const std::complex<double>& z) { return z.real(); }
inline double im_c(const std::complex<double>& z) { return z.imag(); }
inline std::complex<double> conj_c(const std::complex<double>& z) { return std::conj(z); }
inline double abs_c(const std::complex<double>& z) { return std::abs(z); }
inline double arg_c(const std::complex<double>& z) { return std::arg(z); }
inline std::complex<double> exp_c(const std::complex<double>& z) { return std::exp(z); }
inline std::complex<double> log_c(const std::complex<double>& z) { return std::log(z); }
inline std::complex<double> sqrt_c(const std::complex<double>& z) { return std::sqrt(z); }

template <class MC, class = typename MC::backend_type>
real_of<MC> re_c(const MC& z) { return z.real(); }
template <class MC, class = typename MC::backend_type>
real_of<MC> im_c(const MC& z) { return z.imag(); }
template <class MC, class = typename MC::backend_type>
MC conj_c(const MC& z) { return MC(z.real(), -z.imag()); }
template <class MC, class = typename MC::backend_type>
real_of<MC> abs_c(const MC& z) { return hypot(z.real(), z.imag()); }
template <class MC, class = typename MC::backend_type>
real_of<MC> arg_c(const MC& z) { return atan2(z.imag(), z.real()); }
template <class MC, class = typename MC::backend_type>
MC exp_c(const MC& z) {
    real_of<MC> m = exp(z.real());
    return MC(m * cos(z.imag()), m * sin(z.imag()));
}
template <class MC, class = typename MC::backend_type>
MC log_c(const MC& z) {
    return MC(log(abs_c(z)), arg_c(z));
}
template <class MC, class = typename MC::backend_type>
MC sqrt_c(const MC& z) {
    // principal branch via half-angle, stable for all quadrants
    real_of<MC> m = sqrt(abs_c(z));
    real_of<MC> a = arg_c(z) / 2;
    return MC(m * cos(a), m * sin(a));
}

inline bool finite_c(const std::complex<double>& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}
template <class MC, class = typename MC::backend_type>
bool finite_c(const MC& z) {
    using R = real_of<MC>;
    static const R huge("1e100000");
    R x = z.real(), y = z.imag();
    return x == x && y == y && fabs(x) < huge && fabs(y) < huge;
}

// log(1+w), principal branch, accurate for small |w|
template <class C>
C log1p_c(const C& w) {
    using R = real_of<C>;
    if (abs_c(w) < R(0.5)) {
        // alternating series, converges geometrically
        C term = w, sum = w;
        for (int m = 2; m < 80; ++m) {
            term *= -w;
            C add = term / R(m);
            sum += add;
            if (abs_c(add) <= scalar_pack<C>::eps() * abs_c(sum)) break;
        }
        return sum;
    }
    return log_c(C(1, 0) + w);
}

// A complex value stored as its logarithm.  Multiplication is exact in the
// exponent; addition goes through log1p and is accurate to the usual
// cancellation limit of the summands.
template <class C>
struct LogC {
    using R = real_of<C>;
    C lg{};
    bool zero = true;

    LogC() = default;
    static LogC from_log(const C& l) {
        LogC v;
        v.lg = l;
        v.zero = false;
        return v;
    }
    static LogC from_value(const C& x) {
        LogC v;
        if (abs_c(x) == R(0)) return v;
        v.lg = log_c(x);
        v.zero = false;
        return v;
    }
    R log_abs() const {
        return zero ? -scalar_pack<C>::log_huge() * R(4) : re_c(lg);
    }
    C value() const { return zero ? C(0) : exp_c(lg); }

    LogC operator*(const LogC& o) const {
        if (zero || o.zero) return LogC();
        return from_log(lg + o.lg);
    }
    LogC operator/(const LogC& o) const {
        if (zero) return LogC();
        return from_log(lg - o.lg);
    }
    LogC neg() const {
        if (zero) return *this;
        return from_log(lg + C(0, pi_v<R>()));
    }
    LogC operator+(const LogC& o) const {
        if (zero) return o;
        if (o.zero) return *this;
        const LogC *big = this, *small = &o;
        if (o.log_abs() > log_abs()) std::swap(big, small);
        C w = exp_c(small->lg - big->lg);
        C one_plus = log1p_c(w);
        if (!finite_c(one_plus)) return LogC();  // exact cancellation
        return from_log(big->lg + one_plus);
    }
};

// Neumaier-compensated accumulation of plain complex values.
template <class C>
struct CompSum {
    C s{}, c{};
    void add(const C& x) {
        C t = s + x;
        // componentwise compensation; complex add is componentwise
        using R = real_of<C>;
        R cr = (fabs(re_c(s)) >= fabs(re_c(x))) ? (re_c(s) - re_c(t)) + re_c(x)
                                                : (re_c(x) - re_c(t)) + re_c(s);
        R ci = (fabs(im_c(s)) >= fabs(im_c(x))) ? (im_c(s) - im_c(t)) + im_c(x)
                                                : (im_c(x) - im_c(t)) + im_c(s);
        c += C(cr, ci);
        s = t;
    }
    C total() const { return s + c; }
};

// Deterministic sum: sort by descending magnitude, then compensate.
template <class C>
C ordered_sum(std::vector<C> terms) {
    std::stable_sort(terms.begin(), terms.end(),
                     [](const C& a, const C& b) { return abs_c(a) > abs_c(b); });
    CompSum<C> acc;
    for (const C& t : terms) acc.add(t);
    return acc.total();
}

template <class C>
double to_dbl(const real_of<C>& x) {
    return static_cast<double>(x);
}

}  // namespace qdecay
