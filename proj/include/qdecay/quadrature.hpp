#pragma once

// Finite-interval quadrature in two flavours.
//
// adaptive_integrate: nested 7/15 Gauss pair with worst-panel-first bisection.
// Nodes are generated at the working precision by Newton iteration on the
// Legendre recurrence and cached, so the same code path serves double and the
// software floats without stored decimal literals.
//
// tanh_sinh: level-doubled double-exponential rule for analytic integrands
// when many digits are wanted from few evaluations.  Both return the achieved
// absolute-error estimate; callers decide whether that is good enough.

#include <cstddef>
#include <limits>
#include <map>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

#include "scalar.hpp"

namespace qdecay {

template <class T>
concept complex_scalar = requires { typename scalar_pack<T>::real; };

template <class T>
auto abs_any(const T& v) {
    if constexpr (complex_scalar<T>) {
        return abs_c(v);
    } else {
        return fabs(v);
    }
}

template <class R>
struct GaussRule {
    std::vector<R> x, w;  // nodes and weights on [-1,1]
};

template <class R>
const GaussRule<R>& gauss_rule(int n) {
    static std::map<int, GaussRule<R>> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GaussRule<R> rule;
    rule.x.resize(n);
    rule.w.resize(n);
    const R one(1), two(2);
    for (int i = 0; i < n; ++i) {
        R xi = cos(pi_v<R>() * (R(i) + R(0.75)) / (R(n) + R(0.5)));
        R dp(1);
        for (int iter = 0; iter < 120; ++iter) {
            R p0(1), p1 = xi;
            for (int j = 2; j <= n; ++j) {
                R pj = ((2 * R(j) - 1) * xi * p1 - (R(j) - 1) * p0) / R(j);
                p0 = p1;
                p1 = pj;
            }
            dp = R(n) * (xi * p1 - p0) / (xi * xi - one);
            R step = p1 / dp;
            xi -= step;
            if (fabs(step) <= std::numeric_limits<R>::epsilon() * 4 && iter > 1) break;
        }
        rule.x[i] = xi;
        rule.w[i] = two / ((one - xi * xi) * dp * dp);
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

template <class V, class R>
struct QuadOutcome {
    V value{};
    R abs_err{};
    std::size_t panels = 0;
    bool converged = false;
};

namespace qdetail {

// one panel: value from the 15-point rule, error from the 7-point difference
template <class R, class F>
auto gauss_pair_panel(F&& f, R a, R b) {
    const auto& lo = gauss_rule<R>(7);
    const auto& hi = gauss_rule<R>(15);
    const R mid = (a + b) / 2, half = (b - a) / 2;
    using V = decltype(f(a));
    V coarse{}, fine{};
    for (int i = 0; i < 7; ++i) coarse += V(lo.w[i] * half) * f(mid + half * lo.x[i]);
    for (int i = 0; i < 15; ++i) fine += V(hi.w[i] * half) * f(mid + half * hi.x[i]);
    return std::pair<V, R>(fine, abs_any(fine - coarse));
}

}  // namespace qdetail

// Adaptive bisection over an initial panel list given as increasing points.
// Oscillatory integrands should pre-split near their phase scale; the heap
// then only polishes.  The integrand may return real or complex values.
template <class R, class F>
auto adaptive_integrate(F&& f, const std::vector<R>& points, R abs_tol,
                        std::size_t max_panels = 4000) {
    if (points.size() < 2) throw std::domain_error("adaptive_integrate: need an interval");
    for (std::size_t i = 1; i < points.size(); ++i)
        if (!(points[i] > points[i - 1]))
            throw std::domain_error("adaptive_integrate: points must increase");

    using V = decltype(f(points[0]));
    struct Panel {
        R a, b, err;
        V val;
    };
    auto lighter = [](const Panel& p, const Panel& q) { return p.err < q.err; };
    std::priority_queue<Panel, std::vector<Panel>, decltype(lighter)> heap(lighter);

    R total_err(0);
    V total{};
    std::size_t count = 0;
    auto push = [&](R a, R b) {
        auto [v, e] = qdetail::gauss_pair_panel<R>(f, a, b);
        total += v;
        total_err += e;
        heap.push(Panel{a, b, e, v});
        ++count;
    };
    for (std::size_t i = 1; i < points.size(); ++i) push(points[i - 1], points[i]);

    while (total_err > abs_tol && count < max_panels && !heap.empty()) {
        Panel p = heap.top();
        heap.pop();
        if (!(p.err > R(0))) break;
        R mid = (p.a + p.b) / 2;
        if (!(mid > p.a && mid < p.b)) break;  // interval exhausted at this precision
        total -= p.val;
        total_err -= p.err;
        push(p.a, mid);
        push(mid, p.b);
    }

    QuadOutcome<V, R> out;
    out.value = total;
    out.abs_err = total_err;
    out.panels = count;
    out.converged = !(total_err > abs_tol);
    return out;
}

template <class R, class F>
auto adaptive_integrate(F&& f, R a, R b, R abs_tol, std::size_t max_panels = 4000) {
    return adaptive_integrate(std::forward<F>(f), std::vector<R>{a, b}, abs_tol, max_panels);
}

// Double-exponential rule on [a,b], doubling the node density per level.
// Digits roughly double per level for integrands analytic on the interval,
// so 50-digit results arrive near level 8.  The trailing node cut at
// |t| = 6.5 keeps transformed weights above 1e-450, enough for every
// supported precision.
template <class R, class F>
auto tanh_sinh(F&& f, R a, R b, R tol, int max_level = 10) {
    using std::cosh;
    using std::sinh;
    using V = decltype(f(a));

    const R half_pi = pi_v<R>() / 2;
    const R mid = (a + b) / 2, sc = (b - a) / 2;
    const R t_cut(6.1);
    const R rel_cut = std::numeric_limits<R>::epsilon() * std::numeric_limits<R>::epsilon();

    // Nodes are placed by their distance to the endpoints, never by tanh
    // itself: tanh saturates to 1 at working precision long before the weight
    // dies, which would put a node exactly onto a possibly singular endpoint.
    auto node_term = [&](R t) -> V {
        R u = half_pi * sinh(t);
        R em = exp(-2 * u);
        R d = 2 * em / (1 + em);                          // 1 - tanh(u)
        R wk = half_pi * cosh(t) * 2 * d / (1 + em);      // half_pi cosh(t)/cosh^2(u)
        return V(wk * sc) * (f(b - sc * d) + f(a + sc * d));
    };

    R h(1);
    V sum = V(half_pi * sc) * f(mid);
    for (int k = 1; R(k) * h <= t_cut; ++k) {
        V term = node_term(R(k) * h);
        sum += term;
        if (abs_any(term) <= rel_cut * abs_any(sum) && k > 4) break;
    }

    QuadOutcome<V, R> out;
    out.value = sum * V(h);
    for (int level = 1; level <= max_level; ++level) {
        h /= 2;
        V prev_est = sum * V(2 * h);
        V add{};
        for (int k = 1; R(k) * h <= t_cut; k += 2) {
            V term = node_term(R(k) * h);
            add += term;
            if (abs_any(term) <= rel_cut * (abs_any(sum) + abs_any(add)) && k > 8) break;
        }
        sum += add;
        V est = sum * V(h);
        out.value = est;
        out.abs_err = abs_any(est - prev_est);
        out.panels = std::size_t(level);
        if (level >= 4 && out.abs_err <= tol * (R(1) + abs_any(est))) {
            out.converged = true;
            return out;
        }
    }
    return out;
}

}  // namespace qdecay
