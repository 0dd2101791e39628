#include "kyle/poly_ext.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kyle {

std::string to_string(PolyFit f) { return f == PolyFit::Exact ? "exact" : "gradient"; }

PolyFit parse_poly_fit(const std::string& s) {
    if (s == "exact") return PolyFit::Exact;
    if (s == "gradient") return PolyFit::Gradient;
    throw std::invalid_argument("unknown polynomial fit method '" + s + "'");
}

void PolyConfig::validate() const {
    if (n < 2) throw std::invalid_argument("poly: n must be at least 2");
    if (m < 2) throw std::invalid_argument("poly: m must be at least 2");
    if (!(tol > 0.0)) throw std::invalid_argument("poly: tol must be positive");
    if (max_iter == 0) throw std::invalid_argument("poly: max_iter must be positive");
    if (grid_points < 3) throw std::invalid_argument("poly: grid_points must be at least 3");
}

double poly_loss(const PolyPriceRule& rule, const PolySamples& s, double gamma) {
    const std::size_t n = s.flow.size();
    std::vector<double> sq(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double e = rule.evaluate(s.flow[i]) - s.v[i];
        sq[i] = e * e;
        ab[i] = std::abs(s.flow[i]);
    }
    const double dn = static_cast<double>(n);
    return ordered_sum(sq) / dn - gamma * rule.theta * ordered_sum(ab) / dn;
}

namespace {

using Matrix = std::vector<std::vector<double>>;

// Solves M w = b in place by Gaussian elimination with partial pivoting.
bool solve_linear(Matrix m, std::vector<double> b, std::vector<double>& w) {
    const std::size_t d = b.size();
    for (std::size_t c = 0; c < d; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < d; ++r)
            if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
        if (std::abs(m[piv][c]) < 1e-12) return false;
        std::swap(m[c], m[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < d; ++r) {
            const double f = m[r][c] / m[c][c];
            for (std::size_t k = c; k < d; ++k) m[r][k] -= f * m[c][k];
            b[r] -= f * b[c];
        }
    }
    w.assign(d, 0.0);
    for (std::size_t c = d; c-- > 0;) {
        double s = b[c];
        for (std::size_t k = c + 1; k < d; ++k) s -= m[c][k] * w[k];
        w[c] = s / m[c][c];
    }
    return true;
}

double quad_form(const Matrix& a, const std::vector<double>& r, const std::vector<double>& w) {
    double q = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        q -= 2.0 * r[i] * w[i];
        for (std::size_t j = 0; j < w.size(); ++j) q += w[i] * a[i][j] * w[j];
    }
    return q;
}

// min wᵀAw - 2rᵀw over w >= 0: the minimizer is the unconstrained minimizer
// on some face, so the cheapest feasible face solution is optimal.
std::vector<double> nonneg_quadratic_exact(const Matrix& a, const std::vector<double>& r) {
    const std::size_t d = r.size();
    std::vector<double> best(d, 0.0);
    double best_q = 0.0;
    for (std::size_t mask = 1; mask < (std::size_t{1} << d); ++mask) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < d; ++i)
            if (mask >> i & 1U) idx.push_back(i);
        Matrix sub(idx.size(), std::vector<double>(idx.size()));
        std::vector<double> rs(idx.size()), ws;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            rs[i] = r[idx[i]];
            for (std::size_t j = 0; j < idx.size(); ++j) sub[i][j] = a[idx[i]][idx[j]];
        }
        if (!solve_linear(sub, rs, ws)) continue;
        if (std::any_of(ws.begin(), ws.end(), [](double x) { return x < 0.0; })) continue;
        std::vector<double> w(d, 0.0);
        for (std::size_t i = 0; i < idx.size(); ++i) w[idx[i]] = ws[i];
        const double q = quad_form(a, r, w);
        if (q < best_q) {
            best_q = q;
            best = w;
        }
    }
    return best;
}

std::vector<double> nonneg_quadratic_gradient(const Matrix& a, const std::vector<double>& r,
                                              std::size_t epochs, double lr) {
    const std::size_t d = r.size();
    if (!(lr > 0.0)) {
        double tr = 0.0;
        for (std::size_t i = 0; i < d; ++i) tr += a[i][i];
        lr = 1.0 / (2.0 * tr);
    }
    std::vector<double> w(d, 0.0), g(d);
    for (std::size_t e = 0; e < epochs; ++e) {
        double step = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            g[i] = -2.0 * r[i];
            for (std::size_t j = 0; j < d; ++j) g[i] += 2.0 * a[i][j] * w[j];
        }
        for (std::size_t i = 0; i < d; ++i) {
            const double nw = std::max(0.0, w[i] - lr * g[i]);
            step = std::max(step, std::abs(nw - w[i]));
            w[i] = nw;
        }
        if (step < 1e-15) break;
    }
    return w;
}

}  // namespace

PolyFitResult fit_poly_rule(const PolySamples& s, int degree, double gamma, PolyFit method,
                            std::size_t epochs, double lr) {
    if (degree < 1 || degree > 7 || degree % 2 == 0)
        throw std::invalid_argument("poly fit: degree must be 1, 3, 5 or 7");
    if (s.flow.size() != s.v.size() || s.flow.size() < 2)
        throw std::invalid_argument("poly fit: need matching flow and v samples");
    const std::size_t k = static_cast<std::size_t>(degree + 1) / 2;
    const std::size_t d = k + 1;  // odd powers, then sign
    const std::size_t n = s.flow.size();
    const double dn = static_cast<double>(n);

    std::vector<std::vector<double>> feat(d, std::vector<double>(n));
    std::vector<double> z(n), ab(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double f = s.flow[j];
        const double f2 = f * f;
        double p = f;
        for (std::size_t i = 0; i < k; ++i, p *= f2) feat[i][j] = p;
        feat[k][j] = sign0(f);
        z[j] = s.v[j] - s.p0;
        ab[j] = std::abs(f);
    }
    std::vector<double> mean(d), tmp(n);
    for (std::size_t i = 0; i < d; ++i) mean[i] = ordered_sum(feat[i]) / dn;
    const double mz = ordered_sum(z) / dn;
    const double mabs = ordered_sum(ab) / dn;

    Matrix a(d, std::vector<double>(d));
    std::vector<double> r(d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) {
            for (std::size_t t = 0; t < n; ++t) tmp[t] = feat[i][t] * feat[j][t];
            a[i][j] = a[j][i] = ordered_sum(tmp) / dn - mean[i] * mean[j];
        }
        for (std::size_t t = 0; t < n; ++t) tmp[t] = feat[i][t] * z[t];
        r[i] = ordered_sum(tmp) / dn - mean[i] * mz;
    }
    r[k] += 0.5 * gamma * mabs;

    // Standardize so the enumeration's pivots and the step size are well scaled.
    std::vector<double> sc(d);
    for (std::size_t i = 0; i < d; ++i) sc[i] = a[i][i] > 0.0 ? std::sqrt(a[i][i]) : 1.0;
    Matrix as = a;
    std::vector<double> rs = r;
    for (std::size_t i = 0; i < d; ++i) {
        rs[i] /= sc[i];
        for (std::size_t j = 0; j < d; ++j) as[i][j] /= sc[i] * sc[j];
    }
    std::vector<double> w = method == PolyFit::Exact ? nonneg_quadratic_exact(as, rs)
                                                     : nonneg_quadratic_gradient(as, rs, epochs, lr);
    for (std::size_t i = 0; i < d; ++i) w[i] /= sc[i];

    PolyFitResult out;
    out.odd_coeffs.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(k));
    out.theta = w[k];
    out.intercept = mz;
    for (std::size_t i = 0; i < d; ++i) out.intercept -= w[i] * mean[i];
    PolyPriceRule rule{out.odd_coeffs, out.theta, s.p0 + out.intercept};
    out.loss = poly_loss(rule, s, gamma);
    return out;
}

PolyFitReport solve_poly_equilibrium(const ModelParams& params, int degree, const PolyConfig& cfg,
                                     std::optional<PolyPriceRule> init) {
    params.validate();
    cfg.validate();
    if (degree < 1 || degree > 7 || degree % 2 == 0)
        throw std::invalid_argument("poly: degree must be 1, 3, 5 or 7");
    const std::size_t k = static_cast<std::size_t>(degree + 1) / 2;
    const double p0 = params.price.p0;

    PolyPriceRule rule;
    if (init) {
        rule = *init;
        rule.odd_coeffs.resize(k, 0.0);
    } else {
        rule.odd_coeffs.assign(k, 0.0);
        rule.odd_coeffs[0] = params.price.sigma_v / (2.0 * params.noise.std_dev());
        rule.theta = 0.1 * params.price.sigma_v;
        rule.p0 = p0;
    }
    rule.validate();

    PolySamples s;
    s.p0 = p0;
    s.v = sample_stratified(params.price, cfg.n, cfg.seed);
    const std::vector<double> u = sample(params.noise, cfg.n, stream_seed(cfg.seed, 3));
    // The insider's noise average reuses the head of the fit's noise stream.
    std::vector<double> draws(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(std::min(cfg.n, (cfg.m + 1) / 2)));
    const std::size_t half = draws.size();
    for (std::size_t i = 0; i < half; ++i) draws.push_back(-draws[i]);

    PolyFitReport rep;
    auto snapshot = [&](const PolyPriceRule& r) {
        std::vector<double> c = r.odd_coeffs;
        c.push_back(r.theta);
        return c;
    };
    rep.coeff_trajectory.push_back(snapshot(rule));
    std::vector<double> x(cfg.n);
    s.flow.resize(cfg.n);

    for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
        const double zmax = std::max(std::abs(s.v.front() - rule.p0), std::abs(s.v.back() - rule.p0));
        const NumericResponder responder(rule, draws, zmax, cfg.grid_points);
        if (best_response_batch(responder, s.v, x).unbounded > 0) {
            rep.termination = Termination::UnboundedResponse;
            break;
        }
        for (std::size_t j = 0; j < cfg.n; ++j) s.flow[j] = x[j] + u[j];
        rep.loss_before.push_back(poly_loss(rule, s, params.gamma));
        const PolyFitResult fit = fit_poly_rule(s, degree, params.gamma, cfg.fit, cfg.epochs, cfg.lr);
        rep.loss_after.push_back(fit.loss);

        PolyPriceRule next{fit.odd_coeffs, fit.theta, p0 + fit.intercept};
        double delta = std::abs(next.theta - rule.theta);
        delta = std::max(delta, std::abs(next.p0 - rule.p0));
        for (std::size_t i = 0; i < k; ++i)
            delta = std::max(delta, std::abs(next.odd_coeffs[i] - rule.odd_coeffs[i]));
        rule = next;
        rep.coeff_trajectory.push_back(snapshot(rule));
        rep.iterations = it;
        if (delta < cfg.tol) {
            rep.converged = true;
            rep.termination = Termination::Converged;
            break;
        }
    }
    rep.final_rule = rule;
    rep.collapsed = true;
    for (std::size_t i = 1; i < k; ++i) rep.collapsed = rep.collapsed && rule.odd_coeffs[i] < cfg.collapse_eps;
    return rep;
}

}  // namespace kyle
