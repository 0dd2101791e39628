#include <cmath>
#include <numbers>

#include <doctest.h>

#include "kyle/moments.hpp"
#include "oracle.hpp"

using namespace kyle;

TEST_CASE("linear strategy moments match the Gaussian closed form") {
    // λ = 1/2, θ = 0: x = v, so f = v + u ~ N(0, 2).
    ModelParams p;
    const auto m = moments_mc(PriceRule{0.5, 0.0, 0.0, 0.0}, p, MomentOptions{200000, 3, true});
    const double sp = std::sqrt(std::numbers::pi);
    CHECK(std::abs(m.l1 - 2.0 / sp) < 4 * m.std_errors[0] + 1e-12);
    CHECK(std::abs(m.l2 - 2.0) < 4 * m.std_errors[1] + 1e-12);
    CHECK(std::abs(m.mu - 1.0) < 4 * m.std_errors[2] + 1e-12);
    CHECK(std::abs(m.kappa - 1.0 / sp) < 4 * m.std_errors[3] + 1e-12);
    CHECK(m.n == 200000);
    CHECK(m.unbounded == 0);
}

TEST_CASE("sampled and conditional flow estimators agree") {
    ModelParams p;
    p.noise = NoiseLaw::uniform(1.0);
    const PriceRule r{0.4, 0.3, 0.0, 0.0};
    const auto a = moments_mc(r, p, MomentOptions{100000, 5, false, FlowEstimator::Conditional});
    const auto b = moments_mc(r, p, MomentOptions{100000, 6, false, FlowEstimator::Sampled});
    for (int i = 0; i < 4; ++i) {
        const double va[4] = {a.l1, a.l2, a.mu, a.kappa};
        const double vb[4] = {b.l1, b.l2, b.mu, b.kappa};
        CHECK(std::abs(va[i] - vb[i]) < 4 * std::hypot(a.std_errors[i], b.std_errors[i]));
    }
    // Rao-Blackwellization does not increase the variance.
    CHECK(a.std_errors[0] <= b.std_errors[0]);
}

TEST_CASE("se_of is the standard error of a linear combination") {
    ModelParams p;
    const auto m = moments_mc(PriceRule{0.5, 0.2, 0.0, 0.0}, p, 50000, 2);
    StatVector w{};
    w[kStatAbsFlow] = 1.0;
    CHECK(m.se_of(w) == doctest::Approx(m.std_errors[0]));
    w[kStatAbsFlow] = 2.0;
    CHECK(m.se_of(w) == doctest::Approx(2 * m.std_errors[0]));
}

TEST_CASE("f1 integral") {
    for (double b : {0.0, 0.3, 1.0, 2.5, 6.0}) {
        const double ref = oracle::simpson([](double z) { return z * z * oracle::normal_pdf(z); }, 0.0, b);
        CHECK(f1_integral(b) == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("quadrature moments match direct integration of the response") {
    ModelParams p;
    p.noise = NoiseLaw::uniform(1.0);
    for (auto [l, q] : {std::pair{0.8, 0.1}, {0.3, 0.6}, {0.1, 1.2}}) {
        const PriceRule r{l, q, 0.0, 0.0};
        const auto m = moments_quadrature(r, p);
        // x*(z) from the closed form, then E over z of the uniform-noise expectations.
        const double a = l + q, zb = l + q + std::sqrt(a * l);
        auto x = [&](double z) {
            const double c = std::abs(z);
            const double xs = c <= zb ? c / (2 * a) : (c - q) / (2 * l);
            return z < 0 ? -xs : xs;
        };
        auto eabs = [](double t) { return std::abs(t) >= 1 ? std::abs(t) : (1 + t * t) / 2; };
        // Cuts at the branch switch and where |x*| = 1.
        const std::vector<double> cuts{-zb, zb, -2 * a, 2 * a, -(2 * l + q), 2 * l + q, 0.0};
        const double l1 = oracle::normal_expect([&](double z) { return eabs(x(z)); }, 1.0, cuts);
        const double l2 = oracle::normal_expect([&](double z) { return x(z) * x(z) + 1.0 / 3.0; }, 1.0, cuts);
        const double mu = oracle::normal_expect([&](double z) { return x(z) * z; }, 1.0, cuts);
        const double ka = oracle::normal_expect([&](double z) { return std::clamp(x(z), -1.0, 1.0) * z; }, 1.0, cuts);
        CHECK(m.l1 == doctest::Approx(l1).epsilon(1e-7));
        CHECK(m.l2 == doctest::Approx(l2).epsilon(1e-7));
        CHECK(m.mu == doctest::Approx(mu).epsilon(1e-7));
        CHECK(m.kappa == doctest::Approx(ka).epsilon(1e-7));
    }
    CHECK_THROWS(moments_quadrature(PriceRule{0.5, 0.1, 0.0, 0.0}, ModelParams{}));
}

TEST_CASE("sign gap") {
    // Equal-variance Gaussians: E|W| - 2E[sign(W)Z] with W = Z+Y ~ N(0, 2):
    // E[sign(W)Z] = E|W|/2, so the gap is zero.
    CHECK(sign_gap_exact(1.0, NoiseLaw::gaussian(1.0)) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    const auto u = NoiseLaw::uniform(2.0 * std::sqrt(3.0));
    const double ref = oracle::normal_expect([&](double z) {
        // E_Y|z+Y| - 2 z E_Y sign(z+Y) for Y uniform on [-b, b].
        const double b = 2.0 * std::sqrt(3.0);
        const double ea = std::abs(z) >= b ? std::abs(z) : (b * b + z * z) / (2 * b);
        return ea - 2 * z * std::clamp(z / b, -1.0, 1.0);
    }, 1.0, {-2.0 * std::sqrt(3.0), 2.0 * std::sqrt(3.0)});
    CHECK(sign_gap_exact(1.0, u) == doctest::Approx(ref).epsilon(1e-9));
    const auto mc = sign_gap_mc(1.0, u, 200000, 4);
    CHECK(std::abs(mc.value - ref) < 4 * mc.std_error);
    CHECK(mc.std_error > 0.0);
}
