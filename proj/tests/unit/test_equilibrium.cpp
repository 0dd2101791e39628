#include <cmath>

#include <doctest.h>

#include "kyle/equilibrium.hpp"

using namespace kyle;

TEST_CASE("scalar Kyle recursion") {
    ModelParams p;
    p.noise = NoiseLaw::gaussian(2.0);
    p.price.sigma_v = 3.0;
    const auto rep = solve_kyle_baseline(p, 5.0, 1e-12, 500);
    CHECK(rep.converged);
    CHECK(rep.rule_star.lambda == doctest::Approx(3.0 / 4.0).epsilon(1e-10));
    CHECK(rep.rule_star.theta == 0.0);
    // λ_{n+1} = 2λσ_v²/(σ_v² + 4λ²σ_u²) written out.
    double l = 5.0;
    for (std::size_t i = 1; i < rep.trajectory.size(); ++i) {
        l = 2 * l * 9.0 / (9.0 + 4 * l * l * 4.0);
        CHECK(rep.trajectory[i].lambda == doctest::Approx(l).epsilon(1e-14));
    }
}

TEST_CASE("Monte Carlo fixed point at zero revenue weight") {
    ModelParams p;
    EquilibriumConfig cfg;
    cfg.n_mc = 20000;
    cfg.verify_n = 20000;
    const auto rep = solve_equilibrium(p, PriceRule{1.0, 0.2, 0.0, 0.0}, cfg);
    CHECK(rep.converged);
    CHECK(rep.termination == Termination::Converged);
    CHECK(rep.rule_star.lambda == doctest::Approx(0.5).epsilon(0.03));
    CHECK(rep.rule_star.theta < 0.02);
    CHECK(rep.phase == Phase::KyleLinear);
    CHECK(rep.verified);
    // Same seed, same answer.
    const auto again = solve_equilibrium(p, PriceRule{1.0, 0.2, 0.0, 0.0}, cfg);
    CHECK(again.rule_star == rep.rule_star);
}

TEST_CASE("quadrature backend converges for uniform noise") {
    ModelParams p;
    p.noise = NoiseLaw::uniform(1.0);
    p.gamma = 0.5;
    EquilibriumConfig cfg;
    cfg.backend = MomentBackend::Quadrature;
    cfg.tol = 1e-10;
    cfg.verify_n = 50000;
    const auto rep = solve_equilibrium(p, PriceRule{0.8, 0.1, 0.0, 0.0}, cfg);
    REQUIRE(rep.converged);
    const auto g = mm_gradient(rep.moments, rep.rule_star.lambda, rep.rule_star.theta, p.gamma);
    CHECK(std::abs(g.d_lambda) < 1e-8);
    CHECK(std::abs(g.d_theta) < 1e-8);
    CHECK(rep.phase == Phase::LinearWithSpread);
}

TEST_CASE("phase labels and cycle detection") {
    EquilibriumConfig cfg;
    CHECK(classify_phase(PriceRule{0.5, 0.0, 0.0, 0.0}, cfg) == Phase::KyleLinear);
    CHECK(classify_phase(PriceRule{0.5, 0.3, 0.0, 0.0}, cfg) == Phase::LinearWithSpread);
    CHECK(classify_phase(PriceRule{0.0, 3.0, 0.0, 0.0}, cfg) == Phase::SpreadOnly);
    std::vector<TrajectoryPoint> two;
    for (int i = 0; i < 30; ++i) two.push_back({i % 2 ? 0.3 : 0.5, 0.1, 0.0});
    CHECK(detect_cycle(two, 20, 4, 1e-4));
    std::vector<TrajectoryPoint> still(30, {0.5, 0.1, 0.0});
    CHECK_FALSE(detect_cycle(still, 20, 4, 1e-4));
    std::vector<TrajectoryPoint> drift;
    for (int i = 0; i < 30; ++i) drift.push_back({0.5 + 0.01 * i, 0.1, 0.0});
    CHECK_FALSE(detect_cycle(drift, 20, 4, 1e-4));
}

TEST_CASE("enum names round trip and config validation") {
    for (auto b : {MomentBackend::MC, MomentBackend::Quadrature}) CHECK(parse_backend(to_string(b)) == b);
    CHECK_THROWS(parse_backend("simpson"));
    EquilibriumConfig cfg;
    cfg.tol = 0.0;
    CHECK_THROWS(cfg.validate());
    cfg = {};
    cfg.n_mc = 0;
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("verification flags a rule that is not an equilibrium") {
    ModelParams p;
    const auto bad = verify_equilibrium(PriceRule{1.0, 0.0, 0.0, 0.0}, p, 20000, 3);
    CHECK_FALSE(bad.passed);
    const auto good = verify_equilibrium(PriceRule{0.5, 0.0, 0.0, 0.0}, p, 20000, 3);
    CHECK(good.lambda_ok);
    CHECK(good.insider_ok);
}
