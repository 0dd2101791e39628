#include <cmath>
#include <filesystem>
#include <limits>

#include <doctest.h>

#include "kyle/io.hpp"

using namespace kyle;

TEST_CASE("doubles round trip through text") {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, 0.0}) CHECK(parse_double(format_double(x)) == x);
    CHECK(std::isnan(parse_double(format_double(std::numeric_limits<double>::quiet_NaN()))));
    CHECK(parse_double(format_double(-std::numeric_limits<double>::infinity())) ==
          -std::numeric_limits<double>::infinity());
    CHECK_THROWS(parse_double("1.2x"));
}

TEST_CASE("json round trips") {
    const PriceRule r{0.123456789012345, 0.3, -1e-7, 2.0};
    CHECK(price_rule_from_json(Json::parse(dump_json(to_json(r)))) == r);
    const PolyPriceRule pr{{0.1, 0.02, 0.003}, 0.4, 1.0};
    CHECK(poly_rule_from_json(Json::parse(dump_json(to_json(pr)))) == pr);

    ModelParams p;
    p.noise = NoiseLaw::uniform(1.5);
    p.price = {0.5, 2.0};
    p.gamma = 0.7;
    const auto p2 = model_params_from_json(Json::parse(dump_json(to_json(p))));
    CHECK(p2.noise == p.noise);
    CHECK(p2.price == p.price);
    CHECK(p2.gamma == p.gamma);

    ModelParams g;
    EquilibriumConfig cfg;
    cfg.n_mc = 5000;
    cfg.verify_n = 5000;
    const auto rep = solve_equilibrium(g, PriceRule{0.6, 0.1, 0.0, 0.0}, cfg);
    const auto back = equilibrium_report_from_json(Json::parse(dump_json(to_json(rep))));
    CHECK(back.rule_star == rep.rule_star);
    CHECK(back.phase == rep.phase);
    CHECK(back.termination == rep.termination);
    CHECK(back.trajectory.size() == rep.trajectory.size());
    CHECK(back.moments.l1 == rep.moments.l1);
    CHECK(dump_json(to_json(back)) == dump_json(to_json(rep)));

    const auto st = metastability_check(14.0, 0.9, 20, 1);
    const auto st2 = stay_report_from_json(Json::parse(dump_json(to_json(st))));
    CHECK(st2.point.theta_star == st.point.theta_star);
    CHECK(st2.stays == st.stays);
}

TEST_CASE("csv round trips and rejects bad headers") {
    std::vector<PhasePoint> pts(2);
    pts[0] = {0.1, Phase::LinearWithSpread, 0.4, 0.1, 0.0, 0.8, 0.5, 0.45, 0.0, 8, Termination::Converged, false};
    pts[1] = {0.2, Phase::NoEquilibrium, 0.0, 1.3, 0.0, 0.0, 0.0, 0.0, 0.0, 1, Termination::UnboundedResponse, true};
    const auto text = sweep_csv(pts);
    CHECK(text.rfind(std::string(kSweepHeader) + "\n", 0) == 0);
    const auto back = parse_sweep_csv(text);
    REQUIRE(back.size() == 2);
    CHECK(back[0].lambda_star == 0.4);
    CHECK(back[1].phase == Phase::NoEquilibrium);
    CHECK(back[0].n_iterations == 8);
    CHECK(sweep_csv(back) == text);
    CHECK_THROWS(parse_sweep_csv("gamma,lambda\n0,1\n"));

    std::vector<CurvePoint> cs{{-1.0, -0.5, 0.25, -1.4, 0.4}, {1.0, 0.5, 0.25, -0.4, 1.4}};
    const auto ct = curves_csv(cs);
    CHECK(curves_csv(parse_curves_csv(ct)) == ct);

    const auto path = (std::filesystem::temp_directory_path() / "kyle_io_test.csv").string();
    write_text_file(path, ct);
    CHECK(read_text_file(path) == ct);
    std::filesystem::remove(path);
}
