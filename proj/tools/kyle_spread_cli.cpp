// kyle-spread: command-line front end for the spread-extended Kyle solver.
//
//   kyle-spread solve      --noise gaussian --gamma 0.5
//   kyle-spread sweep      --noise uniform --gamma-grid 0:2:0.1 --out sweep.csv
//   kyle-spread metastable --gamma 16
//   kyle-spread baseline   --lambda0 2
//   kyle-spread poly       --noise uniform --gamma 0.5 --degree 3
//   kyle-spread curves     --noise uniform --gamma 0.5 --v-grid -3:3:0.25
//
// Settings come from flags, then an optional --config JSON file, then defaults.

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "kyle/io.hpp"
#include "kyle/parallel.hpp"

namespace {

using kyle::Json;

struct RunConfig {
    std::string noise = "gaussian";
    double sigma_u = 1.0;
    double sigma_v = 1.0;
    double p0 = 0.0;
    double gamma = 0.0;
    std::string gamma_grid = "0:1.5:0.1";
    std::size_t n_mc = 100000;
    std::uint64_t seed = 1;
    double tol = 1e-6;
    std::size_t max_iter = 200;
    std::string backend = "mc";
    std::string out;

    double lambda0 = 0.0;  // 0: Kyle value σ_v/(2σ_u)
    double theta0 = 0.1;
    double alpha = 0.9;
    std::size_t trials = 200;
    bool mc_check = false;
    int degree = 3;
    std::size_t poly_n = 10000;
    std::size_t poly_m = 1000;
    std::string fit = "exact";
    std::size_t epochs = 20000;
    double lr = 0.0;
    std::string v_grid = "-3:3:0.25";
    std::string rule_path;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<double> parse_grid(const std::string& text) {
    const auto a = text.find(':');
    const auto b = text.find(':', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos)
        throw ConfigError("grid must be lo:hi:step, got '" + text + "'");
    try {
        return kyle::make_grid(kyle::parse_double(text.substr(0, a)),
                               kyle::parse_double(text.substr(a + 1, b - a - 1)),
                               kyle::parse_double(text.substr(b + 1)));
    } catch (const std::invalid_argument& e) {
        throw ConfigError("bad grid '" + text + "': " + e.what());
    }
}

// Applies keys of a JSON config file; flags given on the command line win.
void apply_config_file(RunConfig& rc, const std::string& path, const CLI::App& app) {
    const Json j = Json::parse(kyle::read_text_file(path));
    auto given = [&](const char* flag) { return app.count(flag) > 0; };
    auto take = [&](const char* key, const char* flag, auto& field) {
        if (j.contains(key) && !given(flag)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    take("noise", "--noise", rc.noise);
    take("sigma_u", "--sigma-u", rc.sigma_u);
    take("sigma_v", "--sigma-v", rc.sigma_v);
    take("p0", "--p0", rc.p0);
    take("gamma", "--gamma", rc.gamma);
    take("gamma_grid", "--gamma-grid", rc.gamma_grid);
    take("n_mc", "--n-mc", rc.n_mc);
    take("seed", "--seed", rc.seed);
    take("tol", "--tol", rc.tol);
    take("max_iter", "--max-iter", rc.max_iter);
    take("backend", "--backend", rc.backend);
    take("out", "--out", rc.out);
    take("lambda0", "--lambda0", rc.lambda0);
    take("theta0", "--theta0", rc.theta0);
    take("alpha", "--alpha", rc.alpha);
    take("trials", "--trials", rc.trials);
    take("mc", "--mc", rc.mc_check);
    take("degree", "--degree", rc.degree);
    take("poly_n", "--poly-n", rc.poly_n);
    take("poly_m", "--poly-m", rc.poly_m);
    take("fit", "--fit", rc.fit);
    take("epochs", "--epochs", rc.epochs);
    take("lr", "--lr", rc.lr);
    take("v_grid", "--v-grid", rc.v_grid);
    take("rule", "--rule", rc.rule_path);
}

kyle::ModelParams model_params(const RunConfig& rc) {
    kyle::ModelParams p;
    try {
        if (rc.noise == "gaussian") p.noise = kyle::NoiseLaw::gaussian(rc.sigma_u);
        else if (rc.noise == "uniform") p.noise = kyle::NoiseLaw::uniform(rc.sigma_u);
        else throw ConfigError("--noise must be gaussian or uniform");
        p.price = kyle::PriceLaw{rc.p0, rc.sigma_v};
        p.gamma = rc.gamma;
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return p;
}

kyle::EquilibriumConfig equilibrium_config(const RunConfig& rc, const kyle::ModelParams& p) {
    kyle::EquilibriumConfig cfg;
    cfg.n_mc = rc.n_mc;
    cfg.tol = rc.tol;
    cfg.max_iter = rc.max_iter;
    cfg.seed = rc.seed;
    try {
        cfg.backend = kyle::parse_backend(rc.backend);
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (cfg.backend == kyle::MomentBackend::Quadrature &&
        (!p.noise.is_uniform() || p.noise.scale() != 1.0 || p.price.sigma_v != 1.0))
        throw ConfigError("--backend quadrature requires --noise uniform, --sigma-u 1 and --sigma-v 1");
    return cfg;
}

kyle::PriceRule initial_rule(const RunConfig& rc, const kyle::ModelParams& p) {
    const double l0 = rc.lambda0 > 0.0 ? rc.lambda0 : p.price.sigma_v / (2.0 * p.noise.std_dev());
    if (!(rc.theta0 >= 0.0)) throw ConfigError("--theta0 must be nonnegative");
    return kyle::PriceRule{l0, rc.theta0, 0.0, p.price.p0};
}

void emit(const RunConfig& rc, const std::string& text) {
    if (rc.out.empty()) std::cout << text;
    else kyle::write_text_file(rc.out, text);
}

int cmd_solve(const RunConfig& rc) {
    const auto p = model_params(rc);
    const auto cfg = equilibrium_config(rc, p);
    const auto rep = kyle::solve_equilibrium(p, initial_rule(rc, p), cfg);
    Json j = kyle::to_json(rep);
    j["params"] = kyle::to_json(p);
    j["seed"] = rc.seed;
    j["backend"] = rc.backend;
    emit(rc, kyle::dump_json(j));
    return rep.converged ? 0 : 2;
}

int cmd_sweep(const RunConfig& rc) {
    const auto p = model_params(rc);
    kyle::SweepConfig sc;
    sc.eq = equilibrium_config(rc, p);
    sc.cold_init = initial_rule(rc, p);
    const auto grid = parse_grid(rc.gamma_grid);
    const auto res = kyle::sweep(p, grid, sc);
    emit(rc, kyle::sweep_csv(res.points));
    for (const auto& b : res.boundaries)
        std::cerr << "boundary " << kyle::to_string(b.below) << " -> " << kyle::to_string(b.above)
                  << " at gamma ~ " << kyle::format_double(b.estimate()) << " (cell "
                  << kyle::format_double(b.gamma_lo) << ".." << kyle::format_double(b.gamma_hi) << ")\n";
    for (const auto& c : res.cold_checks)
        if (!c.agrees())
            std::cerr << "hysteresis at gamma = " << kyle::format_double(c.gamma) << ": warm "
                      << kyle::to_string(c.warm) << ", cold " << kyle::to_string(c.cold) << "\n";
    return 0;
}

int cmd_metastable(const RunConfig& rc) {
    if (!(rc.gamma >= 0.0)) throw ConfigError("--gamma must be nonnegative");
    if (!(rc.alpha > 0.0 && rc.alpha < 1.0)) throw ConfigError("--alpha must lie in (0, 1)");
    if (rc.trials == 0) throw ConfigError("--trials must be positive");
    const auto rep = kyle::metastability_check(rc.gamma, rc.alpha, rc.trials, rc.seed);
    emit(rc, kyle::dump_json(kyle::to_json(rep)));
    return 0;
}

int cmd_baseline(const RunConfig& rc) {
    const auto p = model_params(rc);
    const double l0 = rc.lambda0 > 0.0 ? rc.lambda0 : 2.0;
    kyle::EquilibriumReport rep;
    if (rc.mc_check) {
        auto cfg = equilibrium_config(rc, p);
        cfg.backend = kyle::MomentBackend::MC;
        rep = kyle::solve_kyle_baseline_mc(p, l0, cfg);
    } else {
        rep = kyle::solve_kyle_baseline(p, l0, rc.tol, rc.max_iter);
    }
    Json j = kyle::to_json(rep);
    j["params"] = kyle::to_json(p);
    j["lambda0"] = l0;
    j["mode"] = rc.mc_check ? "mc" : "recursion";
    emit(rc, kyle::dump_json(j));
    return rep.converged ? 0 : 2;
}

int cmd_poly(const RunConfig& rc) {
    const auto p = model_params(rc);
    kyle::PolyConfig cfg;
    cfg.n = rc.poly_n;
    cfg.m = rc.poly_m;
    cfg.epochs = rc.epochs;
    cfg.lr = rc.lr;
    cfg.tol = rc.tol;
    cfg.max_iter = rc.max_iter;
    cfg.seed = rc.seed;
    try {
        cfg.fit = kyle::parse_poly_fit(rc.fit);
        cfg.validate();
        if (rc.degree != 3 && rc.degree != 5 && rc.degree != 7)
            throw std::invalid_argument("--degree must be 3, 5 or 7");
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const auto rep = kyle::solve_poly_equilibrium(p, rc.degree, cfg);
    Json j = kyle::to_json(rep);
    j["params"] = kyle::to_json(p);
    j["degree"] = rc.degree;
    emit(rc, kyle::dump_json(j));
    return rep.converged ? 0 : 2;
}

int cmd_curves(const RunConfig& rc) {
    const auto p = model_params(rc);
    kyle::PriceRule rule;
    if (!rc.rule_path.empty()) {
        rule = kyle::price_rule_from_json(Json::parse(kyle::read_text_file(rc.rule_path)));
    } else {
        const auto rep = kyle::solve_equilibrium(p, initial_rule(rc, p), equilibrium_config(rc, p));
        if (!rep.converged) {
            std::cerr << "no equilibrium at gamma = " << rc.gamma << " (" << kyle::to_string(rep.termination)
                      << "); pass --rule to plot a given rule\n";
            return 2;
        }
        rule = rep.rule_star;
    }
    const auto pts = kyle::insider_curves(p, rule, parse_grid(rc.v_grid), rc.n_mc, rc.seed);
    emit(rc, kyle::curves_csv(pts));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    kyle::apply_thread_env();
    RunConfig rc;
    std::string config_path;

    CLI::App app{"Kyle insider-trading equilibrium with a bid-ask spread"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--config", config_path, "JSON file with default settings")->check(CLI::ExistingFile);
    app.add_option("--noise", rc.noise, "noise-trader law")->check(CLI::IsMember({"gaussian", "uniform"}));
    app.add_option("--sigma-u", rc.sigma_u, "noise scale: Gaussian std. dev. or uniform half-width");
    app.add_option("--sigma-v", rc.sigma_v, "std. dev. of the fundamental value");
    app.add_option("--p0", rc.p0, "mean of the fundamental value");
    app.add_option("--gamma", rc.gamma, "market maker revenue weight");
    app.add_option("--gamma-grid", rc.gamma_grid, "sweep grid lo:hi:step");
    app.add_option("--n-mc", rc.n_mc, "Monte Carlo sample size");
    app.add_option("--seed", rc.seed, "random seed");
    app.add_option("--tol", rc.tol, "convergence tolerance");
    app.add_option("--max-iter", rc.max_iter, "iteration cap");
    app.add_option("--backend", rc.backend, "moment backend")->check(CLI::IsMember({"mc", "quadrature"}));
    app.add_option("--out", rc.out, "output file (default: stdout)");
    app.add_option("--lambda0", rc.lambda0, "initial lambda (default: Kyle value; baseline: 2)");
    app.add_option("--theta0", rc.theta0, "initial theta");

    auto* solve = app.add_subcommand("solve", "solve for an equilibrium at one gamma");
    auto* sweep = app.add_subcommand("sweep", "phase sweep over a gamma grid (CSV)");
    auto* meta = app.add_subcommand("metastable", "spread-only metastable point and stay check");
    app.add_option("--alpha", rc.alpha, "required stay probability");
    app.add_option("--trials", rc.trials, "number of one-step trials");
    auto* base = app.add_subcommand("baseline", "classical Kyle recursion");
    app.add_flag("--mc", rc.mc_check, "run the Monte Carlo pipeline instead of the scalar map");
    auto* poly = app.add_subcommand("poly", "polynomial price-class dynamics");
    app.add_option("--degree", rc.degree, "odd degree 3, 5 or 7");
    app.add_option("--poly-n", rc.poly_n, "v samples per fit");
    app.add_option("--poly-m", rc.poly_m, "noise draws in the insider's payoff");
    app.add_option("--fit", rc.fit, "market maker fit")->check(CLI::IsMember({"exact", "gradient"}));
    app.add_option("--epochs", rc.epochs, "gradient epochs");
    app.add_option("--lr", rc.lr, "gradient step (<= 0: automatic)");
    auto* curves = app.add_subcommand("curves", "insider behavior along a v grid (CSV)");
    app.add_option("--v-grid", rc.v_grid, "v grid lo:hi:step");
    app.add_option("--rule", rc.rule_path, "price rule JSON (default: solve at --gamma)")
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (!config_path.empty()) {
            apply_config_file(rc, config_path, app);
        }
        if (*solve) return cmd_solve(rc);
        if (*sweep) return cmd_sweep(rc);
        if (*meta) return cmd_metastable(rc);
        if (*base) return cmd_baseline(rc);
        if (*poly) return cmd_poly(rc);
        if (*curves) return cmd_curves(rc);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Json::exception& e) {
        std::cerr << "error: config file: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
