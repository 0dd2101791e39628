#include "kyle/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace kyle {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double x = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::invalid_argument("not a number: '" + s + "'");
    return x;
}

namespace {

// JSON has no infinities; non-finite values travel as strings.
Json num(double x) {
    if (std::isfinite(x)) return x;
    return format_double(x);
}

double get_num(const Json& j, const char* key) {
    const Json& v = j.at(key);
    if (v.is_string()) return parse_double(v.get<std::string>());
    return v.get<double>();
}

Json num_array(const std::vector<double>& xs) {
    Json a = Json::array();
    for (double x : xs) a.push_back(num(x));
    return a;
}

std::vector<double> get_num_array(const Json& a) {
    std::vector<double> out;
    for (const auto& v : a) out.push_back(v.is_string() ? parse_double(v.get<std::string>()) : v.get<double>());
    return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text, const char* header,
                                                std::size_t columns) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != header)
        throw std::invalid_argument(std::string("csv: expected header '") + header + "'");
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split(line, ',');
        if (cells.size() != columns) throw std::invalid_argument("csv: wrong column count in '" + line + "'");
        rows.push_back(std::move(cells));
    }
    return rows;
}

}  // namespace

Json to_json(const PriceRule& r) {
    return Json{{"lambda", num(r.lambda)}, {"theta", num(r.theta)}, {"bias", num(r.bias)}, {"p0", num(r.p0)}};
}

PriceRule price_rule_from_json(const Json& j) {
    PriceRule r{get_num(j, "lambda"), get_num(j, "theta"), get_num(j, "bias"), get_num(j, "p0")};
    r.validate();
    return r;
}

Json to_json(const PolyPriceRule& r) {
    return Json{{"odd_coeffs", num_array(r.odd_coeffs)}, {"theta", num(r.theta)}, {"p0", num(r.p0)}};
}

PolyPriceRule poly_rule_from_json(const Json& j) {
    PolyPriceRule r{get_num_array(j.at("odd_coeffs")), get_num(j, "theta"), get_num(j, "p0")};
    r.validate();
    return r;
}

Json to_json(const Moments& m) {
    return Json{{"l1", num(m.l1)},
                {"l2", num(m.l2)},
                {"mu", num(m.mu)},
                {"kappa", num(m.kappa)},
                {"std_errors", num_array({m.std_errors.begin(), m.std_errors.end()})},
                {"mean_flow", num(m.mean_flow)},
                {"mean_sign", num(m.mean_sign)},
                {"mean_innovation", num(m.mean_innovation)},
                {"n", m.n}};
}

Moments moments_from_json(const Json& j) {
    Moments m;
    m.l1 = get_num(j, "l1");
    m.l2 = get_num(j, "l2");
    m.mu = get_num(j, "mu");
    m.kappa = get_num(j, "kappa");
    const auto se = get_num_array(j.at("std_errors"));
    if (se.size() != 4) throw std::invalid_argument("moments: std_errors must have 4 entries");
    std::copy(se.begin(), se.end(), m.std_errors.begin());
    m.mean_flow = get_num(j, "mean_flow");
    m.mean_sign = get_num(j, "mean_sign");
    m.mean_innovation = get_num(j, "mean_innovation");
    m.n = j.at("n").get<std::size_t>();
    return m;
}

Json to_json(const EquilibriumReport& r) {
    Json traj = Json::array();
    for (const auto& p : r.trajectory) traj.push_back(Json::array({num(p.lambda), num(p.theta), num(p.bias)}));
    return Json{{"converged", r.converged},
                {"phase", to_string(r.phase)},
                {"termination", to_string(r.termination)},
                {"iterations", r.iterations},
                {"rule", to_json(r.rule_star)},
                {"residuals",
                 {{"foc_lambda", num(r.foc_lambda)},
                  {"foc_theta", num(r.foc_theta)},
                  {"bias", num(r.bias)},
                  {"se_lambda", num(r.se_lambda)},
                  {"se_theta", num(r.se_theta)},
                  {"verified", r.verified}}},
                {"expected_profit", num(r.expected_profit)},
                {"expected_order", num(r.expected_order)},
                {"mm_cost", num(r.mm_cost)},
                {"revenue_term", num(r.revenue_term)},
                {"damping", num(r.damping_used)},
                {"moments", to_json(r.moments)},
                {"message", r.message},
                {"trajectory", traj}};
}

EquilibriumReport equilibrium_report_from_json(const Json& j) {
    EquilibriumReport r;
    r.converged = j.at("converged").get<bool>();
    r.phase = parse_phase(j.at("phase").get<std::string>());
    r.termination = parse_termination(j.at("termination").get<std::string>());
    r.iterations = j.at("iterations").get<std::size_t>();
    r.rule_star = price_rule_from_json(j.at("rule"));
    const Json& res = j.at("residuals");
    r.foc_lambda = get_num(res, "foc_lambda");
    r.foc_theta = get_num(res, "foc_theta");
    r.bias = get_num(res, "bias");
    r.se_lambda = get_num(res, "se_lambda");
    r.se_theta = get_num(res, "se_theta");
    r.verified = res.at("verified").get<bool>();
    r.expected_profit = get_num(j, "expected_profit");
    r.expected_order = get_num(j, "expected_order");
    r.mm_cost = get_num(j, "mm_cost");
    r.revenue_term = get_num(j, "revenue_term");
    r.damping_used = get_num(j, "damping");
    r.moments = moments_from_json(j.at("moments"));
    r.message = j.at("message").get<std::string>();
    for (const auto& p : j.at("trajectory")) {
        const auto v = get_num_array(p);
        if (v.size() != 3) throw std::invalid_argument("trajectory entries must have 3 values");
        r.trajectory.push_back({v[0], v[1], v[2]});
    }
    return r;
}

Json to_json(const MetastablePoint& p) {
    return Json{{"gamma", num(p.gamma)},
                {"theta_star", num(p.theta_star)},
                {"h_residual", num(p.h_residual)},
                {"partial_lambda_C", num(p.partial_lambda_C)},
                {"escape_prob_bound", num(p.escape_prob_bound)},
                {"iterations", p.iterations}};
}

MetastablePoint metastable_point_from_json(const Json& j) {
    MetastablePoint p;
    p.gamma = get_num(j, "gamma");
    p.theta_star = get_num(j, "theta_star");
    p.h_residual = get_num(j, "h_residual");
    p.partial_lambda_C = get_num(j, "partial_lambda_C");
    p.escape_prob_bound = get_num(j, "escape_prob_bound");
    p.iterations = j.at("iterations").get<int>();
    return p;
}

Json to_json(const StayReport& r) {
    return Json{{"point", to_json(r.point)},
                {"alpha", num(r.alpha)},
                {"trials", r.trials},
                {"stays", r.stays},
                {"fraction", num(r.fraction)},
                {"binomial_se", num(r.binomial_se)},
                {"market_maker_stays", r.market_maker_stays},
                {"exceeds_alpha", r.exceeds_alpha}};
}

StayReport stay_report_from_json(const Json& j) {
    StayReport r;
    r.point = metastable_point_from_json(j.at("point"));
    r.alpha = get_num(j, "alpha");
    r.trials = j.at("trials").get<std::size_t>();
    r.stays = j.at("stays").get<std::size_t>();
    r.fraction = get_num(j, "fraction");
    r.binomial_se = get_num(j, "binomial_se");
    r.market_maker_stays = j.at("market_maker_stays").get<bool>();
    r.exceeds_alpha = j.at("exceeds_alpha").get<bool>();
    return r;
}

Json to_json(const PolyFitReport& r) {
    Json traj = Json::array();
    for (const auto& c : r.coeff_trajectory) traj.push_back(num_array(c));
    return Json{{"final_rule", to_json(r.final_rule)},
                {"converged", r.converged},
                {"collapsed", r.collapsed},
                {"iterations", r.iterations},
                {"termination", to_string(r.termination)},
                {"loss_before", num_array(r.loss_before)},
                {"loss_after", num_array(r.loss_after)},
                {"coeff_trajectory", traj},
                {"message", r.message}};
}

PolyFitReport poly_report_from_json(const Json& j) {
    PolyFitReport r;
    r.final_rule = poly_rule_from_json(j.at("final_rule"));
    r.converged = j.at("converged").get<bool>();
    r.collapsed = j.at("collapsed").get<bool>();
    r.iterations = j.at("iterations").get<std::size_t>();
    r.termination = parse_termination(j.at("termination").get<std::string>());
    r.loss_before = get_num_array(j.at("loss_before"));
    r.loss_after = get_num_array(j.at("loss_after"));
    for (const auto& c : j.at("coeff_trajectory")) r.coeff_trajectory.push_back(get_num_array(c));
    r.message = j.at("message").get<std::string>();
    return r;
}

Json to_json(const ModelParams& p) {
    return Json{{"noise", p.noise.name()},
                {"noise_scale", num(p.noise.scale())},
                {"p0", num(p.price.p0)},
                {"sigma_v", num(p.price.sigma_v)},
                {"gamma", num(p.gamma)}};
}

ModelParams model_params_from_json(const Json& j) {
    ModelParams p;
    const std::string noise = j.at("noise").get<std::string>();
    const double scale = get_num(j, "noise_scale");
    if (noise == "gaussian") p.noise = NoiseLaw::gaussian(scale);
    else if (noise == "uniform") p.noise = NoiseLaw::uniform(scale);
    else throw std::invalid_argument("unknown noise law '" + noise + "'");
    p.price = PriceLaw{get_num(j, "p0"), get_num(j, "sigma_v")};
    p.gamma = get_num(j, "gamma");
    p.validate();
    return p;
}

std::string sweep_csv(const std::vector<PhasePoint>& points) {
    std::string out = std::string(kSweepHeader) + "\n";
    for (const auto& p : points) {
        out += format_double(p.gamma) + "," + to_string(p.phase) + "," + format_double(p.lambda_star) +
               "," + format_double(p.theta_star) + "," + format_double(p.expected_order) + "," +
               format_double(p.expected_profit) + "," + format_double(p.mm_value) + "," +
               std::to_string(p.n_iterations) + "\n";
    }
    return out;
}

std::vector<PhasePoint> parse_sweep_csv(const std::string& text) {
    std::vector<PhasePoint> out;
    for (const auto& c : parse_csv(text, kSweepHeader, 8)) {
        PhasePoint p;
        p.gamma = parse_double(c[0]);
        p.phase = parse_phase(c[1]);
        p.lambda_star = parse_double(c[2]);
        p.theta_star = parse_double(c[3]);
        p.expected_order = parse_double(c[4]);
        p.expected_profit = parse_double(c[5]);
        p.mm_value = parse_double(c[6]);
        p.n_iterations = static_cast<std::size_t>(std::stoull(c[7]));
        out.push_back(p);
    }
    return out;
}

std::string curves_csv(const std::vector<CurvePoint>& points) {
    std::string out = std::string(kCurvesHeader) + "\n";
    for (const auto& p : points)
        out += format_double(p.v) + "," + format_double(p.x_star) + "," + format_double(p.profit) + "," +
               format_double(p.flow_q05) + "," + format_double(p.flow_q95) + "\n";
    return out;
}

std::vector<CurvePoint> parse_curves_csv(const std::string& text) {
    std::vector<CurvePoint> out;
    for (const auto& c : parse_csv(text, kCurvesHeader, 5))
        out.push_back({parse_double(c[0]), parse_double(c[1]), parse_double(c[2]), parse_double(c[3]),
                       parse_double(c[4])});
    return out;
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    f << content;
    if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace kyle
