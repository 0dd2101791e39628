#include "kyle/price_rule.hpp"

#include <cmath>
#include <stdexcept>

namespace kyle {

void ModelParams::validate() const {
    price.validate();
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
        throw std::invalid_argument("gamma must be a finite nonnegative number");
}

void PriceRule::validate() const {
    if (!std::isfinite(lambda) || !std::isfinite(theta) || !std::isfinite(bias) ||
        !std::isfinite(p0))
        throw std::invalid_argument("price rule: non-finite parameter");
    if (lambda < 0.0 || theta < 0.0)
        throw std::invalid_argument("price rule: lambda and theta must be nonnegative");
}

double PriceRule::evaluate(double total_flow) const {
    return lambda * total_flow + theta * sign0(total_flow) + bias + p0;
}

PolyPriceRule PolyPriceRule::from_rule(const PriceRule& rule, int degree) {
    if (degree < 1 || degree % 2 == 0 || degree > 7)
        throw std::invalid_argument("poly price rule: degree must be 1, 3, 5 or 7");
    PolyPriceRule out;
    out.odd_coeffs.assign(static_cast<std::size_t>((degree + 1) / 2), 0.0);
    out.odd_coeffs[0] = rule.lambda;
    out.theta = rule.theta;
    out.p0 = rule.p0 + rule.bias;
    return out;
}

void PolyPriceRule::validate() const {
    if (odd_coeffs.empty() || odd_coeffs.size() > 4)
        throw std::invalid_argument("poly price rule: degree must be 1, 3, 5 or 7");
    for (double c : odd_coeffs)
        if (!std::isfinite(c)) throw std::invalid_argument("poly price rule: non-finite coefficient");
    if (!(theta >= 0.0) || !std::isfinite(theta) || !std::isfinite(p0))
        throw std::invalid_argument("poly price rule: invalid theta or p0");
}

double PolyPriceRule::polynomial(double x) const {
    const double x2 = x * x;
    double acc = 0.0;
    for (auto it = odd_coeffs.rbegin(); it != odd_coeffs.rend(); ++it) acc = acc * x2 + *it;
    return acc * x;
}

double PolyPriceRule::evaluate(double total_flow) const {
    return polynomial(total_flow) + theta * sign0(total_flow) + p0;
}

double insider_payoff(const PriceRule& rule, const NoiseLaw& noise, double v, double x) {
    if (x == 0.0) return 0.0;
    const double c = v - rule.p0 - rule.bias;
    return -rule.lambda * x * x + (c - rule.theta) * x + 2.0 * rule.theta * x * cdf(noise, -x);
}

double insider_payoff_mc(const PolyPriceRule& rule, std::span<const double> noise, double v,
                         double x) {
    double acc = 0.0;
    for (double u : noise) acc += rule.evaluate(x + u);
    return (v - acc / static_cast<double>(noise.size())) * x;
}

}  // namespace kyle
