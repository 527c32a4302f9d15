#include "predbs/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "predbs/error.hpp"

namespace predbs::pricing {

namespace {

bool finite_all(const PricingInputs& in) {
    return std::isfinite(in.spot) && std::isfinite(in.strike) && std::isfinite(in.tau) &&
           std::isfinite(in.rate) && std::isfinite(in.sigma) && std::isfinite(in.p);
}

void check_p(double p) {
    if (!(p >= -1.0 && p <= 1.0)) {
        throw InputError("excess predictability p must lie in [-1, 1], got " + std::to_string(p));
    }
}

bool degenerate(const PricingInputs& in) { return in.sigma * std::sqrt(in.tau) == 0.0; }

}  // namespace

void validate(const PricingInputs& in) {
    if (!finite_all(in)) throw InputError("pricing inputs must be finite");
    if (!(in.spot > 0.0)) throw InputError("spot must be positive");
    if (!(in.strike > 0.0)) throw InputError("strike must be positive");
    if (in.tau < 0.0) throw InputError("time to maturity must be non-negative");
    if (in.sigma < 0.0) throw InputError("sigma must be non-negative");
    check_p(in.p);
}

double dividend_yield_due_to_predictability(double p, double sigma) {
    check_p(p);
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InputError("sigma must be finite and non-negative");
    return p * sigma * sigma;
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

std::pair<double, double> d_plus_minus(const PricingInputs& in) {
    validate(in);
    const double vol_sqrt_t = in.sigma * std::sqrt(in.tau);
    if (vol_sqrt_t == 0.0) throw DegenerateInputError("d+/d- undefined for sigma * sqrt(tau) == 0");
    const double q = in.p * in.sigma * in.sigma;
    // ln(S e^{-q tau} / (K e^{-r tau}))
    const double log_fwd = std::log(in.spot / in.strike) + (in.rate - q) * in.tau;
    const double half_var = 0.5 * in.sigma * in.sigma * in.tau;
    return {(log_fwd + half_var) / vol_sqrt_t, (log_fwd - half_var) / vol_sqrt_t};
}

PriceResult call_price(const PricingInputs& in) {
    validate(in);
    PriceResult r;
    r.dividend_yield = in.p * in.sigma * in.sigma;
    const double disc_spot = in.spot * std::exp(-r.dividend_yield * in.tau);
    const double disc_strike = in.strike * std::exp(-in.rate * in.tau);
    if (degenerate(in)) {
        const double intrinsic = disc_spot - disc_strike;
        constexpr double inf = std::numeric_limits<double>::infinity();
        r.d_plus = r.d_minus = intrinsic > 0.0 ? inf : (intrinsic < 0.0 ? -inf : 0.0);
        r.price = std::max(intrinsic, 0.0);
        return r;
    }
    std::tie(r.d_plus, r.d_minus) = d_plus_minus(in);
    r.price = std::max(disc_spot * norm_cdf(r.d_plus) - disc_strike * norm_cdf(r.d_minus), 0.0);
    return r;
}

PriceResult put_price(const PricingInputs& in) {
    validate(in);
    PriceResult r;
    r.dividend_yield = in.p * in.sigma * in.sigma;
    const double disc_spot = in.spot * std::exp(-r.dividend_yield * in.tau);
    const double disc_strike = in.strike * std::exp(-in.rate * in.tau);
    if (degenerate(in)) {
        const double intrinsic = disc_spot - disc_strike;
        constexpr double inf = std::numeric_limits<double>::infinity();
        r.d_plus = r.d_minus = intrinsic > 0.0 ? inf : (intrinsic < 0.0 ? -inf : 0.0);
        r.price = std::max(-intrinsic, 0.0);
        return r;
    }
    std::tie(r.d_plus, r.d_minus) = d_plus_minus(in);
    r.price = std::max(disc_strike * norm_cdf(-r.d_minus) - disc_spot * norm_cdf(-r.d_plus), 0.0);
    return r;
}

double dprice_dp(const PricingInputs& in) {
    validate(in);
    if (degenerate(in)) return 0.0;
    const double var_t = in.sigma * in.sigma * in.tau;
    const auto [d_plus, d_minus] = d_plus_minus(in);
    return -var_t * in.spot * std::exp(-in.p * var_t) * norm_cdf(d_plus);
}

double pde_residual(const PricingInputs& in, const PdeBumps& bumps) {
    return pde_residual(in, in.p, bumps);
}

double pde_residual(const PricingInputs& in, double p_pde, const PdeBumps& bumps) {
    validate(in);
    if (!(bumps.spot_rel > 0.0) || !(bumps.tau_abs > 0.0)) throw InputError("bumps must be positive");
    if (!(in.tau > 4.0 * bumps.tau_abs)) {
        throw InputError("tau too close to expiry for central differencing");
    }
    if (!(in.sigma > 0.0)) throw InputError("pde residual needs sigma > 0");

    auto price_at = [&](double spot, double tau) {
        PricingInputs b = in;
        b.spot = spot;
        b.tau = tau;
        return call_price(b).price;
    };
    // Fourth-order central stencils. Spot is bumped in log space, where
    // x C_x = C_y and x^2 C_xx = C_yy - C_y.
    const double x = in.spot;
    const double hy = bumps.spot_rel;
    const double ht = bumps.tau_abs;

    const double c0 = price_at(x, in.tau);
    const double cy_p1 = price_at(x * std::exp(hy), in.tau);
    const double cy_m1 = price_at(x * std::exp(-hy), in.tau);
    const double cy_p2 = price_at(x * std::exp(2.0 * hy), in.tau);
    const double cy_m2 = price_at(x * std::exp(-2.0 * hy), in.tau);
    const double c_y = (-cy_p2 + 8.0 * cy_p1 - 8.0 * cy_m1 + cy_m2) / (12.0 * hy);
    const double c_yy = (-cy_p2 + 16.0 * cy_p1 - 30.0 * c0 + 16.0 * cy_m1 - cy_m2) / (12.0 * hy * hy);

    const double ct_p1 = price_at(x, in.tau + ht);
    const double ct_m1 = price_at(x, in.tau - ht);
    const double ct_p2 = price_at(x, in.tau + 2.0 * ht);
    const double ct_m2 = price_at(x, in.tau - 2.0 * ht);
    // calendar time runs opposite to time-to-maturity
    const double c_t = -(-ct_p2 + 8.0 * ct_p1 - 8.0 * ct_m1 + ct_m2) / (12.0 * ht);

    const double s2 = in.sigma * in.sigma;
    return c_t + c_y * (in.rate - p_pde * s2) - in.rate * c0 + 0.5 * s2 * (c_yy - c_y);
}

}  // namespace predbs::pricing
