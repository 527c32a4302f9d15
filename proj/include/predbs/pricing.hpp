#pragma once

#include <utility>

namespace predbs::pricing {

/// One European option scenario. sigma is annualized, tau in years, rate is
/// continuously compounded. `p` is the excess predictability of the option
/// trader over the spot trader; it acts as a continuous dividend yield
/// p * sigma^2 on the underlying.
struct PricingInputs {
    double spot = 0.0;
    double strike = 0.0;
    double tau = 0.0;
    double rate = 0.0;
    double sigma = 0.0;
    double p = 0.0;
};

struct PriceResult {
    double price = 0.0;
    double d_plus = 0.0;
    double d_minus = 0.0;
    double dividend_yield = 0.0;  // q = p * sigma^2, per year
};

/// Throws InputError unless spot, strike > 0, tau, sigma >= 0, p in [-1, 1]
/// and everything is finite. tau == 0 or sigma == 0 are allowed and priced
/// at their deterministic limit.
void validate(const PricingInputs& in);

/// q = p * sigma^2. Throws InputError for p outside [-1, 1] or sigma < 0.
double dividend_yield_due_to_predictability(double p, double sigma);

/// Standard normal CDF via erfc, accurate to ~1e-16 absolute.
double norm_cdf(double x);

double norm_pdf(double x);

/// (d+, d-). Throws DegenerateInputError when sigma * sqrt(tau) == 0.
std::pair<double, double> d_plus_minus(const PricingInputs& in);

/// S e^{-q tau} N(d+) - K e^{-r tau} N(d-), or max(S e^{-q tau} - K e^{-r tau}, 0)
/// when sigma * sqrt(tau) == 0 (d+/d- are then reported as +-infinity or 0).
PriceResult call_price(const PricingInputs& in);

/// K e^{-r tau} N(-d-) - S e^{-q tau} N(-d+), i.e. dividend-adjusted parity.
PriceResult put_price(const PricingInputs& in);

/// dC/dp = -sigma^2 tau S e^{-q tau} N(d+). Zero when sigma == 0 or tau == 0.
double dprice_dp(const PricingInputs& in);

struct PdeBumps {
    double spot_rel = 1e-3;  // bump of ln(spot)
    double tau_abs = 1e-3;   // bump of time to maturity, years
};

/// Left-hand side of the predictability pricing PDE
///   C_t + (r - p_pde sigma^2) x C_x - r C + 1/2 sigma^2 x^2 C_xx
/// evaluated with fourth-order central differences of call_price (priced at
/// `in.p`). `p_pde` defaults to `in.p`; passing a different value is a
/// negative control. Throws InputError if tau <= 4 * bumps.tau_abs or
/// sigma == 0.
double pde_residual(const PricingInputs& in, const PdeBumps& bumps = {});
double pde_residual(const PricingInputs& in, double p_pde, const PdeBumps& bumps);

}  // namespace predbs::pricing
