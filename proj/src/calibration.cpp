#include "predbs/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "predbs/error.hpp"
#include "predbs/pricing.hpp"

namespace predbs::calib {

namespace {

struct Root {
    double x;
    double fx;
};

/// Brent's method on a sign-changing bracket [a, b] (fa * fb <= 0).
template <class F>
Root brent(F f, double a, double b, double fa, double fb, double xtol, int max_iter) {
    if (fa == 0.0) return {a, fa};
    if (fb == 0.0) return {b, fb};
    double c = a, fc = fa;
    double d = b - a, e = d;
    constexpr double eps = std::numeric_limits<double>::epsilon();

    for (int iter = 0; iter < max_iter; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol = 2.0 * eps * std::abs(b) + 0.5 * xtol;
        const double m = 0.5 * (c - b);
        if (std::abs(m) <= tol || fb == 0.0) return {b, fb};

        if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
            // inverse quadratic interpolation, secant when only two points
            double p, q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                const double qa = fa / fc, r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q; else p = -p;
            if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += std::abs(d) > tol ? d : (m > 0.0 ? tol : -tol);
        fb = f(b);
    }
    return {b, fb};
}

}  // namespace

std::string_view to_string(Clamp c) {
    switch (c) {
        case Clamp::none: return "none";
        case Clamp::at_minus_one: return "at_minus_one";
        case Clamp::at_plus_one: return "at_plus_one";
    }
    return "none";
}

std::optional<Clamp> parse_clamp(std::string_view text) {
    for (auto c : {Clamp::none, Clamp::at_minus_one, Clamp::at_plus_one}) {
        if (to_string(c) == text) return c;
    }
    return std::nullopt;
}

CalibrationPoint implied_excess_predictability(double market_price, double spot, double strike,
                                               double tau, double rate, double sigma,
                                               const SolverOptions& opts) {
    pricing::PricingInputs in{spot, strike, tau, rate, sigma, 0.0};
    pricing::validate(in);
    if (!(market_price > 0.0) || !std::isfinite(market_price)) {
        throw InputError("market price must be positive and finite");
    }

    const double var_t = sigma * sigma * tau;
    const double upper_bound = spot * std::exp(var_t);
    const double lower_bound = std::max(spot * std::exp(-var_t) - strike * std::exp(-rate * tau), 0.0);
    if (market_price > upper_bound || market_price < lower_bound) {
        throw QuoteRejectedError("quote " + std::to_string(market_price) +
                                 " outside the static bounds of every p in [-1, 1]");
    }

    auto price = [&](double p) {
        in.p = p;
        return pricing::call_price(in).price;
    };
    const double c_minus = price(-1.0);  // highest attainable model price
    const double c_plus = price(1.0);    // lowest attainable model price
    if (!(c_minus > c_plus)) {
        throw QuoteRejectedError("call price does not depend on p for this quote");
    }

    CalibrationPoint pt;
    pt.moneyness = spot / strike;
    pt.tau = tau;
    pt.market_price = market_price;

    if (market_price > c_minus) {
        pt.p = -1.0;
        pt.clamped = Clamp::at_minus_one;
        pt.model_price = c_minus;
    } else if (market_price < c_plus) {
        pt.p = 1.0;
        pt.clamped = Clamp::at_plus_one;
        pt.model_price = c_plus;
    } else {
        const Root root = brent([&](double p) { return price(p) - market_price; }, -1.0, 1.0,
                                c_minus - market_price, c_plus - market_price, opts.p_tolerance,
                                opts.max_iterations);
        pt.p = std::clamp(root.x, -1.0, 1.0);
        pt.model_price = price(pt.p);
    }
    pt.residual = pt.model_price - market_price;
    return pt;
}

PredictabilitySurface build_surface(const OptionChain& chain, double rate,
                                    const vol::VolEstimate& vol, const SolverOptions& opts) {
    if (chain.quotes.empty()) throw InputError("option chain is empty");
    if (!(chain.spot > 0.0) || !std::isfinite(chain.spot)) throw InputError("spot must be positive");
    if (!std::isfinite(rate)) throw InputError("rate must be finite");
    if (!(vol.sigma_annual > 0.0) || !std::isfinite(vol.sigma_annual)) {
        throw InputError("volatility estimate must be positive");
    }

    PredictabilitySurface s;
    s.method = vol.method;
    s.sigma = vol.sigma_annual;
    s.as_of = chain.quote_date;
    s.spot = chain.spot;
    s.rate = rate;

    std::vector<const OptionQuote*> order;
    order.reserve(chain.quotes.size());
    for (const auto& q : chain.quotes) order.push_back(&q);
    std::stable_sort(order.begin(), order.end(), [](const OptionQuote* a, const OptionQuote* b) {
        return std::pair(a->expiry, a->strike) < std::pair(b->expiry, b->strike);
    });

    std::map<std::pair<double, double>, bool> seen;
    for (const OptionQuote* q : order) {
        auto issue = [&](std::string msg) { s.issues.push_back({q->strike, q->expiry, std::move(msg)}); };
        if (q->right != OptionRight::call) {
            issue("put quote skipped");
            continue;
        }
        if (q->bid == 0.0 && q->ask == 0.0) {
            issue("empty market (bid = ask = 0)");
            continue;
        }
        if (q->bid > q->ask) {
            issue("crossed market (bid > ask)");
            continue;
        }
        if (q->quote_date != chain.quote_date) {
            issue("quote date differs from chain date");
            continue;
        }
        const double tau = act365_years(chain.quote_date, q->expiry);
        if (!(tau > 0.0)) {
            issue("expired or same-day quote");
            continue;
        }
        const double moneyness = chain.spot / q->strike;
        if (seen.contains({moneyness, tau})) {
            issue("duplicate (moneyness, tau) grid point");
            continue;
        }
        try {
            s.points.push_back(implied_excess_predictability(q->mid(), chain.spot, q->strike, tau,
                                                             rate, vol.sigma_annual, opts));
            seen[{moneyness, tau}] = true;
        } catch (const Error& e) {
            issue(e.what());
        }
    }
    return s;
}

std::string SurfaceDiff::label() const {
    return std::string(vol::to_string(other)) + "-" + std::string(vol::to_string(base));
}

SurfaceDiff surface_diff(const PredictabilitySurface& base, const PredictabilitySurface& other) {
    if (base.spot != other.spot || base.rate != other.rate || base.as_of != other.as_of) {
        throw InputError("surfaces must share spot, rate and as-of date");
    }
    std::map<std::pair<double, double>, double> other_p;
    for (const auto& pt : other.points) other_p.emplace(std::pair(pt.moneyness, pt.tau), pt.p);

    SurfaceDiff d;
    d.base = base.method;
    d.other = other.method;
    for (const auto& pt : base.points) {
        const auto it = other_p.find({pt.moneyness, pt.tau});
        if (it != other_p.end()) d.points.push_back({pt.moneyness, pt.tau, it->second - pt.p});
    }
    if (d.points.empty()) throw InputError("surfaces share no grid points");
    return d;
}

}  // namespace predbs::calib
