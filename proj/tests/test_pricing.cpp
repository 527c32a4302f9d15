#include <doctest.h>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "predbs/error.hpp"
#include "predbs/pricing.hpp"

using namespace predbs;
using namespace predbs::pricing;

namespace {

/// Discounted lognormal expectation of the call payoff, integrated in log-space.
double quadrature_call(const PricingInputs& in) {
    const double q = in.p * in.sigma * in.sigma;
    const double m = std::log(in.spot) + (in.rate - q - 0.5 * in.sigma * in.sigma) * in.tau;
    const double v = in.sigma * std::sqrt(in.tau);
    auto integrand = [&](double x) {
        const double z = (x - m) / v;
        return (std::exp(x) - in.strike) * std::exp(-0.5 * z * z) / (v * std::sqrt(2.0 * M_PI));
    };
    const double lo = std::log(in.strike);
    const double hi = std::max(lo, m) + 14.0 * v;
    const double integral =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, lo, hi, 25, 1e-15);
    return std::exp(-in.rate * in.tau) * integral;
}

}  // namespace

TEST_CASE("dividend yield due to predictability") {
    CHECK(dividend_yield_due_to_predictability(0.0, 0.2) == 0.0);
    CHECK(dividend_yield_due_to_predictability(1.0, 0.2) == doctest::Approx(0.04).epsilon(1e-15));
    CHECK(dividend_yield_due_to_predictability(-1.0, 0.3) == doctest::Approx(-0.09).epsilon(1e-15));
    CHECK_THROWS_AS(dividend_yield_due_to_predictability(1.5, 0.2), InputError);
    CHECK_THROWS_AS(dividend_yield_due_to_predictability(-1.01, 0.2), InputError);
}

TEST_CASE("norm_cdf") {
    CHECK(norm_cdf(0.0) == 0.5);
    CHECK(norm_cdf(8.0) > 1.0 - 1e-15);

    // reference values from 40-digit arithmetic
    CHECK(std::abs(norm_cdf(1.0) - 0.8413447460685429485852) < 1e-15);
    CHECK(std::abs(norm_cdf(-7.0) - 1.279812543885835004e-12) < 1e-15);
    CHECK(std::abs(norm_cdf(-2.5) - 0.006209665325776135167) < 1e-15);
    CHECK(std::abs(norm_cdf(0.7) - 0.7580363477769269714) < 1e-15);
    CHECK(std::abs(norm_cdf(3.5) - 0.9997673709209644750) < 1e-15);

    SUBCASE("quadrature of the density") {
        const double tail = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }, 0.0, 1.0, 5, 1e-16);
        CHECK(std::abs(norm_cdf(1.0) - (0.5 + tail)) < 1e-15);
    }

    SUBCASE("agrees with an independent implementation on a grid") {
        const boost::math::normal_distribution<double> n;
        for (double x = -8.0; x <= 8.0; x += 0.01) {
            REQUIRE(std::abs(norm_cdf(x) - boost::math::cdf(n, x)) <= 1e-15);
        }
    }
}

TEST_CASE("d_plus_minus") {
    SUBCASE("log term vanishes when S = K and q = r") {
        // q = p sigma^2 = 0.05 with sigma = 0.2 needs p = 1.25 > 1, so use
        // sigma = 0.2, p = 1 and r = 0.04 instead
        const auto [dp, dm] = d_plus_minus({100.0, 100.0, 1.0, 0.04, 0.2, 1.0});
        CHECK(dp == doctest::Approx(0.1).epsilon(1e-14));
        CHECK(dm == doctest::Approx(-0.1).epsilon(1e-14));
    }
    SUBCASE("SPY market constants") {
        const auto [dp, dm] = d_plus_minus({206.38, 200.0, 0.25, 0.0212, 0.15, 0.5});
        CHECK(dp == doctest::Approx(0.4893568418604214177).epsilon(1e-14));
        CHECK(dm == doctest::Approx(0.4143568418604214177).epsilon(1e-14));
        CHECK(dp - dm == doctest::Approx(0.15 * 0.5).epsilon(1e-14));
    }
    SUBCASE("p = 0 is the classical non-dividend d") {
        const auto [dp, dm] = d_plus_minus({110.0, 100.0, 0.5, 0.03, 0.25, 0.0});
        const double classical = (std::log(1.1) + (0.03 + 0.5 * 0.0625) * 0.5) / (0.25 * std::sqrt(0.5));
        CHECK(dp == doctest::Approx(classical).epsilon(1e-14));
        CHECK(dm == doctest::Approx(classical - 0.25 * std::sqrt(0.5)).epsilon(1e-14));
    }
    CHECK_THROWS_AS(d_plus_minus({100.0, 100.0, 1.0, 0.0, 0.0, 0.0}), DegenerateInputError);
    CHECK_THROWS_AS(d_plus_minus({100.0, 100.0, 0.0, 0.0, 0.2, 0.0}), DegenerateInputError);
}

TEST_CASE("call_price") {
    const PricingInputs atm{100.0, 100.0, 1.0, 0.05, 0.2, 0.0};
    CHECK(call_price(atm).price == doctest::Approx(10.450583572185566782).epsilon(1e-13));
    CHECK(std::abs(call_price(atm).price - quadrature_call(atm)) / quadrature_call(atm) < 1e-8);

    PricingInputs p1 = atm;
    p1.p = 1.0;
    CHECK(call_price(p1).price == doctest::Approx(8.1026435344632160692).epsilon(1e-13));
    CHECK(call_price(p1).price < call_price(atm).price);
    CHECK(call_price(p1).dividend_yield == doctest::Approx(0.04));

    CHECK(call_price({206.38, 200.0, 0.25, 0.0212, 0.15, 0.5}).price ==
          doctest::Approx(10.089800497444049505).epsilon(1e-13));

    SUBCASE("deterministic limits") {
        CHECK(call_price({120.0, 100.0, 1.0, 0.0, 0.0, 0.0}).price == doctest::Approx(20.0).epsilon(1e-15));
        CHECK(call_price({120.0, 100.0, 1.0, 0.0, 1e-9, 0.0}).price == doctest::Approx(20.0).epsilon(1e-12));
        CHECK(call_price({80.0, 100.0, 1.0, 0.0, 0.0, 0.0}).price == 0.0);
        CHECK(call_price({120.0, 100.0, 0.0, 0.05, 0.3, 0.7}).price == doctest::Approx(20.0).epsilon(1e-15));
    }

    SUBCASE("nonzero p matches the quadrature oracle") {
        for (double p : {-1.0, -0.4, 0.6, 1.0}) {
            PricingInputs in{95.0, 105.0, 0.75, 0.02, 0.35, p};
            CHECK(std::abs(call_price(in).price - quadrature_call(in)) / quadrature_call(in) < 1e-8);
        }
    }

    CHECK_THROWS_AS(call_price({-1.0, 100.0, 1.0, 0.0, 0.2, 0.0}), InputError);
    CHECK_THROWS_AS(call_price({100.0, 0.0, 1.0, 0.0, 0.2, 0.0}), InputError);
    CHECK_THROWS_AS(call_price({100.0, 100.0, 1.0, 0.0, 0.2, 2.0}), InputError);
    CHECK_THROWS_AS(call_price({100.0, 100.0, 1.0, std::nan(""), 0.2, 0.0}), InputError);
}

TEST_CASE("put_price") {
    const PricingInputs sym{100.0, 100.0, 1.0, 0.0, 0.2, 0.0};
    CHECK(put_price(sym).price == doctest::Approx(call_price(sym).price).epsilon(1e-14));
    CHECK(put_price({80.0, 100.0, 1.0, 0.0, 0.0, 0.0}).price == doctest::Approx(20.0).epsilon(1e-15));
    CHECK(put_price({80.0, 100.0, 1.0, 0.0, 1e-9, 0.0}).price == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("properties on a randomized grid") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> spot(50.0, 250.0), mny(0.6, 1.5), tau(0.02, 3.0),
        rate(-0.01, 0.08), sigma(0.05, 0.8), pd(-1.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        PricingInputs in;
        in.spot = spot(rng);
        in.strike = in.spot / mny(rng);
        in.tau = tau(rng);
        in.rate = rate(rng);
        in.sigma = sigma(rng);
        in.p = pd(rng);
        const auto c = call_price(in);
        const auto put = put_price(in);
        const double q = in.p * in.sigma * in.sigma;
        const double fs = in.spot * std::exp(-q * in.tau);
        const double fk = in.strike * std::exp(-in.rate * in.tau);

        // parity
        REQUIRE(std::abs(c.price - put.price - fs + fk) <= 1e-12 * std::max(1.0, in.spot));
        // bounds
        REQUIRE(c.price >= std::max(fs - fk, 0.0) - 1e-12 * in.spot);
        REQUIRE(c.price <= fs);
        // reduction: predictability acts exactly like a discounted spot
        PricingInputs classical = in;
        classical.p = 0.0;
        classical.spot = fs;
        REQUIRE(std::abs(c.price - call_price(classical).price) <= 1e-11 * in.spot);
        // monotonicity in p, spot and strike
        PricingInputs up = in;
        up.p = std::min(1.0, in.p + 0.05);
        if (up.p > in.p) REQUIRE(call_price(up).price < c.price);
        up = in;
        up.spot *= 1.01;
        REQUIRE(call_price(up).price > c.price);
        up = in;
        up.strike *= 1.01;
        REQUIRE(call_price(up).price < c.price);
    }
}

TEST_CASE("dprice_dp") {
    CHECK(dprice_dp({100.0, 100.0, 1.0, 0.05, 0.0, 0.3}) == 0.0);

    const PricingInputs in{100.0, 100.0, 1.0, 0.05, 0.2, 0.0};
    const double h = 1e-5;
    PricingInputs up = in, dn = in;
    up.p += h;
    dn.p -= h;
    const double fd = (call_price(up).price - call_price(dn).price) / (2.0 * h);
    CHECK(dprice_dp(in) < 0.0);
    CHECK(std::abs(dprice_dp(in) - fd) / std::abs(fd) < 1e-6);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> mny(0.7, 1.4), tau(0.05, 2.0), sigma(0.1, 0.6), pd(-0.99, 0.99);
    for (int i = 0; i < 200; ++i) {
        PricingInputs r{100.0, 100.0 / mny(rng), tau(rng), 0.02, sigma(rng), pd(rng)};
        REQUIRE(dprice_dp(r) < 0.0);
        PricingInputs a = r, b = r;
        a.p += h;
        b.p -= h;
        const double f = (call_price(a).price - call_price(b).price) / (2.0 * h);
        REQUIRE(std::abs(dprice_dp(r) - f) <= 1e-6 * std::abs(f) + 1e-9);
    }
}

TEST_CASE("pde_residual") {
    const PricingInputs base{100.0, 100.0, 0.5, 0.05, 0.2, 0.0};
    CHECK(std::abs(pde_residual(base)) <= 1e-6);

    PricingInputs p7 = base;
    p7.p = 0.7;
    CHECK(std::abs(pde_residual(p7)) <= 1e-6);

    SUBCASE("mismatched p is a visible negative control") {
        const double wrong = pde_residual(p7, 0.0, PdeBumps{});
        CHECK(std::abs(wrong) > 1e-2);
        CHECK(std::abs(wrong) > 1e4 * std::abs(pde_residual(p7)));
    }

    PricingInputs near_expiry = base;
    near_expiry.tau = 1e-3;
    CHECK_THROWS_AS(pde_residual(near_expiry), InputError);
}
