#include "predbs/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "predbs/calibration.hpp"
#include "predbs/data_io.hpp"
#include "predbs/error.hpp"
#include "predbs/numeric.hpp"
#include "predbs/pricing.hpp"
#include "predbs/sde_sim.hpp"
#include "predbs/volatility.hpp"

namespace predbs::cli {

namespace {

/// Flag combinations CLI11 cannot express; reported like parse errors.
class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class Format { table, csv, json };

using Value = std::variant<std::string, double, long long>;

/// Ordered key/value summary rendered in the selected format.
class Record {
  public:
    Record& add(std::string key, Value v) {
        fields_.emplace_back(std::move(key), std::move(v));
        return *this;
    }

    void render(std::ostream& out, Format fmt) const {
        switch (fmt) {
            case Format::table: {
                std::size_t width = 0;
                for (const auto& [k, v] : fields_) width = std::max(width, k.size());
                for (const auto& [k, v] : fields_) {
                    out << k << std::string(width - k.size() + 2, ' ') << text(v, false) << '\n';
                }
                break;
            }
            case Format::csv: {
                for (std::size_t i = 0; i < fields_.size(); ++i) out << (i ? "," : "") << fields_[i].first;
                out << '\n';
                for (std::size_t i = 0; i < fields_.size(); ++i) {
                    out << (i ? "," : "") << text(fields_[i].second, true);
                }
                out << '\n';
                break;
            }
            case Format::json: {
                nlohmann::ordered_json j = nlohmann::ordered_json::object();
                for (const auto& [k, v] : fields_) {
                    std::visit([&](const auto& x) { j[k] = x; }, v);
                }
                out << j.dump(2) << '\n';
                break;
            }
        }
    }

  private:
    static std::string text(const Value& v, bool exact) {
        if (const auto* s = std::get_if<std::string>(&v)) return *s;
        if (const auto* i = std::get_if<long long>(&v)) return std::to_string(*i);
        const double d = std::get<double>(v);
        if (exact) return io::format_double(d);
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.10g", d);
        return buf;
    }

    std::vector<std::pair<std::string, Value>> fields_;
};

struct Globals {
    std::string out;
    std::string format = "table";
    std::uint64_t seed = 42;

    Format fmt() const {
        if (format == "csv") return Format::csv;
        if (format == "json") return Format::json;
        return Format::table;
    }
};

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path + "'");
    return f;
}

/// Emits the record to --out when given, else to stdout.
void emit(const Record& r, const Globals& g, std::ostream& out) {
    if (g.out.empty()) {
        r.render(out, g.fmt());
    } else {
        auto f = open_out(g.out);
        r.render(f, g.fmt());
    }
}

CLI::Validator predictability_bound() {
    return CLI::Validator(
        [](std::string& s) -> std::string {
            double v = 0.0;
            try {
                std::size_t used = 0;
                v = std::stod(s, &used);
                if (used != s.size()) return "p must be a number";
            } catch (const std::exception&) {
                return "p must be a number";
            }
            if (!(v >= -1.0 && v <= 1.0)) return "excess predictability p must lie in [-1, 1]";
            return {};
        },
        "in [-1, 1]");
}

// ---------------------------------------------------------------------------
// Volatility source shared by vol / surface

struct VolSource {
    std::string method = "historical";
    std::optional<double> sigma;  // explicit annualized override
    std::string returns;
    std::optional<double> vix;
    std::string vix_file;
    std::size_t window = 252;
};

void add_vol_options(CLI::App* cmd, VolSource& v, bool allow_sigma) {
    cmd->add_option("--method", v.method, "Volatility estimator")
        ->check(CLI::IsMember({"vix", "historical", "realized", "garch"}));
    if (allow_sigma) cmd->add_option("--sigma", v.sigma, "Annualized sigma, overrides the estimator")->check(CLI::PositiveNumber);
    cmd->add_option("--returns", v.returns, "Returns CSV (date,log_return or date,close)");
    cmd->add_option("--vix", v.vix, "VIX quote in index points")->check(CLI::NonNegativeNumber);
    cmd->add_option("--vix-file", v.vix_file, "VIX CSV (date,vix_close)");
    cmd->add_option("--window", v.window, "Estimation window in trading days")->check(CLI::PositiveNumber);
}

double vix_from_file(const std::string& path, std::optional<Date> as_of) {
    const auto rows = io::parse_vix_series(std::filesystem::path(path));
    if (!as_of) return rows.back().second;
    std::optional<double> best;
    for (const auto& [d, v] : rows) {
        if (d <= *as_of) best = v;
    }
    if (!best) throw InputError("no VIX close on or before " + format_iso_date(*as_of));
    return *best;
}

vol::VolEstimate resolve_vol(const VolSource& src, std::optional<Date> as_of) {
    const vol::VolMethod method = *vol::parse_vol_method(src.method);
    if (src.sigma) {
        vol::VolEstimate e;
        e.method = method;
        e.sigma_annual = *src.sigma;
        e.sigma_daily = *src.sigma / std::sqrt(vol::kDaysPerYear);
        e.as_of = as_of;
        return e;
    }
    if (method == vol::VolMethod::vix) {
        if (src.vix) return vol::vix_to_sigma(*src.vix, as_of);
        if (!src.vix_file.empty()) return vol::vix_to_sigma(vix_from_file(src.vix_file, as_of), as_of);
        throw UsageError("--method vix needs --vix or --vix-file");
    }
    if (src.returns.empty()) throw UsageError("--method " + src.method + " needs --returns");
    vol::ReturnSeries series = io::parse_return_series(std::filesystem::path(src.returns));
    switch (method) {
        case vol::VolMethod::historical: return vol::historical_vol(series, src.window);
        case vol::VolMethod::realized: return vol::realized_vol(series, src.window);
        case vol::VolMethod::garch: {
            if (src.window > series.size()) throw InputError("estimation window exceeds series length");
            const std::size_t first = series.size() - src.window;
            vol::ReturnSeries tail;
            tail.dates.assign(series.dates.begin() + static_cast<std::ptrdiff_t>(first), series.dates.end());
            tail.returns.assign(series.returns.begin() + static_cast<std::ptrdiff_t>(first), series.returns.end());
            const vol::GarchParams params = vol::fit_ar_garch(tail);
            return vol::garch_forecast_vol(params, tail);
        }
        case vol::VolMethod::vix: break;
    }
    throw UsageError("unsupported volatility method");
}

void add_estimate(Record& r, const vol::VolEstimate& e) {
    r.add("method", std::string(vol::to_string(e.method)))
        .add("sigma_annual", e.sigma_annual)
        .add("sigma_daily", e.sigma_daily)
        .add("window", static_cast<long long>(e.window))
        .add("as_of", e.as_of ? format_iso_date(*e.as_of) : std::string());
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Option pricing and calibration with excess predictability", "predbs"};
    app.require_subcommand(1, 1);

    Globals g;
    app.add_option("--out", g.out, "Output file");
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json", "table"}));
    app.add_option("--seed", g.seed, "Random seed");
    // let the globals appear after the subcommand name as well
    app.fallthrough();

    // price ------------------------------------------------------------------
    pricing::PricingInputs price_in;
    std::string right = "call";
    auto* price = app.add_subcommand("price", "Closed-form call or put price");
    price->add_option("--spot", price_in.spot)->required()->check(CLI::PositiveNumber);
    price->add_option("--strike", price_in.strike)->required()->check(CLI::PositiveNumber);
    price->add_option("--tau", price_in.tau, "Years to maturity")->required()->check(CLI::NonNegativeNumber);
    price->add_option("--rate", price_in.rate)->required();
    price->add_option("--sigma", price_in.sigma, "Annualized volatility")->required()->check(CLI::NonNegativeNumber);
    price->add_option("--p", price_in.p, "Excess predictability")->check(predictability_bound());
    price->add_option("--right", right)->check(CLI::IsMember({"call", "put"}));

    // simulate ---------------------------------------------------------------
    sde::PathSimConfig sim;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo drift of the Stratonovich-alpha GBM");
    simulate->add_option("--mu", sim.mu, "Drift per year");
    simulate->add_option("--sigma", sim.sigma, "Volatility per sqrt-year")->required()->check(CLI::NonNegativeNumber);
    simulate->add_option("--alpha", sim.alpha, "Stratonovich parameter")->check(CLI::Range(0.0, 1.0));
    simulate->add_option("--s0", sim.s0, "Initial price")->check(CLI::PositiveNumber);
    simulate->add_option("--horizon", sim.horizon, "Years")->check(CLI::PositiveNumber);
    simulate->add_option("--steps", sim.steps)->check(CLI::PositiveNumber);
    simulate->add_option("--paths", sim.paths)->check(CLI::PositiveNumber);

    // vol --------------------------------------------------------------------
    VolSource vol_src;
    auto* volcmd = app.add_subcommand("vol", "Estimate sigma from returns or a VIX quote");
    add_vol_options(volcmd, vol_src, false);

    // vrp --------------------------------------------------------------------
    double vrp_vix = 0.0;
    std::string vrp_returns;
    std::size_t vrp_window = 252;
    auto* vrp = app.add_subcommand("vrp", "Variance risk premium: VIX^2 minus realized variance");
    vrp->add_option("--vix", vrp_vix, "VIX quote in index points")->required()->check(CLI::NonNegativeNumber);
    vrp->add_option("--returns", vrp_returns, "Returns CSV")->required();
    vrp->add_option("--window", vrp_window)->check(CLI::PositiveNumber);

    // calibrate --------------------------------------------------------------
    double cal_price = 0.0;
    pricing::PricingInputs cal_in;
    auto* calibrate = app.add_subcommand("calibrate", "Implied excess predictability of one call quote");
    calibrate->add_option("--market-price", cal_price)->required()->check(CLI::PositiveNumber);
    calibrate->add_option("--spot", cal_in.spot)->required()->check(CLI::PositiveNumber);
    calibrate->add_option("--strike", cal_in.strike)->required()->check(CLI::PositiveNumber);
    calibrate->add_option("--tau", cal_in.tau)->required()->check(CLI::PositiveNumber);
    calibrate->add_option("--rate", cal_in.rate)->required();
    calibrate->add_option("--sigma", cal_in.sigma)->required()->check(CLI::PositiveNumber);

    // surface ----------------------------------------------------------------
    std::string chain_path, symbol = "SPY", quote_date;
    double surf_spot = 0.0, surf_rate = 0.0;
    VolSource surf_vol;
    auto* surface = app.add_subcommand("surface", "Implied excess predictability surface of a chain");
    surface->add_option("--chain", chain_path, "Option chain CSV")->required();
    surface->add_option("--spot", surf_spot)->required()->check(CLI::PositiveNumber);
    surface->add_option("--rate", surf_rate)->required();
    surface->add_option("--symbol", symbol);
    surface->add_option("--quote-date", quote_date, "Quote date to use when the file holds several");
    add_vol_options(surface, surf_vol, true);

    // diff-surface -----------------------------------------------------------
    std::string base_path, other_path;
    auto* diff = app.add_subcommand("diff-surface", "p_other - p_base on shared grid points");
    diff->add_option("--base", base_path)->required();
    diff->add_option("--other", other_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, err, err);
        return kExitUsage;
    }

    try {
        if (*price) {
            const auto r = right == "call" ? pricing::call_price(price_in) : pricing::put_price(price_in);
            Record rec;
            rec.add("right", right)
                .add("price", r.price)
                .add("d_plus", r.d_plus)
                .add("d_minus", r.d_minus)
                .add("dividend_yield", r.dividend_yield);
            emit(rec, g, out);
        } else if (*simulate) {
            sim.seed = g.seed;
            const sde::PathBatch batch = sde::simulate_stratonovich_alpha(sim);
            const SampleMoments m = sample_moments(batch.log_returns);
            const double theory = sim.mu + sim.alpha * sim.sigma * sim.sigma - 0.5 * sim.sigma * sim.sigma;
            Record rec;
            rec.add("mean_log_drift", m.mean / sim.horizon)
                .add("std_error", m.std_error / sim.horizon)
                .add("theoretical_drift", theory)
                .add("effective_mu", batch.drift)
                .add("paths", static_cast<long long>(sim.paths))
                .add("steps", static_cast<long long>(sim.steps))
                .add("seed", static_cast<long long>(g.seed));
            emit(rec, g, out);
        } else if (*volcmd) {
            const vol::VolEstimate e = resolve_vol(vol_src, std::nullopt);
            Record rec;
            add_estimate(rec, e);
            emit(rec, g, out);
        } else if (*vrp) {
            const auto series = io::parse_return_series(std::filesystem::path(vrp_returns));
            const vol::VrpResult r = vol::variance_risk_premium(vrp_vix, series, vrp_window);
            Record rec;
            rec.add("implied_variance", r.implied_variance)
                .add("realized_variance", r.realized_variance)
                .add("vrp", r.vrp)
                .add("window", static_cast<long long>(vrp_window));
            emit(rec, g, out);
        } else if (*calibrate) {
            const calib::CalibrationPoint pt = calib::implied_excess_predictability(
                cal_price, cal_in.spot, cal_in.strike, cal_in.tau, cal_in.rate, cal_in.sigma);
            Record rec;
            rec.add("moneyness", pt.moneyness)
                .add("tau_years", pt.tau)
                .add("p", pt.p)
                .add("clamped", std::string(calib::to_string(pt.clamped)))
                .add("market_price", pt.market_price)
                .add("model_price", pt.model_price)
                .add("residual", pt.residual);
            emit(rec, g, out);
        } else if (*surface) {
            if (g.out.empty()) throw UsageError("surface needs --out");
            std::ifstream in(chain_path, std::ios::binary);
            if (!in) throw ParseError("cannot open '" + chain_path + "'");
            io::ChainParseResult parsed = io::parse_option_chains(in, surf_spot, symbol);
            for (const auto& d : parsed.diagnostics) err << chain_path << ": line " << d.line << ": " << d.message << '\n';
            if (parsed.chains.empty()) throw InputError("option chain has no usable rows");
            const OptionChain* chain = nullptr;
            if (!quote_date.empty()) {
                const auto qd = parse_iso_date(quote_date);
                if (!qd) throw UsageError("--quote-date must be YYYY-MM-DD");
                for (const auto& c : parsed.chains) {
                    if (c.quote_date == *qd) chain = &c;
                }
                if (!chain) throw InputError("no quotes dated " + quote_date);
            } else if (parsed.chains.size() == 1) {
                chain = &parsed.chains.front();
            } else {
                throw UsageError("chain holds several quote dates; pick one with --quote-date");
            }

            const vol::VolEstimate est = resolve_vol(surf_vol, chain->quote_date);
            const calib::PredictabilitySurface s = calib::build_surface(*chain, surf_rate, est);
            for (const auto& issue : s.issues) {
                err << "skipped strike " << io::format_double(issue.strike) << " expiry "
                    << format_iso_date(issue.expiry) << ": " << issue.message << '\n';
            }
            io::write_surface_files(g.out, s);

            long long at_minus = 0, at_plus = 0;
            double p_min = 0.0, p_max = 0.0;
            for (std::size_t i = 0; i < s.points.size(); ++i) {
                const auto& pt = s.points[i];
                at_minus += pt.clamped == calib::Clamp::at_minus_one;
                at_plus += pt.clamped == calib::Clamp::at_plus_one;
                p_min = i ? std::min(p_min, pt.p) : pt.p;
                p_max = i ? std::max(p_max, pt.p) : pt.p;
            }
            Record rec;
            rec.add("method", std::string(vol::to_string(s.method)))
                .add("sigma", s.sigma)
                .add("as_of", format_iso_date(s.as_of))
                .add("points", static_cast<long long>(s.points.size()))
                .add("skipped", static_cast<long long>(s.issues.size()))
                .add("clamped_minus_one", at_minus)
                .add("clamped_plus_one", at_plus)
                .add("p_min", p_min)
                .add("p_max", p_max);
            rec.render(out, g.fmt());
        } else if (*diff) {
            if (g.out.empty()) throw UsageError("diff-surface needs --out");
            const auto base = io::read_surface_files(base_path);
            const auto other = io::read_surface_files(other_path);
            for (const auto& w : base.warnings) err << base_path << ": " << w.message << '\n';
            for (const auto& w : other.warnings) err << other_path << ": " << w.message << '\n';
            const calib::SurfaceDiff d = calib::surface_diff(base.surface, other.surface);
            {
                auto f = open_out(g.out);
                io::write_surface_diff(f, d);
            }
            double lo = d.points.front().dp, hi = lo;
            for (const auto& pt : d.points) {
                lo = std::min(lo, pt.dp);
                hi = std::max(hi, pt.dp);
            }
            Record rec;
            rec.add("label", d.label())
                .add("points", static_cast<long long>(d.points.size()))
                .add("dp_min", lo)
                .add("dp_max", hi);
            rec.render(out, g.fmt());
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitDomain;
    }
    return kExitOk;
}

}  // namespace predbs::cli
