#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "predbs/cli.hpp"
#include "predbs/data_io.hpp"
#include "predbs/pricing.hpp"
#include "synthetic.hpp"

using namespace predbs;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "predbs");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

nlohmann::json run_json(std::vector<std::string> args) {
    args.push_back("--format");
    args.push_back("json");
    const auto o = run_cli(args);
    REQUIRE(o.code == 0);
    return nlohmann::json::parse(o.out);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string operator/(const std::string& f) const { return (path / f).string(); }
};

}  // namespace

TEST_CASE("cli price") {
    const auto j = run_json({"price", "--spot", "100", "--strike", "100", "--tau", "1", "--rate", "0.05",
                             "--sigma", "0.2", "--p", "0"});
    CHECK(j["price"].get<double>() == doctest::Approx(10.450583572185566782).epsilon(1e-14));
    CHECK(j["dividend_yield"].get<double>() == 0.0);

    const auto spy = run_json({"price", "--spot", "206.38", "--strike", "200", "--tau", "0.25", "--rate",
                               "0.0212", "--sigma", "0.15", "--p", "0.5"});
    CHECK(spy["price"].get<double>() == doctest::Approx(10.089800497444049505).epsilon(1e-13));

    const auto put = run_json({"price", "--spot", "100", "--strike", "100", "--tau", "1", "--rate", "0.05",
                               "--sigma", "0.2", "--right", "put"});
    CHECK(put["price"].get<double>() ==
          doctest::Approx(pricing::put_price({100, 100, 1, 0.05, 0.2, 0}).price).epsilon(1e-15));

    const auto bad = run_cli({"price", "--spot", "100", "--strike", "100", "--tau", "1", "--rate", "0.05",
                              "--sigma", "0.2", "--p", "2"});
    CHECK(bad.code == cli::kExitUsage);
    CHECK(bad.out.empty());
    CHECK(bad.err.find("[-1, 1]") != std::string::npos);
}

TEST_CASE("cli usage errors") {
    CHECK(run_cli({}).code == cli::kExitUsage);
    CHECK(run_cli({"bogus"}).code == cli::kExitUsage);
    CHECK(run_cli({"price", "--spot", "100"}).code == cli::kExitUsage);
    CHECK(run_cli({"price", "--spot", "100", "--strike", "100", "--tau", "1", "--rate", "0.05", "--sigma",
                   "0.2", "--unknown", "1"})
              .code == cli::kExitUsage);
    CHECK(run_cli({"--format", "xml", "price"}).code == cli::kExitUsage);
    const auto help = run_cli({"--help"});
    CHECK(help.code == cli::kExitOk);
    CHECK(help.out.find("diff-surface") != std::string::npos);
}

TEST_CASE("cli simulate") {
    SUBCASE("Ito drift correction") {
        const auto j = run_json({"simulate", "--alpha", "0", "--mu", "0", "--sigma", "0.2", "--paths", "100000",
                                 "--steps", "4"});
        CHECK(std::abs(j["mean_log_drift"].get<double>() + 0.02) < 3.0 * j["std_error"].get<double>());
        CHECK(j["theoretical_drift"].get<double>() == doctest::Approx(-0.02).epsilon(1e-12));
        CHECK(j["seed"].get<long long>() == 42);
    }
    SUBCASE("Stratonovich cancels it") {
        const auto j = run_json({"simulate", "--alpha", "0.5", "--mu", "0", "--sigma", "0.2", "--paths",
                                 "100000", "--steps", "4", "--seed", "7"});
        CHECK(std::abs(j["mean_log_drift"].get<double>()) < 3.0 * j["std_error"].get<double>());
        CHECK(j["seed"].get<long long>() == 7);
    }
    SUBCASE("no noise") {
        const auto j = run_json({"simulate", "--mu", "0.07", "--sigma", "0", "--paths", "500"});
        CHECK(j["mean_log_drift"].get<double>() == 0.07);
        CHECK(j["std_error"].get<double>() == 0.0);
    }
    CHECK(run_cli({"simulate", "--sigma", "0.2", "--alpha", "1.5"}).code == cli::kExitUsage);
}

TEST_CASE("cli vol and vrp") {
    TempDir dir("predbs_cli_vol");
    {
        // alternating +-s: realized variance 365 s^2 = 0.0225
        const double s = std::sqrt(0.0225 / 365.0);
        vol::ReturnSeries series;
        Date d = *parse_iso_date("2014-01-01");
        for (int i = 0; i < 252; ++i) {
            series.dates.push_back(d);
            series.returns.push_back(i % 2 ? s : -s);
            d += std::chrono::days{1};
        }
        std::ofstream f(dir / "r.csv");
        io::write_return_series(f, series);
    }
    const auto v = run_json({"vrp", "--vix", "25", "--returns", dir / "r.csv"});
    CHECK(v["implied_variance"].get<double>() == 0.0625);
    CHECK(v["realized_variance"].get<double>() == doctest::Approx(0.0225).epsilon(1e-13));
    CHECK(v["vrp"].get<double>() == doctest::Approx(0.04).epsilon(1e-12));

    const auto rv = run_json({"vol", "--method", "realized", "--returns", dir / "r.csv"});
    CHECK(rv["sigma_annual"].get<double>() == doctest::Approx(0.15).epsilon(1e-13));
    const auto vx = run_json({"vol", "--method", "vix", "--vix", "36.5"});
    CHECK(vx["sigma_daily"].get<double>() == doctest::Approx(0.019104973174542800179).epsilon(1e-15));

    CHECK(run_cli({"vol", "--method", "vix"}).code != cli::kExitOk);
    CHECK(run_cli({"vol", "--method", "historical", "--returns", dir / "missing.csv"}).code == cli::kExitDomain);
    CHECK(run_cli({"vol", "--method", "psychic", "--vix", "20"}).code == cli::kExitUsage);
}

TEST_CASE("cli calibrate") {
    const double price = pricing::call_price({206.38, 200, 0.25, 0.0212, 0.15, 0.5}).price;
    std::ostringstream px;
    px.precision(17);
    px << price;
    const auto j = run_json({"calibrate", "--market-price", px.str(), "--spot", "206.38", "--strike", "200",
                             "--tau", "0.25", "--rate", "0.0212", "--sigma", "0.15"});
    CHECK(std::abs(j["p"].get<double>() - 0.5) < 1e-8);
    CHECK(j["clamped"].get<std::string>() == "none");

    const auto rejected = run_cli({"calibrate", "--market-price", "500", "--spot", "206.38", "--strike", "200",
                                   "--tau", "0.25", "--rate", "0.0212", "--sigma", "0.15"});
    CHECK(rejected.code == cli::kExitDomain);
    CHECK_FALSE(rejected.err.empty());
}

TEST_CASE("cli surface and diff-surface") {
    TempDir dir("predbs_cli_surface");
    const Date as_of = *parse_iso_date("2015-01-02");
    const auto chain = predbs::testing::synthetic_chain(206.38, 0.0212, 0.2, as_of, {30, 60, 120, 170},
                                                        predbs::testing::moneyness_grid(0.6, 1.3, 0.05),
                                                        predbs::testing::ramp_p);
    {
        std::ofstream f(dir / "chain.csv");
        io::write_option_chain(f, chain);
    }
    const std::vector<std::string> base_args{"surface", "--chain", dir / "chain.csv", "--spot", "206.38",
                                             "--rate", "0.0212", "--method", "realized", "--sigma", "0.2"};
    auto args = base_args;
    args.insert(args.end(), {"--out", dir / "a.csv"});
    const auto summary = run_cli(args);
    REQUIRE(summary.code == 0);
    CHECK(summary.out.find("points") != std::string::npos);

    const auto read = io::read_surface_files(dir / "a.csv");
    CHECK(read.surface.points.size() == chain.quotes.size());
    for (const auto& pt : read.surface.points) {
        const double target = predbs::testing::ramp_p(pt.moneyness);
        REQUIRE(std::abs(pt.p - target) < 1e-6);
    }

    SUBCASE("identical invocations write identical bytes") {
        auto again = base_args;
        again.insert(again.end(), {"--out", dir / "b.csv"});
        REQUIRE(run_cli(again).code == 0);
        CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
        CHECK(slurp(dir / "a.csv.json") == slurp(dir / "b.csv.json"));
    }

    SUBCASE("diff of a surface with itself") {
        REQUIRE(run_cli({"diff-surface", "--base", dir / "a.csv", "--other", dir / "a.csv", "--out",
                         dir / "d.csv"})
                    .code == 0);
        std::ifstream in(dir / "d.csv");
        std::string line;
        std::getline(in, line);
        CHECK(line == "moneyness,tau_years,dp");
        std::size_t rows = 0;
        while (std::getline(in, line)) {
            ++rows;
            CHECK(line.substr(line.rfind(',') + 1) == "0");
        }
        CHECK(rows == chain.quotes.size());
    }

    SUBCASE("failures") {
        CHECK(run_cli(base_args).code == cli::kExitUsage);  // no --out
        CHECK(run_cli({"diff-surface", "--base", dir / "a.csv", "--other", dir / "nope.csv", "--out",
                       dir / "d.csv"})
                  .code == cli::kExitDomain);
    }
}
