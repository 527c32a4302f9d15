#pragma once

#include <string>
#include <string_view>
#include <optional>
#include <vector>

#include "predbs/dates.hpp"

namespace predbs {

enum class OptionRight { call, put };

std::string_view to_string(OptionRight r);
std::optional<OptionRight> parse_option_right(std::string_view text);

/// One bid/ask row of an option chain.
struct OptionQuote {
    Date quote_date;
    Date expiry;
    double strike = 0.0;
    OptionRight right = OptionRight::call;
    double bid = 0.0;
    double ask = 0.0;

    double mid() const noexcept { return 0.5 * (bid + ask); }
};

/// Quotes for one underlying on one quote date.
struct OptionChain {
    Date quote_date;
    std::string symbol;
    double spot = 0.0;
    std::vector<OptionQuote> quotes;
};

}  // namespace predbs
