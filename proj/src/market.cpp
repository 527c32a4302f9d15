#include "predbs/market.hpp"

namespace predbs {

std::string_view to_string(OptionRight r) { return r == OptionRight::call ? "call" : "put"; }

std::optional<OptionRight> parse_option_right(std::string_view text) {
    if (text == "call" || text == "C" || text == "c") return OptionRight::call;
    if (text == "put" || text == "P" || text == "p") return OptionRight::put;
    return std::nullopt;
}

}  // namespace predbs
