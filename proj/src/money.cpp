// SPDX-License-Identifier: Apache-2.0
#include "intentforge/money.hpp"

#include <stdexcept>

namespace intentforge {

std::string Money::amount_text() const {
    std::int64_t v = cents < 0 ? -cents : cents;
    std::string frac = std::to_string(v % 100);
    if (frac.size() < 2) frac.insert(0, "0");
    return (cents < 0 ? "-" : "") + std::to_string(v / 100) + "." + frac;
}

std::string Money::to_string() const { return amount_text() + " EUR"; }

nlohmann::json to_json(Money m) { return {{"amount", m.cents}, {"currency", "EUR"}}; }

Money money_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("amount") || !j.at("amount").is_number_integer()) {
        throw std::invalid_argument("money must be {amount: integer cents, currency}");
    }
    if (j.contains("currency") && j.at("currency") != "EUR") {
        throw std::invalid_argument("unsupported currency " + j.at("currency").dump());
    }
    return Money{j.at("amount").get<std::int64_t>()};
}

std::optional<Money> parse_money_amount(std::string_view text) {
    std::int64_t whole = 0;
    std::size_t i = 0;
    std::size_t digits = 0;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c >= '0' && c <= '9') {
            whole = whole * 10 + (c - '0');
            ++digits;
            if (whole > 100'000'000'000LL) return std::nullopt;
        } else if (c == ',' && digits > 0) {
            continue;
        } else {
            break;
        }
    }
    if (digits == 0) return std::nullopt;
    std::int64_t frac = 0;
    if (i < text.size() && text[i] == '.') {
        ++i;
        int fd = 0;
        for (; i < text.size() && fd < 2 && text[i] >= '0' && text[i] <= '9'; ++i, ++fd) {
            frac = frac * 10 + (text[i] - '0');
        }
        if (fd == 0) return std::nullopt;
        if (fd == 1) frac *= 10;
    }
    if (i != text.size()) return std::nullopt;
    return Money{whole * 100 + frac};
}

}  // namespace intentforge
