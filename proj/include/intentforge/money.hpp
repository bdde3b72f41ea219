// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace intentforge {

/// Euro amount in integer cents.
struct Money {
    std::int64_t cents = 0;

    static constexpr Money euros(std::int64_t e) { return Money{e * 100}; }

    Money operator+(Money o) const { return Money{cents + o.cents}; }
    Money operator*(std::int64_t n) const { return Money{cents * n}; }
    Money& operator+=(Money o) {
        cents += o.cents;
        return *this;
    }
    auto operator<=>(const Money&) const = default;

    /// "7100.00 EUR"
    std::string to_string() const;
    /// "7100.00"
    std::string amount_text() const;
};

/// `{amount: cents, currency: "EUR"}`
nlohmann::json to_json(Money m);
Money money_from_json(const nlohmann::json& j);

/// Parses "9000", "9,000", "9000.50", "9.000,00" is not supported.
std::optional<Money> parse_money_amount(std::string_view text);

}  // namespace intentforge
