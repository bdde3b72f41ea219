// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

namespace intentforge {

/// Exact fixed-point number with four fractional digits.
///
/// Rule evaluation, thresholds and telemetry samples all use this type so
/// that golden outputs never depend on binary floating point.
class Decimal {
public:
    static constexpr std::int64_t kScale = 10000;
    static constexpr int kFractionDigits = 4;

    constexpr Decimal() = default;

    static constexpr Decimal from_int(std::int64_t v) { return Decimal(v * kScale); }
    static constexpr Decimal from_scaled(std::int64_t raw) { return Decimal(raw); }
    /// Rounds to the nearest representable value.
    static Decimal from_double(double v);
    /// Accepts `-?[0-9]+(\.[0-9]{1,4})?`.
    static std::optional<Decimal> parse(std::string_view text);

    constexpr std::int64_t scaled() const { return raw_; }
    constexpr bool is_integer() const { return raw_ % kScale == 0; }
    /// Truncates toward zero.
    constexpr std::int64_t to_int() const { return raw_ / kScale; }
    double to_double() const { return static_cast<double>(raw_) / kScale; }

    /// Minimal decimal text: "20", "12.5", "-0.0001".
    std::string to_string() const;

    Decimal operator+(Decimal o) const;
    Decimal operator-(Decimal o) const;
    Decimal operator*(Decimal o) const;
    /// Throws std::domain_error on division by zero.
    Decimal operator/(Decimal o) const;
    Decimal operator-() const { return Decimal(-raw_); }

    constexpr auto operator<=>(const Decimal&) const = default;

private:
    constexpr explicit Decimal(std::int64_t raw) : raw_(raw) {}
    std::int64_t raw_ = 0;
};

enum class ValueKind { Number, String, Boolean };

std::string_view to_string(ValueKind k);
std::optional<ValueKind> value_kind_from_string(std::string_view s);

/// A characteristic value: number, string or boolean.
class Scalar {
public:
    Scalar() : v_(Decimal{}) {}
    Scalar(Decimal d) : v_(d) {}
    Scalar(std::string s) : v_(std::move(s)) {}
    Scalar(const char* s) : v_(std::string(s)) {}
    Scalar(bool b) : v_(b) {}
    static Scalar number(std::int64_t v) { return Scalar(Decimal::from_int(v)); }

    ValueKind kind() const;
    bool is_number() const { return std::holds_alternative<Decimal>(v_); }
    bool is_string() const { return std::holds_alternative<std::string>(v_); }
    bool is_bool() const { return std::holds_alternative<bool>(v_); }

    Decimal as_number() const { return std::get<Decimal>(v_); }
    const std::string& as_string() const { return std::get<std::string>(v_); }
    bool as_bool() const { return std::get<bool>(v_); }

    /// Human readable form; strings are not quoted.
    std::string to_display() const;

    bool operator==(const Scalar&) const = default;

private:
    std::variant<Decimal, std::string, bool> v_;
};

nlohmann::json to_json_value(const Scalar& s);
/// Numbers map to Decimal, strings and booleans map directly; anything else throws.
Scalar scalar_from_json(const nlohmann::json& j);
nlohmann::json to_json_value(Decimal d);
Decimal decimal_from_json(const nlohmann::json& j);

}  // namespace intentforge
