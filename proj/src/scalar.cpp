// SPDX-License-Identifier: Apache-2.0
#include "intentforge/scalar.hpp"

#include <cmath>
#include <limits>

namespace intentforge {

namespace {

std::int64_t checked(__int128 v) {
    if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
        throw std::overflow_error("decimal overflow");
    }
    return static_cast<std::int64_t>(v);
}

}  // namespace

Decimal Decimal::from_double(double v) {
    return Decimal(checked(static_cast<__int128>(std::llround(v * kScale))));
}

std::optional<Decimal> Decimal::parse(std::string_view text) {
    if (text.empty()) return std::nullopt;
    bool negative = false;
    std::size_t i = 0;
    if (text[0] == '-') {
        negative = true;
        i = 1;
    }
    __int128 whole = 0;
    std::size_t digits = 0;
    for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i, ++digits) {
        whole = whole * 10 + (text[i] - '0');
        if (whole > std::numeric_limits<std::int64_t>::max() / kScale) return std::nullopt;
    }
    if (digits == 0) return std::nullopt;
    __int128 frac = 0;
    if (i < text.size()) {
        if (text[i] != '.') return std::nullopt;
        ++i;
        int fd = 0;
        for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i, ++fd) {
            if (fd >= kFractionDigits) return std::nullopt;
            frac = frac * 10 + (text[i] - '0');
        }
        if (fd == 0 || i != text.size()) return std::nullopt;
        for (; fd < kFractionDigits; ++fd) frac *= 10;
    }
    __int128 raw = whole * kScale + frac;
    return Decimal(static_cast<std::int64_t>(negative ? -raw : raw));
}

std::string Decimal::to_string() const {
    __int128 v = raw_;
    bool negative = v < 0;
    if (negative) v = -v;
    auto whole = static_cast<unsigned long long>(v / kScale);
    auto frac = static_cast<unsigned long long>(v % kScale);
    std::string out = negative ? "-" : "";
    out += std::to_string(whole);
    if (frac != 0) {
        std::string f = std::to_string(frac);
        f.insert(0, kFractionDigits - f.size(), '0');
        while (!f.empty() && f.back() == '0') f.pop_back();
        out += '.';
        out += f;
    }
    return out;
}

Decimal Decimal::operator+(Decimal o) const { return Decimal(checked(static_cast<__int128>(raw_) + o.raw_)); }
Decimal Decimal::operator-(Decimal o) const { return Decimal(checked(static_cast<__int128>(raw_) - o.raw_)); }
Decimal Decimal::operator*(Decimal o) const {
    return Decimal(checked(static_cast<__int128>(raw_) * o.raw_ / kScale));
}
Decimal Decimal::operator/(Decimal o) const {
    if (o.raw_ == 0) throw std::domain_error("division by zero");
    return Decimal(checked(static_cast<__int128>(raw_) * kScale / o.raw_));
}

std::string_view to_string(ValueKind k) {
    switch (k) {
        case ValueKind::Number: return "number";
        case ValueKind::String: return "string";
        case ValueKind::Boolean: return "boolean";
    }
    return "?";
}

std::optional<ValueKind> value_kind_from_string(std::string_view s) {
    if (s == "number") return ValueKind::Number;
    if (s == "string") return ValueKind::String;
    if (s == "boolean") return ValueKind::Boolean;
    return std::nullopt;
}

ValueKind Scalar::kind() const {
    if (is_number()) return ValueKind::Number;
    if (is_string()) return ValueKind::String;
    return ValueKind::Boolean;
}

std::string Scalar::to_display() const {
    if (is_number()) return as_number().to_string();
    if (is_string()) return as_string();
    return as_bool() ? "true" : "false";
}

nlohmann::json to_json_value(Decimal d) {
    if (d.is_integer()) return d.to_int();
    return d.to_double();
}

Decimal decimal_from_json(const nlohmann::json& j) {
    if (j.is_number_integer()) return Decimal::from_int(j.get<std::int64_t>());
    if (j.is_number_float()) return Decimal::from_double(j.get<double>());
    if (j.is_string()) {
        if (auto d = Decimal::parse(j.get<std::string>())) return *d;
    }
    throw std::invalid_argument("expected a number, got " + j.dump());
}

nlohmann::json to_json_value(const Scalar& s) {
    if (s.is_number()) return to_json_value(s.as_number());
    if (s.is_string()) return s.as_string();
    return s.as_bool();
}

Scalar scalar_from_json(const nlohmann::json& j) {
    if (j.is_boolean()) return Scalar(j.get<bool>());
    if (j.is_string()) return Scalar(j.get<std::string>());
    if (j.is_number()) return Scalar(decimal_from_json(j));
    throw std::invalid_argument("expected a scalar, got " + j.dump());
}

}  // namespace intentforge
