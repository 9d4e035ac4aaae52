#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fmea {

/// Qualitative value of a variable relative to its normal range.
enum class Value : std::uint8_t { tooLow = 0, normal = 1, tooHigh = 2 };

inline constexpr Value kAllValues[] = {Value::tooLow, Value::normal, Value::tooHigh};

std::string_view to_string(Value v);
std::optional<Value> parse_value(std::string_view text);

/// Subset of {tooLow, normal, tooHigh}, stored as a bit mask.
class ValueSet {
public:
    constexpr ValueSet() = default;
    constexpr ValueSet(std::initializer_list<Value> values) {
        for (Value v : values) insert(v);
    }

    static constexpr ValueSet full() { return {Value::tooLow, Value::normal, Value::tooHigh}; }
    static constexpr ValueSet from_bits(std::uint8_t bits) {
        ValueSet s;
        s.bits_ = bits & 0x7u;
        return s;
    }

    constexpr bool contains(Value v) const { return (bits_ & bit(v)) != 0; }
    constexpr void insert(Value v) { bits_ |= bit(v); }
    constexpr void erase(Value v) { bits_ &= static_cast<std::uint8_t>(~bit(v)); }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr int size() const { return (bits_ & 1) + ((bits_ >> 1) & 1) + ((bits_ >> 2) & 1); }
    constexpr bool is_singleton() const { return size() == 1; }
    constexpr bool subset_of(ValueSet other) const { return (bits_ & ~other.bits_) == 0; }
    constexpr std::uint8_t bits() const { return bits_; }

    /// The only member of a singleton set.
    Value only() const;

    /// Members in canonical order (tooLow, normal, tooHigh).
    std::vector<Value> values() const;

    constexpr auto operator<=>(const ValueSet&) const = default;

private:
    static constexpr std::uint8_t bit(Value v) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(v)); }
    std::uint8_t bits_ = 0;
};

/// "{normal,tooHigh}"
std::string to_string(ValueSet s);

/// Observed result of applying an action to an instance.
enum class Outcome : std::uint8_t { tooLow, normal, tooHigh, success, failure };

std::string_view to_string(Outcome o);
std::optional<Outcome> parse_outcome(std::string_view text);
Outcome outcome_of(Value v);

} // namespace fmea
