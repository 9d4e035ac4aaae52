#pragma once

#include "fmea/value.hpp"

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fmea {

/// Boolean precondition over variable atoms.
///
/// Atoms are `eq(v, x)` (v is known to be x) and `uncertain(v)` (v has more
/// than one possible value). Text form is a prefix grammar:
///
///     cond := "true" | "eq(" id "," value ")" | "uncertain(" id ")"
///           | "and(" [cond {"," cond}] ")" | "or(" [cond {"," cond}] ")"
///           | "not(" cond ")"
///
/// `and()` is true and `or()` is false.
struct Condition {
    enum class Op { always, eq, uncertain, all, any, negate };

    Op op = Op::always;
    std::string variable;
    Value value = Value::normal;
    std::vector<Condition> children;

    static Condition always() { return {}; }
    static Condition eq(std::string variable, Value value);
    static Condition uncertain(std::string variable);
    static Condition all_of(std::vector<Condition> children);
    static Condition any_of(std::vector<Condition> children);
    static Condition negate(Condition child);

    bool operator==(const Condition&) const = default;
};

/// Thrown by parse_condition; offset is a byte index into the input.
class ConditionSyntaxError : public std::runtime_error {
public:
    ConditionSyntaxError(const std::string& message, std::size_t offset);
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

Condition parse_condition(std::string_view text);

/// Canonical text: no whitespace, e.g. "and(eq(v1,tooHigh),uncertain(v2))".
std::string format_condition(const Condition& c);

/// Variable ids referenced anywhere in the condition, in order of appearance.
std::vector<std::string> referenced_variables(const Condition& c);

} // namespace fmea
