#include "fmea/sign.hpp"

namespace fmea {

Sign sign_mul(Sign a, Sign b) {
    if (a == Sign::zero || b == Sign::zero) return Sign::zero;
    if (a == Sign::unknown || b == Sign::unknown) return Sign::unknown;
    return a == b ? Sign::plus : Sign::minus;
}

Sign sign_add(Sign a, Sign b) {
    if (a == Sign::unknown || b == Sign::unknown) return Sign::unknown;
    if (a == Sign::zero) return b;
    if (b == Sign::zero) return a;
    return a == b ? a : Sign::unknown;
}

char to_char(Sign s) {
    switch (s) {
    case Sign::plus: return '+';
    case Sign::minus: return '-';
    case Sign::zero: return '0';
    case Sign::unknown: return '?';
    }
    return '?';
}

std::optional<Sign> parse_sign(char c) {
    switch (c) {
    case '+': return Sign::plus;
    case '-': return Sign::minus;
    case '0': return Sign::zero;
    case '?': return Sign::unknown;
    default: return std::nullopt;
    }
}

Sign sign_of(ValueSet poss) {
    if (poss == ValueSet{Value::tooHigh}) return Sign::plus;
    if (poss == ValueSet{Value::tooLow}) return Sign::minus;
    if (poss == ValueSet{Value::normal}) return Sign::zero;
    return Sign::unknown;
}

Sign sign_of(Value v) {
    switch (v) {
    case Value::tooLow: return Sign::minus;
    case Value::tooHigh: return Sign::plus;
    case Value::normal: break;
    }
    return Sign::zero;
}

} // namespace fmea
