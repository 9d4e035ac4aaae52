#pragma once

#include "fmea/value.hpp"

#include <cstdint>
#include <optional>

namespace fmea {

/// Qualitative sign used for influence propagation.
enum class Sign : std::uint8_t { plus, minus, zero, unknown };

inline constexpr Sign kAllSigns[] = {Sign::plus, Sign::minus, Sign::zero, Sign::unknown};

/// Sign multiplication: combines a sign with an edge label.
Sign sign_mul(Sign a, Sign b);

/// Sign addition: combines parallel influences.
Sign sign_add(Sign a, Sign b);

/// '+', '-', '0' or '?'.
char to_char(Sign s);
std::optional<Sign> parse_sign(char c);

/// '+' for {tooHigh}, '-' for {tooLow}, '0' for {normal}, '?' otherwise.
Sign sign_of(ValueSet poss);

/// '-' for tooLow, '+' for tooHigh, '0' for normal.
Sign sign_of(Value v);

} // namespace fmea
