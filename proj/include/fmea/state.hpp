#pragma once

#include "fmea/value.hpp"

#include <compare>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace fmea {

/// One possibility set per variable, in model declaration order.
struct State {
    std::vector<ValueSet> poss;

    std::size_t size() const { return poss.size(); }
    ValueSet& operator[](std::size_t i) { return poss[i]; }
    const ValueSet& operator[](std::size_t i) const { return poss[i]; }

    /// True if no component is empty.
    bool well_formed() const;

    auto operator<=>(const State&) const = default;
};

/// "<{normal,tooHigh},{tooLow}>"
std::string to_string(const State& s);

struct StateHash {
    std::size_t operator()(const State& s) const noexcept;
};

} // namespace fmea
