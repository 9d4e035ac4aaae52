#include "fmea/errors.hpp"
#include "fmea/model.hpp"
#include "fmea/state.hpp"
#include "fmea/value.hpp"

#include <sstream>

namespace fmea {

std::string_view to_string(Value v) {
    switch (v) {
    case Value::tooLow: return "tooLow";
    case Value::normal: return "normal";
    case Value::tooHigh: return "tooHigh";
    }
    return "?";
}

std::optional<Value> parse_value(std::string_view text) {
    for (Value v : kAllValues)
        if (to_string(v) == text) return v;
    return std::nullopt;
}

Value ValueSet::only() const {
    if (!is_singleton()) throw StructuralError("possibility set " + to_string(*this) + " is not a singleton");
    for (Value v : kAllValues)
        if (contains(v)) return v;
    return Value::normal;
}

std::vector<Value> ValueSet::values() const {
    std::vector<Value> out;
    for (Value v : kAllValues)
        if (contains(v)) out.push_back(v);
    return out;
}

std::string to_string(ValueSet s) {
    std::string out = "{";
    bool first = true;
    for (Value v : s.values()) {
        if (!first) out += ',';
        out += to_string(v);
        first = false;
    }
    return out + "}";
}

std::string_view to_string(Outcome o) {
    switch (o) {
    case Outcome::tooLow: return "tooLow";
    case Outcome::normal: return "normal";
    case Outcome::tooHigh: return "tooHigh";
    case Outcome::success: return "success";
    case Outcome::failure: return "failure";
    }
    return "?";
}

std::optional<Outcome> parse_outcome(std::string_view text) {
    for (Outcome o : {Outcome::tooLow, Outcome::normal, Outcome::tooHigh, Outcome::success, Outcome::failure})
        if (to_string(o) == text) return o;
    return std::nullopt;
}

Outcome outcome_of(Value v) {
    switch (v) {
    case Value::tooLow: return Outcome::tooLow;
    case Value::tooHigh: return Outcome::tooHigh;
    case Value::normal: break;
    }
    return Outcome::normal;
}

bool State::well_formed() const {
    for (ValueSet p : poss)
        if (p.empty()) return false;
    return true;
}

std::string to_string(const State& s) {
    std::string out = "<";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ',';
        out += to_string(s[i]);
    }
    return out + ">";
}

std::size_t StateHash::operator()(const State& s) const noexcept {
    // FNV-1a over the 3-bit masks.
    std::size_t h = 1469598103934665603ull;
    for (ValueSet p : s.poss) {
        h ^= p.bits();
        h *= 1099511628211ull;
    }
    return h;
}

ValidationError::ValidationError(std::vector<Violation> report)
    : Error([&] {
          std::ostringstream msg;
          msg << "model validation failed with " << report.size() << " violation(s)";
          if (!report.empty()) msg << "; first: " << report.front().rule << ": " << report.front().message;
          return msg.str();
      }()),
      report_(std::move(report)) {}

CapacityError::CapacityError(std::size_t limit)
    : Error("state space exceeds the limit of " + std::to_string(limit) + " states"), limit_(limit) {}

IterationLimitError::IterationLimitError(int iterations, double residual)
    : Error("value iteration did not converge within " + std::to_string(iterations) +
            " iterations (last residual " + std::to_string(residual) + ")"),
      iterations_(iterations), residual_(residual) {}

MissingOutcomeError::MissingOutcomeError(std::string action)
    : Error("patient data has no outcome left for action '" + action + "'"), action_(std::move(action)) {}

ParseError::ParseError(Kind kind, std::string message, std::size_t line, std::size_t column, std::string pointer)
    : Error([&] {
          std::ostringstream msg;
          msg << (kind == Kind::syntax ? "syntax error" : "schema violation") << " at line " << line << ", column "
              << column;
          if (!pointer.empty()) msg << " (" << pointer << ")";
          msg << ": " << message;
          return msg.str();
      }()),
      kind_(kind), detail_(std::move(message)), line_(line), column_(column), pointer_(std::move(pointer)) {}

} // namespace fmea
