#include "fmea/condition.hpp"

#include <cctype>

namespace fmea {

Condition Condition::eq(std::string variable, Value value) {
    Condition c;
    c.op = Op::eq;
    c.variable = std::move(variable);
    c.value = value;
    return c;
}

Condition Condition::uncertain(std::string variable) {
    Condition c;
    c.op = Op::uncertain;
    c.variable = std::move(variable);
    return c;
}

Condition Condition::all_of(std::vector<Condition> children) {
    Condition c;
    c.op = Op::all;
    c.children = std::move(children);
    return c;
}

Condition Condition::any_of(std::vector<Condition> children) {
    Condition c;
    c.op = Op::any;
    c.children = std::move(children);
    return c;
}

Condition Condition::negate(Condition child) {
    Condition c;
    c.op = Op::negate;
    c.children.push_back(std::move(child));
    return c;
}

ConditionSyntaxError::ConditionSyntaxError(const std::string& message, std::size_t offset)
    : std::runtime_error(message + " at offset " + std::to_string(offset)), offset_(offset) {}

namespace {

class ConditionParser {
public:
    explicit ConditionParser(std::string_view text) : text_(text) {}

    Condition parse() {
        Condition c = expression();
        skip_space();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return c;
    }

private:
    Condition expression() {
        std::size_t at = (skip_space(), pos_);
        std::string word = identifier();
        if (word.empty()) fail("expected a condition");
        if (word == "true") return Condition::always();

        expect('(');
        Condition c;
        if (word == "eq") {
            std::string var = identifier();
            if (var.empty()) fail("expected a variable id");
            expect(',');
            std::size_t valueAt = (skip_space(), pos_);
            std::string valueText = identifier();
            auto value = parse_value(valueText);
            if (!value) throw ConditionSyntaxError("unknown value '" + valueText + "'", valueAt);
            c = Condition::eq(std::move(var), *value);
        } else if (word == "uncertain") {
            std::string var = identifier();
            if (var.empty()) fail("expected a variable id");
            c = Condition::uncertain(std::move(var));
        } else if (word == "not") {
            c = Condition::negate(expression());
        } else if (word == "and" || word == "or") {
            std::vector<Condition> children;
            skip_space();
            if (peek() != ')') {
                children.push_back(expression());
                while ((skip_space(), peek() == ',')) {
                    ++pos_;
                    children.push_back(expression());
                }
            }
            c = word == "and" ? Condition::all_of(std::move(children)) : Condition::any_of(std::move(children));
        } else {
            throw ConditionSyntaxError("unknown operator '" + word + "'", at);
        }
        expect(')');
        return c;
    }

    std::string identifier() {
        skip_space();
        std::size_t start = pos_;
        while (pos_ < text_.size()) {
            unsigned char ch = static_cast<unsigned char>(text_[pos_]);
            if (std::isalnum(ch) || ch == '_' || ch == '-' || ch == '.' || ch == ':') ++pos_;
            else break;
        }
        return std::string(text_.substr(start, pos_ - start));
    }

    void expect(char ch) {
        skip_space();
        if (peek() != ch) fail(std::string("expected '") + ch + "'");
        ++pos_;
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    [[noreturn]] void fail(const std::string& message) const { throw ConditionSyntaxError(message, pos_); }

    std::string_view text_;
    std::size_t pos_ = 0;
};

void format_into(const Condition& c, std::string& out) {
    switch (c.op) {
    case Condition::Op::always: out += "true"; return;
    case Condition::Op::eq:
        out += "eq(" + c.variable + "," + std::string(to_string(c.value)) + ")";
        return;
    case Condition::Op::uncertain: out += "uncertain(" + c.variable + ")"; return;
    case Condition::Op::negate:
        out += "not(";
        format_into(c.children.front(), out);
        out += ")";
        return;
    case Condition::Op::all:
    case Condition::Op::any:
        out += c.op == Condition::Op::all ? "and(" : "or(";
        for (std::size_t i = 0; i < c.children.size(); ++i) {
            if (i) out += ',';
            format_into(c.children[i], out);
        }
        out += ")";
        return;
    }
}

void collect(const Condition& c, std::vector<std::string>& out) {
    if (c.op == Condition::Op::eq || c.op == Condition::Op::uncertain) out.push_back(c.variable);
    for (const auto& child : c.children) collect(child, out);
}

} // namespace

Condition parse_condition(std::string_view text) { return ConditionParser(text).parse(); }

std::string format_condition(const Condition& c) {
    std::string out;
    format_into(c, out);
    return out;
}

std::vector<std::string> referenced_variables(const Condition& c) {
    std::vector<std::string> out;
    collect(c, out);
    return out;
}

} // namespace fmea
