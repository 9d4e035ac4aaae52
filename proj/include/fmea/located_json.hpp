#pragma once

#include <json.hpp>

#include <cstddef>
#include <initializer_list>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fmea {

struct SourceLocation {
    std::size_t line = 1;
    std::size_t column = 1;
};

std::string pointer_append(const std::string& base, std::string_view token);
std::string pointer_append(const std::string& base, std::size_t index);

/// JSON document that remembers where each value started in the source text.
///
/// Duplicate object keys and whitespace-only input are rejected as schema
/// violations; malformed JSON raises a syntax ParseError.
class LocatedJson {
public:
    static LocatedJson parse(std::string_view text);
    /// Wraps an in-memory value; every location reports line 1, column 1.
    static LocatedJson wrap(nlohmann::json value);

    const nlohmann::json& root() const { return root_; }

    /// Location of the value at `pointer`, or of its closest recorded ancestor.
    SourceLocation locate(const std::string& pointer) const;

    /// Throws a schema ParseError located at `pointer`.
    [[noreturn]] void fail(const std::string& pointer, const std::string& message) const;

private:
    nlohmann::json root_;
    std::map<std::string, SourceLocation> locations_;
    friend class LocatingHandler;
};

/// Read cursor over a LocatedJson value; every accessor reports type errors
/// as schema violations at the value's location.
class JsonNode {
public:
    JsonNode(const LocatedJson& doc, const nlohmann::json& value, std::string pointer)
        : doc_(&doc), value_(&value), pointer_(std::move(pointer)) {}

    static JsonNode root(const LocatedJson& doc) { return JsonNode(doc, doc.root(), ""); }

    const std::string& pointer() const { return pointer_; }
    const nlohmann::json& raw() const { return *value_; }
    bool is_null() const { return value_->is_null(); }

    JsonNode member(std::string_view key) const;
    std::optional<JsonNode> optional_member(std::string_view key) const;
    /// Rejects members outside `allowed`. Also checks that this is an object.
    void expect_keys(std::initializer_list<std::string_view> allowed) const;
    std::vector<std::pair<std::string, JsonNode>> members() const;
    std::vector<JsonNode> elements() const;

    std::string as_string() const;
    bool as_bool() const;
    double as_number() const;
    long long as_integer() const;
    /// as_integer() restricted to [lo, hi].
    int as_int_in(int lo, int hi) const;
    std::size_t as_index() const;

    [[noreturn]] void fail(const std::string& message) const { doc_->fail(pointer_, message); }

private:
    void expect_object() const;

    const LocatedJson* doc_;
    const nlohmann::json* value_;
    std::string pointer_;
};

/// Two-space indented dump with a trailing newline; object keys come out sorted.
std::string dump_canonical(const nlohmann::json& value);

} // namespace fmea
