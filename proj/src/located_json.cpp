#include "fmea/located_json.hpp"

#include "fmea/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iterator>
#include <set>

namespace fmea {

std::string pointer_append(const std::string& base, std::string_view token) {
    std::string out = base + "/";
    for (char c : token) {
        if (c == '~') out += "~0";
        else if (c == '/') out += "~1";
        else out += c;
    }
    return out;
}

std::string pointer_append(const std::string& base, std::size_t index) { return base + "/" + std::to_string(index); }

namespace {

/// Character iterator that records how far the parser has read.
class CountingIterator {
public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = char;
    using difference_type = std::ptrdiff_t;
    using pointer = const char*;
    using reference = const char&;

    CountingIterator() = default;
    CountingIterator(const char* base, const char* p, std::size_t* consumed) : base_(base), p_(p), consumed_(consumed) {}

    reference operator*() const { return *p_; }
    CountingIterator& operator++() {
        ++p_;
        if (consumed_) *consumed_ = static_cast<std::size_t>(p_ - base_);
        return *this;
    }
    CountingIterator operator++(int) {
        CountingIterator old = *this;
        ++*this;
        return old;
    }
    bool operator==(const CountingIterator& other) const { return p_ == other.p_; }
    bool operator!=(const CountingIterator& other) const { return p_ != other.p_; }

private:
    const char* base_ = nullptr;
    const char* p_ = nullptr;
    std::size_t* consumed_ = nullptr;
};

SourceLocation location_at(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    SourceLocation loc;
    for (std::size_t i = 0; i < offset; ++i) {
        if (text[i] == '\n') {
            ++loc.line;
            loc.column = 1;
        } else {
            ++loc.column;
        }
    }
    return loc;
}

bool is_number_char(char c) { return std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.' || c == 'e' || c == 'E'; }

} // namespace

class LocatingHandler {
public:
    using json = nlohmann::json;
    using number_integer_t = json::number_integer_t;
    using number_unsigned_t = json::number_unsigned_t;
    using number_float_t = json::number_float_t;
    using string_t = json::string_t;
    using binary_t = json::binary_t;

    LocatingHandler(std::string_view text, LocatedJson& doc) : text_(text), doc_(doc) {}

    std::size_t consumed = 0;

    bool null() { return scalar(json(nullptr), literal_start(4)); }
    bool boolean(bool v) { return scalar(json(v), literal_start(v ? 4 : 5)); }
    bool number_integer(number_integer_t v) { return scalar(json(v), number_start()); }
    bool number_unsigned(number_unsigned_t v) { return scalar(json(v), number_start()); }
    bool number_float(number_float_t v, const string_t&) { return scalar(json(v), number_start()); }
    bool string(string_t& v) { return scalar(json(std::move(v)), string_start()); }
    bool binary(binary_t&) { return false; }

    bool start_object(std::size_t) { return open(json::object(), true); }
    bool start_array(std::size_t) { return open(json::array(), false); }
    bool end_object() { return close(); }
    bool end_array() { return close(); }

    bool key(string_t& k) {
        Frame& frame = stack_.back();
        std::string pointer = pointer_append(frame.pointer, k);
        if (!frame.keys.insert(k).second)
            throw ParseError(ParseError::Kind::schema, "duplicate key '" + k + "'",
                             location_at(text_, string_start()).line, location_at(text_, string_start()).column,
                             pointer);
        frame.pendingKey = std::move(k);
        return true;
    }

    bool parse_error(std::size_t position, const std::string&, const nlohmann::detail::exception& ex) {
        std::string message = ex.what();
        auto at = message.find("syntax error");
        if (at != std::string::npos) message = message.substr(at);
        auto loc = location_at(text_, position > 0 ? position - 1 : 0);
        throw ParseError(ParseError::Kind::syntax, message, loc.line, loc.column, current_pointer());
    }

private:
    struct Frame {
        json* node;
        bool object;
        std::string pointer;
        std::string pendingKey;
        std::set<std::string> keys;
    };

    std::size_t literal_start(std::size_t length) const { return consumed >= length ? consumed - length : 0; }

    std::size_t number_start() const {
        std::size_t end = consumed;
        while (end > 0 && !is_number_char(text_[end - 1])) --end;
        std::size_t start = end;
        while (start > 0 && is_number_char(text_[start - 1])) --start;
        return start;
    }

    std::size_t string_start() const {
        if (consumed < 2) return 0;
        for (std::size_t i = consumed - 1; i-- > 0;) {
            if (text_[i] != '"') continue;
            std::size_t slashes = 0;
            while (slashes < i && text_[i - 1 - slashes] == '\\') ++slashes;
            if (slashes % 2 == 0) return i;
        }
        return 0;
    }

    std::string current_pointer() const {
        if (stack_.empty()) return "";
        const Frame& f = stack_.back();
        if (f.object) return f.pendingKey.empty() ? f.pointer : pointer_append(f.pointer, f.pendingKey);
        return pointer_append(f.pointer, f.node->size());
    }

    json* place(json value, std::size_t start, std::string& pointer) {
        json* slot;
        if (stack_.empty()) {
            doc_.root_ = std::move(value);
            slot = &doc_.root_;
            pointer = "";
        } else {
            Frame& f = stack_.back();
            if (f.object) {
                pointer = pointer_append(f.pointer, f.pendingKey);
                slot = &((*f.node)[f.pendingKey] = std::move(value));
                f.pendingKey.clear();
            } else {
                pointer = pointer_append(f.pointer, f.node->size());
                f.node->push_back(std::move(value));
                slot = &f.node->back();
            }
        }
        doc_.locations_[pointer] = location_at(text_, start);
        return slot;
    }

    bool scalar(json value, std::size_t start) {
        std::string pointer;
        place(std::move(value), start, pointer);
        return true;
    }

    bool open(json value, bool object) {
        std::string pointer;
        json* slot = place(std::move(value), consumed > 0 ? consumed - 1 : 0, pointer);
        stack_.push_back({slot, object, pointer, {}, {}});
        return true;
    }

    bool close() {
        stack_.pop_back();
        return true;
    }

    std::string_view text_;
    LocatedJson& doc_;
    std::vector<Frame> stack_;
};

LocatedJson LocatedJson::parse(std::string_view text) {
    LocatedJson doc;
    if (std::all_of(text.begin(), text.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); }))
        throw ParseError(ParseError::Kind::schema, "empty document", 1, 1, "");

    LocatingHandler handler(text, doc);
    CountingIterator first(text.data(), text.data(), &handler.consumed);
    CountingIterator last(text.data(), text.data() + text.size(), nullptr);
    nlohmann::json::sax_parse(first, last, &handler);
    return doc;
}

LocatedJson LocatedJson::wrap(nlohmann::json value) {
    LocatedJson doc;
    doc.root_ = std::move(value);
    return doc;
}

SourceLocation LocatedJson::locate(const std::string& pointer) const {
    std::string p = pointer;
    while (true) {
        auto it = locations_.find(p);
        if (it != locations_.end()) return it->second;
        auto slash = p.rfind('/');
        if (slash == std::string::npos) return {};
        p.resize(slash);
    }
}

void LocatedJson::fail(const std::string& pointer, const std::string& message) const {
    auto loc = locate(pointer);
    throw ParseError(ParseError::Kind::schema, message, loc.line, loc.column, pointer);
}

// ---------------------------------------------------------------------------

namespace {

std::string type_name(const nlohmann::json& v) { return v.type_name(); }

} // namespace

void JsonNode::expect_object() const {
    if (!value_->is_object()) fail("expected an object, found " + type_name(*value_));
}

JsonNode JsonNode::member(std::string_view key) const {
    expect_object();
    auto it = value_->find(key);
    if (it == value_->end()) fail("missing required member '" + std::string(key) + "'");
    return JsonNode(*doc_, *it, pointer_append(pointer_, key));
}

std::optional<JsonNode> JsonNode::optional_member(std::string_view key) const {
    expect_object();
    auto it = value_->find(key);
    if (it == value_->end()) return std::nullopt;
    return JsonNode(*doc_, *it, pointer_append(pointer_, key));
}

void JsonNode::expect_keys(std::initializer_list<std::string_view> allowed) const {
    expect_object();
    for (const auto& [key, value] : value_->items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            doc_->fail(pointer_append(pointer_, key), "unknown member '" + key + "'");
    }
}

std::vector<std::pair<std::string, JsonNode>> JsonNode::members() const {
    expect_object();
    std::vector<std::pair<std::string, JsonNode>> out;
    for (const auto& [key, value] : value_->items())
        out.emplace_back(key, JsonNode(*doc_, value, pointer_append(pointer_, key)));
    return out;
}

std::vector<JsonNode> JsonNode::elements() const {
    if (!value_->is_array()) fail("expected an array, found " + type_name(*value_));
    std::vector<JsonNode> out;
    for (std::size_t i = 0; i < value_->size(); ++i) out.emplace_back(*doc_, (*value_)[i], pointer_append(pointer_, i));
    return out;
}

std::string JsonNode::as_string() const {
    if (!value_->is_string()) fail("expected a string, found " + type_name(*value_));
    return value_->get<std::string>();
}

bool JsonNode::as_bool() const {
    if (!value_->is_boolean()) fail("expected a boolean, found " + type_name(*value_));
    return value_->get<bool>();
}

double JsonNode::as_number() const {
    if (!value_->is_number()) fail("expected a number, found " + type_name(*value_));
    return value_->get<double>();
}

long long JsonNode::as_integer() const {
    if (value_->is_number_integer()) {
        if (value_->is_number_unsigned() && value_->get<unsigned long long>() > 9007199254740992ull)
            fail("integer out of range");
        return value_->get<long long>();
    }
    if (value_->is_number_float()) {
        double d = value_->get<double>();
        if (std::isfinite(d) && d == std::floor(d) && std::abs(d) <= 9007199254740992.0)
            return static_cast<long long>(d);
    }
    fail("expected an integer, found " + type_name(*value_));
}

int JsonNode::as_int_in(int lo, int hi) const {
    long long v = as_integer();
    if (v < lo || v > hi) fail("expected an integer in " + std::to_string(lo) + ".." + std::to_string(hi));
    return static_cast<int>(v);
}

std::size_t JsonNode::as_index() const {
    long long v = as_integer();
    if (v < 0) fail("expected a non-negative integer");
    return static_cast<std::size_t>(v);
}

std::string dump_canonical(const nlohmann::json& value) { return value.dump(2) + "\n"; }

} // namespace fmea
