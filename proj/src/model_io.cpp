#include "fmea/model_io.hpp"

#include "fmea/errors.hpp"

#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>

namespace fmea {

using nlohmann::json;

namespace {

std::string optional_string(const JsonNode& node, std::string_view key, std::string fallback = {}) {
    auto m = node.optional_member(key);
    return m ? m->as_string() : std::move(fallback);
}

std::vector<JsonNode> optional_array(const JsonNode& node, std::string_view key) {
    auto m = node.optional_member(key);
    return m ? m->elements() : std::vector<JsonNode>{};
}

int risk_value(const JsonNode& node) {
    return node.as_int_in(std::numeric_limits<int>::min() / 2, std::numeric_limits<int>::max() / 2);
}

Value read_value(const JsonNode& node) {
    std::string text = node.as_string();
    auto v = parse_value(text);
    if (!v) node.fail("unknown value '" + text + "', expected tooLow, normal or tooHigh");
    return *v;
}

ValueSet read_range(const JsonNode& node) {
    ValueSet range;
    for (const auto& element : node.elements()) {
        Value v = read_value(element);
        if (range.contains(v)) element.fail("value listed twice");
        range.insert(v);
    }
    return range;
}

std::vector<HierarchyEdge> read_edges(const JsonNode& node) {
    std::vector<HierarchyEdge> edges;
    for (const auto& e : node.elements()) {
        e.expect_keys({"from", "to"});
        edges.push_back({e.member("from").as_string(), e.member("to").as_string()});
    }
    return edges;
}

json write_edges(const std::vector<HierarchyEdge>& edges) {
    json out = json::array();
    for (const auto& e : edges) out.push_back({{"from", e.from}, {"to", e.to}});
    return out;
}

json write_range(ValueSet range) {
    json out = json::array();
    for (Value v : range.values()) out.push_back(std::string(to_string(v)));
    return out;
}

} // namespace

FmeaModel model_from_json(const LocatedJson& doc) {
    JsonNode root = JsonNode::root(doc);
    root.expect_keys({"schemaVersion", "name", "components", "functions", "failures", "actions", "hierarchy",
                      "qualitativeEdges"});
    auto version = root.member("schemaVersion");
    if (version.as_integer() != kSchemaVersion)
        version.fail("unsupported schemaVersion, expected " + std::to_string(kSchemaVersion));

    FmeaModel m;
    m.name = optional_string(root, "name");

    for (const auto& c : root.member("components").elements()) {
        c.expect_keys({"id", "label"});
        m.components.push_back({c.member("id").as_string(), optional_string(c, "label")});
    }

    for (const auto& f : root.member("functions").elements()) {
        f.expect_keys({"id", "label", "component", "variables"});
        Function fn{f.member("id").as_string(), optional_string(f, "label"), f.member("component").as_string()};
        for (const auto& v : optional_array(f, "variables")) {
            v.expect_keys({"id", "label", "range"});
            m.variables.push_back({v.member("id").as_string(), optional_string(v, "label"), fn.id,
                                   read_range(v.member("range"))});
        }
        m.functions.push_back(std::move(fn));
    }

    for (const auto& e : optional_array(root, "failures")) {
        e.expect_keys({"id", "label", "function", "variable", "mode", "sev", "occ", "det", "failureProb"});
        Failure f;
        f.id = e.member("id").as_string();
        f.label = optional_string(e, "label");
        f.function = e.member("function").as_string();
        f.variable = e.member("variable").as_string();
        auto mode = e.member("mode");
        std::string modeText = mode.as_string();
        if (modeText == "leftCritical") f.mode = FailureMode::leftCritical;
        else if (modeText == "rightCritical") f.mode = FailureMode::rightCritical;
        else mode.fail("unknown mode '" + modeText + "', expected leftCritical or rightCritical");
        f.sev = risk_value(e.member("sev"));
        f.occ = risk_value(e.member("occ"));
        f.det = risk_value(e.member("det"));
        if (auto p = e.optional_member("failureProb")) f.failureProb = p->as_number();
        m.failures.push_back(std::move(f));
    }

    for (const auto& a : optional_array(root, "actions")) {
        a.expect_keys({"id", "label", "kind", "cause", "effect", "pre", "post", "probability"});
        Action act;
        act.id = a.member("id").as_string();
        act.label = optional_string(a, "label");
        auto kind = a.member("kind");
        std::string kindText = kind.as_string();
        if (kindText == "detective") act.kind = ActionKind::detective;
        else if (kindText == "preventive") act.kind = ActionKind::preventive;
        else kind.fail("unknown kind '" + kindText + "', expected detective or preventive");
        act.cause = a.member("cause").as_string();
        act.effect = a.member("effect").as_string();
        if (auto pre = a.optional_member("pre")) {
            try {
                act.pre = parse_condition(pre->as_string());
            } catch (const ConditionSyntaxError& ex) {
                pre->fail(std::string("invalid condition: ") + ex.what());
            }
        }
        for (const auto& p : optional_array(a, "post")) {
            p.expect_keys({"variable", "value"});
            act.post.push_back({p.member("variable").as_string(), read_value(p.member("value"))});
        }
        if (auto p = a.optional_member("probability")) act.probability = p->as_number();
        m.actions.push_back(std::move(act));
    }

    if (auto h = root.optional_member("hierarchy")) {
        h->expect_keys({"components", "functions", "failures"});
        if (auto c = h->optional_member("components")) m.componentHierarchy = read_edges(*c);
        if (auto f = h->optional_member("functions")) m.functionHierarchy = read_edges(*f);
        if (auto e = h->optional_member("failures")) m.failureHierarchy = read_edges(*e);
    }

    for (const auto& q : optional_array(root, "qualitativeEdges")) {
        q.expect_keys({"from", "to", "label"});
        auto labelNode = q.member("label");
        std::string label = labelNode.as_string();
        std::optional<Sign> sign = label.size() == 1 ? parse_sign(label[0]) : std::nullopt;
        if (!sign) labelNode.fail("unknown edge label '" + label + "', expected '+', '-' or '?'");
        m.qualitativeEdges.push_back({q.member("from").as_string(), q.member("to").as_string(), *sign});
    }
    return m;
}

FmeaModel parse_model_document(std::string_view text) { return model_from_json(LocatedJson::parse(text)); }

FmeaModel parse_model(std::string_view text) {
    FmeaModel m = parse_model_document(text);
    auto report = validate_model(m);
    if (!report.empty()) throw ValidationError(std::move(report));
    return m;
}

json model_to_json(const FmeaModel& m) {
    json doc;
    doc["schemaVersion"] = kSchemaVersion;
    doc["name"] = m.name;

    doc["components"] = json::array();
    for (const auto& c : m.components) doc["components"].push_back({{"id", c.id}, {"label", c.label}});

    doc["functions"] = json::array();
    for (const auto& f : m.functions) {
        json vars = json::array();
        for (const auto& v : m.variables)
            if (v.function == f.id) vars.push_back({{"id", v.id}, {"label", v.label}, {"range", write_range(v.range)}});
        doc["functions"].push_back({{"id", f.id}, {"label", f.label}, {"component", f.component}, {"variables", vars}});
    }

    doc["failures"] = json::array();
    for (const auto& e : m.failures) {
        doc["failures"].push_back({{"id", e.id},
                                   {"label", e.label},
                                   {"function", e.function},
                                   {"variable", e.variable},
                                   {"mode", std::string(to_string(e.mode))},
                                   {"sev", e.sev},
                                   {"occ", e.occ},
                                   {"det", e.det},
                                   {"failureProb", static_cast<double>(e.failureProb)}});
    }

    doc["actions"] = json::array();
    for (const auto& a : m.actions) {
        json post = json::array();
        for (const auto& p : a.post) post.push_back({{"variable", p.variable}, {"value", std::string(to_string(p.value))}});
        json entry{{"id", a.id},
                   {"label", a.label},
                   {"kind", std::string(to_string(a.kind))},
                   {"cause", a.cause},
                   {"effect", a.effect},
                   {"pre", format_condition(a.pre)},
                   {"post", post}};
        if (a.probability) entry["probability"] = *a.probability;
        doc["actions"].push_back(std::move(entry));
    }

    doc["hierarchy"] = {{"components", write_edges(m.componentHierarchy)},
                        {"functions", write_edges(m.functionHierarchy)},
                        {"failures", write_edges(m.failureHierarchy)}};

    doc["qualitativeEdges"] = json::array();
    for (const auto& q : m.qualitativeEdges)
        doc["qualitativeEdges"].push_back({{"from", q.from}, {"to", q.to}, {"label", std::string(1, to_char(q.label))}});
    return doc;
}

std::string serialize_model(const FmeaModel& model) { return dump_canonical(model_to_json(model)); }

namespace {

std::string dot_quote(std::string_view text) {
    std::string out = "\"";
    for (char c : text) {
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string dot_id(std::string_view id) {
    bool plain = !id.empty() && !std::isdigit(static_cast<unsigned char>(id[0]));
    for (char c : id) plain = plain && (std::isalnum(static_cast<unsigned char>(c)) || c == '_');
    return plain ? std::string(id) : dot_quote(id);
}

std::string dot_label(const std::string& id, const std::string& label) {
    return dot_quote(label.empty() ? id : id + "\n" + label);
}

} // namespace

std::string export_dot(const FmeaModel& m) {
    std::ostringstream out;
    out << "digraph " << dot_quote(m.name.empty() ? "fmea" : m.name) << " {\n";
    out << "  rankdir=BT;\n";
    for (const auto& c : m.components)
        out << "  " << dot_id(c.id) << " [class=\"component\", shape=box3d, label=" << dot_label(c.id, c.label) << "];\n";
    for (const auto& f : m.functions)
        out << "  " << dot_id(f.id) << " [class=\"function\", shape=box, label=" << dot_label(f.id, f.label) << "];\n";
    for (const auto& v : m.variables)
        out << "  " << dot_id(v.id) << " [class=\"variable\", shape=ellipse, label="
            << dot_quote(v.id + "\n" + to_string(v.range)) << "];\n";
    for (const auto& e : m.failures)
        out << "  " << dot_id(e.id) << " [class=\"failure\", shape=octagon, label="
            << dot_quote(e.id + "\nS:" + std::to_string(e.sev) + " O:" + std::to_string(e.occ) +
                         " D:" + std::to_string(e.det))
            << "];\n";
    for (const auto& a : m.actions)
        out << "  " << dot_id(a.id) << " [class=\"action\", shape=" << (a.kind == ActionKind::detective ? "diamond" : "hexagon")
            << ", label=" << dot_label(a.id, a.label) << "];\n";

    for (const auto& e : m.componentHierarchy) out << "  " << dot_id(e.from) << " -> " << dot_id(e.to) << " [class=\"c2c\"];\n";
    for (const auto& f : m.functions) out << "  " << dot_id(f.id) << " -> " << dot_id(f.component) << " [class=\"c2f\", style=dashed];\n";
    for (const auto& e : m.functionHierarchy) out << "  " << dot_id(e.from) << " -> " << dot_id(e.to) << " [class=\"f2f\"];\n";
    for (const auto& v : m.variables) out << "  " << dot_id(v.id) << " -> " << dot_id(v.function) << " [class=\"f2v\", style=dashed];\n";
    for (const auto& e : m.failures) out << "  " << dot_id(e.id) << " -> " << dot_id(e.function) << " [class=\"f2e\", style=dashed];\n";
    for (const auto& e : m.failureHierarchy) out << "  " << dot_id(e.from) << " -> " << dot_id(e.to) << " [class=\"e2e\"];\n";
    for (const auto& a : m.actions) out << "  " << dot_id(a.id) << " -> " << dot_id(a.cause) << " [class=\"a2e\", style=dotted];\n";
    for (const auto& q : m.qualitativeEdges)
        out << "  " << dot_id(q.from) << " -> " << dot_id(q.to) << " [label=\"" << to_char(q.label) << "\"];\n";
    out << "}\n";
    return out.str();
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StructuralError("cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw StructuralError("cannot write '" + path.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw StructuralError("failed writing '" + path.string() + "'");
}

} // namespace fmea
