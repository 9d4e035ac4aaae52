#include "test_support.hpp"

#include "fmea/model_io.hpp"

#include <algorithm>
#include <set>

#ifndef FMEA_FIXTURE_DIR
#error "FMEA_FIXTURE_DIR must be defined"
#endif

namespace fmea::testing {

namespace {

int uniform(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

bool coin(std::mt19937_64& rng, double p = 0.5) {
    return std::bernoulli_distribution(p)(rng);
}

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& items) {
    return items[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(items.size()) - 1))];
}

ValueSet random_subset(std::mt19937_64& rng, ValueSet of) {
    auto values = of.values();
    for (;;) {
        ValueSet s;
        for (Value v : values)
            if (coin(rng)) s.insert(v);
        if (!s.empty()) return s;
    }
}

std::vector<HierarchyEdge> random_tree(std::mt19937_64& rng, const std::vector<std::string>& ids) {
    std::vector<HierarchyEdge> edges;
    for (std::size_t i = 1; i < ids.size(); ++i) {
        auto parent = ids[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(i) - 1))];
        if (coin(rng)) edges.push_back({ids[i], parent});
        else edges.push_back({parent, ids[i]});
    }
    return edges;
}

Condition random_condition(std::mt19937_64& rng, const FmeaModel& m, int depth = 0) {
    const Variable& v = pick(rng, m.variables);
    int kind = uniform(rng, 0, depth > 1 ? 2 : 5);
    switch (kind) {
    case 0: return Condition::always();
    case 1: return Condition::eq(v.id, pick(rng, v.range.values()));
    case 2: return Condition::uncertain(v.id);
    case 3: return Condition::negate(random_condition(rng, m, depth + 1));
    case 4: return Condition::all_of({random_condition(rng, m, depth + 1), random_condition(rng, m, depth + 1)});
    default: return Condition::any_of({random_condition(rng, m, depth + 1), random_condition(rng, m, depth + 1)});
    }
}

} // namespace

std::filesystem::path fixture_path(const std::string& name) {
    return std::filesystem::path(FMEA_FIXTURE_DIR) / name;
}

std::string fixture_text(const std::string& name) {
    return read_file(fixture_path(name));
}

FmeaModel fixture_model(const std::string& name) {
    return parse_model(fixture_text(name));
}

CompiledModelPtr fixture_compiled(const std::string& name) {
    return compile(fixture_model(name));
}

std::vector<std::string> valid_model_fixtures() {
    return {"three_stage_chain.json", "prevention_example.json", "pulmonary_edema.json", "reward_example.json"};
}

FmeaModel random_model(std::mt19937_64& rng, const RandomModelOptions& options) {
    FmeaModel m;
    m.name = "random";
    int nVars = uniform(rng, 1, options.maxVariables);
    int nFuncs = uniform(rng, 1, nVars);
    int nComps = uniform(rng, 1, nFuncs);

    std::vector<std::string> compIds, funcIds, failIds;
    for (int i = 0; i < nComps; ++i) {
        compIds.push_back("c" + std::to_string(i + 1));
        m.components.push_back({compIds.back(), ""});
    }
    for (int i = 0; i < nFuncs; ++i) {
        funcIds.push_back("f" + std::to_string(i + 1));
        m.functions.push_back({funcIds.back(), "", pick(rng, compIds)});
    }
    std::vector<int> owner(static_cast<std::size_t>(nVars));
    for (int i = 0; i < nVars; ++i) owner[static_cast<std::size_t>(i)] = i < nFuncs ? i : uniform(rng, 0, nFuncs - 1);
    std::sort(owner.begin(), owner.end());
    static const std::vector<ValueSet> ranges{
        {Value::normal, Value::tooHigh}, {Value::tooLow, Value::normal}, ValueSet::full()};
    for (int i = 0; i < nVars; ++i)
        m.variables.push_back({"v" + std::to_string(i + 1), "", funcIds[static_cast<std::size_t>(owner[static_cast<std::size_t>(i)])],
                               pick(rng, ranges)});

    int nFails = uniform(rng, std::min(2, options.maxFailures), options.maxFailures);
    for (int i = 0; i < nFails; ++i) {
        const Variable& v = pick(rng, m.variables);
        Failure f;
        f.id = "e" + std::to_string(i + 1);
        f.function = v.function;
        f.variable = v.id;
        if (v.range.contains(Value::tooLow) && v.range.contains(Value::tooHigh))
            f.mode = coin(rng) ? FailureMode::leftCritical : FailureMode::rightCritical;
        else
            f.mode = v.range.contains(Value::tooHigh) ? FailureMode::rightCritical : FailureMode::leftCritical;
        f.sev = uniform(rng, 1, 10);
        f.occ = uniform(rng, 1, 10);
        f.det = uniform(rng, 1, 10);
        f.failureProb = uniform(rng, 0, 10) / 10.0;
        failIds.push_back(f.id);
        m.failures.push_back(f);
    }

    for (std::size_t i = 1; i < compIds.size(); ++i)
        m.componentHierarchy.push_back({compIds[i], compIds[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(i) - 1))]});
    for (std::size_t i = 1; i < funcIds.size(); ++i)
        m.functionHierarchy.push_back({funcIds[i], funcIds[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(i) - 1))]});
    m.failureHierarchy = random_tree(rng, failIds);

    if (!m.failureHierarchy.empty()) {
        int nActions = uniform(rng, 1, options.maxActions);
        for (int i = 0; i < nActions; ++i) {
            const HierarchyEdge& link = pick(rng, m.failureHierarchy);
            Action a;
            a.kind = coin(rng) ? ActionKind::detective : ActionKind::preventive;
            a.id = (a.kind == ActionKind::detective ? "d" : "p") + std::to_string(i + 1);
            a.cause = link.from;
            a.effect = link.to;
            if (coin(rng, 0.4)) a.pre = random_condition(rng, m);
            if (a.kind == ActionKind::preventive && coin(rng, 0.3)) {
                const Variable& v = pick(rng, m.variables);
                a.post.push_back({v.id, pick(rng, v.range.values())});
            }
            int p = uniform(rng, 0, 9);
            if (p == 0) a.probability = 0.0;
            else if (p == 1) a.probability = 1.0;
            else if (p == 2) a.probability = uniform(rng, 1, 99) / 100.0;
            m.actions.push_back(a);
        }
    }

    std::set<std::pair<std::string, std::string>> used;
    int nEdges = uniform(rng, 0, nVars * 2);
    for (int i = 0; i < nEdges && nVars > 1; ++i) {
        const Variable& from = pick(rng, m.variables);
        const Variable& to = pick(rng, m.variables);
        if (from.id == to.id || !used.insert({from.id, to.id}).second) continue;
        int label = uniform(rng, 0, 4);
        m.qualitativeEdges.push_back({from.id, to.id, label < 2 ? Sign::plus : label < 4 ? Sign::minus : Sign::unknown});
    }
    return m;
}

State random_state(std::mt19937_64& rng, const FmeaModel& model) {
    State s;
    for (const auto& v : model.variables) s.poss.push_back(random_subset(rng, v.range));
    return s;
}

Evidence random_evidence(std::mt19937_64& rng, const FmeaModel& model) {
    Evidence e;
    for (const auto& v : model.variables)
        if (coin(rng, 0.3)) e[v.id] = random_subset(rng, v.range);
    return e;
}

std::vector<Mdp> random_small_mdps(std::mt19937_64& rng, std::size_t count, std::size_t maxStates) {
    std::vector<Mdp> out;
    while (out.size() < count) {
        auto cm = compile(random_model(rng));
        State s0 = initial_state(cm->model(), random_evidence(rng, cm->model()));
        auto states = enumerate_states(*cm, s0, maxStates + 1);
        if (states.size() > maxStates || cm->action_count() == 0) continue;
        out.push_back(build_mdp(*cm, s0, 0.9));
    }
    return out;
}

Mdp two_state_mdp(double gamma) {
    Mdp m;
    m.variables = {"x"};
    m.actions = {"a1", "a2"};
    m.states = {State{{ValueSet{Value::normal}}}, State{{ValueSet{Value::tooHigh}}}};
    m.gamma = gamma;
    m.goal = {false, false};
    auto row = [](double to0, double to1) {
        return Mdp::Row{std::vector<Mdp::Successor>{{0, to0, 0.0}, {1, to1, 10.0}}};
    };
    m.transitions = {{row(0.3, 0.7), row(0.4, 0.6)}, {row(0.2, 0.8), row(0.9, 0.1)}};
    return m;
}

State state_of(std::initializer_list<ValueSet> sets) {
    return State{std::vector<ValueSet>(sets)};
}

} // namespace fmea::testing
