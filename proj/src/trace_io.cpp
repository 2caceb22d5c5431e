#include "ttcc/trace_io.hpp"

#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "ttcc/parser.hpp"

namespace ttcc {

using ordered_json = nlohmann::ordered_json;

std::string trace_to_jsonl(const Trace& trace, const std::vector<avio::TraceEvent>& events) {
    std::map<std::int64_t, std::vector<const avio::TraceEvent*>> by_tick;
    for (const auto& e : events) by_tick[e.tick].push_back(&e);
    std::string out;
    for (const auto& rec : trace) {
        ordered_json j;
        j["tick"] = rec.tick;
        j["input"] = rec.input.text();
        ordered_json told = ordered_json::array();
        for (const auto& c : rec.told) told.push_back(c.text());
        j["told"] = std::move(told);
        j["store"] = rec.quiescent_store.text();
        ordered_json evs = ordered_json::array();
        auto it = by_tick.find(rec.tick);
        if (it != by_tick.end()) {
            for (const avio::TraceEvent* e : it->second) {
                ordered_json ev;
                ev["kind"] = e->kind;
                ev["name"] = e->name;
                if (!e->link.empty()) ev["link"] = e->link;
                evs.push_back(std::move(ev));
            }
        }
        j["events"] = std::move(evs);
        j["inconsistent"] = rec.inconsistent;
        out += j.dump();
        out += '\n';
    }
    return out;
}

void write_trace(std::ostream& out, const Trace& trace,
                 const std::vector<avio::TraceEvent>& events) {
    out << trace_to_jsonl(trace, events);
}

std::vector<RawRecord> read_trace(std::istream& in) {
    std::vector<RawRecord> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const std::exception& e) {
            throw ConfigError("trace line " + std::to_string(lineno) + ": " + e.what());
        }
        RawRecord rec;
        rec.tick = j.at("tick").get<std::int64_t>();
        rec.input = j.at("input").get<std::string>();
        rec.store = j.at("store").get<std::string>();
        for (const auto& t : j.at("told")) rec.told.push_back(t.get<std::string>());
        rec.inconsistent = j.at("inconsistent").get<bool>();
        out.push_back(std::move(rec));
    }
    return out;
}

namespace {

void collect_binders(const Constraint& c, std::set<std::string>& out) {
    switch (c.kind()) {
    case Constraint::Kind::Exists:
        out.insert(c.bound_var());
        collect_binders(c.body(), out);
        return;
    case Constraint::Kind::Conj:
        for (const auto& p : c.conjuncts()) collect_binders(p, out);
        return;
    default:
        return;
    }
}

bool check_entails(const Store& store, const Constraint& goal, const SolveConfig& cfg) {
    try {
        return entails_oracle(store, goal, cfg);
    } catch (const DomainTooLargeError&) {
        SolveConfig exact = cfg;
        exact.procedure = DecisionProcedure::Enumerate;
        return entails(store, goal, exact);
    }
}

} // namespace

std::vector<ReplayIssue> replay_trace(const std::vector<RawRecord>& records,
                                      const SolveConfig& cfg) {
    std::vector<ReplayIssue> issues;
    for (const auto& rec : records) {
        Constraint store_c, input_c;
        std::vector<Constraint> told;
        try {
            store_c = parse_constraint(rec.store);
            input_c = parse_constraint(rec.input);
            for (const auto& t : rec.told) told.push_back(parse_constraint(t));
        } catch (const SyntaxError& e) {
            issues.push_back({rec.tick, std::string("unparseable record: ") + e.what()});
            continue;
        }
        Store store{cfg.domain, store_c, true};
        std::set<std::string> binders;
        collect_binders(store_c, binders);
        if (!check_entails(store, input_c, cfg))
            issues.push_back({rec.tick, "store does not entail input " + input_c.text()});
        for (const auto& t : told) {
            Constraint goal = t;
            for (const auto& b : binders) {
                if (goal.mentions(b)) goal = hide(b, goal, cfg);
            }
            if (!check_entails(store, goal, cfg))
                issues.push_back({rec.tick, "store does not entail told " + t.text()});
            for (const auto& atom : t.conjuncts()) {
                if (rec.store.find(atom.text()) == std::string::npos)
                    issues.push_back(
                        {rec.tick, "told atom missing from store text: " + atom.text()});
            }
        }
        if (!rec.inconsistent && !satisfiable(store, cfg))
            issues.push_back({rec.tick, "store unsatisfiable but not flagged"});
    }
    return issues;
}

} // namespace ttcc
