#include "ttcc/process.hpp"

#include <algorithm>
#include <functional>

namespace ttcc {

struct Process::Node {
    Kind kind = Kind::Null;
    Constraint constraint; // Tell payload, Ask guard, or Local init
    std::vector<Process> children;
    std::vector<std::string> names; // Local binders
    CountExpr count;                // Next count or Rep period
    std::string callee;
    std::vector<CountExpr> call_args;
    std::string pretty;
};

namespace {

std::shared_ptr<const Process::Node> null_node() {
    static const auto n = [] {
        auto node = std::make_shared<Process::Node>();
        node->kind = Process::Kind::Null;
        node->pretty = "0";
        return node;
    }();
    return n;
}

// Parallel composition is the only position needing parentheses when it
// appears as the body of a prefix operator.
std::string body_text(const Process& p) {
    if (p.kind() == Process::Kind::Par) return "(" + p.pretty() + ")";
    return p.pretty();
}

} // namespace

Process::Process() : node_(null_node()) {}
Process Process::null() { return Process(null_node()); }

Process Process::tell(Constraint c) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Tell;
    n->constraint = std::move(c);
    n->pretty = "tell(" + n->constraint.text() + ")";
    return Process(std::move(n));
}

Process Process::ask(Constraint guard, Process body) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Ask;
    n->constraint = std::move(guard);
    n->pretty = "when " + n->constraint.text() + " do " + body_text(body);
    n->children.push_back(std::move(body));
    return Process(std::move(n));
}

Process Process::par(std::vector<Process> children) {
    std::vector<Process> flat;
    for (auto& c : children) {
        if (c.kind() == Kind::Par) {
            for (const auto& sub : c.children()) flat.push_back(sub);
        } else {
            flat.push_back(std::move(c));
        }
    }
    if (flat.empty()) return null();
    if (flat.size() == 1) return flat.front();
    auto n = std::make_shared<Node>();
    n->kind = Kind::Par;
    std::string t = flat.front().pretty();
    for (std::size_t i = 1; i < flat.size(); ++i) t += " || " + flat[i].pretty();
    n->pretty = std::move(t);
    n->children = std::move(flat);
    return Process(std::move(n));
}

Process Process::local(std::vector<std::string> vars, Constraint init, Process body) {
    if (vars.empty()) throw ConfigError("local needs at least one binder");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Local;
    n->names = std::move(vars);
    n->constraint = std::move(init);
    std::string t = "local ";
    for (std::size_t i = 0; i < n->names.size(); ++i) {
        if (i) t += ", ";
        t += n->names[i];
    }
    if (!n->constraint.is_true()) t += ", " + n->constraint.text();
    t += " in " + body_text(body);
    n->pretty = std::move(t);
    n->children.push_back(std::move(body));
    return Process(std::move(n));
}

Process Process::next(CountExpr count, Process body) {
    if (!count.is_param()) {
        if (count.value < 0) throw ConfigError("negative next count");
        if (count.value == 0) return body; // next^0 P == P
    }
    auto n = std::make_shared<Node>();
    n->kind = Kind::Next;
    n->count = std::move(count);
    if (!n->count.is_param() && n->count.value == 1)
        n->pretty = "next " + body_text(body);
    else
        n->pretty = "next^" + n->count.text() + " " + body_text(body);
    n->children.push_back(std::move(body));
    return Process(std::move(n));
}

Process Process::next(std::int64_t count, Process body) {
    return next(CountExpr::lit(count), std::move(body));
}

Process Process::rep(CountExpr period, Process body) {
    if (!period.is_param() && period.value < 1)
        throw ConfigError("replication period must be at least 1");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Rep;
    n->count = std::move(period);
    n->pretty = "rep[" + n->count.text() + "] " + body_text(body);
    n->children.push_back(std::move(body));
    return Process(std::move(n));
}

Process Process::rep(std::int64_t period, Process body) {
    return rep(CountExpr::lit(period), std::move(body));
}

Process Process::call(std::string name, std::vector<CountExpr> args) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Call;
    n->callee = std::move(name);
    n->call_args = std::move(args);
    std::string t = n->callee + "(";
    for (std::size_t i = 0; i < n->call_args.size(); ++i) {
        if (i) t += ", ";
        t += n->call_args[i].text();
    }
    t += ")";
    n->pretty = std::move(t);
    return Process(std::move(n));
}

Process::Kind Process::kind() const { return node_->kind; }
const Constraint& Process::tell_constraint() const { return node_->constraint; }
const Constraint& Process::guard() const { return node_->constraint; }
const Process& Process::body() const { return node_->children.front(); }
const std::vector<Process>& Process::children() const { return node_->children; }
const std::vector<std::string>& Process::local_vars() const { return node_->names; }
const Constraint& Process::local_init() const { return node_->constraint; }
const CountExpr& Process::count() const { return node_->count; }
const CountExpr& Process::period() const { return node_->count; }
const std::string& Process::callee() const { return node_->callee; }
const std::vector<CountExpr>& Process::args() const { return node_->call_args; }
const std::string& Process::pretty() const { return node_->pretty; }

void Process::collect_vars(std::set<std::string>& out) const {
    switch (kind()) {
    case Kind::Null:
        return;
    case Kind::Tell:
    case Kind::Ask:
        node_->constraint.collect_free_vars(out);
        if (kind() == Kind::Ask) body().collect_vars(out);
        return;
    case Kind::Par:
        for (const auto& c : node_->children) c.collect_vars(out);
        return;
    case Kind::Local: {
        std::set<std::string> inner;
        node_->constraint.collect_free_vars(inner);
        body().collect_vars(inner);
        for (const auto& v : node_->names) inner.erase(v);
        out.insert(inner.begin(), inner.end());
        return;
    }
    case Kind::Next:
    case Kind::Rep:
        body().collect_vars(out);
        return;
    case Kind::Call:
        return;
    }
}

// ---------------------------------------------------------------------------
// Definitions
// ---------------------------------------------------------------------------

void DefinitionTable::add(Definition def) {
    if (defs_.count(def.name))
        throw ConfigError("duplicate definition: " + def.name);
    defs_.emplace(def.name, std::move(def));
}

bool DefinitionTable::contains(const std::string& name) const {
    return defs_.count(name) != 0;
}

const Definition& DefinitionTable::at(const std::string& name) const {
    auto it = defs_.find(name);
    if (it == defs_.end()) throw UnknownIdentifierError(name);
    return it->second;
}

namespace {

using ParamEnv = std::map<std::string, std::int64_t>;

Term subst_term(const Term& t, const ParamEnv& env, const std::set<std::string>& shadow) {
    if (t.is_const() || shadow.count(t.name)) return t;
    auto it = env.find(t.name);
    if (it == env.end()) return t;
    return Term::constant(it->second + t.value);
}

Constraint subst_constraint(const Constraint& c, const ParamEnv& env,
                            std::set<std::string>& shadow) {
    switch (c.kind()) {
    case Constraint::Kind::True:
    case Constraint::Kind::False:
        return c;
    case Constraint::Kind::Atom:
        return Constraint::atom(subst_term(c.lhs(), env, shadow), c.rel(),
                                subst_term(c.rhs(), env, shadow));
    case Constraint::Kind::Conj: {
        std::vector<Constraint> parts;
        for (const auto& p : c.conjuncts()) parts.push_back(subst_constraint(p, env, shadow));
        return Constraint::conj(std::move(parts));
    }
    case Constraint::Kind::Exists: {
        bool fresh = shadow.insert(c.bound_var()).second;
        Constraint body = subst_constraint(c.body(), env, shadow);
        if (fresh) shadow.erase(c.bound_var());
        return Constraint::exists(c.bound_var(), std::move(body));
    }
    }
    return c;
}

CountExpr subst_count(const CountExpr& e, const ParamEnv& env) {
    if (!e.is_param()) return e;
    auto it = env.find(e.param);
    if (it == env.end()) return e;
    return CountExpr::lit(it->second);
}

Process subst_process(const Process& p, const ParamEnv& env, std::set<std::string>& shadow) {
    using K = Process::Kind;
    switch (p.kind()) {
    case K::Null:
        return p;
    case K::Tell:
        return Process::tell(subst_constraint(p.tell_constraint(), env, shadow));
    case K::Ask:
        return Process::ask(subst_constraint(p.guard(), env, shadow),
                            subst_process(p.body(), env, shadow));
    case K::Par: {
        std::vector<Process> kids;
        for (const auto& c : p.children()) kids.push_back(subst_process(c, env, shadow));
        return Process::par(std::move(kids));
    }
    case K::Local: {
        std::vector<std::string> fresh;
        for (const auto& v : p.local_vars())
            if (shadow.insert(v).second) fresh.push_back(v);
        Constraint init = subst_constraint(p.local_init(), env, shadow);
        Process body = subst_process(p.body(), env, shadow);
        for (const auto& v : fresh) shadow.erase(v);
        return Process::local(p.local_vars(), std::move(init), std::move(body));
    }
    case K::Next:
        return Process::next(subst_count(p.count(), env), subst_process(p.body(), env, shadow));
    case K::Rep:
        return Process::rep(subst_count(p.period(), env), subst_process(p.body(), env, shadow));
    case K::Call: {
        std::vector<CountExpr> args;
        for (const auto& a : p.args()) args.push_back(subst_count(a, env));
        return Process::call(p.callee(), std::move(args));
    }
    }
    return p;
}

} // namespace

std::vector<std::int64_t> ground_args(const std::vector<CountExpr>& args) {
    std::vector<std::int64_t> out;
    out.reserve(args.size());
    for (const auto& a : args) {
        if (a.is_param())
            throw ConfigError("unresolved parameter in call arguments: " + a.param);
        out.push_back(a.value);
    }
    return out;
}

Process instantiate(const DefinitionTable& defs, const std::string& name,
                    const std::vector<std::int64_t>& args) {
    const Definition& def = defs.at(name);
    if (def.params.size() != args.size())
        throw ArityMismatchError(name + " expects " + std::to_string(def.params.size()) +
                                 " arguments, got " + std::to_string(args.size()));
    ParamEnv env;
    for (std::size_t i = 0; i < args.size(); ++i) env[def.params[i]] = args[i];
    std::set<std::string> shadow;
    return subst_process(def.body, env, shadow);
}

Process future(const Process& p, const DefinitionTable& defs) {
    using K = Process::Kind;
    switch (p.kind()) {
    case K::Next: {
        if (p.count().is_param()) throw ConfigError("future on non-ground process");
        if (p.count().value == 1) return p.body();
        return Process::next(p.count().value - 1, p.body());
    }
    case K::Par: {
        std::vector<Process> kids;
        for (const auto& c : p.children()) kids.push_back(future(c, defs));
        return Process::par(std::move(kids));
    }
    case K::Local:
        return Process::local(p.local_vars(), p.local_init(), future(p.body(), defs));
    case K::Call:
        return future(instantiate(defs, p.callee(), ground_args(p.args())), defs);
    default:
        return Process::null();
    }
}

Process prune_nulls(const Process& p) {
    if (p.kind() != Process::Kind::Par) return p;
    std::vector<Process> kept;
    for (const auto& c : p.children()) {
        Process q = prune_nulls(c);
        if (!q.is_null()) kept.push_back(std::move(q));
    }
    return Process::par(std::move(kept));
}

// ---------------------------------------------------------------------------
// Static checks
// ---------------------------------------------------------------------------

namespace {

// Collects calls reachable without crossing a next, and validates arity of
// every call anywhere in the body.
void scan_calls(const Process& p, const DefinitionTable& defs, bool guarded,
                std::set<std::string>& unguarded_calls) {
    using K = Process::Kind;
    switch (p.kind()) {
    case K::Null:
    case K::Tell:
        return;
    case K::Ask:
    case K::Rep:
    case K::Local:
        scan_calls(p.body(), defs, guarded, unguarded_calls);
        return;
    case K::Par:
        for (const auto& c : p.children()) scan_calls(c, defs, guarded, unguarded_calls);
        return;
    case K::Next:
        scan_calls(p.body(), defs, true, unguarded_calls);
        return;
    case K::Call: {
        const Definition& def = defs.at(p.callee());
        if (def.params.size() != p.args().size())
            throw ArityMismatchError(p.callee() + " expects " +
                                     std::to_string(def.params.size()) + " arguments, got " +
                                     std::to_string(p.args().size()));
        if (!guarded) unguarded_calls.insert(p.callee());
        return;
    }
    }
}

} // namespace

void check_program(const Process& entry, const DefinitionTable& defs) {
    std::map<std::string, std::set<std::string>> unguarded;
    for (const auto& [name, def] : defs.all()) {
        std::set<std::string> calls;
        scan_calls(def.body, defs, false, calls);
        unguarded[name] = std::move(calls);
    }
    {
        std::set<std::string> entry_calls;
        scan_calls(entry, defs, false, entry_calls);
    }
    // cycle detection over the unguarded-call relation
    std::map<std::string, int> state; // 0 new, 1 on stack, 2 done
    std::vector<std::string> stack;
    std::function<void(const std::string&)> visit = [&](const std::string& name) {
        int& st = state[name];
        if (st == 1) {
            std::string cycle;
            for (const auto& s : stack) cycle += s + " -> ";
            throw UnguardedRecursionError("recursion never crosses next: " + cycle + name);
        }
        if (st == 2) return;
        st = 1;
        stack.push_back(name);
        for (const auto& callee : unguarded.at(name)) visit(callee);
        stack.pop_back();
        st = 2;
    };
    for (const auto& [name, _] : unguarded) visit(name);
}

} // namespace ttcc
