#include "ttcc/engine.hpp"

#include <algorithm>

namespace ttcc {

std::atomic<std::uint64_t> MonotoneStats::checks{0};
std::atomic<std::uint64_t> MonotoneStats::violations{0};

namespace {

constexpr int kCallDepthLimit = 512;

using Rename = std::map<std::string, std::string>;

Term rename_term(const Term& t, const Rename& map, const std::set<std::string>& shadow) {
    if (t.is_const() || shadow.count(t.name)) return t;
    auto it = map.find(t.name);
    if (it == map.end()) return t;
    Term out = t;
    out.name = it->second;
    return out;
}

Constraint rename_constraint(const Constraint& c, const Rename& map,
                             std::set<std::string>& shadow) {
    switch (c.kind()) {
    case Constraint::Kind::True:
    case Constraint::Kind::False:
        return c;
    case Constraint::Kind::Atom:
        return Constraint::atom(rename_term(c.lhs(), map, shadow), c.rel(),
                                rename_term(c.rhs(), map, shadow));
    case Constraint::Kind::Conj: {
        std::vector<Constraint> parts;
        for (const auto& p : c.conjuncts()) parts.push_back(rename_constraint(p, map, shadow));
        return Constraint::conj(std::move(parts));
    }
    case Constraint::Kind::Exists: {
        bool fresh = shadow.insert(c.bound_var()).second;
        Constraint body = rename_constraint(c.body(), map, shadow);
        if (fresh) shadow.erase(c.bound_var());
        return Constraint::exists(c.bound_var(), std::move(body));
    }
    }
    return c;
}

Process rename_process(const Process& p, const Rename& map, std::set<std::string>& shadow) {
    using K = Process::Kind;
    switch (p.kind()) {
    case K::Null:
    case K::Call:
        return p;
    case K::Tell:
        return Process::tell(rename_constraint(p.tell_constraint(), map, shadow));
    case K::Ask:
        return Process::ask(rename_constraint(p.guard(), map, shadow),
                            rename_process(p.body(), map, shadow));
    case K::Par: {
        std::vector<Process> kids;
        for (const auto& c : p.children()) kids.push_back(rename_process(c, map, shadow));
        return Process::par(std::move(kids));
    }
    case K::Local: {
        std::vector<std::string> fresh;
        for (const auto& v : p.local_vars())
            if (shadow.insert(v).second) fresh.push_back(v);
        Constraint init = rename_constraint(p.local_init(), map, shadow);
        Process body = rename_process(p.body(), map, shadow);
        for (const auto& v : fresh) shadow.erase(v);
        return Process::local(p.local_vars(), std::move(init), std::move(body));
    }
    case K::Next:
        return Process::next(p.count(), rename_process(p.body(), map, shadow));
    case K::Rep:
        return Process::rep(p.period(), rename_process(p.body(), map, shadow));
    }
    return p;
}

} // namespace

Engine::Engine(DefinitionTable defs, EngineOptions opts)
    : defs_(std::move(defs)), opts_(opts) {
    if (opts_.domain.max < 2) throw ConfigError("domain max must be at least 2");
}

SolveConfig Engine::solve_config() const {
    return SolveConfig{opts_.domain, opts_.procedure, opts_.solve_budget};
}

void Engine::declare_var(const std::string& name, bool persistent,
                         std::optional<std::int64_t> init) {
    registry_.declare(name);
    StreamState st;
    st.persistent = persistent;
    st.init = init;
    if (persistent && init) {
        if (*init < 0 || *init >= opts_.domain.max)
            throw ValueOutOfDomainError(*init, opts_.domain.max);
        st.next_version = 1;
        st.latest_bound = 0;
        st.carried_version = 0;
        st.carried_value = *init;
        std::string vn = version_name(name, 0);
        registry_.declare(vn);
        known_values_[vn] = *init;
    }
    streams_[name] = std::move(st);
}

void Engine::reset() {
    tick_ = 0;
    fresh_counter_ = 0;
    steps_this_tick_ = 0;
    hidden_.clear();
    known_values_.clear();
    for (auto& [name, st] : streams_) {
        st.next_version = 0;
        st.latest_bound.reset();
        st.carried_version.reset();
        st.carried_value.reset();
        if (st.persistent && st.init) {
            st.next_version = 1;
            st.latest_bound = 0;
            st.carried_version = 0;
            st.carried_value = *st.init;
            known_values_[version_name(name, 0)] = *st.init;
        }
    }
}

Configuration Engine::initial_configuration(Process p) const {
    return Configuration{std::move(p), make_store(opts_.domain)};
}

std::string Engine::version_name(const std::string& base, std::int64_t version) const {
    return base + "#" + std::to_string(version);
}

std::map<std::string, std::int64_t> Engine::read_snapshot() const {
    std::map<std::string, std::int64_t> out;
    for (const auto& [name, st] : streams_) {
        if (st.persistent) out[name] = st.latest_bound.value_or(0);
    }
    return out;
}

Constraint Engine::resolve_reads_with(const Constraint& c,
                                      const std::map<std::string, std::int64_t>& versions,
                                      std::set<std::string>& shadow) {
    switch (c.kind()) {
    case Constraint::Kind::True:
    case Constraint::Kind::False:
        return c;
    case Constraint::Kind::Atom: {
        auto resolve = [&](const Term& t) {
            if (t.is_const() || shadow.count(t.name)) return t;
            auto it = versions.find(t.name);
            if (it == versions.end()) return t;
            Term out = t;
            out.name = version_name(t.name, it->second);
            registry_.declare(out.name);
            return out;
        };
        return Constraint::atom(resolve(c.lhs()), c.rel(), resolve(c.rhs()));
    }
    case Constraint::Kind::Conj: {
        std::vector<Constraint> parts;
        for (const auto& p : c.conjuncts())
            parts.push_back(resolve_reads_with(p, versions, shadow));
        return Constraint::conj(std::move(parts));
    }
    case Constraint::Kind::Exists: {
        bool fresh = shadow.insert(c.bound_var()).second;
        Constraint body = resolve_reads_with(c.body(), versions, shadow);
        if (fresh) shadow.erase(c.bound_var());
        return Constraint::exists(c.bound_var(), std::move(body));
    }
    }
    return c;
}

Constraint Engine::resolve_reads(const Constraint& c) {
    std::set<std::string> shadow;
    auto versions = read_snapshot();
    return resolve_reads_with(c, versions, shadow);
}

std::optional<std::int64_t> Engine::eval_ground(const Term& t) {
    if (t.is_const()) return t.value;
    auto it = known_values_.find(t.name);
    if (it == known_values_.end()) return std::nullopt;
    return it->second + t.value;
}

// Environment injections and tell contributions pass through here. An
// equality whose left side is a bare persistent variable binds the stream's
// next version; everything else is resolved as a read.
Constraint Engine::resolve_tell(const Constraint& c,
                                const std::map<std::string, std::int64_t>& read_versions) {
    switch (c.kind()) {
    case Constraint::Kind::True:
    case Constraint::Kind::False:
        return c;
    case Constraint::Kind::Conj: {
        std::vector<Constraint> parts;
        for (const auto& p : c.conjuncts()) parts.push_back(resolve_tell(p, read_versions));
        return Constraint::conj(std::move(parts));
    }
    case Constraint::Kind::Exists: {
        std::set<std::string> shadow{c.bound_var()};
        return Constraint::exists(c.bound_var(),
                                  resolve_reads_with(c.body(), read_versions, shadow));
    }
    case Constraint::Kind::Atom:
        break;
    }

    auto stream = c.lhs().is_var() ? streams_.find(c.lhs().name) : streams_.end();
    if (c.rel() == Rel::Eq && stream != streams_.end() && stream->second.persistent) {
        StreamState& st = stream->second;
        const std::string base = c.lhs().name;
        Term rhs = c.rhs();
        if (!rhs.is_const()) {
            auto it = read_versions.find(rhs.name);
            if (it != read_versions.end()) {
                rhs.name = version_name(rhs.name, it->second);
                registry_.declare(rhs.name);
            }
        }
        std::int64_t v = st.next_version++;
        st.latest_bound = v;
        std::string vn = version_name(base, v);
        registry_.declare(vn);
        auto ground = eval_ground(rhs);
        if (ground && *ground >= 0 && *ground < opts_.domain.max) {
            known_values_[vn] = *ground;
            st.carried_version = v;
            st.carried_value = *ground;
            return Constraint::atom(Term::var(vn), Rel::Eq, Term::constant(*ground));
        }
        return Constraint::atom(Term::var(vn), Rel::Eq, std::move(rhs));
    }
    std::set<std::string> shadow;
    return resolve_reads_with(c, read_versions, shadow);
}

Process Engine::freshen_local(const Process& local_node, std::vector<Constraint>* init_out) {
    Rename map;
    for (const auto& v : local_node.local_vars()) {
        std::string fresh = v + "@" + std::to_string(fresh_counter_++);
        registry_.declare(fresh);
        hidden_.insert(fresh);
        map[v] = fresh;
    }
    std::set<std::string> shadow;
    Constraint init = rename_constraint(local_node.local_init(), map, shadow);
    if (!init.is_true()) init_out->push_back(std::move(init));
    return rename_process(local_node.body(), map, shadow);
}

Engine::ReductionClass Engine::classify(const Process& p, int depth) const {
    using K = Process::Kind;
    if (depth > kCallDepthLimit)
        throw UnguardedRecursionError("call expansion exceeds depth limit within one time unit");
    switch (p.kind()) {
    case K::Null:
    case K::Next:
        return ReductionClass::None;
    case K::Tell:
    case K::Local:
    case K::Rep:
        return ReductionClass::Progress;
    case K::Ask:
        return ReductionClass::Ask;
    case K::Par: {
        ReductionClass acc = ReductionClass::None;
        for (const auto& c : p.children()) {
            ReductionClass k = classify(c, depth);
            if (k == ReductionClass::Progress) return ReductionClass::Progress;
            if (k == ReductionClass::Ask) acc = ReductionClass::Ask;
        }
        return acc;
    }
    case K::Call:
        return classify(instantiate(defs_, p.callee(), ground_args(p.args())), depth + 1);
    }
    return ReductionClass::None;
}

Engine::Reduction Engine::execute(const Process& p, const Store& snapshot,
                                  const std::map<std::string, std::int64_t>& read_versions,
                                  bool allow_asks, int depth) {
    using K = Process::Kind;
    if (depth > kCallDepthLimit)
        throw UnguardedRecursionError("call expansion exceeds depth limit within one time unit");
    switch (p.kind()) {
    case K::Null:
    case K::Next:
        return Reduction{p, {}, false, false};
    case K::Tell:
        return Reduction{Process::null(), {p.tell_constraint()}, true, true};
    case K::Ask: {
        if (!allow_asks) return Reduction{p, {}, false, false};
        std::set<std::string> shadow;
        Constraint guard = resolve_reads_with(p.guard(), read_versions, shadow);
        bool fire = entails(snapshot, guard, solve_config());
        return Reduction{fire ? p.body() : Process::null(), {}, false, true};
    }
    case K::Par: {
        std::vector<Process> kids;
        std::vector<Constraint> tells;
        bool progress = false, reduced = false;
        for (const auto& c : p.children()) {
            Reduction r = execute(c, snapshot, read_versions, allow_asks, depth);
            kids.push_back(r.reduced ? r.result : c);
            for (auto& t : r.tells) tells.push_back(std::move(t));
            progress |= r.progress;
            reduced |= r.reduced;
        }
        if (!reduced) return Reduction{p, {}, false, false};
        return Reduction{Process::par(std::move(kids)), std::move(tells), progress, true};
    }
    case K::Local: {
        std::vector<Constraint> inits;
        Process body = freshen_local(p, &inits);
        return Reduction{std::move(body), std::move(inits), true, true};
    }
    case K::Rep: {
        if (p.period().is_param()) throw ConfigError("non-ground replication period");
        std::int64_t t = p.period().value;
        Process unfolded = Process::par({p.body(), Process::next(t, p)});
        return Reduction{std::move(unfolded), {}, true, true};
    }
    case K::Call: {
        Process inst = instantiate(defs_, p.callee(), ground_args(p.args()));
        Reduction r = execute(inst, snapshot, read_versions, allow_asks, depth + 1);
        if (!r.reduced) return Reduction{p, {}, false, false};
        return r;
    }
    }
    return Reduction{p, {}, false, false};
}

void Engine::note_monotone(const Store& before, const Store& after) {
    ++MonotoneStats::checks;
    std::set<std::string> after_parts;
    for (const auto& c : after.content.conjuncts()) after_parts.insert(c.text());
    bool ok = true;
    for (const auto& c : before.content.conjuncts()) {
        if (!after_parts.count(c.text())) {
            ok = false;
            break;
        }
    }
    if (!ok || opts_.verify_monotone) {
        try {
            ok = entails(after, before.content, solve_config());
        } catch (const DomainTooLargeError&) {
            // fall back to the syntactic verdict
        }
    }
    if (!ok) ++MonotoneStats::violations;
}

std::optional<Configuration> Engine::micro_step(const Configuration& cfg,
                                                std::vector<Constraint>* told) {
    std::vector<Process> components;
    if (cfg.process.kind() == Process::Kind::Par) {
        components = cfg.process.children();
    } else {
        components.push_back(cfg.process);
    }

    bool any_candidate = false, any_progress = false;
    for (const auto& c : components) {
        ReductionClass k = classify(c, 0);
        any_candidate |= k != ReductionClass::None;
        any_progress |= k == ReductionClass::Progress;
    }
    if (!any_candidate) return std::nullopt; // quiescent

    const bool allow_asks = opts_.ask_policy == AskPolicy::Eager || !any_progress;
    const auto read_versions = read_snapshot();
    const Store snapshot = cfg.store;

    std::vector<Process> next_components;
    std::vector<Constraint> contributions;
    for (const auto& c : components) {
        Reduction r = execute(c, snapshot, read_versions, allow_asks, 0);
        if (r.reduced) {
            if (++steps_this_tick_ > opts_.step_budget)
                throw StepBudgetExceededError("micro-step budget of " +
                                              std::to_string(opts_.step_budget) +
                                              " exceeded within one time unit");
            next_components.push_back(r.result);
            for (auto& raw : r.tells)
                contributions.push_back(resolve_tell(raw, read_versions));
        } else {
            next_components.push_back(c);
        }
    }

    Store store = snapshot;
    if (!contributions.empty()) {
        store = conjoin(store, Constraint::conj(contributions), registry_, solve_config());
    }
    note_monotone(snapshot, store);
    if (told) {
        for (auto& c : contributions) told->push_back(std::move(c));
    }
    return Configuration{Process::par(std::move(next_components)), std::move(store)};
}

std::pair<Configuration, std::vector<Constraint>> Engine::run_to_quiescence(Configuration cfg) {
    steps_this_tick_ = 0;
    std::vector<Constraint> told;
    while (auto next = micro_step(cfg, &told)) cfg = std::move(*next);
    return {std::move(cfg), std::move(told)};
}

Constraint Engine::carried_seed() {
    std::vector<Constraint> parts;
    for (const auto& [name, st] : streams_) {
        if (st.persistent && st.carried_version) {
            parts.push_back(Constraint::atom(
                Term::var(version_name(name, *st.carried_version)), Rel::Eq,
                Term::constant(st.carried_value.value())));
        }
    }
    return Constraint::conj(std::move(parts));
}

// Unlike hide(), keeps the existential node even when the body is ground, so
// told atoms stay visible inside the projected store text.
Constraint Engine::project_locals(const Constraint& c) {
    Constraint out = c;
    for (const auto& name : hidden_) {
        if (!out.mentions(name)) continue;
        std::vector<Constraint> with, without;
        for (const auto& p : out.conjuncts()) {
            if (p.mentions(name)) with.push_back(p);
            else without.push_back(p);
        }
        without.push_back(Constraint::exists(name, Constraint::conj(std::move(with))));
        out = Constraint::conj(std::move(without));
    }
    return out;
}

std::pair<Configuration, TickRecord> Engine::observable_step(const Configuration& cfg,
                                                             const Constraint& input) {
    Store store = make_store(opts_.domain);
    Constraint seed = carried_seed();
    if (!seed.is_true()) store = conjoin(store, seed, registry_, solve_config());
    Constraint resolved_input = resolve_tell(input, read_snapshot());
    if (!resolved_input.is_true())
        store = conjoin(store, resolved_input, registry_, solve_config());

    auto [fin, told] = run_to_quiescence(Configuration{cfg.process, std::move(store)});
    Process residual = future(fin.process, defs_);

    TickRecord rec;
    rec.tick = tick_;
    rec.input = resolved_input;
    rec.quiescent_store = project_locals(fin.store.content);
    rec.told = std::move(told);
    rec.residual = residual;
    rec.inconsistent = !fin.store.consistent;
    ++tick_;

    Configuration next{prune_nulls(residual), make_store(opts_.domain)};
    return {std::move(next), std::move(rec)};
}

Trace Engine::run(const Process& p, std::int64_t ticks,
                  const std::map<std::int64_t, Constraint>& inputs, bool keep_going) {
    if (ticks < 1) throw ConfigError("tick count must be at least 1");
    reset();
    Trace trace;
    Configuration cfg = initial_configuration(p);
    for (std::int64_t t = 0; t < ticks; ++t) {
        auto it = inputs.find(t);
        Constraint input = it != inputs.end() ? it->second : Constraint::truth();
        auto [next, rec] = observable_step(cfg, input);
        cfg = std::move(next);
        bool stop = rec.inconsistent && !keep_going;
        trace.push_back(std::move(rec));
        if (stop) break;
    }
    return trace;
}

} // namespace ttcc
