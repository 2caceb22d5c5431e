#include "ttcc/constraint.hpp"

#include <algorithm>
#include <functional>
#include <limits>

namespace ttcc {

const char* rel_text(Rel r) {
    switch (r) {
    case Rel::Eq: return "=";
    case Rel::Ne: return "!=";
    case Rel::Lt: return "<";
    case Rel::Le: return "<=";
    case Rel::Gt: return ">";
    case Rel::Ge: return ">=";
    }
    return "?";
}

std::string Term::text() const {
    if (is_const()) return std::to_string(value);
    if (value == 0) return name;
    if (value > 0) return name + " + " + std::to_string(value);
    return name + " - " + std::to_string(-value);
}

// ---------------------------------------------------------------------------
// Constraint nodes
// ---------------------------------------------------------------------------

struct Constraint::Node {
    Kind kind = Kind::True;
    Term lhs, rhs;
    Rel rel = Rel::Eq;
    std::vector<Constraint> parts; // Conj members, or Exists body at [0]
    std::string var;               // Exists binder
    std::string text;
};

namespace {

std::shared_ptr<const Constraint::Node> true_node() {
    static const auto n = [] {
        auto node = std::make_shared<Constraint::Node>();
        node->kind = Constraint::Kind::True;
        node->text = "true";
        return node;
    }();
    return n;
}

std::shared_ptr<const Constraint::Node> false_node() {
    static const auto n = [] {
        auto node = std::make_shared<Constraint::Node>();
        node->kind = Constraint::Kind::False;
        node->text = "false";
        return node;
    }();
    return n;
}

} // namespace

Constraint::Constraint() : node_(true_node()) {}

Constraint Constraint::truth() { return Constraint(true_node()); }
Constraint Constraint::falsity() { return Constraint(false_node()); }

Constraint Constraint::atom(Term lhs, Rel rel, Term rhs) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Atom;
    n->lhs = std::move(lhs);
    n->rel = rel;
    n->rhs = std::move(rhs);
    n->text = n->lhs.text() + " " + rel_text(rel) + " " + n->rhs.text();
    return Constraint(std::move(n));
}

Constraint Constraint::conj(std::vector<Constraint> parts) {
    std::vector<Constraint> flat;
    for (auto& p : parts) {
        switch (p.kind()) {
        case Kind::True:
            break;
        case Kind::Conj:
            for (const auto& q : p.node_->parts) flat.push_back(q);
            break;
        default:
            flat.push_back(std::move(p));
        }
    }
    std::sort(flat.begin(), flat.end());
    flat.erase(std::unique(flat.begin(), flat.end(),
                           [](const Constraint& a, const Constraint& b) {
                               return a.text() == b.text();
                           }),
               flat.end());
    if (flat.empty()) return truth();
    if (flat.size() == 1) return flat.front();
    auto n = std::make_shared<Node>();
    n->kind = Kind::Conj;
    n->parts = std::move(flat);
    std::string t = n->parts.front().text();
    for (std::size_t i = 1; i < n->parts.size(); ++i) t += " & " + n->parts[i].text();
    n->text = std::move(t);
    return Constraint(std::move(n));
}

Constraint Constraint::exists(std::string var, Constraint body) {
    if (body.is_true() || body.is_false()) return body;
    auto n = std::make_shared<Node>();
    n->kind = Kind::Exists;
    n->var = std::move(var);
    n->text = "exists " + n->var + ". (" + body.text() + ")";
    n->parts.push_back(std::move(body));
    return Constraint(std::move(n));
}

Constraint::Kind Constraint::kind() const { return node_->kind; }
const Term& Constraint::lhs() const { return node_->lhs; }
Rel Constraint::rel() const { return node_->rel; }
const Term& Constraint::rhs() const { return node_->rhs; }
const std::string& Constraint::bound_var() const { return node_->var; }
const Constraint& Constraint::body() const { return node_->parts.front(); }
const std::string& Constraint::text() const { return node_->text; }

std::vector<Constraint> Constraint::conjuncts() const {
    switch (kind()) {
    case Kind::True: return {};
    case Kind::Conj: return node_->parts;
    default: return {*this};
    }
}

void Constraint::collect_free_vars(std::set<std::string>& out) const {
    switch (kind()) {
    case Kind::True:
    case Kind::False:
        return;
    case Kind::Atom:
        if (!lhs().is_const()) out.insert(lhs().name);
        if (!rhs().is_const()) out.insert(rhs().name);
        return;
    case Kind::Conj:
        for (const auto& p : node_->parts) p.collect_free_vars(out);
        return;
    case Kind::Exists: {
        std::set<std::string> inner;
        body().collect_free_vars(inner);
        inner.erase(bound_var());
        out.insert(inner.begin(), inner.end());
        return;
    }
    }
}

std::set<std::string> Constraint::free_vars() const {
    std::set<std::string> out;
    collect_free_vars(out);
    return out;
}

bool Constraint::mentions(const std::string& var) const {
    return free_vars().count(var) != 0;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

void check_term(const Term& t, const VarRegistry& vars, const Domain& d,
                const std::set<std::string>& bound) {
    if (t.is_const()) {
        if (t.value < 0 || t.value >= d.max) throw ValueOutOfDomainError(t.value, d.max);
        return;
    }
    if (!bound.count(t.name) && !vars.declared(t.name)) throw UnknownVariableError(t.name);
    if (t.value <= -d.max || t.value >= d.max) throw ValueOutOfDomainError(t.value, d.max);
}

void check_rec(const Constraint& c, const VarRegistry& vars, const Domain& d,
               std::set<std::string>& bound) {
    switch (c.kind()) {
    case Constraint::Kind::True:
    case Constraint::Kind::False:
        return;
    case Constraint::Kind::Atom:
        check_term(c.lhs(), vars, d, bound);
        check_term(c.rhs(), vars, d, bound);
        return;
    case Constraint::Kind::Conj:
        for (const auto& p : c.conjuncts()) check_rec(p, vars, d, bound);
        return;
    case Constraint::Kind::Exists: {
        bool fresh = bound.insert(c.bound_var()).second;
        check_rec(c.body(), vars, d, bound);
        if (fresh) bound.erase(c.bound_var());
        return;
    }
    }
}

} // namespace

void check_constraint(const Constraint& c, const VarRegistry& vars, const Domain& d) {
    std::set<std::string> bound;
    check_rec(c, vars, d, bound);
}

// ---------------------------------------------------------------------------
// Evaluation under a total valuation
// ---------------------------------------------------------------------------

namespace {

struct Budget {
    std::uint64_t limit;
    std::uint64_t used = 0;
    void charge(std::uint64_t n = 1) {
        used += n;
        if (used > limit)
            throw DomainTooLargeError("search budget of " + std::to_string(limit) +
                                      " valuations exceeded");
    }
};

using Valuation = std::map<std::string, std::int64_t>;

// Returns false when the term evaluates outside 0..max-1 (offset overflow);
// such an atom is unsatisfied at this valuation.
bool term_value(const Term& t, const Valuation& v, std::int64_t max, std::int64_t* out) {
    std::int64_t x;
    if (t.is_const()) {
        x = t.value;
    } else {
        auto it = v.find(t.name);
        if (it == v.end()) throw Error("internal: unbound variable " + t.name);
        x = it->second + t.value;
    }
    if (x < 0 || x >= max) return false;
    *out = x;
    return true;
}

bool atom_holds(std::int64_t a, Rel r, std::int64_t b) {
    switch (r) {
    case Rel::Eq: return a == b;
    case Rel::Ne: return a != b;
    case Rel::Lt: return a < b;
    case Rel::Le: return a <= b;
    case Rel::Gt: return a > b;
    case Rel::Ge: return a >= b;
    }
    return false;
}

bool eval_constraint(const Constraint& c, Valuation& v, const Domain& d, Budget& budget) {
    switch (c.kind()) {
    case Constraint::Kind::True:
        return true;
    case Constraint::Kind::False:
        return false;
    case Constraint::Kind::Atom: {
        std::int64_t a, b;
        if (!term_value(c.lhs(), v, d.max, &a)) return false;
        if (!term_value(c.rhs(), v, d.max, &b)) return false;
        return atom_holds(a, c.rel(), b);
    }
    case Constraint::Kind::Conj:
        for (const auto& p : c.conjuncts())
            if (!eval_constraint(p, v, d, budget)) return false;
        return true;
    case Constraint::Kind::Exists: {
        const std::string& x = c.bound_var();
        auto it = v.find(x);
        bool had = it != v.end();
        std::int64_t saved = had ? it->second : 0;
        bool found = false;
        for (std::int64_t val = 0; val < d.max && !found; ++val) {
            budget.charge();
            v[x] = val;
            found = eval_constraint(c.body(), v, d, budget);
        }
        if (had)
            v[x] = saved;
        else
            v.erase(x);
        return found;
    }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Interval propagation
// ---------------------------------------------------------------------------

struct IntervalBox {
    std::int64_t lo = 0, hi = 0;
    bool empty() const { return lo > hi; }
    std::int64_t width() const { return hi - lo + 1; }
};

struct PropagationSpace {
    const Domain* dom = nullptr;
    std::map<std::string, IntervalBox> boxes;
    std::vector<Constraint> atoms;       // required-true atoms
    std::vector<Constraint> deferred;    // Exists conjuncts, checked at leaves
    bool contradiction = false;

    IntervalBox& box(const std::string& name) {
        auto [it, inserted] = boxes.emplace(name, IntervalBox{0, dom->max - 1});
        return it->second;
    }
};

// Splits a canonical conjunction into atoms and deferred existentials.
void collect_parts(const Constraint& c, PropagationSpace& sp) {
    switch (c.kind()) {
    case Constraint::Kind::True:
        return;
    case Constraint::Kind::False:
        sp.contradiction = true;
        return;
    case Constraint::Kind::Atom:
        sp.atoms.push_back(c);
        return;
    case Constraint::Kind::Conj:
        for (const auto& p : c.conjuncts()) collect_parts(p, sp);
        return;
    case Constraint::Kind::Exists:
        sp.deferred.push_back(c);
        return;
    }
}

struct TermRange {
    std::int64_t lo, hi;
    bool is_var;
    std::string name;   // var name when is_var
    std::int64_t shift; // term = var + shift
};

TermRange term_range(const Term& t, PropagationSpace& sp) {
    if (t.is_const()) return {t.value, t.value, false, "", 0};
    const auto& b = sp.box(t.name);
    return {b.lo + t.value, b.hi + t.value, true, t.name, t.value};
}

// Narrows the variable under `r` so the term stays within [lo, hi].
// Returns true if a box changed.
bool narrow_term(const TermRange& r, std::int64_t lo, std::int64_t hi,
                 PropagationSpace& sp) {
    if (!r.is_var) {
        if (r.lo < lo || r.lo > hi) sp.contradiction = true;
        return false;
    }
    auto& b = sp.box(r.name);
    std::int64_t nlo = std::max(b.lo, lo - r.shift);
    std::int64_t nhi = std::min(b.hi, hi - r.shift);
    if (nlo == b.lo && nhi == b.hi) return false;
    b.lo = nlo;
    b.hi = nhi;
    if (b.empty()) sp.contradiction = true;
    return true;
}

bool propagate_atom(const Constraint& a, PropagationSpace& sp) {
    bool changed = false;
    // Offset validity: x + k must itself land in the domain for the atom to hold.
    const std::int64_t top = sp.dom->max - 1;
    for (const Term* t : {&a.lhs(), &a.rhs()}) {
        if (t->has_offset()) {
            TermRange r = term_range(*t, sp);
            changed |= narrow_term(r, 0, top, sp);
            if (sp.contradiction) return changed;
        }
    }
    TermRange l = term_range(a.lhs(), sp);
    TermRange r = term_range(a.rhs(), sp);
    switch (a.rel()) {
    case Rel::Eq: {
        std::int64_t lo = std::max(l.lo, r.lo), hi = std::min(l.hi, r.hi);
        changed |= narrow_term(l, lo, hi, sp);
        changed |= narrow_term(r, lo, hi, sp);
        break;
    }
    case Rel::Le:
        changed |= narrow_term(l, l.lo, r.hi, sp);
        changed |= narrow_term(r, l.lo, r.hi, sp);
        break;
    case Rel::Lt:
        changed |= narrow_term(l, l.lo, r.hi - 1, sp);
        changed |= narrow_term(r, l.lo + 1, r.hi, sp);
        break;
    case Rel::Ge:
        changed |= narrow_term(l, r.lo, l.hi, sp);
        changed |= narrow_term(r, r.lo, l.hi, sp);
        break;
    case Rel::Gt:
        changed |= narrow_term(l, r.lo + 1, l.hi, sp);
        changed |= narrow_term(r, r.lo, l.hi - 1, sp);
        break;
    case Rel::Ne:
        if (l.lo == l.hi && r.lo == r.hi) {
            if (l.lo == r.lo) sp.contradiction = true;
        } else if (l.lo == l.hi) {
            if (r.lo == l.lo) changed |= narrow_term(r, r.lo + 1, r.hi, sp);
            else if (r.hi == l.lo) changed |= narrow_term(r, r.lo, r.hi - 1, sp);
        } else if (r.lo == r.hi) {
            if (l.lo == r.lo) changed |= narrow_term(l, l.lo + 1, l.hi, sp);
            else if (l.hi == r.lo) changed |= narrow_term(l, l.lo, l.hi - 1, sp);
        }
        break;
    }
    return changed;
}

void propagate(PropagationSpace& sp, Budget& budget) {
    bool changed = true;
    while (changed && !sp.contradiction) {
        budget.charge(sp.atoms.size() + 1);
        changed = false;
        for (const auto& a : sp.atoms) {
            changed |= propagate_atom(a, sp);
            if (sp.contradiction) return;
        }
    }
}

// ---------------------------------------------------------------------------
// Propagation-pruned exhaustive search (the `enumerate` procedure)
// ---------------------------------------------------------------------------

// Streams every valuation of `universe` satisfying `c`, in ascending
// lexicographic order of (sorted) variable assignments. The callback returns
// false to stop the enumeration. Exact: propagation only prunes valuations
// that cannot satisfy the required atoms.
class SolutionSearch {
public:
    SolutionSearch(const Constraint& c, const std::set<std::string>& universe,
                   const Domain& dom, Budget& budget)
        : dom_(dom), budget_(budget) {
        space_.dom = &dom_;
        for (const auto& v : universe) space_.box(v);
        collect_parts(c, space_);
    }

    bool run(const std::function<bool(const Valuation&)>& cb) {
        if (space_.contradiction) return true;
        return search(space_, cb);
    }

private:
    bool leaf(PropagationSpace& sp, const std::function<bool(const Valuation&)>& cb) {
        Valuation v;
        for (const auto& [name, b] : sp.boxes) v[name] = b.lo;
        for (const auto& ex : sp.deferred)
            if (!eval_constraint(ex, v, dom_, budget_)) return true; // dead leaf
        return cb(v);
    }

    bool search(PropagationSpace& sp, const std::function<bool(const Valuation&)>& cb) {
        budget_.charge();
        propagate(sp, budget_);
        if (sp.contradiction) return true;
        const std::string* pick = nullptr;
        std::int64_t best = std::numeric_limits<std::int64_t>::max();
        for (const auto& [name, b] : sp.boxes) {
            if (b.width() > 1 && b.width() < best) {
                best = b.width();
                pick = &name;
            }
        }
        if (!pick) return leaf(sp, cb);
        const std::string var = *pick;
        IntervalBox full = sp.boxes.at(var);
        for (std::int64_t val = full.lo; val <= full.hi; ++val) {
            PropagationSpace child = sp;
            child.boxes[var] = IntervalBox{val, val};
            if (!search(child, cb)) return false;
        }
        return true;
    }

    Domain dom_;
    Budget& budget_;
    PropagationSpace space_;
};

bool bounds_certainly_true(const Constraint& c, PropagationSpace& sp);

bool bounds_atom_certain(const Constraint& a, PropagationSpace& sp) {
    const std::int64_t top = sp.dom->max - 1;
    for (const Term* t : {&a.lhs(), &a.rhs()}) {
        if (t->has_offset()) {
            TermRange r = term_range(*t, sp);
            if (r.lo < 0 || r.hi > top) return false; // may overflow the domain
        }
    }
    TermRange l = term_range(a.lhs(), sp);
    TermRange r = term_range(a.rhs(), sp);
    switch (a.rel()) {
    case Rel::Eq:
        if (l.is_var && r.is_var && l.name == r.name) return l.shift == r.shift;
        return l.lo == l.hi && r.lo == r.hi && l.lo == r.lo;
    case Rel::Ne:
        if (l.is_var && r.is_var && l.name == r.name) return l.shift != r.shift;
        return l.hi < r.lo || r.hi < l.lo;
    case Rel::Lt:
        if (l.is_var && r.is_var && l.name == r.name) return l.shift < r.shift;
        return l.hi < r.lo;
    case Rel::Le:
        if (l.is_var && r.is_var && l.name == r.name) return l.shift <= r.shift;
        return l.hi <= r.lo;
    case Rel::Gt:
        if (l.is_var && r.is_var && l.name == r.name) return l.shift > r.shift;
        return l.lo > r.hi;
    case Rel::Ge:
        if (l.is_var && r.is_var && l.name == r.name) return l.shift >= r.shift;
        return l.lo >= r.hi;
    }
    return false;
}

bool bounds_certainly_true(const Constraint& c, PropagationSpace& sp) {
    switch (c.kind()) {
    case Constraint::Kind::True:
        return true;
    case Constraint::Kind::False:
        return false;
    case Constraint::Kind::Atom:
        return bounds_atom_certain(c, sp);
    case Constraint::Kind::Conj:
        for (const auto& p : c.conjuncts())
            if (!bounds_certainly_true(p, sp)) return false;
        return true;
    case Constraint::Kind::Exists: {
        // Certain only if the body holds for every binder value; sound
        // under-approximation of the existential.
        IntervalBox saved{0, sp.dom->max - 1};
        auto it = sp.boxes.find(c.bound_var());
        bool had = it != sp.boxes.end();
        if (had) std::swap(saved, it->second);
        else sp.box(c.bound_var());
        bool ok = bounds_certainly_true(c.body(), sp);
        if (had) sp.boxes[c.bound_var()] = saved;
        else sp.boxes.erase(c.bound_var());
        return ok;
    }
    }
    return false;
}

bool entails_bounds(const Constraint& store, const Constraint& goal, const SolveConfig& cfg) {
    PropagationSpace sp;
    sp.dom = &cfg.domain;
    collect_parts(store, sp);
    Budget budget{cfg.budget};
    if (!sp.contradiction) propagate(sp, budget);
    if (sp.contradiction) return true; // inconsistent store entails everything
    return bounds_certainly_true(goal, sp);
}

bool entails_enumerate(const Constraint& store, const Constraint& goal,
                       const SolveConfig& cfg) {
    std::set<std::string> universe = store.free_vars();
    goal.collect_free_vars(universe);
    Budget budget{cfg.budget};
    SolutionSearch search(store, universe, cfg.domain, budget);
    bool holds = true;
    search.run([&](const Valuation& v) {
        Valuation scratch = v;
        if (!eval_constraint(goal, scratch, cfg.domain, budget)) {
            holds = false;
            return false;
        }
        return true;
    });
    return holds;
}

} // namespace

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

Store make_store(Domain d) {
    if (d.max < 2) throw ConfigError("domain max must be at least 2");
    return Store{d, Constraint::truth(), true};
}

Store conjoin(const Store& s, const Constraint& c, const VarRegistry& vars,
              const SolveConfig& cfg) {
    check_constraint(c, vars, s.domain);
    Store out = s;
    auto parts = s.content.conjuncts();
    for (auto& p : c.conjuncts()) parts.push_back(std::move(p));
    out.content = Constraint::conj(std::move(parts));
    SolveConfig local = cfg;
    local.domain = s.domain;
    out.consistent = satisfiable(out.content, local);
    return out;
}

bool satisfiable(const Constraint& c, const SolveConfig& cfg) {
    if (cfg.procedure == DecisionProcedure::Bounds) {
        PropagationSpace sp;
        sp.dom = &cfg.domain;
        collect_parts(c, sp);
        if (sp.contradiction) return false;
        Budget budget{cfg.budget};
        propagate(sp, budget);
        return !sp.contradiction; // may over-approximate
    }
    Budget budget{cfg.budget};
    SolutionSearch search(c, c.free_vars(), cfg.domain, budget);
    bool found = false;
    search.run([&](const Valuation&) {
        found = true;
        return false;
    });
    return found;
}

bool satisfiable(const Store& s, const SolveConfig& cfg) {
    SolveConfig local = cfg;
    local.domain = s.domain;
    return satisfiable(s.content, local);
}

bool entails(const Store& s, const Constraint& c, const SolveConfig& cfg) {
    SolveConfig local = cfg;
    local.domain = s.domain;
    if (c.is_true()) return true;
    if (cfg.procedure == DecisionProcedure::Bounds)
        return entails_bounds(s.content, c, local);
    return entails_enumerate(s.content, c, local);
}

Constraint hide(const std::string& var, const Constraint& c, const SolveConfig& cfg) {
    if (!c.mentions(var)) return c;
    std::vector<Constraint> with, without;
    for (const auto& p : c.conjuncts()) {
        if (p.mentions(var)) with.push_back(p);
        else without.push_back(p);
    }
    Constraint inner = Constraint::conj(std::move(with));
    std::set<std::string> inner_vars = inner.free_vars();
    inner_vars.erase(var);
    if (inner_vars.empty()) {
        // Ground once the binder is chosen: the existential is a constant.
        if (!satisfiable(inner, cfg)) without.push_back(Constraint::falsity());
    } else {
        without.push_back(Constraint::exists(var, std::move(inner)));
    }
    return Constraint::conj(std::move(without));
}

bool satisfiable_oracle(const Constraint& c, const SolveConfig& cfg) {
    std::set<std::string> universe = c.free_vars();
    std::vector<std::string> names(universe.begin(), universe.end());
    const std::int64_t max = cfg.domain.max;
    double space = 1;
    for (std::size_t i = 0; i < names.size(); ++i) space *= static_cast<double>(max);
    if (space > static_cast<double>(cfg.budget))
        throw DomainTooLargeError("oracle enumeration space exceeds budget");
    Budget budget{cfg.budget};
    Valuation v;
    for (const auto& n : names) v[n] = 0;
    while (true) {
        budget.charge();
        Valuation scratch = v;
        if (eval_constraint(c, scratch, cfg.domain, budget)) return true;
        // odometer
        std::size_t i = 0;
        for (; i < names.size(); ++i) {
            if (++v[names[i]] < max) break;
            v[names[i]] = 0;
        }
        if (i == names.size()) return false;
    }
}

bool entails_oracle(const Store& s, const Constraint& c, const SolveConfig& cfg) {
    SolveConfig local = cfg;
    local.domain = s.domain;
    std::set<std::string> universe = s.content.free_vars();
    c.collect_free_vars(universe);
    std::vector<std::string> names(universe.begin(), universe.end());
    const std::int64_t max = local.domain.max;
    double space = 1;
    for (std::size_t i = 0; i < names.size(); ++i) space *= static_cast<double>(max);
    if (space > static_cast<double>(local.budget))
        throw DomainTooLargeError("oracle enumeration space exceeds budget");
    Budget budget{local.budget};
    Valuation v;
    for (const auto& n : names) v[n] = 0;
    if (names.empty()) {
        Valuation scratch;
        if (!eval_constraint(s.content, scratch, local.domain, budget)) return true;
        scratch.clear();
        return eval_constraint(c, scratch, local.domain, budget);
    }
    while (true) {
        budget.charge();
        Valuation scratch = v;
        if (eval_constraint(s.content, scratch, local.domain, budget)) {
            scratch = v;
            if (!eval_constraint(c, scratch, local.domain, budget)) return false;
        }
        std::size_t i = 0;
        for (; i < names.size(); ++i) {
            if (++v[names[i]] < max) break;
            v[names[i]] = 0;
        }
        if (i == names.size()) return true;
    }
}

} // namespace ttcc
