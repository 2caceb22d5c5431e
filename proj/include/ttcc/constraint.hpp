#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "ttcc/errors.hpp"

namespace ttcc {

// Finite-domain constraint layer: integer variables over 0..max-1, atoms over
// the relation symbols =, !=, <, <=, >, >=, closed under conjunction and
// existential hiding. All values are immutable; operations are pure.

enum class Rel { Eq, Ne, Lt, Le, Gt, Ge };

const char* rel_text(Rel r);

// A term is a constant, a variable, or a variable plus a constant offset.
struct Term {
    std::string name;       // empty => constant
    std::int64_t value = 0; // constant value, or offset when name non-empty

    static Term constant(std::int64_t v) { return Term{"", v}; }
    static Term var(std::string n) { return Term{std::move(n), 0}; }
    static Term offset(std::string n, std::int64_t d) { return Term{std::move(n), d}; }

    bool is_const() const { return name.empty(); }
    bool is_var() const { return !name.empty() && value == 0; }
    bool has_offset() const { return !name.empty() && value != 0; }
    std::string text() const;

    friend bool operator==(const Term& a, const Term& b) = default;
};

class Constraint {
public:
    enum class Kind { True, False, Atom, Conj, Exists };

    Constraint(); // true

    static Constraint truth();
    static Constraint falsity();
    static Constraint atom(Term lhs, Rel rel, Term rhs);
    static Constraint conj(std::vector<Constraint> parts);
    static Constraint exists(std::string var, Constraint body);

    Kind kind() const;
    bool is_true() const { return kind() == Kind::True; }
    bool is_false() const { return kind() == Kind::False; }

    // Atom accessors (valid only when kind() == Atom).
    const Term& lhs() const;
    Rel rel() const;
    const Term& rhs() const;

    // Conj accessor. A non-Conj constraint behaves as a singleton list
    // (True as the empty list), so callers can iterate uniformly.
    std::vector<Constraint> conjuncts() const;

    // Exists accessors.
    const std::string& bound_var() const;
    const Constraint& body() const;

    // Canonical text: atoms sorted lexicographically, single spaces around
    // operators, conjunction with " & ", hiding as "exists x. (...)".
    const std::string& text() const;

    void collect_free_vars(std::set<std::string>& out) const;
    std::set<std::string> free_vars() const;
    bool mentions(const std::string& var) const;

    friend bool operator==(const Constraint& a, const Constraint& b) {
        return a.text() == b.text();
    }
    friend bool operator<(const Constraint& a, const Constraint& b) {
        return a.text() < b.text();
    }

    struct Node; // implementation detail, defined in constraint.cpp

private:
    explicit Constraint(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

struct Domain {
    std::int64_t max = 65536; // values range over 0..max-1; max >= 2
};

// Names the engine may mention in constraints. Versioned stream instances
// (x#3) and freshened locals (x@2) are registered as ordinary names.
class VarRegistry {
public:
    void declare(const std::string& name) { names_.insert(name); }
    bool declared(const std::string& name) const { return names_.count(name) != 0; }
    const std::set<std::string>& names() const { return names_; }

private:
    std::set<std::string> names_;
};

enum class DecisionProcedure {
    Enumerate, // exact: propagation-pruned exhaustive search, budgeted
    Bounds,    // interval propagation only; never claims entailment wrongly,
               // but may miss entailments the enumeration would find
};

struct SolveConfig {
    Domain domain;
    DecisionProcedure procedure = DecisionProcedure::Enumerate;
    std::uint64_t budget = 1'000'000; // search nodes / valuations per query
};

struct Store {
    Domain domain;
    Constraint content;     // canonical conjunction
    bool consistent = true; // == satisfiable(content)
};

Store make_store(Domain d);

// content' = content /\ c, canonicalized; consistency flag recomputed.
// Grows monotonically: every conjunct of the input survives in the result.
Store conjoin(const Store& s, const Constraint& c, const VarRegistry& vars,
              const SolveConfig& cfg);

// True iff every valuation over 0..max-1 satisfying s.content satisfies c.
// An inconsistent store entails everything.
bool entails(const Store& s, const Constraint& c, const SolveConfig& cfg);

bool satisfiable(const Constraint& c, const SolveConfig& cfg);
bool satisfiable(const Store& s, const SolveConfig& cfg);

// Existential projection: exists x. c, with x-free conjuncts pulled out and
// ground existentials evaluated away (exists x. (x = 1) collapses to true).
Constraint hide(const std::string& var, const Constraint& c, const SolveConfig& cfg);

// Reference semantics: plain exhaustive valuation enumeration with no
// propagation pruning. Cross-checks the configured decision procedure.
bool entails_oracle(const Store& s, const Constraint& c, const SolveConfig& cfg);
bool satisfiable_oracle(const Constraint& c, const SolveConfig& cfg);

// Validates c against the registry and domain: every variable declared,
// every literal constant and offset magnitude below max.
void check_constraint(const Constraint& c, const VarRegistry& vars, const Domain& d);

} // namespace ttcc
