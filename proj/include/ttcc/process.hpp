#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "ttcc/constraint.hpp"

namespace ttcc {

// An integer literal or a reference to a definition parameter. Parameters
// disappear once a definition is instantiated with concrete arguments.
struct CountExpr {
    std::int64_t value = 1;
    std::string param; // non-empty => parameter reference

    static CountExpr lit(std::int64_t v) { return CountExpr{v, ""}; }
    static CountExpr ref(std::string name) { return CountExpr{0, std::move(name)}; }
    bool is_param() const { return !param.empty(); }
    std::string text() const { return is_param() ? param : std::to_string(value); }
    friend bool operator==(const CountExpr& a, const CountExpr& b) = default;
};

// The process combinators: 0, tell, when-do, parallel composition, local
// hiding, unit delay (iterated), periodic replication, and identifiers.
class Process {
public:
    enum class Kind { Null, Tell, Ask, Par, Local, Next, Rep, Call };

    Process(); // 0

    static Process null();
    static Process tell(Constraint c);
    static Process ask(Constraint guard, Process body);
    static Process par(std::vector<Process> children); // flattens nested pars
    static Process local(std::vector<std::string> vars, Constraint init, Process body);
    static Process next(CountExpr count, Process body); // next^0 P == P
    static Process next(std::int64_t count, Process body);
    static Process rep(CountExpr period, Process body);
    static Process rep(std::int64_t period, Process body);
    static Process call(std::string name, std::vector<CountExpr> args);

    Kind kind() const;
    bool is_null() const { return kind() == Kind::Null; }

    const Constraint& tell_constraint() const;
    const Constraint& guard() const;
    const Process& body() const; // Ask/Local/Next/Rep
    const std::vector<Process>& children() const; // Par
    const std::vector<std::string>& local_vars() const;
    const Constraint& local_init() const;
    const CountExpr& count() const;  // Next
    const CountExpr& period() const; // Rep
    const std::string& callee() const;
    const std::vector<CountExpr>& args() const;

    // Canonical concrete syntax; parse(pretty(p)) reproduces p.
    const std::string& pretty() const;

    // Free constraint variables, excluding local binders.
    void collect_vars(std::set<std::string>& out) const;

    friend bool operator==(const Process& a, const Process& b) {
        return a.pretty() == b.pretty();
    }

    struct Node; // implementation detail, defined in process.cpp

private:
    explicit Process(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

struct Definition {
    std::string name;
    std::vector<std::string> params;
    Process body;
};

class DefinitionTable {
public:
    void add(Definition def);
    bool contains(const std::string& name) const;
    const Definition& at(const std::string& name) const; // UnknownIdentifierError
    const std::map<std::string, Definition>& all() const { return defs_; }

private:
    std::map<std::string, Definition> defs_;
};

// Substitutes concrete integer arguments for the definition's parameters.
Process instantiate(const DefinitionTable& defs, const std::string& name,
                    const std::vector<std::int64_t>& args);

// Evaluates ground call arguments (throws if a parameter survives).
std::vector<std::int64_t> ground_args(const std::vector<CountExpr>& args);

// The one-time-unit residue: strips one next, distributes over parallel
// composition and local, unfolds identifiers, and maps all else to 0.
Process future(const Process& p, const DefinitionTable& defs);

// Drops null components and dissolves empty parallels; observable behavior
// is unchanged. Used between time units to keep configurations small.
Process prune_nulls(const Process& p);

// Static checks over a program: every call resolves with the right arity and
// every recursion cycle crosses at least one next.
void check_program(const Process& entry, const DefinitionTable& defs);

} // namespace ttcc
