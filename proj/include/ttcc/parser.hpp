#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ttcc/process.hpp"

namespace ttcc {

struct VarDecl {
    std::string name;
    bool persistent = false;
    std::optional<std::int64_t> init;
};

// A parsed .ttcc source: declarations, definitions, entry expression.
struct SourceProgram {
    std::vector<VarDecl> decls; // explicit plus auto-declared, in order of appearance
    DefinitionTable defs;
    Process entry;
};

// Parses a complete program. Undeclared constraint variables are registered
// as persistent streams. Checks arity and guardedness; throws SyntaxError,
// ArityMismatchError, UnknownIdentifierError or UnguardedRecursionError.
SourceProgram parse_program(const std::string& text);

// Parses a single constraint (used by env files, system configs and replay).
Constraint parse_constraint(const std::string& text);

// Parses a single process expression with no declarations or definitions.
Process parse_process(const std::string& text);

} // namespace ttcc
