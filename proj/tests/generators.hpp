#pragma once

// Seeded random generators shared by the property tests. Everything is
// deterministic: fixed seeds, ordered containers.

#include <random>
#include <string>
#include <vector>

#include "ttcc/avionics.hpp"
#include "ttcc/constraint.hpp"
#include "ttcc/process.hpp"

namespace ttcc::testgen {

using Rng = std::mt19937_64;

inline std::int64_t pick(Rng& rng, std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

inline Term random_term(Rng& rng, const std::vector<std::string>& pool, std::int64_t max) {
    switch (pick(rng, 0, 3)) {
    case 0:
        return Term::constant(pick(rng, 0, max - 1));
    case 1:
    case 2:
        return Term::var(pool[pick(rng, 0, std::int64_t(pool.size()) - 1)]);
    default: {
        std::int64_t d = pick(rng, 1, std::min<std::int64_t>(3, max - 1));
        if (pick(rng, 0, 1)) d = -d;
        return Term::offset(pool[pick(rng, 0, std::int64_t(pool.size()) - 1)], d);
    }
    }
}

inline Constraint random_atom(Rng& rng, const std::vector<std::string>& pool,
                              std::int64_t max) {
    static const Rel rels[] = {Rel::Eq, Rel::Ne, Rel::Lt, Rel::Le, Rel::Gt, Rel::Ge};
    return Constraint::atom(random_term(rng, pool, max), rels[pick(rng, 0, 5)],
                            random_term(rng, pool, max));
}

inline Constraint random_constraint(Rng& rng, const std::vector<std::string>& pool,
                                    std::int64_t max, int depth = 2) {
    if (depth > 0 && pick(rng, 0, 5) == 0) {
        std::string binder = pool[pick(rng, 0, std::int64_t(pool.size()) - 1)];
        return Constraint::exists(binder, random_constraint(rng, pool, max, depth - 1));
    }
    std::int64_t n = pick(rng, 1, 3);
    std::vector<Constraint> parts;
    for (std::int64_t i = 0; i < n; ++i) parts.push_back(random_atom(rng, pool, max));
    return Constraint::conj(std::move(parts));
}

// Random ground process over the pool; tells are equalities on pool vars so
// generated stores stay consistent when the variables are streams.
inline Process random_process(Rng& rng, const std::vector<std::string>& pool,
                              std::int64_t max, int depth = 3) {
    auto var = [&] { return pool[pick(rng, 0, std::int64_t(pool.size()) - 1)]; };
    auto tell = [&] {
        return Process::tell(Constraint::atom(Term::var(var()), Rel::Eq,
                                              Term::constant(pick(rng, 0, max - 1))));
    };
    if (depth <= 0) return pick(rng, 0, 1) ? tell() : Process::null();
    switch (pick(rng, 0, 6)) {
    case 0:
        return Process::null();
    case 1:
        return tell();
    case 2:
        return Process::ask(random_atom(rng, pool, max),
                            random_process(rng, pool, max, depth - 1));
    case 3: {
        std::vector<Process> kids;
        std::int64_t n = pick(rng, 2, 3);
        for (std::int64_t i = 0; i < n; ++i)
            kids.push_back(random_process(rng, pool, max, depth - 1));
        return Process::par(std::move(kids));
    }
    case 4:
        return Process::next(pick(rng, 1, 3), random_process(rng, pool, max, depth - 1));
    case 5:
        return Process::rep(pick(rng, 1, 5), random_process(rng, pool, max, depth - 1));
    default:
        return Process::local({"loc" + std::to_string(pick(rng, 0, 2))},
                              Constraint::truth(),
                              random_process(rng, pool, max, depth - 1));
    }
}

inline avio::ScheduleTriple random_triple(Rng& rng) {
    static const std::int64_t periods[] = {10, 20, 25, 50};
    avio::ScheduleTriple s;
    s.period = periods[pick(rng, 0, 3)];
    s.duration = pick(rng, 1, s.period);
    s.offset = pick(rng, 0, 2 * s.period); // offsets beyond the period occur
    return s;
}

} // namespace ttcc::testgen
