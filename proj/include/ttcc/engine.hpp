#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ttcc/constraint.hpp"
#include "ttcc/process.hpp"

namespace ttcc {

// Ask evaluation discipline within a micro-step round. Eager evaluates every
// ask against the round's snapshot store, so an ask racing a same-round tell
// is discarded. Deferred holds asks back until no tell or unfold reduction
// remains in the configuration.
enum class AskPolicy { Eager, Deferred };

struct EngineOptions {
    AskPolicy ask_policy = AskPolicy::Eager;
    Domain domain;
    DecisionProcedure procedure = DecisionProcedure::Enumerate;
    std::uint64_t solve_budget = 1'000'000;
    std::uint64_t step_budget = 1'000'000; // component reductions per time unit
    bool verify_monotone = false;          // semantic store-growth check per round
};

struct Configuration {
    Process process;
    Store store;
};

struct TickRecord {
    std::int64_t tick = 0;
    Constraint input;           // environment injection, stream-resolved
    Constraint quiescent_store; // canonical, fresh locals hidden
    std::vector<Constraint> told;
    Process residual; // the observable evolution for the next time unit
    bool inconsistent = false;
};

using Trace = std::vector<TickRecord>;

// Counters behind the per-round monotonicity check (each successive store
// must entail its predecessor). Test builds enable the check and assert
// violations stay at zero. Atomic so concurrent engine instances stay
// independent.
struct MonotoneStats {
    static std::atomic<std::uint64_t> checks;
    static std::atomic<std::uint64_t> violations;
};

// A deterministic, single-threaded interpreter instance. Persistent variables
// are carried across time units as versioned streams (x#0, x#1, ...): reads
// resolve to the highest version bound at the round snapshot, writes bind the
// next version. All other state resets at each time-unit boundary.
class Engine {
public:
    Engine(DefinitionTable defs, EngineOptions opts);

    void declare_var(const std::string& name, bool persistent,
                     std::optional<std::int64_t> init = std::nullopt);

    // Clears run state: tick index, stream versions, fresh-name counter.
    // Initial stream bindings from declarations are reinstated.
    void reset();

    Configuration initial_configuration(Process p) const;

    // One synchronous round: every parallel component takes one reduction
    // against the snapshot store; the new store conjoins all contributions.
    // Returns nullopt when the configuration is quiescent.
    std::optional<Configuration> micro_step(const Configuration& cfg,
                                            std::vector<Constraint>* told = nullptr);

    // Iterates micro_step until quiescence; collects the constraints told.
    std::pair<Configuration, std::vector<Constraint>> run_to_quiescence(Configuration cfg);

    // One time unit: seeds the store with carried stream bindings plus the
    // input, runs to quiescence, applies the future function.
    std::pair<Configuration, TickRecord> observable_step(const Configuration& cfg,
                                                         const Constraint& input);

    // Iterated observable steps from a fresh run state. Halts after an
    // inconsistent tick unless keep_going.
    Trace run(const Process& p, std::int64_t ticks,
              const std::map<std::int64_t, Constraint>& inputs, bool keep_going = false);

    const DefinitionTable& definitions() const { return defs_; }
    const EngineOptions& options() const { return opts_; }
    const VarRegistry& registry() const { return registry_; }
    const std::set<std::string>& hidden_vars() const { return hidden_; }
    SolveConfig solve_config() const;

    // Resolves stream reads (x -> x#latest) in a constraint; exposed for
    // environment injection previews and tests.
    Constraint resolve_reads(const Constraint& c);

private:
    struct StreamState {
        bool persistent = false;
        std::optional<std::int64_t> init;
        std::int64_t next_version = 0;
        std::optional<std::int64_t> latest_bound;  // highest bound version
        std::optional<std::int64_t> carried_version;
        std::optional<std::int64_t> carried_value; // ground carries only
    };

    struct Reduction {
        Process result;
        std::vector<Constraint> tells; // raw, resolved at execution
        bool progress = false;
        bool reduced = false;
    };

    enum class ReductionClass { None, Ask, Progress };

    ReductionClass classify(const Process& p, int depth) const;
    Reduction execute(const Process& p, const Store& snapshot,
                      const std::map<std::string, std::int64_t>& read_versions,
                      bool allow_asks, int depth);

    std::map<std::string, std::int64_t> read_snapshot() const;
    std::string version_name(const std::string& base, std::int64_t version) const;
    Constraint resolve_reads_with(const Constraint& c,
                                  const std::map<std::string, std::int64_t>& versions,
                                  std::set<std::string>& shadow);
    Constraint resolve_tell(const Constraint& c,
                            const std::map<std::string, std::int64_t>& read_versions);
    std::optional<std::int64_t> eval_ground(const Term& t);

    Process freshen_local(const Process& local_node, std::vector<Constraint>* init_out);

    Constraint carried_seed();
    Constraint project_locals(const Constraint& c);
    void note_monotone(const Store& before, const Store& after);

    DefinitionTable defs_;
    EngineOptions opts_;
    VarRegistry registry_;
    std::map<std::string, StreamState> streams_;
    std::map<std::string, std::int64_t> known_values_; // versioned name -> value
    std::set<std::string> hidden_;
    std::int64_t tick_ = 0;
    std::int64_t fresh_counter_ = 0;
    std::uint64_t steps_this_tick_ = 0;
};

} // namespace ttcc
