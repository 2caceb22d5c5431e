#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ttcc/engine.hpp"
#include "ttcc/parser.hpp"
#include "ttcc/sysfile.hpp"
#include "ttcc/trace_io.hpp"
#include "ttcc/validators.hpp"

namespace {

using ordered_json = nlohmann::ordered_json;
using namespace ttcc;

struct RunFlags {
    std::int64_t ticks = 100;
    std::string env_file;
    std::string ask_policy = "eager";
    std::string wf_mode = "modular";
    std::int64_t max = 65536;
    bool max_set = false;
    std::uint64_t step_budget = 1'000'000;
    std::string out;
    bool keep_going = false;
};

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string default_out(const std::string& input) {
    auto slash = input.find_last_of('/');
    std::string stem = slash == std::string::npos ? input : input.substr(slash + 1);
    auto dot = stem.find_last_of('.');
    if (dot != std::string::npos) stem = stem.substr(0, dot);
    return stem + ".trace.jsonl";
}

EngineOptions engine_options(const RunFlags& flags) {
    EngineOptions opts;
    opts.ask_policy = flags.ask_policy == "deferred" ? AskPolicy::Deferred : AskPolicy::Eager;
    opts.domain.max = flags.max;
    opts.step_budget = flags.step_budget;
    return opts;
}

ordered_json violations_json(const std::vector<avio::Violation>& vs) {
    ordered_json arr = ordered_json::array();
    for (const auto& v : vs) {
        ordered_json j;
        j["kind"] = avio::violation_kind_text(v.kind);
        j["participants"] = v.participants;
        j["instants"] = v.instants;
        j["explanation"] = v.explanation;
        arr.push_back(std::move(j));
    }
    return arr;
}

int cmd_check(const std::string& file) {
    std::string text = avio::read_file(file);
    try {
        parse_program(text);
    } catch (const Error& e) {
        std::cerr << file << ":" << e.what() << "\n";
        return 1;
    }
    std::cout << file << ": ok\n";
    return 0;
}

int cmd_validate(const std::string& file, const RunFlags& flags) {
    avio::SystemSpec sys = avio::load_system(file);
    if (flags.max_set) sys.domain.max = flags.max;
    avio::WfMode mode =
        flags.wf_mode == "strict" ? avio::WfMode::Strict : avio::WfMode::Modular;

    ordered_json report;
    ordered_json checks = ordered_json::array();
    bool pass = true;
    auto add = [&](const std::string& predicate, const avio::CheckResult& r) {
        ordered_json j;
        j["predicate"] = predicate;
        j["pass"] = r.ok;
        j["violations"] = violations_json(r.violations);
        checks.push_back(std::move(j));
        pass &= r.ok;
    };
    add("CF", avio::contention_free_system(sys));
    add(flags.wf_mode == "strict" ? "WF(strict)" : "WF(modular)",
        avio::well_formed_paths(sys, mode));
    add("SR", avio::simultaneous_relay(sys));
    report["checks"] = std::move(checks);
    report["pass"] = pass;
    std::cout << report.dump(2) << "\n";
    return pass ? 0 : 1;
}

int run_system(const std::string& file, const RunFlags& flags) {
    avio::SystemSpec sys = avio::load_system(file);
    if (flags.max_set) sys.domain.max = flags.max;
    avio::WfMode mode =
        flags.wf_mode == "strict" ? avio::WfMode::Strict : avio::WfMode::Modular;
    avio::CompiledSystem compiled = avio::compile_system(sys, mode);

    RunFlags adjusted = flags;
    adjusted.max = sys.domain.max;
    Engine engine({}, engine_options(adjusted));
    for (const auto& v : compiled.variables) engine.declare_var(v, true, 0);

    std::map<std::int64_t, Constraint> inputs;
    if (!flags.env_file.empty()) inputs = avio::load_env(flags.env_file);

    Trace trace = engine.run(compiled.process, flags.ticks, inputs, flags.keep_going);
    auto events = avio::derive_events(trace, compiled.events);

    std::string out_path = flags.out.empty() ? default_out(file) : flags.out;
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ConfigError("cannot write trace file: " + out_path);
    write_trace(out, trace, events);

    std::vector<avio::LatencyMeasure> measures;
    avio::CheckResult lt = avio::latency_ok(sys, trace, compiled.events, &measures);

    bool inconsistent = false;
    for (const auto& rec : trace) inconsistent |= rec.inconsistent;

    ordered_json report;
    report["trace"] = out_path;
    report["ticks"] = static_cast<std::int64_t>(trace.size());
    report["inconsistent"] = inconsistent;
    ordered_json lat = ordered_json::array();
    for (const auto& m : measures) {
        ordered_json j;
        j["name"] = m.name;
        j["exercised"] = m.exercised;
        if (m.exercised) j["latency"] = m.latency;
        j["deadline"] = m.deadline;
        lat.push_back(std::move(j));
    }
    report["latency"] = std::move(lat);
    report["violations"] = violations_json(lt.violations);
    report["pass"] = lt.ok && !inconsistent;
    std::cout << report.dump(2) << "\n";
    return (lt.ok && !inconsistent) ? 0 : 1;
}

int run_program(const std::string& file, const RunFlags& flags) {
    SourceProgram prog = parse_program(avio::read_file(file));
    Engine engine(prog.defs, engine_options(flags));
    for (const auto& d : prog.decls) engine.declare_var(d.name, d.persistent, d.init);

    std::map<std::int64_t, Constraint> inputs;
    if (!flags.env_file.empty()) inputs = avio::load_env(flags.env_file);

    Trace trace = engine.run(prog.entry, flags.ticks, inputs, flags.keep_going);

    std::string out_path = flags.out.empty() ? default_out(file) : flags.out;
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ConfigError("cannot write trace file: " + out_path);
    write_trace(out, trace, {});

    bool inconsistent = false;
    for (const auto& rec : trace) inconsistent |= rec.inconsistent;

    ordered_json report;
    report["trace"] = out_path;
    report["ticks"] = static_cast<std::int64_t>(trace.size());
    report["inconsistent"] = inconsistent;
    report["pass"] = !inconsistent;
    std::cout << report.dump(2) << "\n";
    return inconsistent ? 1 : 0;
}

int cmd_run(const std::string& file, const RunFlags& flags) {
    if (ends_with(file, ".sys")) return run_system(file, flags);
    return run_program(file, flags);
}

int cmd_replay(const std::string& file, const RunFlags& flags) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open file: " + file);
    auto records = read_trace(in);
    SolveConfig cfg;
    cfg.domain.max = flags.max;
    auto issues = replay_trace(records, cfg);
    for (const auto& issue : issues)
        std::cout << "tick " << issue.tick << ": " << issue.what << "\n";
    std::cout << (issues.empty() ? "replay ok: " : "replay failed: ") << records.size()
              << " records checked\n";
    return issues.empty() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"time-triggered concurrent constraint engine and schedule validator"};
    app.require_subcommand(1);

    RunFlags flags;
    std::string file;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("file", file, "input file")->required();
        cmd->add_option("--max", flags.max, "constraint domain upper bound (exclusive)");
    };

    CLI::App* check = app.add_subcommand("check", "parse and statically check a program");
    add_common(check);

    CLI::App* validate =
        app.add_subcommand("validate", "run the schedule predicates on a system file");
    add_common(validate);
    validate->add_option("--wf", flags.wf_mode, "well-formedness mode")
        ->check(CLI::IsMember({"strict", "modular"}));

    CLI::App* run = app.add_subcommand("run", "compile, simulate, and report");
    add_common(run);
    run->add_option("--ticks", flags.ticks, "time units to simulate")
        ->check(CLI::PositiveNumber);
    run->add_option("--env", flags.env_file, "environment schedule file");
    run->add_option("--ask-policy", flags.ask_policy, "ask evaluation policy")
        ->check(CLI::IsMember({"eager", "deferred"}));
    run->add_option("--wf", flags.wf_mode, "well-formedness mode")
        ->check(CLI::IsMember({"strict", "modular"}));
    run->add_option("--step-budget", flags.step_budget, "micro-step budget per tick");
    run->add_option("--out", flags.out, "trace output path");
    run->add_flag("--keep-going", flags.keep_going, "continue past an inconsistent tick");

    CLI::App* replay = app.add_subcommand("replay", "re-check a trace with the oracle");
    add_common(replay);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    for (CLI::App* sub : app.get_subcommands())
        flags.max_set |= sub->count("--max") > 0;

    try {
        if (check->parsed()) return cmd_check(file);
        if (validate->parsed()) return cmd_validate(file, flags);
        if (run->parsed()) return cmd_run(file, flags);
        if (replay->parsed()) return cmd_replay(file, flags);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
