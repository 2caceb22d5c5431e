#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "generators.hpp"
#include "ttcc/parser.hpp"
#include "ttcc/sysfile.hpp"
#include "ttcc/validators.hpp"

using namespace ttcc;
using namespace ttcc::avio;

namespace {

// Independent reference: simulate occupancy at unit resolution over the MAF
// past the transient (two hyperperiods beyond the largest offset covers the
// whole periodic steady state) and report the first doubly-occupied cell.
struct OccupancyResult {
    bool free = true;
    std::int64_t first_collision = -1;
};

OccupancyResult cf_occupancy(const std::vector<NamedTriple>& entries) {
    std::vector<ScheduleTriple> ts;
    for (const auto& e : entries) ts.push_back(e.s);
    const std::int64_t m = maf(ts);
    std::int64_t horizon = 2 * m;
    for (const auto& e : entries)
        horizon = std::max(horizon, e.s.offset + 2 * m + e.s.period);
    std::vector<int> cells(static_cast<std::size_t>(horizon), 0);
    OccupancyResult out;
    for (const auto& e : entries) {
        for (std::int64_t t = 0; t * e.s.period + e.s.offset < horizon; ++t) {
            const std::int64_t start = t * e.s.period + e.s.offset;
            for (std::int64_t u = start; u < std::min(start + e.s.duration, horizon); ++u) {
                if (++cells[static_cast<std::size_t>(u)] > 1) {
                    out.free = false;
                    if (out.first_collision < 0 || u < out.first_collision)
                        out.first_collision = u;
                }
            }
        }
    }
    return out;
}

// Naive evaluation of the mutual-exclusion disjunction over all ordered
// pairs, for the symmetry check.
bool cf_all_ordered_pairs(const std::vector<NamedTriple>& entries) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
        for (std::size_t j = 0; j < entries.size(); ++j) {
            if (i == j) continue;
            const auto& a = entries[i].s;
            const auto& b = entries[j].s;
            const std::int64_t horizon = std::max(a.offset, b.offset) +
                                         2 * std::lcm(a.period, b.period) +
                                         std::max(a.period, b.period);
            for (std::int64_t ti = 0; ti * a.period + a.offset < horizon; ++ti) {
                for (std::int64_t tj = 0; tj * b.period + b.offset < horizon; ++tj) {
                    const std::int64_t sa = ti * a.period + a.offset;
                    const std::int64_t sb = tj * b.period + b.offset;
                    if (!(sa >= sb + b.duration || sb >= sa + a.duration)) return false;
                }
            }
        }
    }
    return true;
}

SystemSpec toy_system() {
    return parse_system(R"(
module MA { partition P1 offset 2 duration 3 period 20 guard "go = 1" result "outv = go"; }
module MB { partition P2 offset 10 duration 4 period 20 guard "inv > 0" result "done = inv"; }
topology {
  endsystem MA MB;
  switch S;
  link MA S;
  link S MB;
}
vl vfx { path MA S MB; }
frame fx vl vfx length 1 period 20 {
  hop MA S offset 6 guard "outv > 0" result "sv = outv";
  hop S MB offset 8 guard "sv > 0" result "inv = sv";
}
network max_hopdelay 2;
latency elementary lat_el deadline 12 chain P1 fx P2;
latency e2e lat_ee deadline 14 stimulus go chain P1 fx P2;
)");
}

// Hand-written trace of the toy system's first hyperperiod.
Trace toy_trace() {
    auto rec = [](std::int64_t tick, std::vector<std::string> told) {
        TickRecord r;
        r.tick = tick;
        r.input = tick == 0 ? parse_constraint("go#0 = 1") : Constraint::truth();
        for (const auto& t : told) r.told.push_back(parse_constraint(t));
        return r;
    };
    Trace tr;
    for (std::int64_t t = 0; t < 20; ++t) tr.push_back(rec(t, {}));
    tr[5].told.push_back(parse_constraint("outv#1 = 1"));
    tr[7].told.push_back(parse_constraint("sv#1 = 1"));
    tr[9].told.push_back(parse_constraint("inv#1 = 1"));
    tr[14].told.push_back(parse_constraint("done#1 = 1"));
    return tr;
}

std::vector<EventMeta> toy_meta() {
    return {
        {EventMeta::Kind::Partition, "P1", "", "outv", 3},
        {EventMeta::Kind::FrameHop, "fx", "[MA,S]", "sv", 1},
        {EventMeta::Kind::FrameHop, "fx", "[S,MB]", "inv", 1},
        {EventMeta::Kind::Partition, "P2", "", "done", 4},
    };
}

} // namespace

TEST_CASE("maf") {
    ScheduleTriple a{0, 1, 50}, b{0, 1, 50}, c{0, 1, 60}, d{0, 1, 100}, e{0, 1, 10};
    std::vector<ScheduleTriple> v1{a, b};
    CHECK(maf(v1) == 50);
    // 50 = 2 * 5^2, 60 = 2^2 * 3 * 5, 100 = 2^2 * 5^2 -> 2^2 * 3 * 5^2 = 300
    std::vector<ScheduleTriple> v2{a, c, d};
    CHECK(maf(v2) == 300);
    std::vector<ScheduleTriple> v3{e};
    CHECK(maf(v3) == 10);
}

TEST_CASE("contention freedom") {
    SUBCASE("the two-partition module schedule is free") {
        CheckResult r = contention_free({{"KU1", {0, 25, 50}}, {"MFD1", {25, 25, 50}}});
        CHECK(r.ok);
        CHECK(r.violations.empty());
    }
    SUBCASE("shifting the second window by ten collides at instant 10") {
        CheckResult r = contention_free({{"KU1", {0, 25, 50}}, {"MFD1", {10, 25, 50}}});
        REQUIRE_FALSE(r.ok);
        REQUIRE(r.violations.size() == 1);
        const Violation& v = r.violations[0];
        CHECK(v.kind == Violation::Kind::CF);
        CHECK(v.participants == std::vector<std::string>{"KU1", "MFD1"});
        CHECK(v.instants == std::vector<std::int64_t>{10});
    }
    SUBCASE("a singleton vector is trivially free") {
        CHECK(contention_free({{"solo", {3, 2, 10}}}).ok);
        CHECK(contention_free({}).ok);
    }
    SUBCASE("windows that merely touch do not conflict") {
        CHECK(contention_free({{"a", {0, 25, 50}}, {"b", {25, 25, 50}}}).ok);
        CHECK_FALSE(contention_free({{"a", {0, 26, 50}}, {"b", {25, 25, 50}}}).ok);
    }
}

TEST_CASE("contention freedom agrees with the occupancy oracle") {
    testgen::Rng rng(13190);
    int disagreements = 0;
    for (int i = 0; i < 600; ++i) {
        std::vector<NamedTriple> entries;
        const int n = int(testgen::pick(rng, 1, 4));
        for (int k = 0; k < n; ++k)
            entries.push_back({"p" + std::to_string(k), testgen::random_triple(rng)});
        CheckResult got = contention_free(entries);
        OccupancyResult want = cf_occupancy(entries);
        if (got.ok != want.free) ++disagreements;
        if (!got.ok && !want.free) {
            // the earliest reported instant matches the first occupied-twice cell
            CHECK(got.violations.front().instants.front() == want.first_collision);
        }
    }
    CHECK(disagreements == 0);
}

TEST_CASE("contention freedom is permutation invariant and symmetric") {
    testgen::Rng rng(5077);
    for (int i = 0; i < 200; ++i) {
        std::vector<NamedTriple> entries;
        const int n = int(testgen::pick(rng, 2, 4));
        for (int k = 0; k < n; ++k)
            entries.push_back({"p" + std::to_string(k), testgen::random_triple(rng)});
        bool verdict = contention_free(entries).ok;
        // ordered-pairs-once equals the naive all-ordered-pairs evaluation
        CHECK(verdict == cf_all_ordered_pairs(entries));
        std::vector<NamedTriple> shuffled = entries;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(contention_free(shuffled).ok == verdict);
    }
}

TEST_CASE("well-formed paths") {
    SystemSpec sys = toy_system();

    SUBCASE("the toy hop is fine in both modes") {
        CHECK(well_formed_paths(sys, WfMode::Strict).ok);
        CHECK(well_formed_paths(sys, WfMode::Modular).ok);
    }
    SUBCASE("a late second hop fails strictly but passes modularly") {
        // mirror of the corpus query2 offsets: 60 then 41 with period 30
        sys.frames[0].period = 30;
        sys.frames[0].hops[0].offset = 60;
        sys.frames[0].hops[1].offset = 41;
        sys.network.max_hopdelay = 3;
        CheckResult strict = well_formed_paths(sys, WfMode::Strict);
        REQUIRE_FALSE(strict.ok);
        CHECK(strict.violations.size() == 1);
        CHECK(strict.violations[0].participants ==
              std::vector<std::string>{"fx", "[MA,S]", "[S,MB]"});
        // (41 - 60) mod 30 = 11 >= 3
        CHECK(well_formed_paths(sys, WfMode::Modular).ok);
    }
    SUBCASE("a zero modular difference is a violation") {
        sys.frames[0].hops[1].offset = sys.frames[0].hops[0].offset + sys.frames[0].period;
        CHECK_FALSE(well_formed_paths(sys, WfMode::Modular).ok);
        CHECK(well_formed_paths(sys, WfMode::Strict).ok);
    }
    SUBCASE("single-link paths have nothing to check") {
        SystemSpec single = parse_system(R"(
module MA { partition P1 offset 0 duration 1 period 10 guard "g = 1" result "o1 = g"; }
module MB { partition P2 offset 5 duration 1 period 10 guard "o1 > 0" result "o2 = o1"; }
topology { endsystem MA MB; link MA MB; }
vl v1 { path MA MB; }
frame f1 vl v1 length 1 period 10 { hop MA MB offset 3 guard "o1 > 0" result "x1 = o1"; }
network max_hopdelay 5;
)");
        CHECK(well_formed_paths(single, WfMode::Strict).ok);
        CHECK(well_formed_paths(single, WfMode::Modular).ok);
    }
    SUBCASE("verdicts are invariant under hop reordering") {
        SystemSpec s = toy_system();
        s.frames[0].hops[0].offset = 60;
        s.frames[0].hops[1].offset = 41;
        s.frames[0].period = 30;
        s.network.max_hopdelay = 3;
        for (WfMode mode : {WfMode::Strict, WfMode::Modular}) {
            bool before = well_formed_paths(s, mode).ok;
            SystemSpec shuffled = s;
            std::swap(shuffled.frames[0].hops[0], shuffled.frames[0].hops[1]);
            CHECK(well_formed_paths(shuffled, mode).ok == before);
        }
    }
    SUBCASE("violation witnesses reproduce the arithmetic") {
        sys.frames[0].period = 30;
        sys.frames[0].hops[0].offset = 60;
        sys.frames[0].hops[1].offset = 41;
        sys.network.max_hopdelay = 3;
        CheckResult r = well_formed_paths(sys, WfMode::Strict);
        REQUIRE_FALSE(r.ok);
        const Violation& v = r.violations[0];
        REQUIRE(v.instants.size() == 2);
        // replaying the strict definition on the reported offsets fails
        CHECK(v.instants[1] - v.instants[0] < sys.network.max_hopdelay);
    }
    SUBCASE("monotone in the hop bound") {
        testgen::Rng rng(99);
        for (int i = 0; i < 50; ++i) {
            SystemSpec s = toy_system();
            s.frames[0].hops[0].offset = testgen::pick(rng, 0, 19);
            s.frames[0].hops[1].offset = testgen::pick(rng, 0, 19);
            for (std::int64_t h = 5; h >= 0; --h) {
                s.network.max_hopdelay = h;
                if (well_formed_paths(s, WfMode::Strict).ok) {
                    for (std::int64_t h2 = h - 1; h2 >= 0; --h2) {
                        s.network.max_hopdelay = h2;
                        CHECK(well_formed_paths(s, WfMode::Strict).ok);
                    }
                    break;
                }
            }
        }
    }
}

TEST_CASE("simultaneous relay") {
    SystemSpec sys = parse_system(R"(
module MA { partition P1 offset 0 duration 1 period 10 guard "g = 1" result "w = g"; }
module MB { partition P2 offset 5 duration 1 period 10 guard "x1 > 0" result "d1 = x1"; }
module MC { partition P3 offset 5 duration 1 period 10 guard "x2 > 0" result "d2 = x2"; }
topology {
  endsystem MA MB MC;
  switch S;
  link MA S; link S MB; link S MC;
}
vl vw { path MA S MB; path MA S MC; }
frame fw vl vw length 1 period 10 {
  hop MA S offset 0 guard "w > 0" result "sw = w";
  hop S MB offset 5 guard "sw > 0" result "x1 = sw";
  hop S MC offset 5 guard "sw > 0" result "x2 = sw";
}
network max_hopdelay 2;
)");
    SUBCASE("equal outgoing offsets pass") { CHECK(simultaneous_relay(sys).ok); }
    SUBCASE("unequal offsets name the relay vertex") {
        sys.frames[0].hops[2].offset = 4;
        CheckResult r = simultaneous_relay(sys);
        REQUIRE_FALSE(r.ok);
        REQUIRE(r.violations.size() == 1);
        CHECK(r.violations[0].participants[0] == "fw");
        CHECK(r.violations[0].participants[1] == "S");
        CHECK((r.violations[0].instants == std::vector<std::int64_t>{5, 4} ||
               r.violations[0].instants == std::vector<std::int64_t>{4, 5}));
    }
    SUBCASE("a unicast frame has no sibling links") {
        SystemSpec toy = toy_system();
        CHECK(simultaneous_relay(toy).ok);
    }
    SUBCASE("permutation of paths does not change the verdict") {
        std::swap(sys.topology.virtual_links.at("vw").paths[0],
                  sys.topology.virtual_links.at("vw").paths[1]);
        CHECK(simultaneous_relay(sys).ok);
    }
}

TEST_CASE("latency measurement on a hand-written trace") {
    SystemSpec sys = toy_system();
    Trace trace = toy_trace();
    auto meta = toy_meta();

    SUBCASE("events derive from told variables") {
        auto events = derive_events(trace, meta);
        REQUIRE(events.size() == 8);
        CHECK(events[0].kind == "partition_start");
        CHECK(events[0].name == "P1");
        CHECK(events[0].tick == 2);
        CHECK(events.back().kind == "partition_end");
        CHECK(events.back().name == "P2");
        CHECK(events.back().tick == 14);
    }
    SUBCASE("elementary latency is receiver end minus sender start") {
        std::vector<LatencyMeasure> ms;
        CheckResult r = latency_ok(sys, trace, meta, &ms);
        CHECK(r.ok);
        REQUIRE(ms.size() == 2);
        // back-to-back windows: o_recv + tau_recv - o_send = 10 + 4 - 2
        CHECK(ms[0].name == "lat_el");
        CHECK(ms[0].exercised);
        CHECK(ms[0].latency == 12);
        CHECK(ms[1].name == "lat_ee");
        CHECK(ms[1].latency == 14);
    }
    SUBCASE("a zero deadline is violated by any nonempty chain") {
        sys.latencies[0].deadline = 0;
        CheckResult r = latency_ok(sys, trace, meta, nullptr);
        REQUIRE_FALSE(r.ok);
        CHECK(r.violations[0].kind == Violation::Kind::LT);
        CHECK(r.violations[0].instants == std::vector<std::int64_t>{12, 0});
    }
    SUBCASE("an unexercised chain is reported, not passed") {
        Trace quiet;
        for (std::int64_t t = 0; t < 20; ++t) {
            TickRecord r;
            r.tick = t;
            quiet.push_back(r);
        }
        CheckResult r = latency_ok(sys, quiet, meta, nullptr);
        REQUIRE_FALSE(r.ok);
        CHECK(r.violations.size() == 2);
        for (const auto& v : r.violations)
            CHECK(v.explanation.find("not exercised") != std::string::npos);
    }
}

TEST_CASE("witnesses replay against the raw definitions") {
    testgen::Rng rng(31337);
    for (int i = 0; i < 200; ++i) {
        std::vector<NamedTriple> entries;
        const int n = int(testgen::pick(rng, 2, 4));
        for (int k = 0; k < n; ++k)
            entries.push_back({"p" + std::to_string(k), testgen::random_triple(rng)});
        CheckResult r = contention_free(entries);
        for (const auto& v : r.violations) {
            REQUIRE(v.participants.size() == 2);
            auto find = [&](const std::string& name) {
                for (const auto& e : entries)
                    if (e.name == name) return e.s;
                FAIL("unknown participant");
                return ScheduleTriple{};
            };
            ScheduleTriple a = find(v.participants[0]);
            ScheduleTriple b = find(v.participants[1]);
            const std::int64_t instant = v.instants.at(0);
            // the reported instant lies inside a window of each participant
            auto covers = [&](const ScheduleTriple& s) {
                for (std::int64_t t = 0; t * s.period <= instant; ++t) {
                    std::int64_t start = t * s.period + s.offset;
                    if (instant >= start && instant < start + s.duration) return true;
                }
                return false;
            };
            CHECK(covers(a));
            CHECK(covers(b));
        }
    }
}
