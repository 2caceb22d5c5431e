#include "ttcc/validators.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

namespace ttcc::avio {

const char* violation_kind_text(Violation::Kind k) {
    switch (k) {
    case Violation::Kind::CF: return "CF";
    case Violation::Kind::WF: return "WF";
    case Violation::Kind::SR: return "SR";
    case Violation::Kind::LT: return "LT";
    }
    return "?";
}

std::int64_t maf(std::span<const ScheduleTriple> schedules) {
    std::int64_t m = 1;
    for (const auto& s : schedules) m = std::lcm(m, s.period);
    return m;
}

// ---------------------------------------------------------------------------
// Contention freedom
// ---------------------------------------------------------------------------

// Execution windows repeat forever: instance k of (o, tau, pi) occupies
// [k*pi + o, k*pi + o + tau). Overlap between two entries depends on the
// offset difference modulo gcd of the periods, so any collision on the
// infinite timeline already appears within one pairwise hyperperiod past the
// transient; unfolding to max(o) + 2*lcm(pi_a, pi_b) is exhaustive. This also
// makes the check inherently pairwise.
CheckResult contention_free(const std::vector<NamedTriple>& entries) {
    CheckResult out;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        for (std::size_t j = i + 1; j < entries.size(); ++j) {
            const auto& a = entries[i].s;
            const auto& b = entries[j].s;
            const std::int64_t horizon = std::max(a.offset, b.offset) +
                                         2 * std::lcm(a.period, b.period) +
                                         std::max(a.period, b.period);
            bool found = false;
            std::int64_t best_instant = 0, best_a = 0, best_b = 0;
            for (std::int64_t t = 0; t * a.period + a.offset < horizon; ++t) {
                const std::int64_t as = t * a.period + a.offset;
                for (std::int64_t u = 0; u * b.period + b.offset < horizon; ++u) {
                    const std::int64_t bs = u * b.period + b.offset;
                    if (as < bs + b.duration && bs < as + a.duration) {
                        std::int64_t instant = std::max(as, bs);
                        if (!found || instant < best_instant) {
                            found = true;
                            best_instant = instant;
                            best_a = as;
                            best_b = bs;
                        }
                    }
                }
            }
            if (found) {
                Violation v;
                v.kind = Violation::Kind::CF;
                v.participants = {entries[i].name, entries[j].name};
                v.instants = {best_instant};
                v.explanation = entries[i].name + " window [" + std::to_string(best_a) +
                                ", " + std::to_string(best_a + a.duration) + ") overlaps " +
                                entries[j].name + " window [" + std::to_string(best_b) +
                                ", " + std::to_string(best_b + b.duration) +
                                ") at instant " + std::to_string(best_instant);
                out.violations.push_back(std::move(v));
            }
        }
    }
    std::sort(out.violations.begin(), out.violations.end(),
              [](const Violation& a, const Violation& b) {
                  return std::tie(a.instants, a.participants) <
                         std::tie(b.instants, b.participants);
              });
    out.ok = out.violations.empty();
    return out;
}

CheckResult contention_free_system(const SystemSpec& sys) {
    CheckResult out;
    auto merge = [&](CheckResult r, const std::string& scope) {
        for (auto& v : r.violations) {
            v.explanation = scope + ": " + v.explanation;
            out.violations.push_back(std::move(v));
        }
    };
    for (const auto& m : sys.modules) {
        std::vector<NamedTriple> entries;
        for (const auto& p : m.partitions) entries.push_back({p.name, p.schedule});
        merge(contention_free(entries), "module " + m.name);
    }
    std::set<DataflowLink> links;
    for (const auto& f : sys.frames)
        for (const auto& h : f.hops) links.insert(h.link);
    for (const auto& link : links) {
        std::vector<NamedTriple> entries;
        for (const auto& f : sys.frames)
            if (const FrameHop* h = f.hop_on(link))
                entries.push_back({f.name, ScheduleTriple{h->offset, f.length, f.period}});
        merge(contention_free(entries), "datalink " + link_text(link));
    }
    out.ok = out.violations.empty();
    return out;
}

// ---------------------------------------------------------------------------
// Well-formed paths
// ---------------------------------------------------------------------------

CheckResult well_formed_paths(const SystemSpec& sys, WfMode mode) {
    CheckResult out;
    const std::int64_t h = sys.network.max_hopdelay;
    for (const auto& f : sys.frames) {
        const VirtualLink& vl = sys.topology.virtual_links.at(f.virtual_link);
        std::set<std::pair<std::string, std::string>> reported;
        for (const auto& path : vl.paths) {
            for (std::size_t i = 0; i + 2 < path.vertices.size(); ++i) {
                DataflowLink prev{path.vertices[i], path.vertices[i + 1]};
                DataflowLink next{path.vertices[i + 1], path.vertices[i + 2]};
                const FrameHop* hp = f.hop_on(prev);
                const FrameHop* hn = f.hop_on(next);
                if (!hp || !hn) continue;
                if (!reported.insert({link_text(prev), link_text(next)}).second) continue;
                const std::int64_t diff = hn->offset - hp->offset;
                bool ok;
                std::string detail;
                if (mode == WfMode::Strict) {
                    ok = diff >= h;
                    detail = std::to_string(hn->offset) + " - " + std::to_string(hp->offset) +
                             " = " + std::to_string(diff) + " >= " + std::to_string(h);
                } else {
                    const std::int64_t d = ((diff % f.period) + f.period) % f.period;
                    ok = d != 0 && d >= h;
                    detail = "(" + std::to_string(hn->offset) + " - " +
                             std::to_string(hp->offset) + ") mod " +
                             std::to_string(f.period) + " = " + std::to_string(d) +
                             " >= " + std::to_string(h);
                }
                if (!ok) {
                    Violation v;
                    v.kind = Violation::Kind::WF;
                    v.participants = {f.name, link_text(prev), link_text(next)};
                    v.instants = {hp->offset, hn->offset};
                    v.explanation = "frame " + f.name + " hop " + link_text(prev) + " -> " +
                                    link_text(next) + " violates " + detail;
                    out.violations.push_back(std::move(v));
                }
            }
        }
    }
    out.ok = out.violations.empty();
    return out;
}

// ---------------------------------------------------------------------------
// Simultaneous relay
// ---------------------------------------------------------------------------

CheckResult simultaneous_relay(const SystemSpec& sys) {
    CheckResult out;
    for (const auto& f : sys.frames) {
        const VirtualLink& vl = sys.topology.virtual_links.at(f.virtual_link);
        std::set<std::string> reported;
        for (std::size_t k = 0; k < vl.paths.size(); ++k) {
            for (std::size_t l = 0; l < vl.paths.size(); ++l) {
                if (k == l) continue;
                for (std::size_t i = 0; i + 1 < vl.paths[k].vertices.size(); ++i) {
                    for (std::size_t j = 0; j + 1 < vl.paths[l].vertices.size(); ++j) {
                        if (vl.paths[k].vertices[i] != vl.paths[l].vertices[j]) continue;
                        DataflowLink lk{vl.paths[k].vertices[i], vl.paths[k].vertices[i + 1]};
                        DataflowLink ll{vl.paths[l].vertices[j], vl.paths[l].vertices[j + 1]};
                        if (lk == ll) continue;
                        const FrameHop* hk = f.hop_on(lk);
                        const FrameHop* hl = f.hop_on(ll);
                        if (!hk || !hl || hk->offset == hl->offset) continue;
                        std::string key = f.name + "|" +
                                          std::min(link_text(lk), link_text(ll)) + "|" +
                                          std::max(link_text(lk), link_text(ll));
                        if (!reported.insert(key).second) continue;
                        Violation v;
                        v.kind = Violation::Kind::SR;
                        v.participants = {f.name, lk.from, link_text(lk), link_text(ll)};
                        v.instants = {hk->offset, hl->offset};
                        v.explanation = "frame " + f.name + " relayed at " + lk.from +
                                        " with offsets " + std::to_string(hk->offset) +
                                        " on " + link_text(lk) + " and " +
                                        std::to_string(hl->offset) + " on " + link_text(ll);
                        out.violations.push_back(std::move(v));
                    }
                }
            }
        }
    }
    out.ok = out.violations.empty();
    return out;
}

// ---------------------------------------------------------------------------
// Events and latency
// ---------------------------------------------------------------------------

namespace {

std::string base_name(const std::string& var) {
    auto pos = var.find_last_of("#@");
    if (pos == std::string::npos || pos + 1 >= var.size()) return var;
    for (std::size_t i = pos + 1; i < var.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(var[i]))) return var;
    return var.substr(0, pos);
}

void collect_told_vars(const Constraint& c, std::set<std::string>& out) {
    switch (c.kind()) {
    case Constraint::Kind::Atom:
        if (c.rel() == Rel::Eq && c.lhs().is_var()) out.insert(base_name(c.lhs().name));
        return;
    case Constraint::Kind::Conj:
        for (const auto& p : c.conjuncts()) collect_told_vars(p, out);
        return;
    default:
        return;
    }
}

} // namespace

std::vector<TraceEvent> derive_events(const Trace& trace, const std::vector<EventMeta>& meta) {
    std::map<std::string, std::vector<const EventMeta*>> by_var;
    for (const auto& m : meta) by_var[m.result_var].push_back(&m);
    std::set<std::tuple<std::int64_t, std::string, std::string, std::string>> seen;
    std::vector<TraceEvent> out;
    auto emit = [&](std::int64_t tick, const std::string& kind, const std::string& name,
                    const std::string& link) {
        if (tick < 0) return;
        if (!seen.insert({tick, kind, name, link}).second) return;
        out.push_back(TraceEvent{kind, name, link, tick});
    };
    for (const auto& rec : trace) {
        std::set<std::string> vars;
        for (const auto& told : rec.told) collect_told_vars(told, vars);
        for (const auto& var : vars) {
            auto it = by_var.find(var);
            if (it == by_var.end()) continue;
            for (const EventMeta* m : it->second) {
                if (m->kind == EventMeta::Kind::Partition) {
                    emit(rec.tick, "partition_end", m->owner, "");
                    emit(rec.tick - m->duration, "partition_start", m->owner, "");
                } else {
                    emit(rec.tick, "frame_arrival", m->owner, m->link);
                    emit(rec.tick - m->duration, "frame_dispatch", m->owner, m->link);
                }
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const TraceEvent& a, const TraceEvent& b) {
        return std::tie(a.tick, a.kind, a.name, a.link) <
               std::tie(b.tick, b.kind, b.name, b.link);
    });
    return out;
}

namespace {

struct EventIndex {
    const std::vector<TraceEvent>& events;

    std::optional<std::int64_t> first(const std::string& kind, const std::string& name,
                                      std::int64_t at_or_after,
                                      const std::string& link = "") const {
        for (const auto& e : events) {
            if (e.kind != kind || e.name != name || e.tick < at_or_after) continue;
            if (!link.empty() && e.link != link) continue;
            return e.tick;
        }
        return std::nullopt;
    }

    std::optional<std::int64_t> last_at_or_before(const std::string& kind,
                                                  const std::string& name,
                                                  std::int64_t bound) const {
        std::optional<std::int64_t> best;
        for (const auto& e : events) {
            if (e.kind != kind || e.name != name || e.tick > bound) continue;
            if (!best || e.tick > *best) best = e.tick;
        }
        return best;
    }
};

Violation not_exercised(const LatencyConstraint& lc, const std::string& detail) {
    Violation v;
    v.kind = Violation::Kind::LT;
    v.participants = {lc.name};
    v.explanation = "latency " + lc.name + ": chain not exercised (" + detail + ")";
    return v;
}

// Elementary: start of the producing execution of the sending partition to
// the end of the last receiving partition execution consuming the frame.
bool measure_elementary(const SystemSpec& sys, const LatencyConstraint& lc,
                        const EventIndex& idx, std::int64_t* latency, Violation* why) {
    const std::string& sender = lc.chain[0];
    const std::string& frame_name = lc.chain[1];
    const PartitionSpec* sp = sys.find_partition(sender);
    const FrameSpec* frame = sys.find_frame(frame_name);
    const VirtualLink& vl = sys.topology.virtual_links.at(frame->virtual_link);
    const std::string& source = vl.paths.front().vertices.front();
    std::string first_link;
    for (const auto& h : frame->hops)
        if (h.link.from == source) first_link = link_text(h.link);
    auto dispatch = idx.first("frame_dispatch", frame_name, 0, first_link);
    if (!dispatch) {
        *why = not_exercised(lc, "frame " + frame_name + " never dispatched");
        return false;
    }
    auto producer_end = idx.last_at_or_before("partition_end", sender, *dispatch);
    if (!producer_end) {
        *why = not_exercised(lc, "no completed " + sender + " execution before dispatch");
        return false;
    }
    const std::int64_t start = *producer_end - sp->schedule.duration;
    std::int64_t last_end = start;
    for (std::size_t i = 2; i < lc.chain.size(); ++i) {
        const PartitionSpec* rp = sys.find_partition(lc.chain[i]);
        std::optional<std::int64_t> arrival;
        for (const auto& h : frame->hops) {
            if (h.link.to != rp->module) continue;
            auto a = idx.first("frame_arrival", frame_name, *dispatch, link_text(h.link));
            if (a && (!arrival || *a < *arrival)) arrival = a;
        }
        if (!arrival) {
            *why = not_exercised(lc, "frame never arrived at module " + rp->module);
            return false;
        }
        std::optional<std::int64_t> consume;
        for (const auto& e : idx.events) {
            if (e.kind != "partition_end" || e.name != rp->name) continue;
            if (e.tick - rp->schedule.duration >= *arrival) {
                consume = e.tick;
                break;
            }
        }
        if (!consume) {
            *why = not_exercised(lc, "no " + rp->name + " execution consumed the frame");
            return false;
        }
        last_end = std::max(last_end, *consume);
    }
    *latency = last_end - start;
    return true;
}

bool measure_e2e(const SystemSpec& sys, const LatencyConstraint& lc, const Trace& trace,
                 const EventIndex& idx, std::int64_t* latency, Violation* why) {
    std::optional<std::int64_t> stimulus;
    for (const auto& rec : trace) {
        std::set<std::string> vars;
        for (const auto& v : rec.input.free_vars()) vars.insert(base_name(v));
        if (vars.count(lc.stimulus)) {
            stimulus = rec.tick;
            break;
        }
    }
    if (!stimulus) {
        *why = not_exercised(lc, "stimulus " + lc.stimulus + " never injected");
        return false;
    }
    std::int64_t cursor = *stimulus;
    for (const auto& elem : lc.chain) {
        std::optional<std::int64_t> at;
        if (sys.find_partition(elem)) {
            at = idx.first("partition_end", elem, cursor);
        } else {
            at = idx.first("frame_arrival", elem, cursor);
        }
        if (!at) {
            *why = not_exercised(lc, elem + " produced no event after tick " +
                                         std::to_string(cursor));
            return false;
        }
        cursor = *at;
    }
    *latency = cursor - *stimulus;
    return true;
}

} // namespace

CheckResult latency_ok(const SystemSpec& sys, const Trace& trace,
                       const std::vector<EventMeta>& meta,
                       std::vector<LatencyMeasure>* measures) {
    CheckResult out;
    const auto events = derive_events(trace, meta);
    EventIndex idx{events};
    for (const auto& lc : sys.latencies) {
        LatencyMeasure m;
        m.name = lc.name;
        m.deadline = lc.deadline;
        Violation why;
        std::int64_t latency = 0;
        bool ok;
        if (lc.kind == LatencyConstraint::Kind::Elementary)
            ok = measure_elementary(sys, lc, idx, &latency, &why);
        else
            ok = measure_e2e(sys, lc, trace, idx, &latency, &why);
        if (!ok) {
            out.violations.push_back(std::move(why));
            if (measures) measures->push_back(m);
            continue;
        }
        m.exercised = true;
        m.latency = latency;
        if (latency > lc.deadline) {
            Violation v;
            v.kind = Violation::Kind::LT;
            v.participants = {lc.name};
            v.instants = {latency, lc.deadline};
            v.explanation = "latency " + lc.name + ": measured " + std::to_string(latency) +
                            " exceeds deadline " + std::to_string(lc.deadline);
            out.violations.push_back(std::move(v));
        }
        if (measures) measures->push_back(m);
    }
    out.ok = out.violations.empty();
    return out;
}

} // namespace ttcc::avio
