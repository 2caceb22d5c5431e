#include "ttcc/sysfile.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "ttcc/parser.hpp"

namespace ttcc::avio {

namespace {

struct SysToken {
    enum class Kind { Word, Int, String, Open, Close, Semi, End };
    Kind kind = Kind::End;
    std::string text;
    std::int64_t value = 0;
    int line = 1;
};

std::vector<SysToken> sys_tokens(const std::string& text) {
    std::vector<SysToken> out;
    int line = 1;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '#') {
            while (i < text.size() && text[i] != '\n') ++i;
            continue;
        }
        SysToken t;
        t.line = line;
        if (c == '{') {
            t.kind = SysToken::Kind::Open;
            ++i;
        } else if (c == '}') {
            t.kind = SysToken::Kind::Close;
            ++i;
        } else if (c == ';') {
            t.kind = SysToken::Kind::Semi;
            ++i;
        } else if (c == '"') {
            ++i;
            std::string s;
            while (i < text.size() && text[i] != '"') {
                if (text[i] == '\n') ++line;
                s += text[i++];
            }
            if (i == text.size()) throw ConfigError("unterminated string at line " +
                                                    std::to_string(t.line));
            ++i;
            t.kind = SysToken::Kind::String;
            t.text = std::move(s);
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string num;
            while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])))
                num += text[i++];
            t.kind = SysToken::Kind::Int;
            t.value = std::stoll(num);
            t.text = std::move(num);
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string w;
            while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) ||
                                       text[i] == '_'))
                w += text[i++];
            t.kind = SysToken::Kind::Word;
            t.text = std::move(w);
        } else {
            throw ConfigError("unexpected character '" + std::string(1, c) + "' at line " +
                              std::to_string(line));
        }
        out.push_back(std::move(t));
    }
    SysToken end;
    end.kind = SysToken::Kind::End;
    end.line = line;
    out.push_back(std::move(end));
    return out;
}

class SysParser {
public:
    explicit SysParser(const std::string& text) : toks_(sys_tokens(text)) {}

    SystemSpec parse() {
        SystemSpec sys;
        while (peek().kind != SysToken::Kind::End) {
            std::string section = expect_word();
            if (section == "max") {
                sys.domain.max = expect_int();
                expect_semi();
            } else if (section == "module") {
                sys.modules.push_back(module());
            } else if (section == "topology") {
                topology(sys.topology);
            } else if (section == "vl") {
                VirtualLink vl;
                vl.name = expect_word();
                expect_open();
                while (!eat_close()) {
                    expect_specific_word("path");
                    DataflowPath p;
                    while (peek().kind == SysToken::Kind::Word) p.vertices.push_back(expect_word());
                    expect_semi();
                    vl.paths.push_back(std::move(p));
                }
                if (sys.topology.virtual_links.count(vl.name))
                    throw ConfigError("duplicate virtual link " + vl.name);
                sys.topology.virtual_links.emplace(vl.name, std::move(vl));
            } else if (section == "frame") {
                sys.frames.push_back(frame());
            } else if (section == "network") {
                expect_specific_word("max_hopdelay");
                sys.network.max_hopdelay = expect_int();
                expect_semi();
            } else if (section == "latency") {
                sys.latencies.push_back(latency());
            } else {
                throw ConfigError("unknown section '" + section + "' at line " +
                                  std::to_string(peek().line));
            }
        }
        validate_spec(sys);
        return sys;
    }

private:
    const SysToken& peek() const { return toks_[pos_]; }
    const SysToken& advance() { return toks_[pos_++]; }

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError(what + " at line " + std::to_string(peek().line));
    }

    std::string expect_word() {
        if (peek().kind != SysToken::Kind::Word) fail("expected word");
        return advance().text;
    }

    void expect_specific_word(const std::string& w) {
        if (peek().kind != SysToken::Kind::Word || peek().text != w)
            fail("expected '" + w + "'");
        advance();
    }

    std::int64_t expect_int() {
        if (peek().kind != SysToken::Kind::Int) fail("expected integer");
        return advance().value;
    }

    std::string expect_string() {
        if (peek().kind != SysToken::Kind::String) fail("expected quoted constraint");
        return advance().text;
    }

    void expect_semi() {
        if (peek().kind != SysToken::Kind::Semi) fail("expected ';'");
        advance();
    }

    void expect_open() {
        if (peek().kind != SysToken::Kind::Open) fail("expected '{'");
        advance();
    }

    bool eat_close() {
        if (peek().kind != SysToken::Kind::Close) return false;
        advance();
        return true;
    }

    bool eat_word(const std::string& w) {
        if (peek().kind == SysToken::Kind::Word && peek().text == w) {
            advance();
            return true;
        }
        return false;
    }

    Constraint constraint_attr(const std::string& owner) {
        std::string text = expect_string();
        try {
            return parse_constraint(text);
        } catch (const SyntaxError& e) {
            throw ConfigError(owner + ": bad constraint \"" + text + "\": " + e.what());
        }
    }

    ModuleSpec module() {
        ModuleSpec m;
        m.name = expect_word();
        expect_open();
        while (!eat_close()) {
            expect_specific_word("partition");
            PartitionSpec p;
            p.module = m.name;
            p.name = expect_word();
            expect_specific_word("offset");
            p.schedule.offset = expect_int();
            expect_specific_word("duration");
            p.schedule.duration = expect_int();
            expect_specific_word("period");
            p.schedule.period = expect_int();
            expect_specific_word("guard");
            p.guard = constraint_attr("partition " + p.name);
            expect_specific_word("result");
            p.result = constraint_attr("partition " + p.name);
            p.queuing = eat_word("queuing");
            expect_semi();
            m.partitions.push_back(std::move(p));
        }
        return m;
    }

    void topology(Topology& topo) {
        expect_open();
        while (!eat_close()) {
            std::string what = expect_word();
            if (what == "endsystem") {
                while (peek().kind == SysToken::Kind::Word)
                    topo.end_systems.insert(expect_word());
            } else if (what == "switch") {
                while (peek().kind == SysToken::Kind::Word) topo.switches.insert(expect_word());
            } else if (what == "link") {
                std::string a = expect_word();
                std::string b = expect_word();
                topo.links.push_back(DataflowLink{a, b});
                topo.links.push_back(DataflowLink{b, a});
            } else {
                fail("unknown topology item '" + what + "'");
            }
            expect_semi();
        }
    }

    FrameSpec frame() {
        FrameSpec f;
        f.name = expect_word();
        expect_specific_word("vl");
        f.virtual_link = expect_word();
        expect_specific_word("length");
        f.length = expect_int();
        expect_specific_word("period");
        f.period = expect_int();
        f.queuing = eat_word("queuing");
        expect_open();
        while (!eat_close()) {
            expect_specific_word("hop");
            FrameHop h;
            h.link.from = expect_word();
            h.link.to = expect_word();
            expect_specific_word("offset");
            h.offset = expect_int();
            expect_specific_word("guard");
            h.guard = constraint_attr("frame " + f.name);
            expect_specific_word("result");
            h.result = constraint_attr("frame " + f.name);
            expect_semi();
            f.hops.push_back(std::move(h));
        }
        return f;
    }

    LatencyConstraint latency() {
        LatencyConstraint lc;
        std::string kind = expect_word();
        if (kind == "elementary") {
            lc.kind = LatencyConstraint::Kind::Elementary;
        } else if (kind == "e2e") {
            lc.kind = LatencyConstraint::Kind::EndToEnd;
        } else {
            fail("latency kind must be 'elementary' or 'e2e'");
        }
        lc.name = expect_word();
        expect_specific_word("deadline");
        lc.deadline = expect_int();
        if (lc.kind == LatencyConstraint::Kind::EndToEnd) {
            expect_specific_word("stimulus");
            lc.stimulus = expect_word();
        }
        expect_specific_word("chain");
        while (peek().kind == SysToken::Kind::Word) lc.chain.push_back(expect_word());
        expect_semi();
        return lc;
    }

    std::vector<SysToken> toks_;
    std::size_t pos_ = 0;
};

} // namespace

SystemSpec parse_system(const std::string& text) {
    return SysParser(text).parse();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SystemSpec load_system(const std::string& path) {
    return parse_system(read_file(path));
}

std::map<std::int64_t, Constraint> parse_env(const std::string& text) {
    std::map<std::int64_t, Constraint> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto nonblank = line.find_first_not_of(" \t\r");
        if (nonblank == std::string::npos) continue;
        auto colon = line.find(':');
        if (colon == std::string::npos)
            throw ConfigError("env line " + std::to_string(lineno) +
                              ": expected `tick: constraint`");
        std::int64_t tick;
        try {
            tick = std::stoll(line.substr(0, colon));
        } catch (...) {
            throw ConfigError("env line " + std::to_string(lineno) + ": bad tick");
        }
        if (tick < 0) throw ConfigError("env line " + std::to_string(lineno) + ": bad tick");
        Constraint c;
        try {
            c = parse_constraint(line.substr(colon + 1));
        } catch (const SyntaxError& e) {
            throw ConfigError("env line " + std::to_string(lineno) + ": " + e.what());
        }
        auto it = out.find(tick);
        if (it == out.end()) {
            out.emplace(tick, std::move(c));
        } else {
            it->second = Constraint::conj({it->second, std::move(c)});
        }
    }
    return out;
}

std::map<std::int64_t, Constraint> load_env(const std::string& path) {
    return parse_env(read_file(path));
}

} // namespace ttcc::avio
