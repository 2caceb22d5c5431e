#include "ttcc/parser.hpp"

#include <cctype>
#include <set>

namespace ttcc {

namespace {

enum class Tok { Ident, Int, Symbol, Keyword, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::int64_t value = 0;
    int line = 1;
    int col = 1;
};

const std::set<std::string> kKeywords = {
    "var", "persistent", "def", "tell", "when", "do", "local",
    "in",  "next",       "rep", "exists", "true", "false",
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) { tokenize(); }
    const std::vector<Token>& tokens() const { return tokens_; }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw SyntaxError(what, line_, col_);
    }

    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
    }

    char advance() {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void tokenize() {
        while (pos_ < text_.size()) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
                continue;
            }
            if (c == '/' && peek(1) == '/') {
                while (pos_ < text_.size() && peek() != '\n') advance();
                continue;
            }
            Token t;
            t.line = line_;
            t.col = col_;
            if (std::isdigit(static_cast<unsigned char>(c))) {
                std::string num;
                while (std::isdigit(static_cast<unsigned char>(peek()))) num += advance();
                t.kind = Tok::Int;
                t.text = num;
                t.value = std::stoll(num);
                tokens_.push_back(std::move(t));
                continue;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::string id;
                while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')
                    id += advance();
                // engine-internal name suffixes: stream version x#3, fresh local x@2
                if ((peek() == '#' || peek() == '@') &&
                    std::isdigit(static_cast<unsigned char>(peek(1)))) {
                    id += advance();
                    while (std::isdigit(static_cast<unsigned char>(peek()))) id += advance();
                }
                t.kind = kKeywords.count(id) ? Tok::Keyword : Tok::Ident;
                t.text = std::move(id);
                tokens_.push_back(std::move(t));
                continue;
            }
            auto symbol = [&](const std::string& s) {
                t.kind = Tok::Symbol;
                t.text = s;
                for (std::size_t i = 0; i < s.size(); ++i) advance();
                tokens_.push_back(t);
            };
            if (c == '|' && peek(1) == '|') {
                symbol("||");
            } else if (c == '!' && peek(1) == '=') {
                symbol("!=");
            } else if (c == '<' && peek(1) == '=') {
                symbol("<=");
            } else if (c == '>' && peek(1) == '=') {
                symbol(">=");
            } else if (std::string("()[],;=<>+-&^.").find(c) != std::string::npos) {
                symbol(std::string(1, c));
            } else {
                fail(std::string("unexpected character '") + c + "'");
            }
        }
        Token end;
        end.kind = Tok::End;
        end.line = line_;
        end.col = col_;
        tokens_.push_back(std::move(end));
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    std::vector<Token> tokens_;
};

class Parser {
public:
    explicit Parser(const std::string& text) : lexer_(text) {}

    SourceProgram program() {
        SourceProgram out;
        std::set<std::string> declared;
        while (true) {
            if (at_keyword("var")) {
                VarDecl d = var_decl();
                if (!declared.insert(d.name).second)
                    fail("duplicate variable declaration: " + d.name);
                out.decls.push_back(std::move(d));
            } else if (at_keyword("def")) {
                out.defs.add(definition());
            } else {
                break;
            }
        }
        out.entry = process();
        expect_end();
        check_program(out.entry, out.defs);
        // Unlisted constraint variables become persistent streams.
        std::set<std::string> used;
        out.entry.collect_vars(used);
        for (const auto& [name, def] : out.defs.all()) {
            std::set<std::string> body_vars;
            def.body.collect_vars(body_vars);
            for (const auto& p : def.params) body_vars.erase(p);
            used.insert(body_vars.begin(), body_vars.end());
        }
        for (const auto& v : used) {
            if (!declared.count(v)) out.decls.push_back(VarDecl{v, true, std::nullopt});
        }
        return out;
    }

    Constraint constraint_only() {
        Constraint c = constraint();
        expect_end();
        return c;
    }

    Process process_only() {
        Process p = process();
        expect_end();
        return p;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = pos_ + ahead;
        const auto& toks = lexer_.tokens();
        return i < toks.size() ? toks[i] : toks.back();
    }

    const Token& advance() { return lexer_.tokens()[pos_++]; }

    [[noreturn]] void fail(const std::string& what) const {
        const Token& t = peek();
        throw SyntaxError(what, t.line, t.col);
    }

    bool at_keyword(const std::string& kw) const {
        return peek().kind == Tok::Keyword && peek().text == kw;
    }

    bool at_symbol(const std::string& s) const {
        return peek().kind == Tok::Symbol && peek().text == s;
    }

    bool eat_symbol(const std::string& s) {
        if (!at_symbol(s)) return false;
        advance();
        return true;
    }

    void expect_symbol(const std::string& s) {
        if (!eat_symbol(s)) fail("expected '" + s + "'");
    }

    void expect_keyword(const std::string& kw) {
        if (!at_keyword(kw)) fail("expected '" + kw + "'");
        advance();
    }

    std::string expect_ident() {
        if (peek().kind != Tok::Ident) fail("expected identifier");
        return advance().text;
    }

    std::int64_t expect_int() {
        if (peek().kind != Tok::Int) fail("expected integer");
        return advance().value;
    }

    void expect_end() {
        if (peek().kind != Tok::End) fail("unexpected trailing input");
    }

    VarDecl var_decl() {
        expect_keyword("var");
        VarDecl d;
        d.name = expect_ident();
        if (at_keyword("persistent")) {
            advance();
            d.persistent = true;
        }
        if (eat_symbol("=")) d.init = expect_int();
        expect_symbol(";");
        return d;
    }

    Definition definition() {
        expect_keyword("def");
        Definition def;
        def.name = expect_ident();
        expect_symbol("(");
        if (!at_symbol(")")) {
            def.params.push_back(expect_ident());
            while (eat_symbol(",")) def.params.push_back(expect_ident());
        }
        expect_symbol(")");
        expect_symbol("=");
        def.body = process();
        return def;
    }

    Process process() {
        std::vector<Process> parts;
        parts.push_back(prefix());
        while (eat_symbol("||")) parts.push_back(prefix());
        return Process::par(std::move(parts));
    }

    CountExpr count_expr() {
        if (peek().kind == Tok::Int) return CountExpr::lit(advance().value);
        if (peek().kind == Tok::Ident) return CountExpr::ref(advance().text);
        fail("expected integer or parameter");
    }

    Process prefix() {
        if (at_keyword("tell")) {
            advance();
            expect_symbol("(");
            Constraint c = constraint();
            expect_symbol(")");
            return Process::tell(std::move(c));
        }
        if (at_keyword("when")) {
            advance();
            Constraint g = constraint();
            expect_keyword("do");
            return Process::ask(std::move(g), prefix());
        }
        if (at_keyword("next")) {
            advance();
            CountExpr n = CountExpr::lit(1);
            if (eat_symbol("^")) n = count_expr();
            if (!n.is_param() && n.value < 0) fail("negative next count");
            return Process::next(std::move(n), prefix());
        }
        if (at_keyword("rep")) {
            advance();
            expect_symbol("[");
            CountExpr t = count_expr();
            expect_symbol("]");
            if (!t.is_param() && t.value < 1) fail("replication period must be at least 1");
            return Process::rep(std::move(t), prefix());
        }
        if (at_keyword("local")) {
            advance();
            return local_tail();
        }
        if (peek().kind == Tok::Ident) {
            std::string name = advance().text;
            expect_symbol("(");
            std::vector<CountExpr> args;
            if (!at_symbol(")")) {
                args.push_back(count_expr());
                while (eat_symbol(",")) args.push_back(count_expr());
            }
            expect_symbol(")");
            return Process::call(std::move(name), std::move(args));
        }
        if (peek().kind == Tok::Int && peek().value == 0) {
            advance();
            return Process::null();
        }
        if (eat_symbol("(")) {
            Process p = process();
            expect_symbol(")");
            return p;
        }
        fail("expected process");
    }

    // local x, y in P  |  local x, c in P  |  local x in P
    // An item is another binder when a bare identifier is followed by ','
    // or 'in'; anything else reads as the optional init constraint.
    Process local_tail() {
        std::vector<std::string> vars;
        vars.push_back(expect_ident());
        Constraint init = Constraint::truth();
        while (true) {
            if (at_keyword("in")) {
                advance();
                break;
            }
            expect_symbol(",");
            bool binder = peek().kind == Tok::Ident &&
                          ((peek(1).kind == Tok::Symbol && peek(1).text == ",") ||
                           (peek(1).kind == Tok::Keyword && peek(1).text == "in"));
            if (binder) {
                vars.push_back(advance().text);
                continue;
            }
            init = constraint();
            expect_keyword("in");
            break;
        }
        return Process::local(std::move(vars), std::move(init), prefix());
    }

    Constraint constraint() {
        std::vector<Constraint> parts;
        parts.push_back(catom());
        while (eat_symbol("&")) parts.push_back(catom());
        return Constraint::conj(std::move(parts));
    }

    Constraint catom() {
        if (at_keyword("true") && !rel_ahead(1)) {
            advance();
            return Constraint::truth();
        }
        if (at_keyword("false") && !rel_ahead(1)) {
            advance();
            return Constraint::falsity();
        }
        if (at_keyword("exists")) {
            advance();
            std::string var = expect_ident();
            expect_symbol(".");
            expect_symbol("(");
            Constraint body = constraint();
            expect_symbol(")");
            return Constraint::exists(std::move(var), std::move(body));
        }
        if (at_symbol("(")) {
            advance();
            Constraint c = constraint();
            expect_symbol(")");
            return c;
        }
        Term lhs = term();
        Rel r = rel();
        Term rhs = term();
        return Constraint::atom(std::move(lhs), r, std::move(rhs));
    }

    bool rel_ahead(std::size_t ahead) const {
        const Token& t = peek(ahead);
        if (t.kind != Tok::Symbol) return false;
        return t.text == "=" || t.text == "!=" || t.text == "<" || t.text == "<=" ||
               t.text == ">" || t.text == ">=";
    }

    Term term() {
        if (peek().kind == Tok::Int) return Term::constant(advance().value);
        if (at_keyword("true")) {
            advance();
            return Term::constant(1);
        }
        if (at_keyword("false")) {
            advance();
            return Term::constant(0);
        }
        if (peek().kind != Tok::Ident) fail("expected term");
        std::string name = advance().text;
        if (at_symbol("+") || at_symbol("-")) {
            bool neg = peek().text == "-";
            advance();
            std::int64_t d = expect_int();
            return Term::offset(std::move(name), neg ? -d : d);
        }
        return Term::var(std::move(name));
    }

    Rel rel() {
        if (peek().kind != Tok::Symbol) fail("expected relation");
        std::string s = advance().text;
        if (s == "=") return Rel::Eq;
        if (s == "!=") return Rel::Ne;
        if (s == "<") return Rel::Lt;
        if (s == "<=") return Rel::Le;
        if (s == ">") return Rel::Gt;
        if (s == ">=") return Rel::Ge;
        --pos_;
        fail("expected relation");
    }

    Lexer lexer_;
    std::size_t pos_ = 0;
};

} // namespace

SourceProgram parse_program(const std::string& text) {
    return Parser(text).program();
}

Constraint parse_constraint(const std::string& text) {
    return Parser(text).constraint_only();
}

Process parse_process(const std::string& text) {
    return Parser(text).process_only();
}

} // namespace ttcc
