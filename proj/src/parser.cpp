#include "daeire/parser.hpp"

#include <cctype>
#include <cstdlib>
#include <sstream>

#include <nlohmann/json.hpp>

namespace daeire {

void validate_square(const DaeSystem& sys) {
    if (sys.n_eqs() == 0 && sys.n_vars() == 0) throw EmptySystemError();
    if (sys.n_eqs() != sys.n_vars()) throw NonSquareError(sys.n_eqs(), sys.n_vars());
}

namespace {

enum class Tok { Ident, Number, Prime, LParen, RParen, Plus, Minus, Star, Slash, Caret, Eq, Semi, Comma, DotDot, End };

struct Token {
    Tok kind;
    std::string text;
    double number = 0.0;
    int line = 1, col = 1;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }
    Token next() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '\n') {
                ++line_;
                col_ = 1;
                ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++col_;
                ++pos_;
            } else if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
        tok_.line = line_;
        tok_.col = col_;
        if (pos_ >= src_.size()) {
            tok_ = Token{Tok::End, "", 0.0, line_, col_};
            return;
        }
        char c = src_[pos_];
        auto single = [&](Tok k) {
            tok_ = Token{k, std::string(1, c), 0.0, line_, col_};
            ++pos_;
            ++col_;
        };
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            tok_ = Token{Tok::Ident, src_.substr(start, pos_ - start), 0.0, line_, col_};
            col_ += int(pos_ - start);
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            size_t start = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            if (pos_ < src_.size() && src_[pos_] == '.' &&
                !(pos_ + 1 < src_.size() && src_[pos_ + 1] == '.')) {
                ++pos_;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            }
            if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
                size_t mark = pos_;
                ++pos_;
                if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
                if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
                } else {
                    pos_ = mark;
                }
            }
            std::string text = src_.substr(start, pos_ - start);
            tok_ = Token{Tok::Number, text, std::strtod(text.c_str(), nullptr), line_, col_};
            col_ += int(pos_ - start);
            return;
        }
        switch (c) {
            case '\'': single(Tok::Prime); return;
            case '(': single(Tok::LParen); return;
            case ')': single(Tok::RParen); return;
            case '+': single(Tok::Plus); return;
            case '-': single(Tok::Minus); return;
            case '*': single(Tok::Star); return;
            case '/': single(Tok::Slash); return;
            case '^': single(Tok::Caret); return;
            case '=': single(Tok::Eq); return;
            case ';': single(Tok::Semi); return;
            case ',': single(Tok::Comma); return;
            case '.':
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '.') {
                    tok_ = Token{Tok::DotDot, "..", 0.0, line_, col_};
                    pos_ += 2;
                    col_ += 2;
                    return;
                }
                throw ParseError("unexpected '.'", line_, col_);
            default:
                throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
        }
    }

    std::string src_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token tok_{};
};

class ModelParser {
public:
    explicit ModelParser(const std::string& src) : lex_(src) {}

    DaeSystem parse() {
        while (lex_.peek().kind != Tok::End) {
            const Token& t = lex_.peek();
            if (t.kind == Tok::Ident && t.text == "var") {
                parse_var_decl();
            } else if (t.kind == Tok::Ident && t.text == "param") {
                parse_param_decl();
            } else if (t.kind == Tok::Ident && t.text == "interval") {
                parse_interval();
            } else {
                parse_equation();
            }
        }
        return std::move(sys_);
    }

    Expr parse_single_expression() {
        Expr e = parse_expr();
        expect(Tok::End, "end of expression");
        return e;
    }

    void set_variables(const std::vector<std::string>& vars) {
        sys_.variables = vars;
        for (size_t i = 0; i < vars.size(); ++i) var_index_[vars[i]] = int(i);
    }
    void set_parameters(const std::map<std::string, double>& params) { sys_.parameters = params; }

private:
    Token expect(Tok kind, const std::string& what) {
        if (lex_.peek().kind != kind)
            throw ParseError("expected " + what + ", found '" + lex_.peek().text + "'", lex_.peek().line,
                             lex_.peek().col);
        return lex_.next();
    }

    void parse_var_decl() {
        lex_.next();
        while (true) {
            Token name = expect(Tok::Ident, "variable name");
            if (var_index_.count(name.text))
                throw ParseError("duplicate variable '" + name.text + "'", name.line, name.col);
            var_index_[name.text] = int(sys_.variables.size());
            sys_.variables.push_back(name.text);
            if (lex_.peek().kind == Tok::Comma) {
                lex_.next();
                continue;
            }
            break;
        }
        expect(Tok::Semi, "';'");
    }

    void parse_param_decl() {
        lex_.next();
        Token name = expect(Tok::Ident, "parameter name");
        expect(Tok::Eq, "'='");
        double sign = 1.0;
        if (lex_.peek().kind == Tok::Minus) {
            lex_.next();
            sign = -1.0;
        }
        Token value = expect(Tok::Number, "number");
        sys_.parameters[name.text] = sign * value.number;
        expect(Tok::Semi, "';'");
    }

    void parse_interval() {
        lex_.next();
        sys_.t0 = parse_signed_number();
        expect(Tok::DotDot, "'..'");
        sys_.t_end = parse_signed_number();
        expect(Tok::Semi, "';'");
    }

    double parse_signed_number() {
        double sign = 1.0;
        if (lex_.peek().kind == Tok::Minus) {
            lex_.next();
            sign = -1.0;
        }
        return sign * expect(Tok::Number, "number").number;
    }

    void parse_equation() {
        Expr lhs = parse_expr();
        Token eq = expect(Tok::Eq, "'= 0;' after equation");
        Token zero = expect(Tok::Number, "'0'");
        if (zero.number != 0.0) throw ParseError("equation right-hand side must be 0", zero.line, zero.col);
        expect(Tok::Semi, "';'");
        (void)eq;
        sys_.equations.push_back(lhs);
    }

    Expr parse_expr() {
        Expr acc = parse_term();
        while (true) {
            Tok k = lex_.peek().kind;
            if (k == Tok::Plus) {
                lex_.next();
                acc = acc + parse_term();
            } else if (k == Tok::Minus) {
                lex_.next();
                acc = acc - parse_term();
            } else {
                return acc;
            }
        }
    }

    Expr parse_term() {
        Expr acc = parse_unary();
        while (true) {
            Tok k = lex_.peek().kind;
            if (k == Tok::Star) {
                lex_.next();
                acc = acc * parse_unary();
            } else if (k == Tok::Slash) {
                lex_.next();
                Token at = lex_.peek();
                try {
                    acc = acc / parse_unary();
                } catch (const DivisionByZeroError&) {
                    throw ParseError("division by zero constant", at.line, at.col);
                }
            } else {
                return acc;
            }
        }
    }

    Expr parse_unary() {
        if (lex_.peek().kind == Tok::Minus) {
            lex_.next();
            return -parse_unary();
        }
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_atom();
        if (lex_.peek().kind == Tok::Caret) {
            Token caret = lex_.next();
            Token e = lex_.peek();
            if (e.kind == Tok::Minus) throw ParseError("exponent must be a nonnegative integer", e.line, e.col);
            Token num = expect(Tok::Number, "integer exponent");
            double k = num.number;
            if (k != double(long(k)) || k < 0.0)
                throw ParseError("exponent must be a nonnegative integer", num.line, num.col);
            (void)caret;
            return pow(base, int(k));
        }
        return base;
    }

    int prime_count() {
        int order = 0;
        while (lex_.peek().kind == Tok::Prime) {
            lex_.next();
            ++order;
        }
        return order;
    }

    Expr parse_atom() {
        Token t = lex_.peek();
        if (t.kind == Tok::Number) {
            lex_.next();
            return Expr::constant(t.number);
        }
        if (t.kind == Tok::LParen) {
            lex_.next();
            Expr e = parse_expr();
            expect(Tok::RParen, "')'");
            return e;
        }
        if (t.kind == Tok::Ident) {
            lex_.next();
            if (t.text == "t") return Expr::time();
            if (t.text == "sin" || t.text == "cos" || t.text == "tanh" || t.text == "exp") {
                expect(Tok::LParen, "'('");
                Expr arg = parse_expr();
                expect(Tok::RParen, "')'");
                if (t.text == "sin") return sin(arg);
                if (t.text == "cos") return cos(arg);
                if (t.text == "tanh") return tanh(arg);
                return exp(arg);
            }
            if (t.text == "diff") {
                expect(Tok::LParen, "'('");
                Token name = expect(Tok::Ident, "variable name");
                auto it = var_index_.find(name.text);
                if (it == var_index_.end())
                    throw ParseError("unknown identifier '" + name.text + "'", name.line, name.col);
                expect(Tok::Comma, "','");
                Token tv = expect(Tok::Ident, "'t'");
                if (tv.text != "t") throw ParseError("diff is with respect to t", tv.line, tv.col);
                int order = 1;
                if (lex_.peek().kind == Tok::Comma) {
                    lex_.next();
                    Token num = expect(Tok::Number, "integer order");
                    if (num.number != double(long(num.number)) || num.number < 0.0)
                        throw ParseError("derivative order must be a nonnegative integer", num.line, num.col);
                    order = int(num.number);
                }
                expect(Tok::RParen, "')'");
                return Expr::jet(it->second, order);
            }
            auto vi = var_index_.find(t.text);
            if (vi != var_index_.end()) return Expr::jet(vi->second, prime_count());
            auto pi = sys_.parameters.find(t.text);
            if (pi != sys_.parameters.end()) return Expr::constant(pi->second);
            throw ParseError("unknown identifier '" + t.text + "'", t.line, t.col);
        }
        throw ParseError("expected expression, found '" + t.text + "'", t.line, t.col);
    }

    Lexer lex_;
    DaeSystem sys_;
    std::map<std::string, int> var_index_;
};

}  // namespace

DaeSystem parse_model(const std::string& text) { return ModelParser(text).parse(); }

Expr parse_expression(const std::string& text, const std::vector<std::string>& variables) {
    ModelParser p(text);
    p.set_variables(variables);
    return p.parse_single_expression();
}

DaeSystem parse_model_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(e.what(), 1, 1);
    }
    DaeSystem sys;
    for (const auto& v : j.at("variables")) sys.variables.push_back(v.get<std::string>());
    if (j.contains("parameters"))
        for (auto it = j["parameters"].begin(); it != j["parameters"].end(); ++it)
            sys.parameters[it.key()] = it.value().get<double>();
    if (j.contains("interval")) {
        sys.t0 = j["interval"].at(0).get<double>();
        sys.t_end = j["interval"].at(1).get<double>();
    }
    for (const auto& eq : j.at("equations")) {
        ModelParser p(eq.get<std::string>());
        p.set_variables(sys.variables);
        p.set_parameters(sys.parameters);
        sys.equations.push_back(p.parse_single_expression());
    }
    return sys;
}

DaeSystem parse_model_auto(const std::string& text) {
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        if (c == '{') return parse_model_json(text);
        break;
    }
    return parse_model(text);
}

std::string print_model(const DaeSystem& sys) {
    std::ostringstream out;
    if (!sys.variables.empty()) {
        out << "var ";
        for (size_t i = 0; i < sys.variables.size(); ++i) {
            if (i) out << ", ";
            out << sys.variables[i];
        }
        out << ";\n";
    }
    out << "interval " << sys.t0 << " .. " << sys.t_end << ";\n";
    for (const Expr& e : sys.equations) out << to_string(e, sys.variables) << " = 0;\n";
    return out.str();
}

}  // namespace daeire
