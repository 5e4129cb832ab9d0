#include "contactor/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

namespace contactor {

namespace {

struct Token {
    enum class Kind { Number, Ident, Op, LParen, RParen, End };
    Kind kind = Kind::End;
    double number = 0.0;
    std::string ident;
    char op = 0;
    std::size_t pos = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) { advance(); }

    const Token& peek() const { return tok_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_])))
            ++i_;
        tok_ = Token{};
        tok_.pos = i_;
        if (i_ >= text_.size()) {
            tok_.kind = Token::Kind::End;
            return;
        }
        char c = text_[i_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = text_.c_str() + i_;
            char* end = nullptr;
            double v = std::strtod(begin, &end);
            if (end == begin)
                throw SyntaxError(i_, "malformed number");
            tok_.kind = Token::Kind::Number;
            tok_.number = v;
            i_ += static_cast<std::size_t>(end - begin);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i_;
            while (j < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[j])) || text_[j] == '_'))
                ++j;
            tok_.kind = Token::Kind::Ident;
            tok_.ident = text_.substr(i_, j - i_);
            i_ = j;
            return;
        }
        switch (c) {
        case '+': case '-': case '*': case '/': case '^':
            tok_.kind = Token::Kind::Op;
            tok_.op = c;
            break;
        case '(':
            tok_.kind = Token::Kind::LParen;
            break;
        case ')':
            tok_.kind = Token::Kind::RParen;
            break;
        default:
            throw SyntaxError(i_, std::string("unexpected character '") + c + "'");
        }
        ++i_;
    }

    const std::string& text_;
    std::size_t i_ = 0;
    Token tok_;
};

const std::pair<const char*, ExprFunc> kFunctions[] = {
    {"sin", ExprFunc::Sin},   {"cos", ExprFunc::Cos},  {"tan", ExprFunc::Tan},
    {"exp", ExprFunc::Exp},   {"log", ExprFunc::Log},  {"sqrt", ExprFunc::Sqrt},
    {"tanh", ExprFunc::Tanh}, {"abs", ExprFunc::Abs},
};

class Parser {
public:
    Parser(const std::string& text, const std::vector<std::string>& vars)
        : lex_(text), vars_(vars) {}

    // expr   := term (('+'|'-') term)*
    // term   := factor (('*'|'/') factor)*
    // factor := '-' factor | power
    // power  := primary ('^' factor)?
    std::pair<std::vector<ExprNode>, int> run() {
        int root = parse_expr();
        const Token& t = lex_.peek();
        if (t.kind != Token::Kind::End)
            throw SyntaxError(t.pos, "unexpected trailing input");
        return {std::move(nodes_), root};
    }

private:
    int push(ExprNode n) {
        nodes_.push_back(n);
        return static_cast<int>(nodes_.size()) - 1;
    }

    int parse_expr() {
        int lhs = parse_term();
        while (lex_.peek().kind == Token::Kind::Op &&
               (lex_.peek().op == '+' || lex_.peek().op == '-')) {
            char op = lex_.take().op;
            int rhs = parse_term();
            ExprNode n;
            n.kind = ExprNode::Kind::Binary;
            n.op = op;
            n.lhs = lhs;
            n.rhs = rhs;
            lhs = push(n);
        }
        return lhs;
    }

    int parse_term() {
        int lhs = parse_factor();
        while (lex_.peek().kind == Token::Kind::Op &&
               (lex_.peek().op == '*' || lex_.peek().op == '/')) {
            char op = lex_.take().op;
            int rhs = parse_factor();
            ExprNode n;
            n.kind = ExprNode::Kind::Binary;
            n.op = op;
            n.lhs = lhs;
            n.rhs = rhs;
            lhs = push(n);
        }
        return lhs;
    }

    int parse_factor() {
        const Token& t = lex_.peek();
        if (t.kind == Token::Kind::Op && t.op == '-') {
            lex_.take();
            int operand = parse_factor();
            ExprNode n;
            n.kind = ExprNode::Kind::Negate;
            n.lhs = operand;
            return push(n);
        }
        return parse_power();
    }

    int parse_power() {
        int base = parse_primary();
        const Token& t = lex_.peek();
        if (t.kind == Token::Kind::Op && t.op == '^') {
            lex_.take();
            int expo = parse_factor();  // right-assoc, admits q^-2
            ExprNode n;
            n.kind = ExprNode::Kind::Binary;
            n.op = '^';
            n.lhs = base;
            n.rhs = expo;
            return push(n);
        }
        return base;
    }

    int parse_primary() {
        Token t = lex_.take();
        switch (t.kind) {
        case Token::Kind::Number: {
            ExprNode n;
            n.kind = ExprNode::Kind::Constant;
            n.value = t.number;
            return push(n);
        }
        case Token::Kind::Ident: {
            if (lex_.peek().kind == Token::Kind::LParen) {
                lex_.take();
                const ExprFunc* func = nullptr;
                for (const auto& [name, f] : kFunctions)
                    if (t.ident == name)
                        func = &f;
                if (!func)
                    throw UnknownIdentifier(t.ident);
                int arg = parse_expr();
                Token close = lex_.take();
                if (close.kind != Token::Kind::RParen)
                    throw SyntaxError(close.pos, "expected ')'");
                ExprNode n;
                n.kind = ExprNode::Kind::Call;
                n.func = *func;
                n.lhs = arg;
                return push(n);
            }
            auto it = std::find(vars_.begin(), vars_.end(), t.ident);
            if (it == vars_.end())
                throw UnknownIdentifier(t.ident);
            ExprNode n;
            n.kind = ExprNode::Kind::Variable;
            n.var = static_cast<int>(it - vars_.begin());
            return push(n);
        }
        case Token::Kind::LParen: {
            int inner = parse_expr();
            Token close = lex_.take();
            if (close.kind != Token::Kind::RParen)
                throw SyntaxError(close.pos, "expected ')'");
            return inner;
        }
        case Token::Kind::Op:
            throw SyntaxError(t.pos, std::string("unexpected operator '") + t.op + "'");
        case Token::Kind::RParen:
            throw SyntaxError(t.pos, "unexpected ')'");
        case Token::Kind::End:
            throw SyntaxError(t.pos, "unexpected end of input");
        }
        throw SyntaxError(t.pos, "unexpected token");
    }

    Lexer lex_;
    const std::vector<std::string>& vars_;
    std::vector<ExprNode> nodes_;
};

} // namespace

ScalarExpr ScalarExpr::parse(const std::string& text,
                             const std::vector<std::string>& vars) {
    ScalarExpr e;
    Parser p(text, vars);
    auto [nodes, root] = p.run();
    e.nodes_ = std::move(nodes);
    e.root_ = root;
    e.vars_ = vars;
    e.text_ = text;
    return e;
}

int ScalarExpr::var_index(const std::string& name) const {
    auto it = std::find(vars_.begin(), vars_.end(), name);
    return it == vars_.end() ? -1 : static_cast<int>(it - vars_.begin());
}

std::vector<double> ScalarExpr::bind(const Bindings& b) const {
    std::vector<double> values(vars_.size());
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        auto it = b.find(vars_[i]);
        if (it == b.end())
            throw UnknownIdentifier(vars_[i]);
        values[i] = it->second;
    }
    return values;
}

double ScalarExpr::eval(const Bindings& b) const {
    return eval_values<double>(bind(b));
}

std::vector<double> ScalarExpr::grad(const std::vector<std::string>& wrt,
                                     const Bindings& b) const {
    std::vector<double> values = bind(b);
    std::vector<double> g(wrt.size());
    for (std::size_t k = 0; k < wrt.size(); ++k) {
        int idx = var_index(wrt[k]);
        if (idx < 0)
            throw UnknownIdentifier(wrt[k]);
        g[k] = derivative_values<double>(values, idx);
    }
    return g;
}

std::vector<std::vector<double>> ScalarExpr::hess(
    const std::vector<std::string>& wrt, const Bindings& b) const {
    std::vector<double> plain = bind(b);
    std::vector<int> idx(wrt.size());
    for (std::size_t k = 0; k < wrt.size(); ++k) {
        idx[k] = var_index(wrt[k]);
        if (idx[k] < 0)
            throw UnknownIdentifier(wrt[k]);
    }
    std::size_t m = wrt.size();
    std::vector<std::vector<double>> h(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
        // Outer seed on i, inner on j; the upper triangle is mirrored so the
        // result is symmetric by construction.
        std::vector<Dual<double>> inner(plain.size());
        for (std::size_t v = 0; v < plain.size(); ++v)
            inner[v] = Dual<double>(plain[v], 0.0);
        for (std::size_t j = i; j < m; ++j) {
            for (std::size_t v = 0; v < plain.size(); ++v)
                inner[v].d = (static_cast<int>(v) == idx[j]) ? 1.0 : 0.0;
            Dual<double> second = derivative_values<Dual<double>>(inner, idx[i]);
            h[i][j] = second.d;
            h[j][i] = second.d;
        }
    }
    return h;
}

ScalarExpr ScalarExpr::with_vars(const std::vector<std::string>& vars) const {
    ExprBuilder builder(vars);
    int root = builder.splice(*this);
    return builder.finish(root, text_);
}

ExprBuilder::ExprBuilder(std::vector<std::string> vars) : vars_(std::move(vars)) {}

int ExprBuilder::constant(double c) {
    ExprNode n;
    n.kind = ExprNode::Kind::Constant;
    n.value = c;
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
}

int ExprBuilder::var(const std::string& name) {
    auto it = std::find(vars_.begin(), vars_.end(), name);
    if (it == vars_.end())
        throw UnknownIdentifier(name);
    ExprNode n;
    n.kind = ExprNode::Kind::Variable;
    n.var = static_cast<int>(it - vars_.begin());
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
}

int ExprBuilder::add(int a, int b) {
    ExprNode n;
    n.kind = ExprNode::Kind::Binary;
    n.op = '+';
    n.lhs = a;
    n.rhs = b;
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
}

int ExprBuilder::sub(int a, int b) {
    ExprNode n;
    n.kind = ExprNode::Kind::Binary;
    n.op = '-';
    n.lhs = a;
    n.rhs = b;
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
}

int ExprBuilder::mul(int a, int b) {
    ExprNode n;
    n.kind = ExprNode::Kind::Binary;
    n.op = '*';
    n.lhs = a;
    n.rhs = b;
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
}

int ExprBuilder::splice(const ScalarExpr& e) {
    std::vector<int> varmap(e.vars_.size());
    for (std::size_t i = 0; i < e.vars_.size(); ++i) {
        auto it = std::find(vars_.begin(), vars_.end(), e.vars_[i]);
        if (it == vars_.end())
            throw UnknownIdentifier(e.vars_[i]);
        varmap[i] = static_cast<int>(it - vars_.begin());
    }
    int offset = static_cast<int>(nodes_.size());
    for (ExprNode n : e.nodes_) {
        if (n.kind == ExprNode::Kind::Variable)
            n.var = varmap[static_cast<std::size_t>(n.var)];
        if (n.lhs >= 0)
            n.lhs += offset;
        if (n.rhs >= 0)
            n.rhs += offset;
        nodes_.push_back(n);
    }
    return e.root_ + offset;
}

ScalarExpr ExprBuilder::finish(int root, const std::string& text) const {
    ScalarExpr e;
    e.nodes_ = nodes_;
    e.root_ = root;
    e.vars_ = vars_;
    e.text_ = text;
    return e;
}

} // namespace contactor
