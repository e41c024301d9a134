#include "tracewise/expression.hpp"

#include "tracewise/error.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace tracewise {

ExprPtr Expr::number(const Rational& v, std::string text) {
    auto e = std::make_shared<Expr>();
    e->op = Op::Num;
    e->value = v;
    e->literal = std::move(text);
    return e;
}

ExprPtr Expr::binary(Op op, ExprPtr lhs, ExprPtr rhs) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->lhs = std::move(lhs);
    e->rhs = std::move(rhs);
    return e;
}

namespace {

class ExprParser {
public:
    explicit ExprParser(std::string_view text) : s_(text) {}

    ExprPtr parse() {
        auto e = parse_sum();
        skip_ws();
        if (pos_ != s_.size())
            error("unexpected '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
    int depth_ = 0;

    [[noreturn]] void error(const std::string& what) const {
        fail(ErrorCode::ParseError,
             what + " at offset " + std::to_string(pos_) + " in '" + std::string(s_) + "'");
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }

    // Returns one of + - * / ( ) or 0, consuming nothing.
    char peek_op(std::size_t& width) {
        skip_ws();
        width = 1;
        if (pos_ >= s_.size())
            return 0;
        const char c = s_[pos_];
        if (c == '+' || c == '-' || c == '*' || c == '/' || c == '(' || c == ')')
            return c;
        auto rest = s_.substr(pos_);
        if (rest.rfind("\xC3\x97", 0) == 0) { // multiplication sign
            width = 2;
            return '*';
        }
        if (rest.rfind("\xC3\xB7", 0) == 0) { // division sign
            width = 2;
            return '/';
        }
        if (rest.rfind("\xE2\x88\x92", 0) == 0) { // minus sign
            width = 3;
            return '-';
        }
        return 0;
    }

    ExprPtr parse_sum() {
        auto lhs = parse_product();
        for (;;) {
            std::size_t w;
            char op = peek_op(w);
            if (op != '+' && op != '-')
                return lhs;
            pos_ += w;
            auto rhs = parse_product();
            lhs = Expr::binary(op == '+' ? Expr::Op::Add : Expr::Op::Sub, lhs, rhs);
        }
    }

    ExprPtr parse_product() {
        auto lhs = parse_unary();
        for (;;) {
            std::size_t w;
            char op = peek_op(w);
            if (op != '*' && op != '/')
                return lhs;
            pos_ += w;
            auto rhs = parse_unary();
            lhs = Expr::binary(op == '*' ? Expr::Op::Mul : Expr::Op::Div, lhs, rhs);
        }
    }

    ExprPtr parse_unary() {
        std::size_t w;
        char op = peek_op(w);
        if (op == '-') {
            pos_ += w;
            auto inner = parse_unary();
            auto e = std::make_shared<Expr>();
            e->op = Expr::Op::Neg;
            e->lhs = inner;
            return e;
        }
        return parse_atom();
    }

    ExprPtr parse_atom() {
        std::size_t w;
        char op = peek_op(w);
        if (op == '(') {
            if (++depth_ > 200)
                error("nesting too deep");
            pos_ += w;
            auto e = parse_sum();
            if (peek_op(w) != ')')
                error("expected ')'");
            pos_ += w;
            --depth_;
            return e;
        }
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
            ++pos_;
        if (start == pos_)
            error(pos_ < s_.size() ? "unexpected '" + std::string(1, s_[pos_]) + "'"
                                   : std::string("unexpected end of expression"));
        std::string text(s_.substr(start, pos_ - start));
        auto v = parse_decimal(text);
        if (!v)
            error("bad number '" + text + "'");
        return Expr::number(*v, text);
    }
};

int precedence(Expr::Op op) {
    switch (op) {
    case Expr::Op::Add:
    case Expr::Op::Sub: return 1;
    case Expr::Op::Mul:
    case Expr::Op::Div: return 2;
    case Expr::Op::Neg: return 3;
    case Expr::Op::Num: return 4;
    }
    return 4;
}

std::string canon_string(const Expr& e);

void sum_terms(const Expr& e, bool positive, std::vector<std::string>& out) {
    switch (e.op) {
    case Expr::Op::Add:
        sum_terms(*e.lhs, positive, out);
        sum_terms(*e.rhs, positive, out);
        return;
    case Expr::Op::Sub:
        sum_terms(*e.lhs, positive, out);
        sum_terms(*e.rhs, !positive, out);
        return;
    case Expr::Op::Neg:
        sum_terms(*e.lhs, !positive, out);
        return;
    default:
        out.push_back((positive ? "+" : "-") + canon_string(e));
    }
}

void product_factors(const Expr& e, bool up, std::vector<std::string>& out) {
    switch (e.op) {
    case Expr::Op::Mul:
        product_factors(*e.lhs, up, out);
        product_factors(*e.rhs, up, out);
        return;
    case Expr::Op::Div:
        product_factors(*e.lhs, up, out);
        product_factors(*e.rhs, !up, out);
        return;
    default:
        out.push_back((up ? "*" : "/") + canon_string(e));
    }
}

std::string join_sorted(char tag, std::vector<std::string> items) {
    std::sort(items.begin(), items.end());
    std::string out(1, tag);
    out += '(';
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i)
            out += ',';
        out += items[i];
    }
    out += ')';
    return out;
}

std::string canon_string(const Expr& e) {
    std::vector<std::string> items;
    switch (e.op) {
    case Expr::Op::Num:
        return format_rational(e.value);
    case Expr::Op::Add:
    case Expr::Op::Sub:
    case Expr::Op::Neg:
        sum_terms(e, true, items);
        return join_sorted('S', std::move(items));
    case Expr::Op::Mul:
    case Expr::Op::Div:
        product_factors(e, true, items);
        return join_sorted('P', std::move(items));
    }
    return {};
}

char op_char(Expr::Op op) {
    switch (op) {
    case Expr::Op::Add: return '+';
    case Expr::Op::Sub: return '-';
    case Expr::Op::Mul: return '*';
    case Expr::Op::Div: return '/';
    default: return '?';
    }
}

} // namespace

ExprPtr parse_expression(std::string_view text) {
    return ExprParser(text).parse();
}

bool try_evaluate(const Expr& e, Rational& out) {
    Rational a, b;
    switch (e.op) {
    case Expr::Op::Num:
        out = e.value;
        return true;
    case Expr::Op::Neg:
        if (!try_evaluate(*e.lhs, a))
            return false;
        out = -a;
        return true;
    default:
        break;
    }
    if (!try_evaluate(*e.lhs, a) || !try_evaluate(*e.rhs, b))
        return false;
    switch (e.op) {
    case Expr::Op::Add: out = a + b; return true;
    case Expr::Op::Sub: out = a - b; return true;
    case Expr::Op::Mul: out = a * b; return true;
    case Expr::Op::Div:
        if (b == 0)
            return false;
        out = a / b;
        return true;
    default: return false;
    }
}

Rational evaluate(const Expr& e) {
    Rational out;
    if (!try_evaluate(e, out))
        fail(ErrorCode::DivisionByZero, "division by zero in '" + render(e) + "'");
    return out;
}

std::string canonical_form(const Expr& e) {
    return canon_string(e);
}

std::string render(const Expr& e) {
    if (e.op == Expr::Op::Num)
        return e.literal.empty() ? format_rational(e.value) : e.literal;
    if (e.op == Expr::Op::Neg) {
        auto inner = render(*e.lhs);
        if (precedence(e.lhs->op) < precedence(Expr::Op::Neg))
            inner = "(" + inner + ")";
        return "-" + inner;
    }
    const int p = precedence(e.op);
    auto left = render(*e.lhs);
    if (precedence(e.lhs->op) < p)
        left = "(" + left + ")";
    auto right = render(*e.rhs);
    const int rp = precedence(e.rhs->op);
    if (rp < p || (rp == p && (e.op == Expr::Op::Sub || e.op == Expr::Op::Div)))
        right = "(" + right + ")";
    return left + op_char(e.op) + right;
}

void collect_literals(const Expr& e, std::vector<const Expr*>& out) {
    if (e.op == Expr::Op::Num) {
        out.push_back(&e);
        return;
    }
    collect_literals(*e.lhs, out);
    if (e.rhs)
        collect_literals(*e.rhs, out);
}

ExpressionReport verify_expression_24(std::string_view expr, const std::array<int, 4>& cards,
                                      bool strict) {
    auto tree = parse_expression(expr);
    ExpressionReport report;
    report.value = evaluate(*tree);

    std::vector<const Expr*> literals;
    collect_literals(*tree, literals);

    std::map<int, int> available;
    for (int c : cards)
        ++available[c];
    std::map<int, int> used;
    for (const Expr* lit : literals) {
        const bool is_int = lit->literal.find('.') == std::string::npos &&
                            boost::multiprecision::denominator(lit->value) == 1;
        if (!is_int || lit->value > 1000 || lit->value < 0) {
            report.violations.push_back(lit->literal + " is not a card");
            report.cards_ok = false;
            continue;
        }
        const int v = static_cast<int>(boost::multiprecision::numerator(lit->value));
        if (!available.count(v)) {
            report.violations.push_back(lit->literal + " is not a card");
            report.cards_ok = false;
            continue;
        }
        ++used[v];
    }
    for (auto [card, count] : available) {
        const int u = used.count(card) ? used[card] : 0;
        if (u > count) {
            std::ostringstream os;
            os << card << " used " << (u == 2 ? std::string("twice") : std::to_string(u) + " times");
            report.violations.push_back(os.str());
            report.cards_ok = false;
        }
    }
    for (auto [card, count] : available) {
        const int u = used.count(card) ? used[card] : 0;
        if (u < count) {
            std::ostringstream os;
            os << card << " unused";
            if (count - u > 1)
                os << " " << (count - u) << " times";
            report.violations.push_back(os.str());
            report.cards_ok = false;
        }
    }
    std::vector<const Expr*> stack{tree.get()};
    while (!stack.empty()) {
        const Expr* e = stack.back();
        stack.pop_back();
        if (e->op == Expr::Op::Neg) {
            report.violations.push_back("unary minus");
            report.cards_ok = false;
            break;
        }
        if (e->lhs)
            stack.push_back(e->lhs.get());
        if (e->rhs)
            stack.push_back(e->rhs.get());
    }
    if (strict && !report.violations.empty()) {
        std::string msg;
        for (std::size_t i = 0; i < report.violations.size(); ++i)
            msg += (i ? ", " : "") + report.violations[i];
        fail(ErrorCode::CardMisuse, msg);
    }
    return report;
}

} // namespace tracewise
