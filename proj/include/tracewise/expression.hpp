#pragma once

#include "tracewise/numeric.hpp"

#include <array>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace tracewise {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Op { Num, Add, Sub, Mul, Div, Neg };
    Op op = Op::Num;
    std::string literal; // Num only, as written
    Rational value;      // Num only
    ExprPtr lhs, rhs;    // rhs unused for Neg

    static ExprPtr number(const Rational& v, std::string text);
    static ExprPtr binary(Op op, ExprPtr lhs, ExprPtr rhs);
};

// Infix + - * / with parentheses; also accepts the unicode forms of times,
// divide and minus. Throws ParseError.
ExprPtr parse_expression(std::string_view text);

// Exact evaluation. Throws DivisionByZero.
Rational evaluate(const Expr& e);

// Same as evaluate but returns false instead of throwing.
bool try_evaluate(const Expr& e, Rational& out);

// Normal form under commutativity and associativity of + and *, with
// subtraction and division folded into signed terms and inverse factors.
std::string canonical_form(const Expr& e);

// Minimal-parenthesis infix rendering without spaces.
std::string render(const Expr& e);

void collect_literals(const Expr& e, std::vector<const Expr*>& out);

struct ExpressionReport {
    Rational value;
    std::vector<std::string> violations;
    bool cards_ok = true;
};

// Throws ParseError or DivisionByZero; card misuse is reported in the
// violations, or thrown as CardMisuse when strict is set.
ExpressionReport verify_expression_24(std::string_view expr, const std::array<int, 4>& cards,
                                      bool strict = false);

} // namespace tracewise
