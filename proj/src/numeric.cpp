#include "tracewise/numeric.hpp"

#include <cctype>

namespace tracewise {

namespace {

BigInt pow10(unsigned k) {
    BigInt r = 1;
    for (unsigned i = 0; i < k; ++i)
        r *= 10;
    return r;
}

std::string fixed_digits(const BigInt& scaled, unsigned places) {
    // scaled is |value| * 10^places, already rounded.
    std::string digits = scaled.str();
    if (digits.size() <= places)
        digits.insert(0, places + 1 - digits.size(), '0');
    std::string out = digits.substr(0, digits.size() - places);
    if (places > 0)
        out += "." + digits.substr(digits.size() - places);
    return out;
}

} // namespace

std::string format_rational(const Rational& value) {
    const BigInt num = boost::multiprecision::numerator(value);
    const BigInt den = boost::multiprecision::denominator(value);
    if (den == 1)
        return num.str();

    const bool negative = num < 0;
    const BigInt mag = negative ? BigInt(-num) : num;

    BigInt rest = den;
    unsigned twos = 0, fives = 0;
    while (rest % 2 == 0) {
        rest /= 2;
        ++twos;
    }
    while (rest % 5 == 0) {
        rest /= 5;
        ++fives;
    }
    const unsigned exact_places = std::max(twos, fives);
    if (rest == 1 && exact_places <= 6) {
        const BigInt scaled = mag * pow10(exact_places) / den;
        return (negative ? "-" : "") + fixed_digits(scaled, exact_places);
    }

    const unsigned places = 6;
    BigInt scaled = mag * pow10(places);
    BigInt q = scaled / den;
    BigInt r = scaled % den;
    if (2 * r >= den)
        q += 1;
    std::string text = fixed_digits(q, places);
    if (negative && q != 0)
        text.insert(0, "-");
    return text;
}

std::optional<Rational> parse_decimal(std::string_view text) {
    std::size_t i = 0;
    bool negative = false;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
        negative = text[i] == '-';
        ++i;
    }
    std::string int_part, frac_part;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])))
        int_part += text[i++];
    if (i < text.size() && text[i] == '.') {
        ++i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])))
            frac_part += text[i++];
        if (frac_part.empty())
            return std::nullopt;
    }
    if (i != text.size() || (int_part.empty() && frac_part.empty()))
        return std::nullopt;
    if (int_part.size() + frac_part.size() > 400)
        return std::nullopt;

    BigInt num(int_part.empty() ? std::string("0") : int_part);
    BigInt den = 1;
    for (char c : frac_part) {
        num = num * 10 + (c - '0');
        den *= 10;
    }
    if (negative)
        num = -num;
    return Rational(num, den);
}

bool decimal_matches(const Rational& exact, std::string_view literal) {
    auto parsed = parse_decimal(literal);
    if (!parsed)
        return false;
    const auto dot = literal.find('.');
    if (dot == std::string_view::npos)
        return *parsed == exact;
    const auto places = static_cast<unsigned>(literal.size() - dot - 1);
    Rational diff = exact - *parsed;
    if (diff < 0)
        diff = -diff;
    return diff * 2 * Rational(pow10(places)) <= 1;
}

} // namespace tracewise
