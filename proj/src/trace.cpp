#include "tracewise/trace.hpp"

#include "tracewise/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace tracewise {

Atom Atom::integer(std::int64_t v) {
    return Atom{AtomKind::Integer, std::to_string(v), {}};
}
Atom Atom::decimal(std::string text) {
    return Atom{AtomKind::Decimal, std::move(text), {}};
}
Atom Atom::list(std::vector<Atom> items) {
    return Atom{AtomKind::List, {}, std::move(items)};
}
Atom Atom::int_list(const std::vector<std::int64_t>& values) {
    std::vector<Atom> items;
    items.reserve(values.size());
    for (auto v : values)
        items.push_back(integer(v));
    return list(std::move(items));
}
Atom Atom::name_set(std::vector<Atom> items) {
    return Atom{AtomKind::NameSet, {}, std::move(items)};
}
Atom Atom::name(std::string letters) {
    return Atom{AtomKind::Name, std::move(letters), {}};
}
Atom Atom::keyword(std::string word) {
    return Atom{AtomKind::Keyword, std::move(word), {}};
}
Atom Atom::expression(std::string text) {
    return Atom{AtomKind::Expression, std::move(text), {}};
}

std::int64_t Atom::as_int() const {
    if (kind != AtomKind::Integer)
        fail(ErrorCode::ParseError, "atom is not an integer");
    return std::stoll(text);
}

std::vector<std::int64_t> Atom::as_int_list() const {
    if (kind != AtomKind::List)
        fail(ErrorCode::ParseError, "atom is not a list");
    std::vector<std::int64_t> out;
    for (const auto& item : items)
        out.push_back(item.as_int());
    return out;
}

std::string_view keyword_of(DirectiveType type) {
    switch (type) {
    case DirectiveType::Check: return "CHECK";
    case DirectiveType::Merge: return "MERGE";
    case DirectiveType::Backtrack: return "BACKTRACK";
    case DirectiveType::Attempt: return "ATTEMPT";
    case DirectiveType::State: return "STATE";
    case DirectiveType::End: return "END";
    case DirectiveType::Visit: return "VISIT";
    }
    return "";
}

bool ParsedTrace::has_fatal() const {
    return std::any_of(diagnostics.begin(), diagnostics.end(),
                       [](const ParseDiagnostic& d) { return d.severity == Severity::Fatal; });
}

const Directive* ParsedTrace::end_directive() const {
    if (!directives.empty() && directives.back().type == DirectiveType::End)
        return &directives.back();
    return nullptr;
}

std::string strip_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c)))
            out += c;
    return out;
}

AnswerBlock extract_answer_block(std::string_view raw) {
    static constexpr std::string_view open = "<answer>";
    static constexpr std::string_view close = "</answer>";
    auto close_pos = raw.rfind(close);
    while (close_pos != std::string_view::npos) {
        auto open_pos = raw.substr(0, close_pos).rfind(open);
        if (open_pos != std::string_view::npos) {
            const auto start = open_pos + open.size();
            return {std::string(raw.substr(start, close_pos - start)), true};
        }
        if (close_pos == 0)
            break;
        close_pos = raw.substr(0, close_pos).rfind(close);
    }
    return {std::string(raw), false};
}

namespace {

enum class ArgKind { Int, IntList, Name, Expr };
enum class ResultKind { None, Int, Number, IntList, NameSet, PermKeyword, BoolKeyword, Expr };

struct Shape {
    bool allowed = false;
    std::vector<ArgKind> args;
    ResultKind result = ResultKind::None;
};

Shape shape_for(TaskKind kind, DirectiveType type) {
    using D = DirectiveType;
    using A = ArgKind;
    using R = ResultKind;
    switch (kind) {
    case TaskKind::CountingElements:
        if (type == D::Check) return {true, {A::Int}, R::Int};
        if (type == D::End) return {true, {}, R::Int};
        break;
    case TaskKind::SlidingWindowMax:
        if (type == D::Check) return {true, {A::Int, A::Int}, R::Int};
        if (type == D::End) return {true, {}, R::IntList};
        break;
    case TaskKind::FloodFill:
        if (type == D::Visit) return {true, {A::Int, A::Int}, R::Int};
        if (type == D::End) return {true, {}, R::Int};
        break;
    case TaskKind::EditDistance:
        if (type == D::Check) return {true, {A::Int, A::Int}, R::Int};
        if (type == D::End) return {true, {}, R::Int};
        break;
    case TaskKind::HierarchicalClustering:
        if (type == D::Check) return {true, {A::Name, A::Name}, R::Int};
        if (type == D::Merge) return {true, {A::Name, A::Name}, R::NameSet};
        if (type == D::End) return {true, {}, R::NameSet};
        break;
    case TaskKind::PrimeFactorization:
        if (type == D::State) return {true, {A::Int}, R::None};
        if (type == D::Attempt) return {true, {A::Int, A::Int}, R::BoolKeyword};
        if (type == D::End) return {true, {}, R::IntList};
        break;
    case TaskKind::PermutationWithDuplicates:
        if (type == D::Check) return {true, {A::IntList}, R::PermKeyword};
        if (type == D::Backtrack) return {true, {A::IntList}, R::None};
        if (type == D::End) return {true, {}, R::None};
        break;
    case TaskKind::Game24:
        if (type == D::Attempt) return {true, {A::Expr}, R::Number};
        if (type == D::End) return {true, {}, R::Expr};
        break;
    }
    return {};
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

std::optional<std::int64_t> parse_int_text(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    if (s.empty())
        return std::nullopt;
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        return std::nullopt;
    return v;
}

bool is_number_text(std::string_view s) {
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '-' || s[i] == '+'))
        ++i;
    std::size_t digits = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
        ++i;
        ++digits;
    }
    if (i < s.size() && s[i] == '.') {
        ++i;
        std::size_t frac = 0;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
            ++i;
            ++frac;
        }
        if (frac == 0)
            return false;
    }
    return digits > 0 && i == s.size();
}

// Splits on commas at bracket depth zero.
std::vector<std::string_view> split_top(std::string_view s) {
    std::vector<std::string_view> parts;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '(' || c == '[' || c == '{')
            ++depth;
        else if (c == ')' || c == ']' || c == '}')
            --depth;
        else if (c == ',' && depth == 0) {
            parts.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    parts.push_back(trim(s.substr(start)));
    return parts;
}

std::optional<Atom> parse_int_list(std::string_view s) {
    s = trim(s);
    if (s.size() < 2 || s.front() != '[' || s.back() != ']')
        return std::nullopt;
    auto inner = trim(s.substr(1, s.size() - 2));
    std::vector<Atom> items;
    if (!inner.empty()) {
        for (auto part : split_top(inner)) {
            auto v = parse_int_text(part);
            if (!v)
                return std::nullopt;
            items.push_back(Atom::integer(*v));
        }
    }
    return Atom::list(std::move(items));
}

bool all_upper(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
}

std::optional<Atom> parse_name(std::string_view s) {
    s = trim(s);
    if (s.size() >= 2 && s.front() == '{' && s.back() == '}')
        s = trim(s.substr(1, s.size() - 2));
    if (!all_upper(s))
        return std::nullopt;
    return Atom::name(std::string(s));
}

std::optional<Atom> parse_name_set(std::string_view s) {
    s = trim(s);
    if (s.size() < 2 || s.front() != '{' || s.back() != '}')
        return std::nullopt;
    auto inner = trim(s.substr(1, s.size() - 2));
    std::vector<Atom> items;
    if (!inner.empty()) {
        for (auto part : split_top(inner)) {
            if (auto v = parse_int_text(part)) {
                items.push_back(Atom::integer(*v));
                continue;
            }
            auto n = parse_name(part);
            if (!n)
                return std::nullopt;
            items.push_back(*n);
        }
    }
    return Atom::name_set(std::move(items));
}

// Length of the balanced prefix opened by s[0], or npos.
std::size_t balanced_prefix(std::string_view s) {
    if (s.empty())
        return std::string_view::npos;
    int depth = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '(' || c == '[' || c == '{')
            ++depth;
        else if (c == ')' || c == ']' || c == '}') {
            if (--depth == 0)
                return i + 1;
        }
    }
    return std::string_view::npos;
}

struct ResultParse {
    std::optional<Atom> atom;
    bool trailing = false;
};

ResultParse parse_result(ResultKind kind, std::string_view text) {
    text = trim(text);
    ResultParse out;
    auto take_token = [&](auto pred) {
        std::size_t i = 0;
        if (i < text.size() && (text[i] == '-' || text[i] == '+'))
            ++i;
        while (i < text.size() && pred(text[i]))
            ++i;
        return i;
    };
    switch (kind) {
    case ResultKind::None:
        return out;
    case ResultKind::Int: {
        auto n = take_token([](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; });
        if (auto v = parse_int_text(text.substr(0, n)))
            out.atom = Atom::integer(*v);
        out.trailing = !trim(text.substr(n)).empty();
        return out;
    }
    case ResultKind::Number: {
        auto n = take_token([](char c) { return std::isdigit(static_cast<unsigned char>(c)) || c == '.'; });
        auto tok = text.substr(0, n);
        if (is_number_text(tok)) {
            if (tok.find('.') == std::string_view::npos) {
                if (auto v = parse_int_text(tok))
                    out.atom = Atom::integer(*v);
            } else {
                out.atom = Atom::decimal(std::string(tok));
            }
        }
        out.trailing = !trim(text.substr(n)).empty();
        return out;
    }
    case ResultKind::IntList:
    case ResultKind::NameSet: {
        auto n = balanced_prefix(text);
        if (n == std::string_view::npos)
            return out;
        auto tok = text.substr(0, n);
        out.atom = kind == ResultKind::IntList ? parse_int_list(tok) : parse_name_set(tok);
        out.trailing = !trim(text.substr(n)).empty();
        return out;
    }
    case ResultKind::PermKeyword:
    case ResultKind::BoolKeyword: {
        std::size_t n = 0;
        while (n < text.size() && std::isalpha(static_cast<unsigned char>(text[n])))
            ++n;
        auto word = text.substr(0, n);
        const bool ok = kind == ResultKind::PermKeyword ? (word == "continue" || word == "done")
                                                        : (word == "True" || word == "False");
        if (ok)
            out.atom = Atom::keyword(std::string(word));
        out.trailing = !trim(text.substr(n)).empty();
        return out;
    }
    case ResultKind::Expr:
        if (!text.empty())
            out.atom = Atom::expression(std::string(text));
        return out;
    }
    return out;
}

std::optional<Atom> parse_arg(ArgKind kind, std::string_view text) {
    switch (kind) {
    case ArgKind::Int:
        if (auto v = parse_int_text(text))
            return Atom::integer(*v);
        return std::nullopt;
    case ArgKind::IntList:
        return parse_int_list(text);
    case ArgKind::Name:
        return parse_name(text);
    case ArgKind::Expr: {
        auto t = trim(text);
        if (t.empty())
            return std::nullopt;
        return Atom::expression(std::string(t));
    }
    }
    return std::nullopt;
}

constexpr DirectiveType kTypes[] = {DirectiveType::Check,   DirectiveType::Merge,
                                    DirectiveType::Backtrack, DirectiveType::Attempt,
                                    DirectiveType::State,   DirectiveType::End,
                                    DirectiveType::Visit};

class TraceParser {
public:
    TraceParser(TaskKind kind, std::string_view payload) : payload_(payload) { out_.kind = kind; }

    ParsedTrace run() {
        std::size_t start = 0;
        for (std::size_t i = 0; i <= payload_.size(); ++i) {
            if (i == payload_.size() || payload_[i] == ';' || payload_[i] == '\n') {
                statement(start, i);
                start = i + 1;
            }
        }
        out_.truncated = out_.end_directive() == nullptr;
        return std::move(out_);
    }

private:
    std::string_view payload_;
    ParsedTrace out_;
    bool seen_end_ = false;

    void diag(Severity sev, std::string msg, Span span) {
        out_.diagnostics.push_back({sev, std::move(msg), span});
    }

    void statement(std::size_t begin, std::size_t end) {
        while (begin < end && std::isspace(static_cast<unsigned char>(payload_[begin])))
            ++begin;
        while (end > begin && std::isspace(static_cast<unsigned char>(payload_[end - 1])))
            --end;
        if (begin == end)
            return;
        const Span span{begin, end};
        std::string_view text = payload_.substr(begin, end - begin);

        std::optional<DirectiveType> type;
        std::size_t after_kw = 0;
        for (auto t : kTypes) {
            auto kw = keyword_of(t);
            if (text.rfind(kw, 0) != 0)
                continue;
            std::size_t j = kw.size();
            while (j < text.size() && (text[j] == ' ' || text[j] == '\t'))
                ++j;
            if (j < text.size() && text[j] == '(') {
                type = t;
                after_kw = j;
                break;
            }
        }
        if (!type) {
            diag(Severity::Warning, "unrecognized line skipped", span);
            return;
        }
        const auto kw = std::string(keyword_of(*type));
        const Shape shape = shape_for(out_.kind, *type);
        if (!shape.allowed) {
            diag(Severity::Fatal, kw + " is not a directive of " + std::string(to_string(out_.kind)), span);
            return;
        }
        if (seen_end_) {
            diag(Severity::Fatal, "directive after END", span);
            return;
        }

        // Matching close paren of the argument list.
        int depth = 0;
        std::size_t close = std::string_view::npos;
        for (std::size_t i = after_kw; i < text.size(); ++i) {
            if (text[i] == '(')
                ++depth;
            else if (text[i] == ')' && --depth == 0) {
                close = i;
                break;
            }
        }
        if (close == std::string_view::npos) {
            diag(Severity::Fatal, "unbalanced parentheses in " + kw, span);
            return;
        }

        Directive d;
        d.type = *type;
        d.span = span;
        auto arg_text = trim(text.substr(after_kw + 1, close - after_kw - 1));
        if (shape.args.empty()) {
            if (!arg_text.empty()) {
                diag(Severity::Fatal, kw + " takes no arguments", span);
                return;
            }
        } else {
            std::vector<std::string_view> parts;
            if (shape.args.size() == 1 && shape.args[0] != ArgKind::Int)
                parts.push_back(arg_text);
            else
                parts = split_top(arg_text);
            if (parts.size() != shape.args.size()) {
                diag(Severity::Fatal,
                     kw + " expects " + std::to_string(shape.args.size()) + " argument(s)", span);
                return;
            }
            for (std::size_t i = 0; i < parts.size(); ++i) {
                auto atom = parse_arg(shape.args[i], parts[i]);
                if (!atom) {
                    diag(Severity::Fatal, "unparseable argument '" + std::string(parts[i]) + "'", span);
                    return;
                }
                d.args.push_back(std::move(*atom));
            }
        }

        auto rest = trim(text.substr(close + 1));
        if (rest.rfind("==", 0) == 0) {
            auto value_text = rest.substr(2);
            if (shape.result == ResultKind::None) {
                diag(Severity::Warning, kw + " value ignored", span);
            } else {
                auto r = parse_result(shape.result, value_text);
                if (!r.atom) {
                    diag(Severity::Fatal, "unparseable value '" + std::string(trim(value_text)) + "'", span);
                    return;
                }
                if (r.trailing)
                    diag(Severity::Warning, "trailing text ignored", span);
                d.result = std::move(r.atom);
            }
        } else {
            if (!rest.empty())
                diag(Severity::Warning, "trailing text ignored", span);
            const bool needs_value = shape.result != ResultKind::None && d.type != DirectiveType::End;
            if (needs_value) {
                diag(Severity::Fatal, kw + " is missing its '==' value", span);
                return;
            }
        }
        if (d.type == DirectiveType::End)
            seen_end_ = true;
        out_.directives.push_back(std::move(d));
    }
};

} // namespace

ParsedTrace parse_trace(TaskKind kind, std::string_view payload) {
    return TraceParser(kind, payload).run();
}

std::string serialize_atom(const Atom& atom) {
    std::string out;
    switch (atom.kind) {
    case AtomKind::Integer:
    case AtomKind::Decimal:
    case AtomKind::Keyword:
    case AtomKind::Expression:
        return atom.text;
    case AtomKind::Name:
        return atom.text.size() == 1 ? atom.text : "{" + atom.text + "}";
    case AtomKind::List:
    case AtomKind::NameSet: {
        out += atom.kind == AtomKind::List ? '[' : '{';
        for (std::size_t i = 0; i < atom.items.size(); ++i) {
            if (i)
                out += ',';
            out += serialize_atom(atom.items[i]);
        }
        out += atom.kind == AtomKind::List ? ']' : '}';
        return out;
    }
    case AtomKind::Raw:
        break;
    }
    fail(ErrorCode::NonSerializable, "unresolved atom '" + atom.text + "'");
}

std::string serialize_directive(const Directive& d) {
    std::string out(keyword_of(d.type));
    out += '(';
    for (std::size_t i = 0; i < d.args.size(); ++i) {
        if (i)
            out += ',';
        out += serialize_atom(d.args[i]);
    }
    out += ')';
    if (d.result)
        out += "==" + serialize_atom(*d.result);
    return out;
}

std::string serialize_directives(const std::vector<Directive>& directives) {
    std::string out;
    for (const auto& d : directives) {
        out += serialize_directive(d);
        out += ";\n";
    }
    return out;
}

std::string serialize_trace(const ParsedTrace& trace) {
    if (trace.has_fatal())
        fail(ErrorCode::NonSerializable, "trace carries fatal diagnostics");
    return serialize_directives(trace.directives);
}

} // namespace tracewise
