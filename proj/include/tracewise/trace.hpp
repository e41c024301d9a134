#pragma once

#include "tracewise/task_kind.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tracewise {

enum class AtomKind {
    Integer,    // canonical decimal digits
    Decimal,    // exact decimal text as written
    List,       // [a,b,...]
    NameSet,    // {X,Y,...}; items are Name or Integer atoms
    Name,       // cluster name, letters only, braces stripped
    Keyword,    // continue, done, True, False
    Expression, // arithmetic text, verbatim
    Raw,        // unresolved; cannot be serialized
};

struct Atom {
    AtomKind kind = AtomKind::Raw;
    std::string text;
    std::vector<Atom> items;

    static Atom integer(std::int64_t v);
    static Atom decimal(std::string text);
    static Atom list(std::vector<Atom> items);
    static Atom int_list(const std::vector<std::int64_t>& values);
    static Atom name_set(std::vector<Atom> items);
    static Atom name(std::string letters);
    static Atom keyword(std::string word);
    static Atom expression(std::string text);

    std::int64_t as_int() const;
    std::vector<std::int64_t> as_int_list() const;

    bool operator==(const Atom& other) const {
        return kind == other.kind && text == other.text && items == other.items;
    }
};

enum class DirectiveType { Check, Merge, Backtrack, Attempt, State, End, Visit };

std::string_view keyword_of(DirectiveType type);

struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;
    bool operator==(const Span&) const = default;
};

// One directive. Arguments sit in args and the value after "==" in result:
//   Check(args) == result        Merge(a, b) == outcome set
//   Backtrack(path)              Attempt(expr | r, p) == result
//   State(value)                 End() [== value]
//   Visit(r, c) == island id
struct Directive {
    DirectiveType type = DirectiveType::End;
    std::vector<Atom> args;
    std::optional<Atom> result;
    Span span;

    bool operator==(const Directive& other) const {
        return type == other.type && args == other.args && result == other.result;
    }
};

enum class Severity { Warning, Fatal };

struct ParseDiagnostic {
    Severity severity = Severity::Warning;
    std::string message;
    Span span;
};

struct ParsedTrace {
    TaskKind kind = TaskKind::CountingElements;
    std::vector<Directive> directives;
    std::vector<ParseDiagnostic> diagnostics;
    bool truncated = true;

    bool has_fatal() const;
    const Directive* end_directive() const;
};

struct AnswerBlock {
    std::string payload;
    bool had_tags = false;
};

AnswerBlock extract_answer_block(std::string_view raw);

ParsedTrace parse_trace(TaskKind kind, std::string_view payload);

std::string serialize_atom(const Atom& atom);
std::string serialize_directive(const Directive& d);
std::string serialize_trace(const ParsedTrace& trace);
std::string serialize_directives(const std::vector<Directive>& directives);

// Whitespace-stripped copy, used to compare expressions.
std::string strip_whitespace(std::string_view text);

} // namespace tracewise
