#pragma once

// The edit-program IR and its textual grammar:
//
//   program := '<program>' (copy | gen)+ '</program>'
//   copy    := '<copy lines="i-j"/>' | '<copy tokens="a-b"/>'
//   gen     := '<gen>' escaped_text '</gen>'
//
// Line ranges are 1-indexed inclusive; token ranges are 0-indexed inclusive.
// Gen bodies are stored unescaped in the IR; escaping is a serialization
// concern. The parser accepts exactly one canonical form: no whitespace
// between ops, strict `digits "-" digits` ranges (leading zeros tolerated and
// normalized away on serialize). Whitespace outside <program>...</program>
// is ignored.
//
// Range well-formedness (start <= end, start >= 1 for lines) is a property
// of valid programs, not of parseable text: the decoder FSM guarantees only
// syntactic shape, so the parser accepts e.g. lines="9-2" and leaves
// range-validity to the resolver.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "editprog/errors.hpp"

namespace editprog {

struct CopyLines {
    long long start = 1;  // 1-indexed, inclusive
    long long end = 1;
    bool operator==(const CopyLines&) const = default;
};

struct CopyTokens {
    long long start = 0;  // 0-indexed, inclusive
    long long end = 0;
    bool operator==(const CopyTokens&) const = default;
};

struct Gen {
    std::string body;  // unescaped
    bool operator==(const Gen&) const = default;
};

using Op = std::variant<CopyLines, CopyTokens, Gen>;

struct Program {
    std::vector<Op> ops;
    bool operator==(const Program&) const = default;
};

// ---------------------------------------------------------------------------
// Reserved literals and the entity escape codec.
// ---------------------------------------------------------------------------

// The five structural substrings that must never appear verbatim inside a
// gen body, paired with their entity forms. Inside a literal, '<' maps to
// U+27E8, '>' to U+27E9 and '/' to U+2024. Order is longest-first so longer
// literals are matched before shorter ones sharing characters.
struct ReservedLiteral {
    std::string_view plain;
    std::string_view entity;
};

inline constexpr std::array<ReservedLiteral, 5> kReservedLiterals{{
    {"</program>", "⟨․program⟩"},
    {"</copy>", "⟨․copy⟩"},
    {"</gen>", "⟨․gen⟩"},
    {"<copy", "⟨copy"},
    {"<gen>", "⟨gen⟩"},
}};

/// True when `text` contains any of the five entity forms.
inline bool contains_entity_form(std::string_view text) {
    for (const auto& lit : kReservedLiterals)
        if (text.find(lit.entity) != std::string_view::npos) return true;
    return false;
}

/// Replaces every reserved literal with its entity form. Identity on text
/// free of reserved substrings. Throws EscapeDomainError if the input
/// already contains an entity form (escaping it would not be invertible).
inline std::string escape_gen_body(std::string_view text) {
    if (contains_entity_form(text))
        throw EscapeDomainError("gen body already contains a reserved entity form");
    std::string out;
    out.reserve(text.size());
    std::size_t p = 0;
    while (p < text.size()) {
        bool replaced = false;
        for (const auto& lit : kReservedLiterals) {  // longest-first
            if (text.compare(p, lit.plain.size(), lit.plain) == 0) {
                out += lit.entity;
                p += lit.plain.size();
                replaced = true;
                break;
            }
        }
        if (!replaced) out += text[p++];
    }
    return out;
}

/// Inverse of escape_gen_body on its image.
inline std::string unescape_gen_body(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t p = 0;
    while (p < text.size()) {
        bool replaced = false;
        for (const auto& lit : kReservedLiterals) {
            if (text.compare(p, lit.entity.size(), lit.entity) == 0) {
                out += lit.plain;
                p += lit.entity.size();
                replaced = true;
                break;
            }
        }
        if (!replaced) out += text[p++];
    }
    return out;
}

struct LiteralHit {
    std::string_view literal;
    std::size_t offset;
    bool operator==(const LiteralHit&) const = default;
};

/// Every occurrence of each reserved literal in `text`, ordered by offset.
/// An empty result means the naive grammar suffices for this text.
inline std::vector<LiteralHit> audit_reserved_literals(std::string_view text) {
    std::vector<LiteralHit> hits;
    for (std::size_t p = 0; p < text.size(); ++p) {
        for (const auto& lit : kReservedLiterals) {
            if (text.compare(p, lit.plain.size(), lit.plain) == 0)
                hits.push_back({lit.plain, p});
        }
    }
    return hits;
}

// ---------------------------------------------------------------------------
// Serialization.
// ---------------------------------------------------------------------------

inline std::string serialize_program(const Program& p) {
    if (p.ops.empty()) throw Error("serialize_program: program must contain at least one op");
    std::string out = "<program>";
    for (const Op& op : p.ops) {
        if (const auto* c = std::get_if<CopyLines>(&op)) {
            out += "<copy lines=\"" + std::to_string(c->start) + "-" +
                   std::to_string(c->end) + "\"/>";
        } else if (const auto* t = std::get_if<CopyTokens>(&op)) {
            out += "<copy tokens=\"" + std::to_string(t->start) + "-" +
                   std::to_string(t->end) + "\"/>";
        } else {
            out += "<gen>" + escape_gen_body(std::get<Gen>(op).body) + "</gen>";
        }
    }
    out += "</program>";
    return out;
}

// ---------------------------------------------------------------------------
// Parsing.
// ---------------------------------------------------------------------------

namespace detail {

inline bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool starts_with(std::string_view text, std::size_t p, std::string_view prefix) {
    return text.compare(p, prefix.size(), prefix) == 0;
}

inline long long parse_index(std::string_view text, std::size_t& p, std::string_view what) {
    const std::size_t begin = p;
    while (p < text.size() && text[p] >= '0' && text[p] <= '9') ++p;
    if (p == begin) throw ParseError(std::string("expected digits for ") + std::string(what), begin);
    if (p - begin > 15) throw ParseError(std::string(what) + " has too many digits", begin);
    long long value = 0;
    for (std::size_t i = begin; i < p; ++i) value = value * 10 + (text[i] - '0');
    return value;
}

}  // namespace detail

inline Program parse_program(std::string_view text) {
    using detail::starts_with;
    std::size_t p = 0;
    while (p < text.size() && detail::is_space(text[p])) ++p;

    if (!starts_with(text, p, "<program>"))
        throw ParseError("expected <program>", p);
    p += 9;

    Program prog;
    while (true) {
        if (p >= text.size()) throw ParseError("unterminated program: missing </program>", p);
        if (starts_with(text, p, "</program>")) {
            if (prog.ops.empty()) throw ParseError("program must contain at least one op", p);
            p += 10;
            break;
        }
        if (starts_with(text, p, "<copy lines=\"") || starts_with(text, p, "<copy tokens=\"")) {
            const bool lines = text[p + 6] == 'l';
            p += lines ? 13 : 14;
            const long long start = detail::parse_index(text, p, lines ? "line index" : "token index");
            if (p >= text.size() || text[p] != '-') throw ParseError("expected '-' in range", p);
            ++p;
            const long long end = detail::parse_index(text, p, lines ? "line index" : "token index");
            if (!starts_with(text, p, "\"/>")) throw ParseError("expected \"/> to close copy op", p);
            p += 3;
            if (lines)
                prog.ops.emplace_back(CopyLines{start, end});
            else
                prog.ops.emplace_back(CopyTokens{start, end});
            continue;
        }
        if (starts_with(text, p, "<gen>")) {
            p += 5;
            const std::size_t close = text.find("</gen>", p);
            if (close == std::string_view::npos)
                throw ParseError("unterminated gen op: missing </gen>", p);
            prog.ops.emplace_back(Gen{unescape_gen_body(text.substr(p, close - p))});
            p = close + 6;
            continue;
        }
        throw ParseError("expected <copy .../>, <gen>...</gen> or </program>", p);
    }

    while (p < text.size() && detail::is_space(text[p])) ++p;
    if (p != text.size()) throw ParseError("trailing content after </program>", p);
    return prog;
}

}  // namespace editprog
