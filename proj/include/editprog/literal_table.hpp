#pragma once

// Structural-literal token-id table, resolved once per tokenizer. The FSM
// masks and forced prefills are built from these entries, so every literal
// must round-trip through the tokenizer exactly. Digits and the hyphen must
// encode as single tokens because the copy-range state chooses them one
// masked step at a time.

#include <array>
#include <string>
#include <vector>

#include "editprog/errors.hpp"
#include "editprog/grammar.hpp"
#include "editprog/tokenizer.hpp"

namespace editprog {

struct LiteralEntry {
    std::string text;
    std::vector<TokenId> ids;

    std::size_t pieces() const { return ids.size(); }
};

struct LiteralTable {
    std::string tokenizer_identity;

    LiteralEntry lt;            // "<"
    LiteralEntry lt_slash;      // "</"
    LiteralEntry gt;            // ">"
    LiteralEntry copy_word;     // "copy"
    LiteralEntry gen_word;      // "gen"
    LiteralEntry program_word;  // "program"
    LiteralEntry space_lines;   // " lines"
    LiteralEntry space_tokens;  // " tokens"
    LiteralEntry eq_quote;      // "=\""
    LiteralEntry quote_slash;   // "\"/>"
    LiteralEntry slash_gt;      // "/>"
    LiteralEntry quote;         // "\""
    LiteralEntry end_gen;       // "</gen>" — drives the end-of-gen detector
    LiteralEntry end_program;   // "</program>"

    std::array<TokenId, 10> digit_ids{};  // '0'..'9'
    TokenId hyphen_id = -1;

    std::vector<const LiteralEntry*> entries() const {
        return {&lt,          &lt_slash,  &gt,       &copy_word,   &gen_word,
                &program_word, &space_lines, &space_tokens, &eq_quote, &quote_slash,
                &slash_gt,    &quote,     &end_gen,  &end_program};
    }
};

inline LiteralTable build_literal_table(const Tokenizer& tok) {
    auto entry = [&](std::string text) {
        LiteralEntry e{text, tok.encode(text)};
        if (e.ids.empty() || tok.decode(e.ids) != text)
            throw TokenizerError("unencodable structural literal under " + tok.identity() +
                                 ": \"" + text + "\"");
        return e;
    };

    LiteralTable t;
    t.tokenizer_identity = tok.identity();
    t.lt = entry("<");
    t.lt_slash = entry("</");
    t.gt = entry(">");
    t.copy_word = entry("copy");
    t.gen_word = entry("gen");
    t.program_word = entry("program");
    t.space_lines = entry(" lines");
    t.space_tokens = entry(" tokens");
    t.eq_quote = entry("=\"");
    t.quote_slash = entry("\"/>");
    t.slash_gt = entry("/>");
    t.quote = entry("\"");
    t.end_gen = entry("</gen>");
    t.end_program = entry("</program>");

    for (int d = 0; d < 10; ++d) {
        const std::string digit(1, static_cast<char>('0' + d));
        const auto ids = tok.encode(digit);
        if (ids.size() != 1 || tok.decode(ids) != digit)
            throw TokenizerError("digit '" + digit + "' must encode as a single token");
        t.digit_ids[static_cast<std::size_t>(d)] = ids[0];
    }
    const auto hy = tok.encode("-");
    if (hy.size() != 1 || tok.decode(hy) != "-")
        throw TokenizerError("hyphen must encode as a single token");
    t.hyphen_id = hy[0];

    // A vocabulary piece that embeds a reserved literal inside longer text
    // would let a single free token smuggle structural syntax past the
    // id-sequence detector; reject such tokenizers up front.
    for (TokenId id : all_token_ids(tok)) {
        const std::string piece = tok.piece(id);
        for (const auto& lit : kReservedLiterals) {
            if (piece.size() > lit.plain.size() &&
                piece.find(lit.plain) != std::string::npos)
                throw TokenizerError("vocabulary piece embeds reserved literal \"" +
                                     std::string(lit.plain) + "\": " + piece);
        }
    }
    return t;
}

/// Table-18-shaped matrix: per-literal piece counts for each tokenizer,
/// including the two composed full-op examples.
struct PortabilityRow {
    std::string literal;
    std::vector<std::size_t> pieces;  // one per tokenizer, input order
};

inline std::vector<PortabilityRow> portability_report(
    const std::vector<const Tokenizer*>& tokenizers) {
    static const char* kLiterals[] = {
        "<",        "</",          ">",   "copy", "gen",      "program",
        " lines",   "=\"",         "/>",  "\"",   "</gen>",   "</program>",
        "<copy lines=\"1-3\"/>",   "<gen>content</gen>",
    };
    for (const Tokenizer* tok : tokenizers) build_literal_table(*tok);  // contract check
    std::vector<PortabilityRow> rows;
    for (const char* lit : kLiterals) {
        PortabilityRow row{lit, {}};
        for (const Tokenizer* tok : tokenizers)
            row.pieces.push_back(tok->encode(lit).size());
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace editprog
