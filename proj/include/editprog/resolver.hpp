#pragma once

// Deterministic expansion of a Program against an input document.
//
// Line semantics: a document is split on '\n' only ('\r' passes through
// byte-exact). A document ending in a newline has no phantom empty final
// line, matching the line universe of difflib-style alignment without
// keepends; the empty document has zero lines. Copy ops emit the verbatim
// text of the referenced lines joined by newlines, gen ops emit their body
// with at most one leading and one trailing newline stripped (preserving
// internal blank lines), and op outputs are concatenated with a single
// newline separator.
//
// Programs carrying <copy tokens="a-b"/> ops resolve at token granularity:
// spans are sliced from the tokenized document and op outputs concatenate
// with no separator. Mixing both copy granularities in one program is
// rejected.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "editprog/errors.hpp"
#include "editprog/grammar.hpp"
#include "editprog/tokenizer.hpp"

namespace editprog {

class LineDoc {
  public:
    LineDoc() = default;
    explicit LineDoc(std::string raw) : raw_(std::move(raw)) {
        if (raw_.empty()) return;
        std::size_t begin = 0;
        while (true) {
            const std::size_t nl = raw_.find('\n', begin);
            if (nl == std::string::npos) {
                spans_.emplace_back(begin, raw_.size());
                break;
            }
            spans_.emplace_back(begin, nl);
            begin = nl + 1;
            if (begin == raw_.size()) break;  // trailing newline: no phantom line
        }
    }

    const std::string& raw() const { return raw_; }
    std::size_t n_lines() const { return spans_.size(); }

    /// 0-indexed line text (no terminator).
    std::string_view line(std::size_t i) const {
        const auto& [b, e] = spans_.at(i);
        return std::string_view(raw_).substr(b, e - b);
    }

    /// Byte offset where 0-indexed line `i` starts.
    std::size_t line_start(std::size_t i) const { return spans_.at(i).first; }
    std::size_t line_end(std::size_t i) const { return spans_.at(i).second; }

    /// Lines [first, last] (0-indexed, inclusive) joined by single newlines.
    std::string join_lines(std::size_t first, std::size_t last) const {
        std::string out;
        for (std::size_t i = first; i <= last; ++i) {
            if (i > first) out += '\n';
            out += line(i);
        }
        return out;
    }

    std::vector<std::string> lines() const {
        std::vector<std::string> out;
        out.reserve(spans_.size());
        for (std::size_t i = 0; i < spans_.size(); ++i) out.emplace_back(line(i));
        return out;
    }

  private:
    std::string raw_;
    std::vector<std::pair<std::size_t, std::size_t>> spans_;
};

enum class ResolveMode { Strict, Clipped };

struct ClipEvent {
    std::size_t op_index;
    long long from_start, from_end;
    long long to_start, to_end;  // to_start > to_end marks an emptied range
    bool operator==(const ClipEvent&) const = default;
};

struct ResolveOutcome {
    std::string text;
    std::vector<ClipEvent> warnings;  // always empty in Strict mode
};

/// Gen emission rule: strip at most one leading and one trailing newline.
inline std::string_view strip_gen_body(std::string_view body) {
    if (!body.empty() && body.front() == '\n') body.remove_prefix(1);
    if (!body.empty() && body.back() == '\n') body.remove_suffix(1);
    return body;
}

namespace detail {

enum class Granularity { LinesOnly, TokensOnly, GenOnly };

inline Granularity program_granularity(const Program& p) {
    bool has_lines = false, has_tokens = false;
    for (const Op& op : p.ops) {
        has_lines |= std::holds_alternative<CopyLines>(op);
        has_tokens |= std::holds_alternative<CopyTokens>(op);
    }
    if (has_lines && has_tokens)
        throw ResolveError(ResolveErrorKind::MixedGranularity, 0,
                           "program mixes line-indexed and token-indexed copy ops");
    return has_tokens ? Granularity::TokensOnly : Granularity::LinesOnly;
}

}  // namespace detail

/// Resolves a line-granularity program. Programs containing token-indexed
/// copy ops need the tokenizer overload below.
inline ResolveOutcome resolve(const Program& p, const LineDoc& d, ResolveMode mode,
                              const Tokenizer* tok = nullptr) {
    if (p.ops.empty())
        throw ResolveError(ResolveErrorKind::MalformedOp, 0, "empty program");
    const auto gran = detail::program_granularity(p);

    std::vector<TokenId> doc_ids;
    if (gran == detail::Granularity::TokensOnly) {
        if (!tok)
            throw ResolveError(ResolveErrorKind::NeedsTokenizer, 0,
                               "token-indexed program requires a tokenizer");
        doc_ids = tok->encode(d.raw());
    }
    const char* sep = gran == detail::Granularity::TokensOnly ? "" : "\n";

    ResolveOutcome out;
    bool first = true;
    auto emit = [&](std::string_view piece) {
        if (!first) out.text += sep;
        first = false;
        out.text += piece;
    };

    for (std::size_t idx = 0; idx < p.ops.size(); ++idx) {
        const Op& op = p.ops[idx];
        if (const auto* c = std::get_if<CopyLines>(&op)) {
            const long long n = static_cast<long long>(d.n_lines());
            if (mode == ResolveMode::Strict) {
                if (c->start < 1 || c->end > n || c->start > c->end)
                    throw ResolveError(ResolveErrorKind::OutOfRange, idx,
                                       "copy lines " + std::to_string(c->start) + "-" +
                                           std::to_string(c->end) + " out of range for " +
                                           std::to_string(n) + "-line document");
                emit(d.join_lines(static_cast<std::size_t>(c->start - 1),
                                  static_cast<std::size_t>(c->end - 1)));
            } else {
                long long s = std::max(1LL, std::min(c->start, n));
                long long e = std::max(1LL, std::min(c->end, n));
                if (n == 0 || c->start > c->end) {  // nothing to clip onto
                    s = 1;
                    e = 0;
                }
                if (s != c->start || e != c->end)
                    out.warnings.push_back({idx, c->start, c->end, s, e});
                if (s > e)
                    emit("");
                else
                    emit(d.join_lines(static_cast<std::size_t>(s - 1),
                                      static_cast<std::size_t>(e - 1)));
            }
        } else if (const auto* t = std::get_if<CopyTokens>(&op)) {
            const long long n = static_cast<long long>(doc_ids.size());
            if (mode == ResolveMode::Strict) {
                if (t->start < 0 || t->end >= n || t->start > t->end)
                    throw ResolveError(ResolveErrorKind::OutOfRange, idx,
                                       "copy tokens " + std::to_string(t->start) + "-" +
                                           std::to_string(t->end) + " out of range for " +
                                           std::to_string(n) + "-token document");
                emit(tok->decode(std::span<const TokenId>(doc_ids).subspan(
                    static_cast<std::size_t>(t->start),
                    static_cast<std::size_t>(t->end - t->start + 1))));
            } else {
                long long s = std::max(0LL, std::min(t->start, n - 1));
                long long e = std::max(0LL, std::min(t->end, n - 1));
                if (n == 0 || t->start > t->end) {
                    s = 0;
                    e = -1;
                }
                if (s != t->start || e != t->end)
                    out.warnings.push_back({idx, t->start, t->end, s, e});
                if (s > e)
                    emit("");
                else
                    emit(tok->decode(std::span<const TokenId>(doc_ids).subspan(
                        static_cast<std::size_t>(s), static_cast<std::size_t>(e - s + 1))));
            }
        } else {
            emit(strip_gen_body(std::get<Gen>(op).body));
        }
    }
    return out;
}

inline ResolveOutcome resolve(const Program& p, const LineDoc& d, ResolveMode mode,
                              const Tokenizer& tok) {
    return resolve(p, d, mode, &tok);
}

// ---------------------------------------------------------------------------
// Exact-match comparators.
// ---------------------------------------------------------------------------

struct EmResult {
    bool byte_exact;  // equal after each side drops at most one trailing '\n'
    bool trimmed;     // equal after full leading/trailing whitespace strip
    bool operator==(const EmResult&) const = default;
};

namespace detail {

inline std::string_view drop_one_trailing_newline(std::string_view s) {
    if (!s.empty() && s.back() == '\n') s.remove_suffix(1);
    return s;
}

inline std::string_view strip_ws(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

}  // namespace detail

inline EmResult compare_em(std::string_view candidate, std::string_view gold) {
    return {detail::drop_one_trailing_newline(candidate) ==
                detail::drop_one_trailing_newline(gold),
            detail::strip_ws(candidate) == detail::strip_ws(gold)};
}

}  // namespace editprog
