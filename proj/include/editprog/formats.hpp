#pragma once

// Baseline edit formats driven from oracle programs: search/replace blocks,
// unified diff, full regeneration, plus the head-to-head harness that
// compares them (and the program format) on serialized-token cost and
// round-trip exact match.
//
// Edited regions are inferred from the gaps between an oracle's copy ranges:
// each maximal region pairs the displaced original lines with the gen-emitted
// replacement text. Search/replace blocks carry verbatim anchor text and
// apply to the first occurrence (ambiguous anchors are flagged); unified diff
// pins line numbers with zero context lines by default. Pure insertions
// anchor on the preceding original line, or the following line at the
// document start.

#include <algorithm>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "editprog/align.hpp"
#include "editprog/corpus.hpp"
#include "editprog/errors.hpp"
#include "editprog/grammar.hpp"
#include "editprog/resolver.hpp"
#include "editprog/tokenizer.hpp"

namespace editprog {

// --- Edited regions -----------------------------------------------------------

namespace detail {

struct EditRegion {
    long long doc_first = 1, doc_last = 0;     // 1-indexed inclusive; empty if first > last
    long long gold_first = 1, gold_last = 0;   // gold-side line numbers of the new text
    std::optional<std::string> new_text;       // emitted gen text; nullopt = pure deletion

    bool doc_empty() const { return doc_first > doc_last; }
};

/// Walks a line-level oracle program and yields the edited regions between
/// copy ranges. The program must alternate copy/gen the way oracle
/// derivation produces it (at most one gen per region).
inline std::vector<EditRegion> edit_regions(const Program& p, const LineDoc& doc) {
    std::vector<EditRegion> regions;
    long long doc_cursor = 1;   // next unconsumed doc line
    long long gold_cursor = 1;  // next gold line to be produced
    std::optional<std::string> pending;

    auto flush = [&](long long gap_first, long long gap_last) {
        if (gap_first > gap_last && !pending) return;
        EditRegion r;
        r.doc_first = gap_first;
        r.doc_last = gap_last;
        r.new_text = pending;
        r.gold_first = gold_cursor;
        if (pending) {
            const long long n_new =
                1 + static_cast<long long>(std::count(pending->begin(), pending->end(), '\n'));
            r.gold_last = gold_cursor + n_new - 1;
            gold_cursor += n_new;
        } else {
            r.gold_last = gold_cursor - 1;  // deletion: no new lines
        }
        regions.push_back(std::move(r));
        pending.reset();
    };

    for (const Op& op : p.ops) {
        if (const auto* c = std::get_if<CopyLines>(&op)) {
            flush(doc_cursor, c->start - 1);
            doc_cursor = c->end + 1;
            gold_cursor += c->end - c->start + 1;
        } else if (std::holds_alternative<Gen>(op)) {
            if (pending)
                throw FormatError(FormatErrorKind::BadScript,
                                  "oracle program has adjacent gen ops");
            pending = std::string(strip_gen_body(std::get<Gen>(op).body));
        } else {
            throw FormatError(FormatErrorKind::BadScript,
                              "token-indexed programs have no line-format equivalent");
        }
    }
    flush(doc_cursor, static_cast<long long>(doc.n_lines()));
    return regions;
}

inline std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> out;
    std::size_t begin = 0;
    while (true) {
        const std::size_t nl = text.find('\n', begin);
        if (nl == std::string_view::npos) {
            out.emplace_back(text.substr(begin));
            return out;
        }
        out.emplace_back(text.substr(begin, nl - begin));
        begin = nl + 1;
    }
}

}  // namespace detail

// --- Search/replace ------------------------------------------------------------

struct SrBlock {
    std::string search;  // verbatim anchor, non-empty
    std::string replace;
    bool operator==(const SrBlock&) const = default;
};

struct SearchReplaceScript {
    std::vector<SrBlock> blocks;
    bool operator==(const SearchReplaceScript&) const = default;
};

/// Converts an oracle program into first-match search/replace blocks.
/// Throws FormatError{EmptyAnchor} for an insertion into an empty document.
inline SearchReplaceScript to_search_replace(const Program& oracle, const LineDoc& doc) {
    SearchReplaceScript script;
    const long long n = static_cast<long long>(doc.n_lines());
    for (const auto& r : detail::edit_regions(oracle, doc)) {
        SrBlock block;
        const bool has_new = r.new_text.has_value() ;
        if (!r.doc_empty() && has_new) {  // replacement
            block.search = doc.join_lines(static_cast<std::size_t>(r.doc_first - 1),
                                          static_cast<std::size_t>(r.doc_last - 1));
            block.replace = *r.new_text;
        } else if (!r.doc_empty()) {  // deletion: absorb a neighbor line
            if (r.doc_first > 1) {
                block.search = doc.join_lines(static_cast<std::size_t>(r.doc_first - 2),
                                              static_cast<std::size_t>(r.doc_last - 1));
                block.replace = std::string(doc.line(static_cast<std::size_t>(r.doc_first - 2)));
            } else if (r.doc_last < n) {
                block.search = doc.join_lines(static_cast<std::size_t>(r.doc_first - 1),
                                              static_cast<std::size_t>(r.doc_last));
                block.replace = std::string(doc.line(static_cast<std::size_t>(r.doc_last)));
            } else {  // whole document removed
                block.search = doc.join_lines(0, static_cast<std::size_t>(n - 1));
                block.replace = "";
            }
        } else {  // pure insertion before doc line r.doc_first
            if (n == 0)
                throw FormatError(FormatErrorKind::EmptyAnchor,
                                  "insertion into an empty document has no anchor line");
            if (r.doc_first > 1) {
                const auto anchor = std::string(doc.line(static_cast<std::size_t>(r.doc_first - 2)));
                block.search = anchor;
                block.replace = anchor + "\n" + *r.new_text;
            } else {
                const auto anchor = std::string(doc.line(0));
                block.search = anchor;
                block.replace = *r.new_text + "\n" + anchor;
            }
        }
        script.blocks.push_back(std::move(block));
    }
    return script;
}

struct SrApplyOutcome {
    std::string text;
    std::vector<std::size_t> ambiguous_blocks;   // block indices with >= 2 matches
    std::optional<std::size_t> no_match_block;   // first block whose anchor is absent
};

/// Applies blocks sequentially, each rewriting the first occurrence of its
/// anchor in the current text. An anchor with two or more occurrences sets an
/// ambiguity flag; an absent anchor stops application.
inline SrApplyOutcome apply_search_replace(const LineDoc& doc, const SearchReplaceScript& s) {
    SrApplyOutcome out;
    out.text = doc.raw();
    for (std::size_t i = 0; i < s.blocks.size(); ++i) {
        const SrBlock& b = s.blocks[i];
        if (b.search.empty())
            throw FormatError(FormatErrorKind::BadScript, "search text must be non-empty");
        const std::size_t first = out.text.find(b.search);
        if (first == std::string::npos) {
            out.no_match_block = i;
            return out;
        }
        if (out.text.find(b.search, first + 1) != std::string::npos)
            out.ambiguous_blocks.push_back(i);
        out.text.replace(first, b.search.size(), b.replace);
    }
    return out;
}

inline std::string serialize_search_replace(const SearchReplaceScript& s) {
    std::string out;
    for (const SrBlock& b : s.blocks) {
        out += "<<<<<<< SEARCH\n";
        out += b.search;
        out += "\n=======\n";
        out += b.replace;
        out += "\n>>>>>>> REPLACE\n";
    }
    return out;
}

inline SearchReplaceScript parse_search_replace(std::string_view text) {
    SearchReplaceScript script;
    const auto lines = detail::split_lines(text);
    std::size_t i = 0;
    // split_lines on fence-terminated text yields one trailing empty entry.
    const std::size_t end = (!lines.empty() && lines.back().empty()) ? lines.size() - 1 : lines.size();
    auto join = [](const std::vector<std::string>& ls, std::size_t a, std::size_t b) {
        std::string s;
        for (std::size_t k = a; k < b; ++k) {
            if (k > a) s += '\n';
            s += ls[k];
        }
        return s;
    };
    while (i < end) {
        if (lines[i] != "<<<<<<< SEARCH")
            throw FormatError(FormatErrorKind::BadScript, "expected <<<<<<< SEARCH fence");
        std::size_t sep = i + 1;
        while (sep < end && lines[sep] != "=======") ++sep;
        std::size_t close = sep + 1;
        while (close < end && lines[close] != ">>>>>>> REPLACE") ++close;
        if (sep >= end || close >= end)
            throw FormatError(FormatErrorKind::BadScript, "unterminated search/replace block");
        script.blocks.push_back({join(lines, i + 1, sep), join(lines, sep + 1, close)});
        i = close + 1;
    }
    return script;
}

// --- Unified diff ----------------------------------------------------------------

struct DiffHunk {
    long long old_start = 0, old_count = 0;
    long long new_start = 0, new_count = 0;
    std::vector<std::string> lines;  // prefixed with ' ', '-' or '+'
    bool operator==(const DiffHunk&) const = default;
};

struct UnifiedDiffScript {
    std::vector<DiffHunk> hunks;  // ascending, non-overlapping
    bool operator==(const UnifiedDiffScript&) const = default;
};

/// Minimal hunks (zero context lines by default; `context` widens them).
/// Header convention for empty ranges follows standard unified diff: a
/// zero-count side reports the line before the edit position.
inline UnifiedDiffScript to_unified_diff(const Program& oracle, const LineDoc& doc,
                                         long long context = 0) {
    UnifiedDiffScript script;
    const long long n = static_cast<long long>(doc.n_lines());
    long long prev_hunk_doc_end = 0;  // last doc line consumed by an earlier hunk
    for (const auto& r : detail::edit_regions(oracle, doc)) {
        DiffHunk h;
        const long long ctx_before =
            std::min<long long>(context, r.doc_first - 1 - prev_hunk_doc_end);
        const long long ctx_after = std::min<long long>(context, n - std::max(r.doc_last, r.doc_first - 1));
        const long long first = r.doc_first - ctx_before;
        for (long long l = first; l < r.doc_first; ++l)
            h.lines.push_back(" " + std::string(doc.line(static_cast<std::size_t>(l - 1))));
        for (long long l = r.doc_first; l <= r.doc_last; ++l)
            h.lines.push_back("-" + std::string(doc.line(static_cast<std::size_t>(l - 1))));
        if (r.new_text)
            for (const std::string& nl : detail::split_lines(*r.new_text))
                h.lines.push_back("+" + nl);
        const long long last = std::max(r.doc_last, r.doc_first - 1);
        for (long long l = last + 1; l <= last + ctx_after; ++l)
            h.lines.push_back(" " + std::string(doc.line(static_cast<std::size_t>(l - 1))));

        h.old_count = (r.doc_empty() ? 0 : r.doc_last - r.doc_first + 1) + ctx_before + ctx_after;
        h.new_count = (r.new_text ? r.gold_last - r.gold_first + 1 : 0) + ctx_before + ctx_after;
        h.old_start = h.old_count == 0 ? r.doc_first - 1 : first;
        h.new_start = h.new_count == 0 ? r.gold_first - 1 : r.gold_first - ctx_before;
        prev_hunk_doc_end = last + ctx_after;
        script.hunks.push_back(std::move(h));
    }
    return script;
}

/// Applies hunks in order, validating '-' and ' ' payload lines against the
/// document. Throws FormatError{HunkMismatch} on any disagreement.
inline std::string apply_unified_diff(const LineDoc& doc, const UnifiedDiffScript& script) {
    const long long n = static_cast<long long>(doc.n_lines());
    std::vector<std::string> out;
    long long cursor = 1;  // next doc line to copy
    for (const DiffHunk& h : script.hunks) {
        long long minus = 0, plus = 0, ctx = 0;
        for (const std::string& l : h.lines) {
            if (l.empty())
                throw FormatError(FormatErrorKind::BadScript, "hunk payload line has no prefix");
            if (l[0] == '-') ++minus;
            else if (l[0] == '+') ++plus;
            else if (l[0] == ' ') ++ctx;
            else throw FormatError(FormatErrorKind::BadScript, "bad hunk line prefix");
        }
        if (h.old_count != minus + ctx || h.new_count != plus + ctx)
            throw FormatError(FormatErrorKind::HunkMismatch, "hunk counts disagree with payload");

        const long long doc_pos = h.old_count == 0 ? h.old_start + 1 : h.old_start;
        if (doc_pos < cursor || doc_pos > n + 1)
            throw FormatError(FormatErrorKind::HunkMismatch, "hunk start out of order or beyond document");
        for (long long l = cursor; l < doc_pos; ++l)
            out.push_back(std::string(doc.line(static_cast<std::size_t>(l - 1))));
        cursor = doc_pos;

        for (const std::string& l : h.lines) {
            const std::string_view payload = std::string_view(l).substr(1);
            if (l[0] == '+') {
                out.emplace_back(payload);
                continue;
            }
            if (cursor > n)
                throw FormatError(FormatErrorKind::HunkMismatch, "hunk extends beyond document");
            if (doc.line(static_cast<std::size_t>(cursor - 1)) != payload)
                throw FormatError(FormatErrorKind::HunkMismatch,
                                  "document text disagrees with hunk at line " +
                                      std::to_string(cursor));
            if (l[0] == ' ') out.emplace_back(payload);
            ++cursor;
        }
    }
    for (long long l = cursor; l <= n; ++l)
        out.push_back(std::string(doc.line(static_cast<std::size_t>(l - 1))));

    std::string text;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (i) text += '\n';
        text += out[i];
    }
    const bool doc_had_trailing = !doc.raw().empty() && doc.raw().back() == '\n';
    if (doc_had_trailing && !text.empty()) text += '\n';
    return text;
}

inline std::string serialize_unified_diff(const UnifiedDiffScript& script) {
    std::string out;
    for (const DiffHunk& h : script.hunks) {
        out += "@@ -" + std::to_string(h.old_start) + "," + std::to_string(h.old_count) +
               " +" + std::to_string(h.new_start) + "," + std::to_string(h.new_count) + " @@\n";
        for (const std::string& l : h.lines) {
            out += l;
            out += '\n';
        }
    }
    return out;
}

inline UnifiedDiffScript parse_unified_diff(std::string_view text) {
    UnifiedDiffScript script;
    const auto lines = detail::split_lines(text);
    const std::size_t end = (!lines.empty() && lines.back().empty()) ? lines.size() - 1 : lines.size();
    std::size_t i = 0;
    while (i < end) {
        const std::string& header = lines[i];
        DiffHunk h;
        long long a = 0, b = 0, c = 0, d = 0;
        if (std::sscanf(header.c_str(), "@@ -%lld,%lld +%lld,%lld @@", &a, &b, &c, &d) != 4)
            throw FormatError(FormatErrorKind::BadScript, "bad hunk header: " + header);
        h.old_start = a;
        h.old_count = b;
        h.new_start = c;
        h.new_count = d;
        ++i;
        while (i < end && !lines[i].empty() && (lines[i][0] == ' ' || lines[i][0] == '-' ||
                                                lines[i][0] == '+')) {
            h.lines.push_back(lines[i]);
            ++i;
        }
        script.hunks.push_back(std::move(h));
    }
    return script;
}

// --- Head-to-head harness ----------------------------------------------------------

struct FormatCaseOutcome {
    std::string case_id;
    long long tokens = 0;
    bool rt_em = false;
    std::string failure;       // empty when rt_em
    bool anchor_ambiguity = false;
};

struct FormatStats {
    std::string format;
    long long cases = 0;
    long long rt_em_pass = 0;
    long long total_tokens = 0;
    double mean_tokens = 0, median_tokens = 0, p95_tokens = 0;
    std::vector<FormatCaseOutcome> details;

    double rt_em_rate() const {
        return cases > 0 ? static_cast<double>(rt_em_pass) / static_cast<double>(cases) : 0.0;
    }
};

struct FormatReport {
    long long cases = 0;
    std::vector<FormatStats> formats;  // full-regen, search-replace, unified-diff, program
    std::vector<std::pair<std::string, std::string>> excluded;  // (id, reason)
};

namespace detail {

inline void finalize_stats(FormatStats& fs) {
    std::vector<long long> toks;
    for (const auto& d : fs.details) {
        toks.push_back(d.tokens);
        fs.total_tokens += d.tokens;
        fs.rt_em_pass += d.rt_em ? 1 : 0;
    }
    fs.cases = static_cast<long long>(fs.details.size());
    if (fs.cases > 0) {
        fs.mean_tokens = static_cast<double>(fs.total_tokens) / static_cast<double>(fs.cases);
        fs.median_tokens = percentile_nearest_rank(toks, 50.0);
        fs.p95_tokens = percentile_nearest_rank(toks, 95.0);
    }
}

}  // namespace detail

/// Serializes, token-counts, parses and applies each format for every case.
/// Per-case failures are recorded, never fatal. `context` feeds the unified
/// diff converter.
inline FormatReport format_head_to_head(const std::vector<CorpusCase>& corpus,
                                        const Tokenizer& tok, long long context = 0) {
    FormatReport report;
    FormatStats full{"full-regeneration"}, sr{"search-replace"}, ud{"unified-diff"},
        prog{"program"};

    for (const CorpusCase& c : corpus) {
        Program oracle;
        LineDoc doc(c.doc);
        try {
            oracle = derive_oracle_line(doc, c.gold);
        } catch (const Error& e) {
            report.excluded.emplace_back(c.id, e.what());
            continue;
        }
        report.cases += 1;

        {  // full regeneration: emit the gold text itself
            FormatCaseOutcome o{c.id};
            o.tokens = static_cast<long long>(tok.encode(c.gold).size());
            o.rt_em = true;
            full.details.push_back(o);
        }
        {  // search/replace
            FormatCaseOutcome o{c.id};
            try {
                const auto script = to_search_replace(oracle, doc);
                const std::string text = serialize_search_replace(script);
                o.tokens = static_cast<long long>(tok.encode(text).size());
                const auto applied = apply_search_replace(doc, parse_search_replace(text));
                if (applied.no_match_block) {
                    o.failure = "no-match";
                } else {
                    o.rt_em = compare_em(applied.text, c.gold).byte_exact;
                    if (!o.rt_em) {
                        o.anchor_ambiguity = !applied.ambiguous_blocks.empty();
                        o.failure = o.anchor_ambiguity ? "anchor-ambiguity" : "mismatch";
                    }
                }
            } catch (const Error& e) {
                o.failure = e.what();
            }
            sr.details.push_back(o);
        }
        {  // unified diff
            FormatCaseOutcome o{c.id};
            try {
                const auto script = to_unified_diff(oracle, doc, context);
                const std::string text = serialize_unified_diff(script);
                o.tokens = static_cast<long long>(tok.encode(text).size());
                const std::string applied = apply_unified_diff(doc, parse_unified_diff(text));
                o.rt_em = compare_em(applied, c.gold).byte_exact;
                if (!o.rt_em) o.failure = "mismatch";
            } catch (const Error& e) {
                o.failure = e.what();
            }
            ud.details.push_back(o);
        }
        {  // the copy/gen program format itself
            FormatCaseOutcome o{c.id};
            try {
                const std::string text = serialize_program(oracle);
                o.tokens = static_cast<long long>(tok.encode(text).size());
                const auto outcome = resolve(parse_program(text), doc, ResolveMode::Strict);
                o.rt_em = compare_em(outcome.text, c.gold).byte_exact;
                if (!o.rt_em) o.failure = "mismatch";
            } catch (const Error& e) {
                o.failure = e.what();
            }
            prog.details.push_back(o);
        }
    }

    for (FormatStats* fs : {&full, &sr, &ud, &prog}) detail::finalize_stats(*fs);
    report.formats = {full, sr, ud, prog};
    return report;
}

}  // namespace editprog
