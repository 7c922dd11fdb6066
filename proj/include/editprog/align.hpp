#pragma once

// Line and token alignment, oracle-program derivation, and copy-ceiling
// statistics.
//
// matching_blocks is a faithful port of Python difflib.SequenceMatcher with
// autojunk=False and no junk predicate: recursively the longest matching
// block, ties broken by earliest start in `a` then earliest start in `b`,
// then adjacent blocks merged. Oracle programs must be reproducible across
// builds, so the tie-breaking is part of the contract, not an accident.
//
// Oracle construction: matching blocks over (doc lines, gold lines) become
// CopyLines ops; maximal non-matching gold runs become Gen ops carrying the
// verbatim gold slice padded with one leading and one trailing newline (the
// resolver's strip-at-most-one rule removes exactly the padding, preserving
// authorial blank lines). A run that reaches the last gold line slices to the
// end of the gold text so trailing newlines survive the round trip.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "editprog/corpus.hpp"
#include "editprog/errors.hpp"
#include "editprog/grammar.hpp"
#include "editprog/resolver.hpp"
#include "editprog/tokenizer.hpp"

namespace editprog {

struct MatchBlock {
    std::size_t a = 0;  // start in source sequence
    std::size_t b = 0;  // start in target sequence
    std::size_t size = 0;
    bool operator==(const MatchBlock&) const = default;
};

namespace detail {

template <typename T>
struct LongestMatch {
    std::size_t i, j, size;
};

template <typename T>
LongestMatch<T> find_longest_match(const std::vector<T>& a, const std::vector<T>& b,
                                   const std::unordered_map<T, std::vector<std::size_t>>& b2j,
                                   std::size_t alo, std::size_t ahi, std::size_t blo,
                                   std::size_t bhi) {
    std::size_t besti = alo, bestj = blo, bestsize = 0;
    std::unordered_map<std::size_t, std::size_t> j2len, newj2len;
    for (std::size_t i = alo; i < ahi; ++i) {
        newj2len.clear();
        auto it = b2j.find(a[i]);
        if (it != b2j.end()) {
            for (std::size_t j : it->second) {  // ascending positions
                if (j < blo) continue;
                if (j >= bhi) break;
                std::size_t k = 1;
                if (j > 0) {
                    auto prev = j2len.find(j - 1);
                    if (prev != j2len.end()) k = prev->second + 1;
                }
                newj2len[j] = k;
                if (k > bestsize) {
                    besti = i - k + 1;
                    bestj = j - k + 1;
                    bestsize = k;
                }
            }
        }
        std::swap(j2len, newj2len);
    }
    // Boundary extension, a no-op without a junk predicate but kept for
    // fidelity with the reference algorithm.
    while (besti > alo && bestj > blo && a[besti - 1] == b[bestj - 1]) {
        --besti;
        --bestj;
        ++bestsize;
    }
    while (besti + bestsize < ahi && bestj + bestsize < bhi &&
           a[besti + bestsize] == b[bestj + bestsize]) {
        ++bestsize;
    }
    return {besti, bestj, bestsize};
}

}  // namespace detail

/// Ratcliff–Obershelp matching blocks over two sequences, difflib semantics.
/// No zero-size terminating sentinel is returned.
template <typename T>
std::vector<MatchBlock> matching_blocks(const std::vector<T>& a, const std::vector<T>& b) {
    std::unordered_map<T, std::vector<std::size_t>> b2j;
    for (std::size_t j = 0; j < b.size(); ++j) b2j[b[j]].push_back(j);

    std::vector<std::array<std::size_t, 4>> queue{{0, a.size(), 0, b.size()}};
    std::vector<MatchBlock> blocks;
    while (!queue.empty()) {
        auto [alo, ahi, blo, bhi] = queue.back();
        queue.pop_back();
        auto m = detail::find_longest_match(a, b, b2j, alo, ahi, blo, bhi);
        if (m.size) {
            blocks.push_back({m.i, m.j, m.size});
            if (alo < m.i && blo < m.j) queue.push_back({alo, m.i, blo, m.j});
            if (m.i + m.size < ahi && m.j + m.size < bhi)
                queue.push_back({m.i + m.size, ahi, m.j + m.size, bhi});
        }
    }
    std::sort(blocks.begin(), blocks.end(),
              [](const MatchBlock& x, const MatchBlock& y) {
                  return std::tie(x.a, x.b, x.size) < std::tie(y.a, y.b, y.size);
              });
    // Merge adjacent blocks.
    std::vector<MatchBlock> merged;
    for (const MatchBlock& blk : blocks) {
        if (!merged.empty() && merged.back().a + merged.back().size == blk.a &&
            merged.back().b + merged.back().size == blk.b) {
            merged.back().size += blk.size;
        } else {
            merged.push_back(blk);
        }
    }
    return merged;
}

// ---------------------------------------------------------------------------
// Oracle derivation.
// ---------------------------------------------------------------------------

namespace detail {

/// Gen body for gold lines [j1, j2] (0-indexed). Runs that include the last
/// line slice to the end of the raw text so trailing newlines are preserved.
inline std::string gen_body_for_run(const LineDoc& gold, std::size_t j1, std::size_t j2) {
    const std::size_t begin = gold.line_start(j1);
    const std::size_t end =
        (j2 + 1 == gold.n_lines()) ? gold.raw().size() : gold.line_end(j2);
    return "\n" + gold.raw().substr(begin, end - begin) + "\n";
}

}  // namespace detail

/// Line-level oracle: resolving the result in Strict mode reproduces gold
/// byte-exactly under compare_em. Empty gold yields the degenerate program
/// [Gen{"\n\n"}], which resolves to the empty string.
inline Program derive_oracle_line(const LineDoc& doc, std::string_view gold_text) {
    Program p;
    if (gold_text.empty()) {
        p.ops.emplace_back(Gen{"\n\n"});
        return p;
    }
    const LineDoc gold{std::string(gold_text)};
    const auto blocks = matching_blocks(doc.lines(), gold.lines());

    std::size_t cursor = 0;
    for (const MatchBlock& blk : blocks) {
        if (blk.b > cursor)
            p.ops.emplace_back(Gen{detail::gen_body_for_run(gold, cursor, blk.b - 1)});
        p.ops.emplace_back(CopyLines{static_cast<long long>(blk.a + 1),
                                     static_cast<long long>(blk.a + blk.size)});
        cursor = blk.b + blk.size;
    }
    if (cursor < gold.n_lines())
        p.ops.emplace_back(Gen{detail::gen_body_for_run(gold, cursor, gold.n_lines() - 1)});
    return p;
}

/// Token-level oracle over `tok`'s id sequences. Requires the tokenizer to
/// round-trip both texts losslessly.
inline Program derive_oracle_token(std::string_view doc_text, std::string_view gold_text,
                                   const Tokenizer& tok) {
    const auto doc_ids = tok.encode(doc_text);
    const auto gold_ids = tok.encode(gold_text);
    if (tok.decode(doc_ids) != doc_text || tok.decode(gold_ids) != gold_text)
        throw OracleError("lossy tokenization: " + tok.identity() +
                          " does not round-trip this text pair");

    Program p;
    if (gold_ids.empty()) {
        p.ops.emplace_back(Gen{"\n\n"});
        return p;
    }
    const auto blocks = matching_blocks(doc_ids, gold_ids);
    std::size_t cursor = 0;
    auto gen_for = [&](std::size_t j1, std::size_t j2) {
        return Gen{"\n" +
                   tok.decode(std::span<const TokenId>(gold_ids).subspan(j1, j2 - j1 + 1)) +
                   "\n"};
    };
    for (const MatchBlock& blk : blocks) {
        if (blk.b > cursor) p.ops.emplace_back(gen_for(cursor, blk.b - 1));
        p.ops.emplace_back(CopyTokens{static_cast<long long>(blk.a),
                                      static_cast<long long>(blk.a + blk.size - 1)});
        cursor = blk.b + blk.size;
    }
    if (cursor < gold_ids.size()) p.ops.emplace_back(gen_for(cursor, gold_ids.size() - 1));
    return p;
}

// ---------------------------------------------------------------------------
// Copy-ceiling statistics.
// ---------------------------------------------------------------------------

struct SpanHistogram {
    std::vector<long long> lengths;  // one entry per copy span, program order

    long long sum() const {
        long long s = 0;
        for (long long v : lengths) s += v;
        return s;
    }
    std::size_t count() const { return lengths.size(); }
};

struct CorpusAggregates {
    std::string corpus;
    long long n = 0;       // cases
    long long t_total = 0; // tokens emitted by all ops
    long long t_copy = 0;  // tokens emitted by copy ops
    long long t_gen = 0;   // tokens emitted by gen ops
    long long k_copy = 0;  // copy-op count
    double mean_span = 0.0, p50_span = 0.0, p95_span = 0.0;

    double f_line() const { return t_total > 0 ? static_cast<double>(t_copy) / t_total : 0.0; }
};

/// Nearest-rank percentile of an unsorted sample; 0 on empty input.
inline double percentile_nearest_rank(std::vector<long long> values, double pct) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const auto rank = static_cast<std::size_t>(
        std::ceil(pct / 100.0 * static_cast<double>(values.size())));
    return static_cast<double>(values[std::max<std::size_t>(rank, 1) - 1]);
}

struct CoverStats {
    CorpusAggregates agg;
    SpanHistogram hist;
    std::vector<std::pair<std::string, std::string>> excluded;  // (case id, reason)
};

/// Per-corpus line-level totals. Token counts are per-op: each op's emitted
/// text (copy: joined lines; gen: body after the strip rule) is tokenized
/// under `tok`, so t_total = t_copy + t_gen holds by construction and the
/// inter-op separator newlines are not charged to either side.
inline CoverStats line_cover_stats(const std::vector<CorpusCase>& corpus, const Tokenizer& tok) {
    CoverStats out;
    for (const CorpusCase& c : corpus) {
        try {
            const LineDoc doc(c.doc);
            const Program p = derive_oracle_line(doc, c.gold);
            out.agg.n += 1;
            for (const Op& op : p.ops) {
                if (const auto* cl = std::get_if<CopyLines>(&op)) {
                    const std::string text = doc.join_lines(
                        static_cast<std::size_t>(cl->start - 1),
                        static_cast<std::size_t>(cl->end - 1));
                    const auto n_tok = static_cast<long long>(tok.encode(text).size());
                    out.agg.t_copy += n_tok;
                    out.agg.k_copy += 1;
                    out.hist.lengths.push_back(n_tok);
                } else {
                    const std::string_view body = strip_gen_body(std::get<Gen>(op).body);
                    out.agg.t_gen += static_cast<long long>(tok.encode(body).size());
                }
            }
        } catch (const Error& e) {
            out.excluded.emplace_back(c.id, e.what());
        }
    }
    out.agg.t_total = out.agg.t_copy + out.agg.t_gen;
    if (!out.hist.lengths.empty()) {
        out.agg.mean_span = static_cast<double>(out.hist.sum()) /
                            static_cast<double>(out.hist.count());
        out.agg.p50_span = percentile_nearest_rank(out.hist.lengths, 50.0);
        out.agg.p95_span = percentile_nearest_rank(out.hist.lengths, 95.0);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Greedy token cover.
// ---------------------------------------------------------------------------

struct CoverReport {
    long long m = 1;        // minimum span length
    double f = 0.0;         // covered fraction of gold tokens
    long long spans = 0;
    double mean_span = 0.0;
    long long covered = 0;
    long long total = 0;
};

/// Left-to-right greedy cover: at each gold position take the longest
/// contiguous match against any doc position; accept iff length >= m, else
/// the token is uncovered and the scan advances one. A lower bound on the
/// optimal cover.
inline CoverReport greedy_token_cover(const std::vector<TokenId>& doc_tokens,
                                      const std::vector<TokenId>& gold_tokens, long long m) {
    if (m < 1) throw SchemaError("greedy_token_cover: m must be >= 1");
    std::unordered_map<TokenId, std::vector<std::size_t>> index;
    for (std::size_t d = 0; d < doc_tokens.size(); ++d) index[doc_tokens[d]].push_back(d);

    CoverReport rep;
    rep.m = m;
    rep.total = static_cast<long long>(gold_tokens.size());
    std::size_t g = 0;
    while (g < gold_tokens.size()) {
        std::size_t best = 0;
        auto it = index.find(gold_tokens[g]);
        if (it != index.end()) {
            for (std::size_t d : it->second) {
                std::size_t len = 0;
                while (g + len < gold_tokens.size() && d + len < doc_tokens.size() &&
                       gold_tokens[g + len] == doc_tokens[d + len])
                    ++len;
                best = std::max(best, len);
            }
        }
        if (best >= static_cast<std::size_t>(m)) {
            rep.covered += static_cast<long long>(best);
            rep.spans += 1;
            g += best;
        } else {
            ++g;
        }
    }
    rep.f = rep.total > 0 ? static_cast<double>(rep.covered) / static_cast<double>(rep.total)
                          : 0.0;
    rep.mean_span = rep.spans > 0
                        ? static_cast<double>(rep.covered) / static_cast<double>(rep.spans)
                        : 0.0;
    return rep;
}

}  // namespace editprog
