#pragma once

// Grammar-enforcing decoder FSM.
//
// Five states drive a run: AWAIT_OP (op boundary), AFTER_LT (op-type choice),
// COPY_LINES (range digits), GEN_BODY (free generation), CLOSE (terminal).
// The runner alternates three step kinds:
//
//  * masked steps — a pluggable Policy picks one token id from the allowed
//    set. Multi-piece literals under fragmented tokenizers cost extra masked
//    steps (the trailing steps have singleton allowed sets).
//  * forced prefills — fixed literal sequences (` lines="`, `/>`, `>`,
//    `</gen>` on a length cutoff, `</program>`) emitted without the policy.
//  * free tokens — unrestricted generation inside a gen body, terminated by
//    an exact token-id-sequence match of the last w free tokens against the
//    encoding of `</gen>` (w = its id-sequence length). The match is over
//    ids, never over decoded text, so byte-level overlaps split across token
//    boundaries cannot mis-trigger it.
//
// After a committed copy range the tokens of the referenced span are
// appended as one CopySplice event (token count under the active tokenizer,
// out-of-range endpoints clipped the way a deployment resolver would before
// splicing).
//
// The FSM enforces syntactic shape only. Range validity (start <= end,
// end <= n_lines) is the resolver's concern; the opt-in bounded_ranges mode
// additionally restricts digit masks so committed ranges stay inside the
// document.
//
// The structural portion of a run is produced solely by masked steps and
// forced prefills, so the returned Program always parses. The decoded run
// text re-parses to the same Program under byte-granular tokenizers; a vocab
// policy that splits the gen closer across exotic piece boundaries keeps the
// op open by design (the op is closed by the id sequence, not by text).

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "editprog/errors.hpp"
#include "editprog/grammar.hpp"
#include "editprog/literal_table.hpp"
#include "editprog/resolver.hpp"
#include "editprog/rng.hpp"
#include "editprog/tokenizer.hpp"

namespace editprog {

enum class FsmStateKind { AwaitOp, AfterLt, CopyLines, GenBody, Close };

enum class CopyGranularity { Lines, Tokens };

struct FsmState {
    FsmStateKind kind = FsmStateKind::AwaitOp;
    bool first_op = true;
    CopyGranularity granularity = CopyGranularity::Lines;
    // COPY_LINES sub-position.
    int digits_before = 0;
    int digits_after = 0;
    bool past_hyphen = false;
    long long index_value = 0;  // partial value of the index being typed
};

struct AllowedSet {
    bool unrestricted = false;
    std::vector<TokenId> ids;  // sorted, unique; empty+unrestricted = whole vocab

    bool contains(TokenId id) const {
        if (unrestricted) return true;
        return std::binary_search(ids.begin(), ids.end(), id);
    }
    void add(TokenId id) {
        auto it = std::lower_bound(ids.begin(), ids.end(), id);
        if (it == ids.end() || *it != id) ids.insert(it, id);
    }
};

// --- Trace events -----------------------------------------------------------

struct MaskedStep {
    FsmStateKind state;
    std::size_t allowed_size;
    TokenId chosen;
};

struct ForcedPrefill {
    std::string literal;
    std::vector<TokenId> ids;
};

struct FreeToken {
    TokenId id;
};

struct CopySplice {
    long long start, end;   // committed range as decoded (pre-clip)
    long long n_tokens;     // splice length under the active tokenizer
    std::vector<TokenId> ids;
};

using DecodeEvent = std::variant<MaskedStep, ForcedPrefill, FreeToken, CopySplice>;

struct DecodeTrace {
    std::vector<DecodeEvent> events;
    std::vector<TokenId> emitted;  // full model-side stream, splices included

    /// The program text: masked + forced + free tokens, splices excluded.
    std::string program_text(const Tokenizer& tok) const {
        std::vector<TokenId> ids;
        for (const auto& ev : events) {
            if (const auto* m = std::get_if<MaskedStep>(&ev)) ids.push_back(m->chosen);
            else if (const auto* f = std::get_if<ForcedPrefill>(&ev))
                ids.insert(ids.end(), f->ids.begin(), f->ids.end());
            else if (const auto* t = std::get_if<FreeToken>(&ev)) ids.push_back(t->id);
        }
        return tok.decode(ids);
    }
};

struct TraceAccounting {
    long long decoded = 0;  // model-produced: masked + free
    long long copied = 0;   // splice-contributed tokens
    long long forced = 0;   // force-prefilled tokens
    long long splices = 0;
    long long masked_steps = 0;
    long long free_tokens = 0;
};

inline TraceAccounting trace_accounting(const DecodeTrace& t) {
    TraceAccounting acc;
    for (const auto& ev : t.events) {
        if (std::holds_alternative<MaskedStep>(ev)) {
            acc.masked_steps += 1;
        } else if (const auto* f = std::get_if<ForcedPrefill>(&ev)) {
            acc.forced += static_cast<long long>(f->ids.size());
        } else if (std::holds_alternative<FreeToken>(ev)) {
            acc.free_tokens += 1;
        } else {
            const auto& s = std::get<CopySplice>(ev);
            acc.copied += s.n_tokens;
            acc.splices += 1;
        }
    }
    acc.decoded = acc.masked_steps + acc.free_tokens;
    return acc;
}

// --- Policies ---------------------------------------------------------------

class Policy {
  public:
    virtual ~Policy() = default;
    /// Must return an id inside `allowed`; the runner asserts this.
    virtual TokenId choose(const FsmState& state, const AllowedSet& allowed,
                           std::span<const TokenId> emitted) = 0;
};

// --- Public mask query -------------------------------------------------------

/// The allowed-token set at the head of each state's decision:
/// AWAIT_OP -> head ids of "<" (plus "</" after the first op); AFTER_LT ->
/// head ids of "copy"/"gen"; COPY_LINES -> digits / hyphen / quote per
/// sub-position (at most 7 digits per index; hyphen only after one digit of
/// the start index; quote only after one digit of the end index; the start
/// index of a line range never begins with 0, a token range may be exactly
/// "0"); GEN_BODY -> unrestricted; CLOSE -> empty (forced prefill only).
inline AllowedSet allowed_tokens(const FsmState& state, bool first_op,
                                 const LiteralTable& table) {
    AllowedSet out;
    switch (state.kind) {
        case FsmStateKind::AwaitOp:
            out.add(table.lt.ids.front());
            if (!first_op) out.add(table.lt_slash.ids.front());
            return out;
        case FsmStateKind::AfterLt:
            out.add(table.copy_word.ids.front());
            out.add(table.gen_word.ids.front());
            return out;
        case FsmStateKind::CopyLines: {
            const int typed = state.past_hyphen ? state.digits_after : state.digits_before;
            // An index typed as a lone "0" (token granularity) is complete.
            const bool lone_zero = typed == 1 && state.index_value == 0;
            if (typed < 7 && !lone_zero) {
                const bool zero_first_ok = state.granularity == CopyGranularity::Tokens;
                for (int d = 0; d < 10; ++d) {
                    if (d == 0 && typed == 0 && !zero_first_ok) continue;
                    out.add(table.digit_ids[static_cast<std::size_t>(d)]);
                }
            }
            if (!state.past_hyphen && state.digits_before >= 1)
                out.add(table.hyphen_id);
            if (state.past_hyphen && state.digits_after >= 1)
                out.add(table.quote.ids.front());
            return out;
        }
        case FsmStateKind::GenBody:
            out.unrestricted = true;
            return out;
        case FsmStateKind::Close:
            return out;  // empty: the terminator is force-prefilled
    }
    return out;
}

// --- Runner -----------------------------------------------------------------

struct DecodeLimits {
    long long max_free_per_gen = 1024;
    long long max_ops = 64;
};

struct DecodeOptions {
    CopyGranularity granularity = CopyGranularity::Lines;
    bool bounded_ranges = false;
};

struct DecodeResult {
    Program program;
    DecodeTrace trace;
    bool op_limit_hit = false;        // max_ops reached; program force-closed
    long long forced_gen_closes = 0;  // gen bodies closed by the length cutoff
};

namespace detail {

struct PhraseStep {
    TokenId id;
    FsmStateKind state;
};

struct Phrase {
    std::vector<PhraseStep> steps;
    int tag;
};

/// True when some integer formed by appending <= digits_left digits to
/// `value` (including zero digits) lands in [lo, hi].
inline bool can_reach_range(long long value, long long lo, long long hi, int digits_left) {
    long long span_lo = value, span_width = 1;
    for (int k = 0; k <= digits_left; ++k) {
        const long long span_hi = span_lo + span_width - 1;
        if (span_lo > hi) return false;
        if (span_hi >= lo) return true;
        span_lo *= 10;
        span_width *= 10;
    }
    return false;
}

class Runner {
  public:
    Runner(Policy& policy, const LineDoc& doc, const Tokenizer& tok,
           const LiteralTable& table, DecodeLimits limits, DecodeOptions opts)
        : policy_(policy), doc_(doc), tok_(tok), table_(table), limits_(limits),
          opts_(opts) {
        if (limits_.max_free_per_gen < 1 || limits_.max_ops < 1)
            throw Error("run_decode: limits must be positive");
        if (opts_.granularity == CopyGranularity::Tokens)
            doc_ids_ = tok_.encode(doc_.raw());
        state_.granularity = opts_.granularity;
    }

    DecodeResult run() {
        while (true) {
            if (ops_done_ >= limits_.max_ops) {
                force(table_.end_program.text,
                      concat({table_.lt_slash.ids, table_.program_word.ids, table_.gt.ids}));
                result_.op_limit_hit = true;
                break;
            }
            const int opener = choose_opener();
            if (opener == kClose) {
                force("program>", concat({table_.program_word.ids, table_.gt.ids}));
                break;
            }
            if (opener == kCopy) {
                run_copy_op();
            } else {
                run_gen_op();
            }
            ops_done_ += 1;
            state_ = FsmState{};
            state_.first_op = false;
            state_.granularity = opts_.granularity;
        }
        state_.kind = FsmStateKind::Close;
        return std::move(result_);
    }

  private:
    static constexpr int kCopy = 0, kGen = 1, kClose = 2;

    static std::vector<TokenId> concat(std::initializer_list<std::span<const TokenId>> parts) {
        std::vector<TokenId> out;
        for (const auto& part : parts) out.insert(out.end(), part.begin(), part.end());
        return out;
    }

    void emit(TokenId id) { result_.trace.emitted.push_back(id); }

    void force(const std::string& literal, std::vector<TokenId> ids) {
        for (TokenId id : ids) emit(id);
        result_.trace.events.push_back(ForcedPrefill{literal, std::move(ids)});
    }

    TokenId masked_step(FsmStateKind state_kind, const AllowedSet& allowed) {
        FsmState view = state_;
        view.kind = state_kind;
        const TokenId chosen =
            policy_.choose(view, allowed, std::span<const TokenId>(result_.trace.emitted));
        if (!allowed.contains(chosen))
            throw Error("policy violated the allowed-set contract");
        const std::size_t size =
            allowed.unrestricted ? tok_.vocab_size() : allowed.ids.size();
        result_.trace.events.push_back(MaskedStep{state_kind, size, chosen});
        emit(chosen);
        return chosen;
    }

    /// Runs one multi-token decision over candidate phrases; returns the tag
    /// of the committed phrase. No phrase may be a prefix of another.
    int run_phrases(std::vector<Phrase> phrases) {
        for (std::size_t i = 0; i < phrases.size(); ++i)
            for (std::size_t j = 0; j < phrases.size(); ++j)
                if (i != j && phrases[i].steps.size() <= phrases[j].steps.size() &&
                    std::equal(phrases[i].steps.begin(), phrases[i].steps.end(),
                               phrases[j].steps.begin(),
                               [](const PhraseStep& a, const PhraseStep& b) {
                                   return a.id == b.id;
                               }))
                    throw TokenizerError("ambiguous structural phrases under " +
                                         table_.tokenizer_identity);

        std::vector<std::size_t> live(phrases.size());
        for (std::size_t i = 0; i < live.size(); ++i) live[i] = i;
        std::size_t t = 0;
        while (true) {
            AllowedSet allowed;
            FsmStateKind step_state = phrases[live.front()].steps[t].state;
            for (std::size_t i : live) {
                allowed.add(phrases[i].steps[t].id);
                // Report the earliest stage among live phrases.
                if (phrases[i].steps[t].state == FsmStateKind::AwaitOp)
                    step_state = FsmStateKind::AwaitOp;
            }
            const TokenId chosen = masked_step(step_state, allowed);
            std::vector<std::size_t> next;
            for (std::size_t i : live)
                if (phrases[i].steps[t].id == chosen) next.push_back(i);
            live = std::move(next);
            ++t;
            if (live.size() == 1 && t == phrases[live.front()].steps.size())
                return phrases[live.front()].tag;
        }
    }

    static std::vector<PhraseStep> phrase_steps(std::span<const TokenId> a, FsmStateKind sa,
                                                std::span<const TokenId> b = {},
                                                FsmStateKind sb = FsmStateKind::AwaitOp) {
        std::vector<PhraseStep> steps;
        for (TokenId id : a) steps.push_back({id, sa});
        for (TokenId id : b) steps.push_back({id, sb});
        return steps;
    }

    int choose_opener() {
        const bool first = ops_done_ == 0;
        const long long ref = reference_extent();
        const bool copy_possible = !opts_.bounded_ranges || ref > 0;

        std::vector<Phrase> phrases;
        if (copy_possible)
            phrases.push_back({phrase_steps(table_.lt.ids, FsmStateKind::AwaitOp,
                                            table_.copy_word.ids, FsmStateKind::AfterLt),
                               kCopy});
        phrases.push_back({phrase_steps(table_.lt.ids, FsmStateKind::AwaitOp,
                                        table_.gen_word.ids, FsmStateKind::AfterLt),
                           kGen});
        if (!first)
            phrases.push_back({phrase_steps(table_.lt_slash.ids, FsmStateKind::AwaitOp), kClose});
        return run_phrases(std::move(phrases));
    }

    /// Extent of the copy-reference space: line count or token count.
    long long reference_extent() const {
        return opts_.granularity == CopyGranularity::Lines
                   ? static_cast<long long>(doc_.n_lines())
                   : static_cast<long long>(doc_ids_.size());
    }

    /// One masked digit-entry loop for a single index. `lo`/`hi` bound the
    /// committed value when bounded_ranges is on.
    long long read_index(bool is_end_index, long long lo, long long hi) {
        const long long first_min =
            opts_.granularity == CopyGranularity::Lines ? 1 : 0;
        long long value = 0;
        int typed = 0;
        while (true) {
            std::vector<Phrase> phrases;
            const bool lone_zero = typed == 1 && value == 0;
            if (typed < 7 && !lone_zero) {
                for (int d = 0; d < 10; ++d) {
                    if (typed == 0 && d == 0 && first_min > 0) continue;
                    const long long next = value * 10 + d;
                    if (opts_.bounded_ranges &&
                        !can_reach_range(next, lo, hi, 7 - (typed + 1)))
                        continue;
                    phrases.push_back(
                        {{{table_.digit_ids[static_cast<std::size_t>(d)],
                           FsmStateKind::CopyLines}},
                         d});
                }
            }
            const bool value_ok = !opts_.bounded_ranges || (value >= lo && value <= hi);
            if (typed >= 1 && value_ok) {
                if (!is_end_index)
                    phrases.push_back({{{table_.hyphen_id, FsmStateKind::CopyLines}}, 10});
                else
                    phrases.push_back(
                        {phrase_steps(table_.quote.ids, FsmStateKind::CopyLines), 10});
            }
            if (phrases.empty())
                throw Error("copy-range digit masks exhausted (document too small?)");
            const int tag = run_phrases(std::move(phrases));
            if (tag == 10) {
                state_.index_value = 0;
                return value;
            }
            value = value * 10 + tag;
            typed += 1;
            state_.index_value = value;
            if (!is_end_index)
                state_.digits_before = typed;
            else
                state_.digits_after = typed;
        }
    }

    void run_copy_op() {
        state_.kind = FsmStateKind::CopyLines;
        state_.digits_before = state_.digits_after = 0;
        state_.past_hyphen = false;

        const bool lines = opts_.granularity == CopyGranularity::Lines;
        const LiteralEntry& attr = lines ? table_.space_lines : table_.space_tokens;
        force(attr.text + table_.eq_quote.text,
              concat({attr.ids, table_.eq_quote.ids}));

        const long long n = reference_extent();
        const long long lo_min = lines ? 1 : 0;
        const long long hi_max = lines ? n : n - 1;
        const long long start = read_index(false, lo_min, hi_max);
        state_.past_hyphen = true;
        const long long end = read_index(true, std::max(lo_min, start), hi_max);

        force(table_.slash_gt.text, table_.slash_gt.ids);

        // Splice: the referenced span's tokens, endpoints clipped into the
        // document the way the resolver's clipped mode would.
        std::vector<TokenId> splice_ids;
        if (lines) {
            const long long s = std::max(1LL, std::min(start, n));
            const long long e = std::max(1LL, std::min(end, n));
            if (n > 0 && start <= end && s <= e)
                splice_ids = tok_.encode(doc_.join_lines(static_cast<std::size_t>(s - 1),
                                                         static_cast<std::size_t>(e - 1)));
            result_.program.ops.emplace_back(CopyLines{start, end});
        } else {
            const long long s = std::max(0LL, std::min(start, n - 1));
            const long long e = std::max(0LL, std::min(end, n - 1));
            if (n > 0 && start <= end && s <= e)
                splice_ids.assign(doc_ids_.begin() + s, doc_ids_.begin() + e + 1);
            result_.program.ops.emplace_back(CopyTokens{start, end});
        }
        for (TokenId id : splice_ids) emit(id);
        result_.trace.events.push_back(CopySplice{
            start, end, static_cast<long long>(splice_ids.size()), std::move(splice_ids)});
    }

    void run_gen_op() {
        force(table_.gt.text, table_.gt.ids);
        state_.kind = FsmStateKind::GenBody;

        const std::vector<TokenId>& closer = table_.end_gen.ids;
        std::vector<TokenId> free_ids;
        bool closed_by_policy = false;
        AllowedSet unrestricted;
        unrestricted.unrestricted = true;
        while (static_cast<long long>(free_ids.size()) < limits_.max_free_per_gen) {
            FsmState view = state_;
            const TokenId id = policy_.choose(view, unrestricted,
                                              std::span<const TokenId>(result_.trace.emitted));
            validate_vocab_id(id);
            result_.trace.events.push_back(FreeToken{id});
            emit(id);
            free_ids.push_back(id);
            if (free_ids.size() >= closer.size() &&
                std::equal(closer.begin(), closer.end(), free_ids.end() - closer.size())) {
                closed_by_policy = true;
                free_ids.resize(free_ids.size() - closer.size());
                break;
            }
        }
        if (!closed_by_policy) {
            force(table_.end_gen.text, table_.end_gen.ids);
            result_.forced_gen_closes += 1;
        }
        result_.program.ops.emplace_back(
            Gen{unescape_gen_body(tok_.decode(free_ids))});
    }

    void validate_vocab_id(TokenId id) const {
        if (id < 0 || id >= static_cast<TokenId>(tok_.vocab_size()))
            throw Error("policy returned an id outside the vocabulary");
        if (const auto* vocab = dynamic_cast<const VocabTokenizer*>(&tok_))
            if (!vocab->has_id(id)) throw Error("policy returned an unassigned id");
    }

    Policy& policy_;
    const LineDoc& doc_;
    const Tokenizer& tok_;
    const LiteralTable& table_;
    DecodeLimits limits_;
    DecodeOptions opts_;
    std::vector<TokenId> doc_ids_;
    FsmState state_{};
    long long ops_done_ = 0;
    DecodeResult result_;
};

}  // namespace detail

inline DecodeResult run_decode(Policy& policy, const LineDoc& doc, const Tokenizer& tok,
                               const LiteralTable& table, const DecodeLimits& limits = {},
                               const DecodeOptions& opts = {}) {
    return detail::Runner(policy, doc, tok, table, limits, opts).run();
}

// --- Shipped policies --------------------------------------------------------

/// Uniform choice over the allowed set; over the full vocabulary inside gen
/// bodies. Gen bodies therefore usually terminate via the length cutoff.
class RandomPolicy final : public Policy {
  public:
    RandomPolicy(std::uint64_t seed, const Tokenizer& tok)
        : rng_(seed), vocab_ids_(all_token_ids(tok)) {}

    TokenId choose(const FsmState&, const AllowedSet& allowed,
                   std::span<const TokenId>) override {
        if (allowed.unrestricted) return vocab_ids_[rng_.below(vocab_ids_.size())];
        return allowed.ids[rng_.below(allowed.ids.size())];
    }

  private:
    SplitMix64 rng_;
    std::vector<TokenId> vocab_ids_;
};

/// Plays back a fixed Program through the FSM. Construction fails with
/// ReplayError when the program cannot be reproduced: mixed granularities, a
/// range the digit masks cannot express, a gen body whose token encoding
/// collides with the end-of-gen id sequence before its end, or a body the
/// tokenizer cannot encode faithfully.
class ReplayPolicy final : public Policy {
  public:
    ReplayPolicy(const Program& p, const Tokenizer& tok, const LiteralTable& table)
        : granularity_(replay_granularity(p)) {
        if (p.ops.empty()) throw ReplayError("cannot replay an empty program");
        const std::vector<TokenId>& closer = table.end_gen.ids;
        for (const Op& op : p.ops) {
            if (const auto* c = std::get_if<CopyLines>(&op)) {
                append(table.lt.ids);
                append(table.copy_word.ids);
                append_number(c->start, table, 1);
                script_.push_back(table.hyphen_id);
                append_number(c->end, table, 1);
                append(table.quote.ids);
            } else if (const auto* t = std::get_if<CopyTokens>(&op)) {
                append(table.lt.ids);
                append(table.copy_word.ids);
                append_number(t->start, table, 0);
                script_.push_back(table.hyphen_id);
                append_number(t->end, table, 0);
                append(table.quote.ids);
            } else {
                append(table.lt.ids);
                append(table.gen_word.ids);
                const std::string escaped = escape_gen_body(std::get<Gen>(op).body);
                std::vector<TokenId> body_ids = tok.encode(escaped);
                if (tok.decode(body_ids) != escaped)
                    throw ReplayError("gen body does not tokenize losslessly");
                body_ids.insert(body_ids.end(), closer.begin(), closer.end());
                // The detector must fire exactly at the end of the closer.
                for (std::size_t end = closer.size(); end < body_ids.size(); ++end) {
                    if (std::equal(closer.begin(), closer.end(),
                                   body_ids.begin() + (end - closer.size())))
                        throw ReplayError(
                            "gen body encoding collides with the end-of-gen sequence");
                }
                append(body_ids);
            }
        }
        append(table.lt_slash.ids);
    }

    CopyGranularity granularity() const { return granularity_; }

    TokenId choose(const FsmState&, const AllowedSet& allowed,
                   std::span<const TokenId>) override {
        if (pos_ >= script_.size()) throw ReplayError("replay script exhausted");
        const TokenId id = script_[pos_++];
        if (!allowed.contains(id))
            throw ReplayError("replay script diverged from the allowed set");
        return id;
    }

  private:
    static CopyGranularity replay_granularity(const Program& p) {
        bool lines = false, tokens = false;
        for (const Op& op : p.ops) {
            lines |= std::holds_alternative<CopyLines>(op);
            tokens |= std::holds_alternative<CopyTokens>(op);
        }
        if (lines && tokens) throw ReplayError("program mixes copy granularities");
        return tokens ? CopyGranularity::Tokens : CopyGranularity::Lines;
    }

    void append(std::span<const TokenId> ids) {
        script_.insert(script_.end(), ids.begin(), ids.end());
    }

    void append_number(long long value, const LiteralTable& table, long long min_value) {
        if (value < min_value || value > 9999999)
            throw ReplayError("copy index " + std::to_string(value) +
                              " is not expressible by the digit masks");
        const std::string digits = std::to_string(value);
        for (char c : digits)
            script_.push_back(table.digit_ids[static_cast<std::size_t>(c - '0')]);
    }

    std::vector<TokenId> script_;
    std::size_t pos_ = 0;
    CopyGranularity granularity_;
};

/// Convenience wrapper: replays `p` with limits wide enough to finish.
inline DecodeResult replay_program(const Program& p, const LineDoc& doc, const Tokenizer& tok,
                                   const LiteralTable& table, bool bounded_ranges = false) {
    ReplayPolicy policy(p, tok, table);
    DecodeLimits limits;
    limits.max_ops = static_cast<long long>(p.ops.size()) + 1;
    limits.max_free_per_gen = 16;
    for (const Op& op : p.ops) {
        if (const auto* g = std::get_if<Gen>(&op)) {
            const auto ids = tok.encode(escape_gen_body(g->body));
            limits.max_free_per_gen = std::max<long long>(
                limits.max_free_per_gen,
                static_cast<long long>(ids.size() + table.end_gen.ids.size()) + 1);
        }
    }
    DecodeOptions opts;
    opts.granularity = policy.granularity();
    opts.bounded_ranges = bounded_ranges;
    return run_decode(policy, doc, tok, table, limits, opts);
}

}  // namespace editprog
