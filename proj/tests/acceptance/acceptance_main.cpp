// Acceptance suite: end-to-end checks over the shipped fixtures, one
// pass/fail line each. Exit code is the number of failed checks.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "editprog/align.hpp"
#include "editprog/costmodel.hpp"
#include "editprog/formats.hpp"
#include "editprog/fsm.hpp"
#include "editprog/grammar.hpp"
#include "editprog/json_io.hpp"
#include "editprog/literal_table.hpp"
#include "editprog/perturb.hpp"
#include "editprog/resolver.hpp"
#include "editprog/rng.hpp"
#include "editprog/tokenizer.hpp"

using namespace editprog;

namespace {

const std::string kData = EDITPROG_DATA_DIR;
int g_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail = "") {
    std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", name.c_str(),
                detail.empty() ? "" : " — ", detail.c_str());
    if (!ok) ++g_failures;
}

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

// Test-side ln-linear interpolation for the independent exact-bound check.
double naive_ln_interp(const KernelCurve& c, double n) {
    if (n <= c.points.front().n) return c.points.front().s();
    if (n >= c.points.back().n) return c.points.back().s();
    std::size_t i = 1;
    while (c.points[i].n < n) ++i;
    const auto &a = c.points[i - 1], &b = c.points[i];
    const double t = (std::log(n) - std::log(a.n)) / (std::log(b.n) - std::log(a.n));
    return a.s() * (1 - t) + b.s() * t;
}

void check_bound_reproduction() {
    const auto curve = load_kernel_curve(kData + "/kernel_qwen2p5_7b.json");
    const auto aggs = load_aggregates(kData + "/aggregates_line_level.json");
    const double m8_expected[] = {6.01, 2.72, 3.05, 5.00};
    const double nbar_expected[] = {29.1, 3.30, 4.15, 13.6};
    bool ok = aggs.size() == 4;
    std::string detail;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; ok && i < 4; ++i) {
        const double m8 =
            speedup_bound(aggs[i], nullptr, curve, BoundVariant::ConservativeM, 8).value;
        const double nbar =
            speedup_bound(aggs[i], nullptr, curve, BoundVariant::AspirationalNbar).value;
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%s m8=%.3f nbar=%.3f; ", aggs[i].corpus.c_str(), m8,
                      nbar);
        detail += buf;
        ok = ok && std::abs(m8 - m8_expected[i]) <= 0.01 &&
             std::abs(nbar - nbar_expected[i]) <= 0.05;
    }
    ok = ok && ms_since(t0) < 1000.0;
    report("bound table reproduction (m8 / nbar, ln-N-linear interpolation)", ok, detail);

    // Exact-variant structure: matches an independent brute-force summation.
    SplitMix64 rng(0xACC1);
    bool exact_ok = true;
    for (int i = 0; i < 200 && exact_ok; ++i) {
        SpanHistogram h;
        for (std::size_t k = 1 + rng.below(40); k > 0; --k)
            h.lengths.push_back(1 + static_cast<long long>(rng.below(600)));
        CorpusAggregates agg;
        agg.t_copy = h.sum();
        agg.t_gen = static_cast<long long>(rng.below(3000));
        agg.t_total = agg.t_copy + agg.t_gen;
        const double got =
            speedup_bound(agg, &h, curve, BoundVariant::ExactHistogram).value;
        double splice = 0;
        for (long long n : h.lengths)
            splice += static_cast<double>(n) / naive_ln_interp(curve, static_cast<double>(n));
        const double expect =
            static_cast<double>(agg.t_total) / (static_cast<double>(agg.t_gen) + splice);
        exact_ok = std::abs(got - expect) <= 1e-9 * std::abs(expect);
    }
    report("exact-histogram bound matches brute-force summation to 1e-9 relative", exact_ok);
}

void check_kernel_fixture_sanity() {
    const auto c7 = load_kernel_curve(kData + "/kernel_qwen2p5_7b.json");
    const auto c15 = load_kernel_curve(kData + "/kernel_qwen2p5_1p5b.json");
    const double s8 = interp_s(c7, 8);
    const double s512 = interp_s(c15, 512);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "s7b(8)=%.3f, s1.5b(512)=%.1f", s8, s512);
    report("kernel fixture sanity: s(8) in [6.7,6.9] and s(512) in [300,306]",
           s8 >= 6.7 && s8 <= 6.9 && s512 >= 300 && s512 <= 306, buf);
}

void check_pipeline_losslessness() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto corpus = load_corpus(kData + "/mini_corpus.jsonl");
    long long mini_exact = 0;
    for (const auto& c : corpus) {
        const LineDoc doc(c.doc);
        const Program p = derive_oracle_line(doc, c.gold);
        const auto out = resolve(p, doc, ResolveMode::Strict);
        mini_exact += compare_em(out.text, c.gold).byte_exact;
    }
    long long fuzz_exact = 0;
    const int kFuzz = 1000;
    SplitMix64 rng(0x105518);
    for (int i = 0; i < kFuzz; ++i) {
        SplitMix64 local(rng.next());
        SynthConfig cfg;
        cfg.seed = local.next();
        cfg.cases = 1;
        cfg.min_lines = 1;
        cfg.max_lines = 40;
        cfg.min_edits = 0;
        cfg.max_edits = 4;
        cfg.boilerplate_prob = 0.2;
        for (const auto& c : synth_corpus(cfg)) {
            const LineDoc doc(c.doc);
            const Program p = derive_oracle_line(doc, c.gold);
            fuzz_exact += compare_em(resolve(p, doc, ResolveMode::Strict).text, c.gold).byte_exact;
        }
    }
    const double elapsed = ms_since(t0);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "mini %lld/%zu, fuzz %lld/%d, %.0f ms", mini_exact,
                  corpus.size(), fuzz_exact, kFuzz, elapsed);
    report("pipeline losslessness: oracle->resolve(strict) byte-exact on 100%",
           mini_exact == static_cast<long long>(corpus.size()) && fuzz_exact == kFuzz &&
               elapsed < 10000.0,
           buf);
}

void check_fsm_parse_rate() {
    const auto t0 = std::chrono::steady_clock::now();
    const ByteTokenizer tok;
    const LiteralTable table = build_literal_table(tok);

    long long random_parsed = 0;
    const int kRandom = 10000;
    const LineDoc sim_doc("alpha one\nbeta two\ngamma three\ndelta four\nepsilon five");
    DecodeLimits limits;
    limits.max_ops = 5;
    limits.max_free_per_gen = 24;
    for (int i = 0; i < kRandom; ++i) {
        RandomPolicy policy(derive_stream(0xF5A, "random-run", static_cast<std::uint64_t>(i)),
                            tok);
        const auto res = run_decode(policy, sim_doc, tok, table, limits);
        random_parsed += parse_program(res.trace.program_text(tok)) == res.program;
    }

    long long replays = 0, replay_ok = 0;
    SplitMix64 rng(0x5E1F);
    while (replays < 1000) {
        SynthConfig cfg;
        cfg.seed = rng.next();
        cfg.cases = 1;
        cfg.min_lines = 2;
        cfg.max_lines = 30;
        cfg.min_edits = 0;
        cfg.max_edits = 3;
        for (const auto& c : synth_corpus(cfg)) {
            const LineDoc doc(c.doc);
            const Program oracle = derive_oracle_line(doc, c.gold);
            const auto res = replay_program(oracle, doc, tok, table);
            ++replays;
            replay_ok += res.program == oracle &&
                         parse_program(res.trace.program_text(tok)) == res.program;
        }
    }
    const double elapsed = ms_since(t0);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "random %lld/%d, replay %lld/%lld, %.0f ms", random_parsed,
                  kRandom, replay_ok, replays, elapsed);
    report("decoder parse rate: 10k random + 1k replay decodes all parse",
           random_parsed == kRandom && replay_ok == replays && elapsed < 60000.0, buf);
}

void check_escape_codec() {
    SplitMix64 rng(0xE5C);
    bool ok = true;
    for (int i = 0; i < 10000 && ok; ++i) {
        std::string s;
        for (std::size_t k = rng.below(60); k > 0; --k)
            s += static_cast<char>(32 + rng.below(95));
        const std::size_t inserts = 1 + rng.below(3);
        for (std::size_t k = 0; k < inserts; ++k) {
            const auto& lit = kReservedLiterals[rng.below(kReservedLiterals.size())];
            s.insert(rng.below(s.size() + 1), lit.plain);
        }
        ok = unescape_gen_body(escape_gen_body(s)) == s;
    }
    report("escape codec: 10k adversarial strings round-trip exactly", ok);

    long long gold_hits = 0;
    for (const auto& c : load_corpus(kData + "/mini_corpus.jsonl"))
        gold_hits += static_cast<long long>(audit_reserved_literals(c.gold).size());
    report("escape audit: zero reserved literals across mini-corpus golds", gold_hits == 0,
           std::to_string(gold_hits) + " hit(s)");
}

void check_perturbation_shape() {
    SynthConfig cfg;
    cfg.seed = 1234;
    cfg.cases = 40;
    cfg.min_lines = 24;
    cfg.max_lines = 48;
    cfg.min_edits = 2;
    cfg.max_edits = 4;
    auto corpus = synth_corpus(cfg);
    std::erase_if(corpus, [](const CorpusCase& c) {
        const LineDoc doc(c.doc);
        return derive_oracle_line(doc, c.gold).ops.size() < 3;
    });

    PerturbConfig pc;
    pc.seed = 0;
    pc.trials = 5;
    pc.epsilons = {0, 1, 2, 3, 5};
    const auto rep = perturbation_study(corpus, pc);
    bool monotone = true;
    for (std::size_t i = 1; i < rep.grid.size(); ++i)
        monotone = monotone && rep.grid[i].rate <= rep.grid[i - 1].rate + 1e-12;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "cases=%lld EM: %.1f%% / %.1f%% / %.1f%% / %.1f%% / %.1f%%",
                  rep.cases, 100 * rep.grid[0].rate, 100 * rep.grid[1].rate,
                  100 * rep.grid[2].rate, 100 * rep.grid[3].rate, 100 * rep.grid[4].rate);
    report("perturbation shape: EM(0)=100%, EM(1)<60%, non-increasing over eps",
           corpus.size() >= 30 && rep.grid[0].rate == 1.0 && rep.grid[1].rate < 0.60 && monotone,
           buf);
}

void check_format_head_to_head() {
    const ByteTokenizer tok;
    {  // mini-corpus: line-number formats are exact
        const auto rep = format_head_to_head(load_corpus(kData + "/mini_corpus.jsonl"), tok);
        const bool ok = rep.formats[2].rt_em_rate() == 1.0 && rep.formats[3].rt_em_rate() == 1.0;
        report("formats: unified diff and program format RT-EM 1.0 on the mini-corpus", ok);
    }
    {  // boilerplate corpus: search/replace loses only to anchor ambiguity
        SynthConfig cfg;
        cfg.seed = 404;
        cfg.cases = 30;
        cfg.min_lines = 14;
        cfg.max_lines = 28;
        cfg.min_edits = 1;
        cfg.max_edits = 1;
        cfg.mix = {1.0, 0.0, 0.0, 0.0};
        cfg.boilerplate_prob = 0.95;
        const auto rep = format_head_to_head(synth_corpus(cfg), tok);
        const auto& sr = rep.formats[1];
        bool all_ambiguous = sr.rt_em_rate() < 1.0;
        for (const auto& d : sr.details)
            if (!d.rt_em) all_ambiguous = all_ambiguous && d.anchor_ambiguity;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "S/R RT-EM %.2f (%lld/%lld)", sr.rt_em_rate(),
                      sr.rt_em_pass, sr.cases);
        report("formats: search/replace fails only by anchor ambiguity on boilerplate corpus",
               all_ambiguous && rep.formats[2].rt_em_rate() == 1.0 &&
                   rep.formats[3].rt_em_rate() == 1.0,
               buf);
    }
    {  // copy-heavy corpus: program format beats full regeneration on tokens
        SynthConfig cfg;
        cfg.seed = 77;
        cfg.cases = 20;
        cfg.min_lines = 40;
        cfg.max_lines = 70;
        cfg.min_edits = 1;
        cfg.max_edits = 2;
        const auto rep = format_head_to_head(synth_corpus(cfg), tok);
        char buf[96];
        std::snprintf(buf, sizeof(buf), "program %lld vs full %lld tokens",
                      rep.formats[3].total_tokens, rep.formats[0].total_tokens);
        report("formats: program format total tokens < full regeneration on copy-heavy corpus",
               rep.formats[3].total_tokens < rep.formats[0].total_tokens, buf);
    }
}

void check_greedy_cover() {
    SplitMix64 rng(0x6C0V3R % 1000000007ULL);
    bool never_beats = true, monotone = true;
    for (int i = 0; i < 500 && never_beats; ++i) {
        std::vector<TokenId> d, g;
        for (std::size_t k = 1 + rng.below(10); k > 0; --k)
            d.push_back(static_cast<TokenId>(rng.below(4)));
        for (std::size_t k = 1 + rng.below(12); k > 0; --k)
            g.push_back(static_cast<TokenId>(rng.below(4)));
        // DP over gold positions gives the exact optimum on small instances.
        std::vector<std::vector<double>> best_by_m;
        double prev_f = 2.0;
        for (long long m : {1, 2, 3}) {
            const auto greedy = greedy_token_cover(d, g, m);
            std::vector<double> best(g.size() + 1, 0.0);
            for (std::size_t pos = g.size(); pos-- > 0;) {
                best[pos] = best[pos + 1];
                for (std::size_t dd = 0; dd < d.size(); ++dd) {
                    std::size_t len = 0;
                    while (pos + len < g.size() && dd + len < d.size() &&
                           g[pos + len] == d[dd + len])
                        ++len;
                    for (std::size_t take = static_cast<std::size_t>(m); take <= len; ++take)
                        best[pos] =
                            std::max(best[pos], static_cast<double>(take) + best[pos + take]);
                }
            }
            never_beats = never_beats && static_cast<double>(greedy.covered) <= best[0] + 1e-9;
            monotone = monotone && greedy.f <= prev_f + 1e-12;
            prev_f = greedy.f;
        }
    }
    report("greedy cover: f <= brute-force optimum on 500 small instances, monotone in m",
           never_beats && monotone);
}

void check_cost_model_inequalities() {
    const auto curve = load_kernel_curve(kData + "/kernel_qwen2p5_7b.json");
    SplitMix64 rng(0xC057);
    bool bound_ok = true;
    for (int i = 0; i < 1000 && bound_ok; ++i) {
        SpanHistogram h;
        for (std::size_t k = 1 + rng.below(30); k > 0; --k)
            h.lengths.push_back(1 + static_cast<long long>(rng.below(600)));
        CorpusAggregates agg;
        agg.t_copy = h.sum();
        agg.t_gen = static_cast<long long>(rng.below(3000));
        agg.t_total = agg.t_copy + agg.t_gen;
        const FixedCosts costs{1.0 + rng.unit() * 40, rng.unit() * 0.1, rng.unit() * 0.5,
                               rng.unit() * 30};
        const long long k_ops = static_cast<long long>(h.count() + rng.below(10));
        const double ratio = l_ar(costs, agg.t_total) / l_cad(agg.t_gen, h, k_ops, costs, curve);
        const double bound = speedup_bound(agg, &h, curve, BoundVariant::ExactHistogram).value;
        bound_ok = ratio <= bound * (1 + 1e-12);
    }
    report("cost model: l_ar/l_cad <= exact-histogram bound on 1000 random draws", bound_ok);

    const ByteTokenizer tok;
    bool pointer_ok = true;
    SplitMix64 prng(0x90B);
    for (int i = 0; i < 300 && pointer_ok; ++i) {
        SynthConfig cfg;
        cfg.seed = prng.next();
        cfg.cases = 1;
        cfg.min_lines = 2;
        cfg.max_lines = 25;
        for (const auto& c : synth_corpus(cfg)) {
            const LineDoc doc(c.doc);
            const Program p = derive_oracle_line(doc, c.gold);
            pointer_ok = pointer_ok && pointer_fp_compare(p, curve, tok, doc).ratio < 1.0;
        }
    }
    report("cost model: pointer/splice forward-pass ratio < 1 on every non-empty program",
           pointer_ok);

    bool combined_ok = true;
    SplitMix64 crng(0xC03B);
    const FixedCosts costs{24.0, 0.02, 0.23, 1.1};
    for (int i = 0; i < 500 && combined_ok; ++i) {
        SpanHistogram h;
        for (std::size_t k = 1 + crng.below(10); k > 0; --k)
            h.lengths.push_back(1 + static_cast<long long>(crng.below(300)));
        const long long t_gen = static_cast<long long>(crng.below(2000));
        const double s_spec = 1.0 + crng.unit() * 3.0;
        const auto r = combined_speedup(t_gen, h, static_cast<long long>(h.count()), 2, costs,
                                        curve, s_spec);
        combined_ok = r.combined >= r.cad_only - 1e-12;
    }
    report("cost model: combined speculation speedup >= splice-only for s_spec >= 1",
           combined_ok);
}

void check_literal_fragmentation() {
    const auto one = VocabTokenizer::from_file(kData + "/vocab_onepiece.txt");
    const auto frag = VocabTokenizer::from_file(kData + "/vocab_fragmented.txt");
    const auto rows = portability_report({&one, &frag});
    auto pieces = [&](const std::string& lit, std::size_t col) -> std::size_t {
        for (const auto& r : rows)
            if (r.literal == lit) return r.pieces[col];
        return 0;
    };
    const bool pattern = pieces("</", 0) == 1 && pieces("</", 1) == 2 &&
                         pieces("=\"", 0) == 1 && pieces("=\"", 1) == 2 &&
                         pieces("/>", 0) == 1 && pieces("/>", 1) == 2;
    const bool full_op = pieces("<copy lines=\"1-3\"/>", 0) == 8;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "full op pieces: %zu (single-piece config)",
                  pieces("<copy lines=\"1-3\"/>", 0));
    report("literal portability: 1-vs-2-piece fragmentation pattern and 8-piece full op",
           pattern && full_op, buf);
}

}  // namespace

int main() {
    try {
        check_bound_reproduction();
        check_kernel_fixture_sanity();
        check_pipeline_losslessness();
        check_fsm_parse_rate();
        check_escape_codec();
        check_perturbation_shape();
        check_format_head_to_head();
        check_greedy_cover();
        check_cost_model_inequalities();
        check_literal_fragmentation();
    } catch (const std::exception& e) {
        std::printf("[FAIL] suite aborted: %s\n", e.what());
        return 99;
    }
    std::printf("%s\n", g_failures == 0 ? "all acceptance checks passed"
                                        : "acceptance failures present");
    return g_failures;
}
