#include "editprog/costmodel.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "editprog/json_io.hpp"
#include "helpers.hpp"

using namespace editprog;

namespace {

const std::string kData = EDITPROG_DATA_DIR;

KernelCurve curve_7b() { return load_kernel_curve(kData + "/kernel_qwen2p5_7b.json"); }
KernelCurve curve_1p5b() { return load_kernel_curve(kData + "/kernel_qwen2p5_1p5b.json"); }

// Test-side ln-linear interpolation, written independently of interp_s.
double naive_ln_interp(const KernelCurve& c, double n) {
    if (n <= c.points.front().n) return c.points.front().s();
    if (n >= c.points.back().n) return c.points.back().s();
    std::size_t i = 1;
    while (c.points[i].n < n) ++i;
    const auto& a = c.points[i - 1];
    const auto& b = c.points[i];
    const double t = (std::log(n) - std::log(a.n)) / (std::log(b.n) - std::log(a.n));
    return a.s() * (1 - t) + b.s() * t;
}

SpanHistogram random_hist(SplitMix64& rng, std::size_t max_spans = 30) {
    SpanHistogram h;
    for (std::size_t k = 1 + rng.below(max_spans); k > 0; --k)
        h.lengths.push_back(1 + static_cast<long long>(rng.below(600)));
    return h;
}

CorpusAggregates agg_for(const SpanHistogram& h, long long t_gen) {
    CorpusAggregates agg;
    agg.corpus = "synthetic";
    agg.n = 1;
    agg.t_copy = h.sum();
    agg.t_gen = t_gen;
    agg.t_total = agg.t_copy + agg.t_gen;
    agg.k_copy = static_cast<long long>(h.count());
    agg.mean_span = h.count() ? static_cast<double>(h.sum()) / h.count() : 0.0;
    return agg;
}

}  // namespace

TEST_CASE("kernel fixtures: measured anchors") {
    const auto c7 = curve_7b();
    CHECK(interp_s(c7, 8) == Catch::Approx(6.80).margin(0.01));
    CHECK(interp_s(c7, 512) == Catch::Approx(90.5).margin(0.05));
    const auto c15 = curve_1p5b();
    CHECK(interp_s(c15, 512) == Catch::Approx(303).margin(0.2));
    CHECK(interp_s(c15, 8) == Catch::Approx(7.0).margin(0.02));
}

TEST_CASE("interp_s: ln-linear blend and endpoint clamps") {
    const auto c7 = curve_7b();
    // Hand-computed: between s(256)=79.05 and s(512)=90.47 at ln-fraction
    // ln(307.9/256)/ln 2 = 0.2663.
    CHECK(interp_s(c7, 307.9) == Catch::Approx(82.09).margin(0.05));
    CHECK(interp_s(c7, 0.5 + 0.5) == Catch::Approx(c7.points.front().s()));
    CHECK(interp_s(c7, 1e9) == Catch::Approx(c7.points.back().s()));
    // Exact at measured points.
    for (const auto& p : c7.points)
        CHECK(interp_s(c7, p.n) == Catch::Approx(p.s()));
    // Monotone between measured points when the measured values are monotone.
    const auto c15 = curve_1p5b();
    double prev = 0;
    for (double n = 1; n <= 512; n *= 1.17) {
        const double s = interp_s(c15, n);
        CHECK(s >= prev - 1e-12);
        prev = s;
    }
}

TEST_CASE("kernel curve validation") {
    KernelCurve c;
    c.points = {{8, 191, 28.1}};
    CHECK_THROWS_AS(c.validate(), CostModelError);
    c.points = {{8, 191, 28.1}, {4, 109, 36.1}};
    CHECK_THROWS_AS(c.validate(), CostModelError);
    c.points = {{4, -1, 36.1}, {8, 191, 28.1}};
    CHECK_THROWS_AS(c.validate(), CostModelError);
}

TEST_CASE("speedup_bound: published aggregates reproduce the bound table") {
    const auto curve = curve_7b();
    const auto aggs = load_aggregates(kData + "/aggregates_line_level.json");
    REQUIRE(aggs.size() == 4);

    const double m8_expected[] = {6.01, 2.72, 3.05, 5.00};
    const double nbar_expected[] = {29.1, 3.30, 4.15, 13.6};
    for (std::size_t i = 0; i < 4; ++i) {
        const auto m8 = speedup_bound(aggs[i], nullptr, curve, BoundVariant::ConservativeM, 8);
        CHECK(m8.value == Catch::Approx(m8_expected[i]).margin(0.01));
        const auto nbar = speedup_bound(aggs[i], nullptr, curve, BoundVariant::AspirationalNbar);
        CHECK(nbar.value == Catch::Approx(nbar_expected[i]).margin(0.05));
    }
}

TEST_CASE("speedup_bound: degenerate cases") {
    const auto curve = curve_7b();
    CorpusAggregates none;
    none.t_total = 100;
    none.t_gen = 100;  // no copy tokens
    for (auto v : {BoundVariant::ConservativeM, BoundVariant::AspirationalNbar}) {
        CHECK(speedup_bound(none, nullptr, curve, v).value == 1.0);
    }
    SpanHistogram empty;
    CHECK(speedup_bound(none, &empty, curve, BoundVariant::ExactHistogram).value == 1.0);
}

TEST_CASE("speedup_bound: histogram mismatch is rejected") {
    const auto curve = curve_7b();
    SpanHistogram h;
    h.lengths = {10, 20};
    auto agg = agg_for(h, 5);
    agg.t_copy += 1;
    agg.t_total += 1;
    CHECK_THROWS_AS(speedup_bound(agg, &h, curve, BoundVariant::ExactHistogram), CostModelError);
}

TEST_CASE("speedup_bound: exact variant matches a brute-force sum to 1e-9 relative") {
    const auto curve = curve_7b();
    SplitMix64 rng(0xE4AC7);
    for (int i = 0; i < 300; ++i) {
        const auto h = random_hist(rng);
        const auto agg = agg_for(h, static_cast<long long>(rng.below(2000)));
        const auto bound = speedup_bound(agg, &h, curve, BoundVariant::ExactHistogram);
        double splice = 0;  // straight loop, no dedup, independent interp
        for (long long n : h.lengths)
            splice += static_cast<double>(n) / naive_ln_interp(curve, static_cast<double>(n));
        const double expect = static_cast<double>(agg.t_total) /
                              (static_cast<double>(agg.t_gen) + splice);
        CHECK(bound.value == Catch::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("speedup_bound: all variants coincide on a constant histogram") {
    const auto curve = curve_7b();
    SpanHistogram h;
    for (int i = 0; i < 12; ++i) h.lengths.push_back(16);
    const auto agg = agg_for(h, 100);
    const double a = speedup_bound(agg, &h, curve, BoundVariant::ExactHistogram).value;
    const double b = speedup_bound(agg, nullptr, curve, BoundVariant::AspirationalNbar).value;
    const double c = speedup_bound(agg, nullptr, curve, BoundVariant::ConservativeM, 16).value;
    CHECK(a == Catch::Approx(b).epsilon(1e-12));
    CHECK(a == Catch::Approx(c).epsilon(1e-12));
}

TEST_CASE("l_ar: latency anchors") {
    CHECK(l_ar(FixedCosts{24, 0, 0, 0}, 100) == Catch::Approx(2400));
    CHECK(l_ar(FixedCosts{24, 0, 0, 0}, 0) == 0);
    CHECK(l_ar(FixedCosts{19, 0, 0, 0}, 1) == Catch::Approx(19));
}

TEST_CASE("l_cad: all-gen program and per-op overhead scale") {
    const auto curve = curve_7b();
    const FixedCosts costs{24.0, 0.02, 0.23, 1.1};  // 1.35 ms per op
    SpanHistogram empty;
    CHECK(l_cad(500, empty, 20, costs, curve) ==
          Catch::Approx(24.0 * 500 + 20 * 1.35).epsilon(1e-12));
    // 20-op overhead stays under 30 ms.
    CHECK(20 * costs.per_op() == Catch::Approx(27.0));
}

TEST_CASE("cost-model inequality: realized speedup never exceeds the exact bound") {
    const auto curve = curve_7b();
    SplitMix64 rng(0x1E43);
    for (int i = 0; i < 1000; ++i) {
        const auto h = random_hist(rng);
        const long long t_gen = static_cast<long long>(rng.below(3000));
        const auto agg = agg_for(h, t_gen);
        const FixedCosts costs{1.0 + rng.unit() * 40, rng.unit() * 0.1, rng.unit() * 0.5,
                               rng.unit() * 30};
        const long long k_ops = static_cast<long long>(h.count() + rng.below(10));
        const double ar = l_ar(costs, agg.t_total);
        const double cad = l_cad(t_gen, h, k_ops, costs, curve);
        const double bound =
            speedup_bound(agg, &h, curve, BoundVariant::ExactHistogram).value;
        CHECK(ar / cad <= bound * (1 + 1e-12));
    }
}

TEST_CASE("auto_m: direct evaluation on a synthetic curve") {
    KernelCurve c;
    c.model = "synthetic";
    c.points = {{1, 10.0, 10.0}, {2, 18.0, 10.0}};  // s(1)=1.0, s(2)=1.8
    const FixedCosts costs{19.0, 0.017, 0.228, 0.0};
    const auto res = auto_m(c, costs);
    // At N=1: 1.0 is not > 1 + 0.245/19 = 1.0129; at N=2: 1.8 > 1.0064.
    CHECK(res.m_strict == 2);
    CHECK(res.evaluations[0].threshold == Catch::Approx(1.0129).margin(0.0001));
    CHECK(res.evaluations[1].threshold == Catch::Approx(1.0064).margin(0.0001));
}

TEST_CASE("auto_m: zero fixed cost degenerates to the s>1 crossing") {
    KernelCurve c;
    c.points = {{1, 9.0, 10.0}, {2, 14.0, 10.0}, {4, 30.0, 10.0}};
    const auto res = auto_m(c, FixedCosts{20.0, 0, 0, 0});
    CHECK(res.m_strict == 2);  // s(1)=0.9 fails, s(2)=1.4 > 1
}

TEST_CASE("auto_m: measured fixtures") {
    // The strict criterion applied to the published curves already holds at
    // N=1 (s(1)=1.10-1.16 clears 1 + c/tau of about 1.013); the safe variant
    // scans measured points for s > 1.5.
    const auto res7 = auto_m(curve_7b(), FixedCosts{24.0, 0.001, 0.336, 0.0});
    CHECK(res7.m_strict == 1);
    CHECK(res7.m_safe == 4);
    const auto res15 = auto_m(curve_1p5b(), FixedCosts{19.0, 0.017, 0.228, 0.0});
    CHECK(res15.m_strict == 1);
    CHECK(res15.m_safe == 2);
}

TEST_CASE("auto_m: no viable span") {
    KernelCurve c;
    c.points = {{1, 5.0, 10.0}, {2, 8.0, 10.0}};  // s < 1 everywhere
    CHECK_THROWS_AS(auto_m(c, FixedCosts{20.0, 0.1, 0.1, 0}), CostModelError);
}

TEST_CASE("pointer_fp_compare: single-copy and single-gen rows") {
    const auto curve = curve_7b();
    const ByteTokenizer tok;
    const LineDoc doc("abcdefg\n01234567");  // line 1 has 7 bytes
    {
        // One copy of N=8 tokens: line 2 is 8 bytes.
        const auto r = pointer_fp_compare(Program{{CopyLines{2, 2}}}, curve, tok, doc);
        CHECK(r.pointer_fp == Catch::Approx(3.0));
        CHECK(r.cad_fp == Catch::Approx(3.0 + 8.0 / interp_s(curve, 8)).epsilon(1e-12));
        CHECK(r.ratio == Catch::Approx(0.72).margin(0.005));
    }
    {
        const auto r = pointer_fp_compare(Program{{Gen{"\nabcde\n"}}}, curve, tok, doc);
        CHECK(r.pointer_fp == Catch::Approx(1 + 5));
        CHECK(r.cad_fp == Catch::Approx(2 + 5));
        CHECK(r.ratio < 1.0);
    }
}

TEST_CASE("pointer_fp_compare: ratio < 1 on random non-empty programs") {
    const auto curve = curve_7b();
    const ByteTokenizer tok;
    SplitMix64 rng(0xF0F0);
    for (int i = 0; i < 400; ++i) {
        const auto pair = testgen::random_doc_gold(rng);
        const LineDoc doc(pair.doc);
        if (doc.n_lines() == 0) continue;
        const Program p = derive_oracle_line(doc, pair.gold.empty() ? "x" : pair.gold);
        const auto r = pointer_fp_compare(p, curve, tok, doc);
        CHECK(r.ratio < 1.0);
        if (!(r.ratio < 1.0)) return;
    }
}

TEST_CASE("combined_speedup: degenerate and ordering properties") {
    const auto curve = curve_7b();
    const FixedCosts costs{24.0, 0.02, 0.23, 1.1};
    SplitMix64 rng(0xC0FFEE);
    for (int i = 0; i < 500; ++i) {
        const auto h = random_hist(rng, 10);
        const long long t_gen = static_cast<long long>(rng.below(2000));
        const long long k_gen = 1 + static_cast<long long>(rng.below(5));
        const auto base = combined_speedup(t_gen, h, static_cast<long long>(h.count()), k_gen,
                                           costs, curve, 1.0);
        CHECK(base.combined == Catch::Approx(base.cad_only).epsilon(1e-12));
        const double s_spec = 1.0 + rng.unit() * 3.0;
        const auto sped = combined_speedup(t_gen, h, static_cast<long long>(h.count()), k_gen,
                                           costs, curve, s_spec);
        CHECK(sped.combined >= sped.cad_only - 1e-12);
    }
    // Copy-only program: speculation changes nothing.
    SpanHistogram h;
    h.lengths = {64, 128};
    const auto r = combined_speedup(0, h, 2, 0, costs, curve, 2.5);
    CHECK(r.combined == Catch::Approx(r.cad_only).epsilon(1e-12));
    // Gen-heavy synthetic: the lift concentrates in gen regions.
    SpanHistogram small;
    small.lengths = {16};
    const auto lifted = combined_speedup(1000, small, 1, 3, costs, curve, 2.5);
    CHECK(lifted.combined > lifted.cad_only * 1.5);
    CHECK_THROWS_AS(combined_speedup(10, small, 1, 1, costs, curve, 0.5), CostModelError);
}
