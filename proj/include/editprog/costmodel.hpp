#pragma once

// Analytical wall-clock model for copy-splice decoding.
//
// A kernel curve holds measured (N, ar_ms, pp_ms) points; the per-span
// speedup s(N) = ar_ms / pp_ms is interpolated linearly in ln N between
// measured points and clamped to the endpoint values outside the measured
// range (the small-model curve grows too fast to extrapolate responsibly).
//
// Full regeneration of T tokens costs           L_ar  = tau * T.
// Splice decoding costs                          L_cad = tau * T_gen
//                                                      + tau * sum_k N_k / s(N_k)
//                                                      + K * (c_mask + c_sync + c_forced).
// Dropping the non-negative fixed-cost term upper-bounds the realized
// speedup by T / (T_gen + sum_k N_k / s(N_k)); the three closed-form bound
// variants evaluate that expression with s at a fixed minimum span, at the
// mean span, or over the exact span histogram.

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "editprog/align.hpp"
#include "editprog/errors.hpp"
#include "editprog/grammar.hpp"
#include "editprog/resolver.hpp"
#include "editprog/tokenizer.hpp"

namespace editprog {

struct KernelPoint {
    double n = 0;
    double ar_ms = 0;
    double pp_ms = 0;

    double s() const { return ar_ms / pp_ms; }
};

struct KernelCurve {
    std::string model;
    long long prefix_tokens = 0;
    std::vector<KernelPoint> points;  // n strictly increasing

    void validate() const {
        if (points.size() < 2)
            throw CostModelError("kernel curve needs at least 2 points for interpolation");
        double prev = 0;
        for (const auto& p : points) {
            if (p.n <= prev)
                throw CostModelError("kernel curve span lengths must be strictly increasing");
            if (p.ar_ms <= 0 || p.pp_ms <= 0)
                throw CostModelError("kernel curve timings must be positive");
            prev = p.n;
        }
    }
};

struct FixedCosts {
    double tau_ms = 0;       // single-token decode latency
    double c_mask_ms = 0;    // masked-argmax overhead per op
    double c_sync_ms = 0;    // CPU<->GPU synchronization per op
    double c_forced_ms = 0;  // forced-template prefill per op

    double per_op() const { return c_mask_ms + c_sync_ms + c_forced_ms; }

    void validate() const {
        if (tau_ms < 0 || c_mask_ms < 0 || c_sync_ms < 0 || c_forced_ms < 0)
            throw CostModelError("fixed costs must be non-negative");
    }
};

/// s(N): linear in ln N between bracketing measured points, exact at
/// measured N, clamped to endpoint values outside the measured range.
inline double interp_s(const KernelCurve& curve, double n) {
    curve.validate();
    if (n < 1) throw CostModelError("interp_s: span length must be >= 1");
    const auto& pts = curve.points;
    if (n <= pts.front().n) return pts.front().s();
    if (n >= pts.back().n) return pts.back().s();
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (n <= pts[i].n) {
            const double lo = pts[i - 1].n, hi = pts[i].n;
            const double frac = (std::log(n) - std::log(lo)) / (std::log(hi) - std::log(lo));
            return pts[i - 1].s() + frac * (pts[i].s() - pts[i - 1].s());
        }
    }
    return pts.back().s();
}

// --- Closed-form speedup bounds ----------------------------------------------

enum class BoundVariant { ConservativeM, AspirationalNbar, ExactHistogram };

struct SpeedupBound {
    BoundVariant variant;
    double value = 1.0;
    double m = 0;  // the minimum span used by ConservativeM
};

/// The three Amdahl-style bound variants over corpus aggregates. The exact
/// variant needs the span histogram; its sum deduplicates repeated span
/// lengths, which is an evaluation-order-free optimization only.
inline SpeedupBound speedup_bound(const CorpusAggregates& agg, const SpanHistogram* hist,
                                  const KernelCurve& curve, BoundVariant variant,
                                  long long m = 8) {
    const double t = static_cast<double>(agg.t_total);
    const double t_copy = static_cast<double>(agg.t_copy);
    const double t_gen = static_cast<double>(agg.t_gen);

    SpeedupBound out{variant, 1.0, static_cast<double>(m)};
    if (agg.t_total <= 0 || agg.t_copy <= 0) return out;  // no copy, no speedup

    double splice_cost = 0;
    switch (variant) {
        case BoundVariant::ConservativeM:
            splice_cost = t_copy / interp_s(curve, static_cast<double>(m));
            break;
        case BoundVariant::AspirationalNbar:
            splice_cost = t_copy / interp_s(curve, agg.mean_span);
            break;
        case BoundVariant::ExactHistogram: {
            if (!hist) throw CostModelError("exact bound requires the span histogram");
            if (hist->sum() != agg.t_copy)
                throw CostModelError("histogram sum " + std::to_string(hist->sum()) +
                                     " != t_copy " + std::to_string(agg.t_copy));
            std::unordered_map<long long, long long> counts;
            for (long long n : hist->lengths) counts[n] += 1;
            for (const auto& [n, c] : counts)
                splice_cost += static_cast<double>(c) * static_cast<double>(n) /
                               interp_s(curve, static_cast<double>(n));
            break;
        }
    }
    out.value = t / (t_gen + splice_cost);
    return out;
}

// --- Wall-clock model ---------------------------------------------------------

/// Full-regeneration latency: tau * T.
inline double l_ar(const FixedCosts& costs, long long total_tokens) {
    if (total_tokens < 0) throw CostModelError("l_ar: token count must be >= 0");
    return costs.tau_ms * static_cast<double>(total_tokens);
}

/// Splice-decoding latency: gen decode + per-span splices + per-op fixed
/// costs. `k_ops` counts every op (gen ops incur fixed costs too).
inline double l_cad(long long gen_tokens, const SpanHistogram& hist, long long k_ops,
                    const FixedCosts& costs, const KernelCurve& curve) {
    double splice = 0;
    for (long long n : hist.lengths)
        splice += static_cast<double>(n) / interp_s(curve, static_cast<double>(n));
    return costs.tau_ms * static_cast<double>(gen_tokens) + costs.tau_ms * splice +
           static_cast<double>(k_ops) * costs.per_op();
}

// --- Minimum-span policy -------------------------------------------------------

struct AutoMPoint {
    long long n;
    double s;
    double threshold;  // 1 + c / (n * tau)
    bool qualifies;
};

struct AutoMResult {
    long long m_strict = 0;  // smallest integer N with s(N) > max(floor, 1 + c/(N tau))
    long long m_safe = 0;    // smallest measured N with s(N) > 1.5
    double c_ms = 0;         // c_mask + c_sync
    double tau_ms = 0;
    std::vector<AutoMPoint> evaluations;  // per-integer-N audit trail
};

/// Minimum net-positive splice length from the measured curve and fixed
/// costs, using c = c_mask + c_sync. `floor_s` lifts the strict criterion
/// (default 1.0). The safe variant scans measured points only.
inline AutoMResult auto_m(const KernelCurve& curve, const FixedCosts& costs,
                          double floor_s = 1.0) {
    curve.validate();
    costs.validate();
    if (costs.tau_ms <= 0) throw CostModelError("auto_m needs tau > 0");
    AutoMResult out;
    out.c_ms = costs.c_mask_ms + costs.c_sync_ms;
    out.tau_ms = costs.tau_ms;

    auto evaluate = [&](long long n) {
        const double s = interp_s(curve, static_cast<double>(n));
        const double thr = 1.0 + out.c_ms / (static_cast<double>(n) * costs.tau_ms);
        const bool ok = s > std::max(floor_s, thr);
        out.evaluations.push_back({n, s, thr, ok});
        return ok;
    };
    const long long n_min = std::max(1LL, static_cast<long long>(curve.points.front().n));
    const long long n_max = static_cast<long long>(curve.points.back().n);
    // Audit trail: every integer up to the first qualifying N, then the
    // remaining measured points so the whole curve stays inspectable.
    long long n = n_min;
    for (; n <= n_max; ++n) {
        if (evaluate(n) && out.m_strict == 0) {
            out.m_strict = n;
            break;
        }
    }
    for (const auto& p : curve.points)
        if (static_cast<long long>(p.n) > n) evaluate(static_cast<long long>(p.n));
    for (const auto& p : curve.points) {
        if (p.s() > 1.5) {
            out.m_safe = static_cast<long long>(p.n);
            break;
        }
    }
    if (out.m_strict == 0)
        throw CostModelError("no span length in the measured range clears the cost floor");
    return out;
}

// --- Pointer-decoder comparison -------------------------------------------------

struct ForwardPassCompare {
    double pointer_fp = 0;  // 3 per copy op; 1 + |gen| per gen op
    double cad_fp = 0;      // 3 + N/s(N) per copy op; 2 + |gen| per gen op
    double ratio = 0;       // pointer / cad
};

/// Per-op forward-pass-equivalents of a span-level pointer decoder versus
/// splice decoding, under the measured curve. Copy spans are counted at
/// their resolved token length under `tok`.
inline ForwardPassCompare pointer_fp_compare(const Program& p, const KernelCurve& curve,
                                             const Tokenizer& tok, const LineDoc& doc) {
    ForwardPassCompare out;
    std::vector<TokenId> doc_ids;
    bool have_doc_ids = false;
    for (const Op& op : p.ops) {
        if (const auto* c = std::get_if<CopyLines>(&op)) {
            const long long n_lines = static_cast<long long>(doc.n_lines());
            const long long s = std::max(1LL, std::min(c->start, n_lines));
            const long long e = std::max(1LL, std::min(c->end, n_lines));
            long long n_tok = 0;
            if (n_lines > 0 && c->start <= c->end && s <= e)
                n_tok = static_cast<long long>(
                    tok.encode(doc.join_lines(static_cast<std::size_t>(s - 1),
                                              static_cast<std::size_t>(e - 1)))
                        .size());
            out.pointer_fp += 3;
            out.cad_fp += 3 + static_cast<double>(n_tok) /
                                  interp_s(curve, std::max(1.0, static_cast<double>(n_tok)));
        } else if (const auto* t = std::get_if<CopyTokens>(&op)) {
            if (!have_doc_ids) {
                doc_ids = tok.encode(doc.raw());
                have_doc_ids = true;
            }
            const long long n = static_cast<long long>(doc_ids.size());
            const long long s = std::max(0LL, std::min(t->start, n - 1));
            const long long e = std::max(0LL, std::min(t->end, n - 1));
            const long long n_tok = (n > 0 && t->start <= t->end && s <= e) ? e - s + 1 : 0;
            out.pointer_fp += 3;
            out.cad_fp += 3 + static_cast<double>(n_tok) /
                                  interp_s(curve, std::max(1.0, static_cast<double>(n_tok)));
        } else {
            const std::string_view body = strip_gen_body(std::get<Gen>(op).body);
            const auto g = static_cast<double>(tok.encode(body).size());
            out.pointer_fp += 1 + g;
            out.cad_fp += 2 + g;
        }
    }
    out.ratio = out.cad_fp > 0 ? out.pointer_fp / out.cad_fp : 0;
    return out;
}

// --- Combined speculation projection ---------------------------------------------

struct CombinedSpeedup {
    double cad_only = 1.0;
    double combined = 1.0;
};

/// Speedup vs full regeneration without and with speculative decoding inside
/// gen regions (speculation factor s_spec >= 1; copy regions are unaffected).
inline CombinedSpeedup combined_speedup(long long gen_tokens, const SpanHistogram& hist,
                                        long long k_copy, long long k_gen,
                                        const FixedCosts& costs, const KernelCurve& curve,
                                        double s_spec) {
    if (s_spec < 1) throw CostModelError("combined_speedup: s_spec must be >= 1");
    const long long total = gen_tokens + hist.sum();
    const double full = l_ar(costs, total);

    double splice = 0;
    for (long long n : hist.lengths)
        splice += static_cast<double>(n) / interp_s(curve, static_cast<double>(n));
    const double fixed = static_cast<double>(k_copy + k_gen) * costs.per_op();

    const double cad = costs.tau_ms * (static_cast<double>(gen_tokens) + splice) + fixed;
    const double comb =
        costs.tau_ms * (static_cast<double>(gen_tokens) / s_spec + splice) + fixed;

    CombinedSpeedup out;
    if (cad > 0) out.cad_only = full / cad;
    if (comb > 0) out.combined = full / comb;
    return out;
}

}  // namespace editprog
