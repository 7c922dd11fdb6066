#pragma once

// Endpoint-noise study: perturb oracle copy-range endpoints by bounded
// integer noise, resolve in clipped mode, and measure trimmed exact-match
// decay versus the noise magnitude.
//
// Reproducibility: each (case, epsilon, trial) triple owns an independent
// SplitMix64 stream derived as derive_stream(seed, case_id, epsilon, trial),
// so reports are byte-identical across platforms and parallel schedules. Per
// copy op the start offset is drawn before the end offset, in op order.

#include <algorithm>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "editprog/align.hpp"
#include "editprog/corpus.hpp"
#include "editprog/errors.hpp"
#include "editprog/grammar.hpp"
#include "editprog/resolver.hpp"
#include "editprog/rng.hpp"

namespace editprog {

struct PerturbConfig {
    std::vector<long long> epsilons{0, 1, 2, 3, 5};
    long long trials = 5;  // epsilon 0 is deterministic and runs a single trial
    std::uint64_t seed = 0;
    ResolveMode mode = ResolveMode::Clipped;

    void validate() const {
        if (trials < 1) throw SchemaError("perturbation trials must be >= 1");
        for (long long e : epsilons)
            if (e < 0) throw SchemaError("perturbation epsilon must be >= 0");
    }
};

/// Each CopyLines endpoint independently offset by an integer drawn
/// uniformly from [-epsilon, +epsilon], then clamped to [1, n_lines]
/// (degenerate documents clamp to line 1). Gen and token-indexed ops pass
/// through untouched. A post-clamp start > end is allowed; clipped
/// resolution turns it into an empty emission.
inline Program perturb_endpoints(const Program& p, long long epsilon, long long n_lines,
                                 SplitMix64& rng) {
    if (epsilon == 0) return p;
    const long long hi = std::max(1LL, n_lines);
    Program out = p;
    for (Op& op : out.ops) {
        if (auto* c = std::get_if<CopyLines>(&op)) {
            const long long ds = rng.between(-epsilon, epsilon);
            const long long de = rng.between(-epsilon, epsilon);
            c->start = std::clamp(c->start + ds, 1LL, hi);
            c->end = std::clamp(c->end + de, 1LL, hi);
        }
    }
    return out;
}

struct PerturbCell {
    long long epsilon = 0;
    long long trials = 0;   // cases x trials actually run
    long long hits = 0;     // trimmed exact matches
    double rate = 0.0;
};

struct PerturbCaseDetail {
    std::string case_id;
    std::vector<double> rate_per_epsilon;  // aligned with the epsilon list
};

struct PerturbReport {
    PerturbConfig config;
    long long cases = 0;
    std::vector<PerturbCell> grid;               // one cell per epsilon
    std::vector<PerturbCaseDetail> details;      // per-case rates
    std::vector<std::pair<std::string, std::string>> excluded;
};

inline PerturbReport perturbation_study(const std::vector<CorpusCase>& corpus,
                                        const PerturbConfig& cfg) {
    cfg.validate();
    PerturbReport report;
    report.config = cfg;
    report.grid.resize(cfg.epsilons.size());
    for (std::size_t e = 0; e < cfg.epsilons.size(); ++e)
        report.grid[e].epsilon = cfg.epsilons[e];

    for (const CorpusCase& c : corpus) {
        Program oracle;
        LineDoc doc(c.doc);
        try {
            oracle = derive_oracle_line(doc, c.gold);
        } catch (const Error& err) {
            report.excluded.emplace_back(c.id, err.what());
            continue;
        }
        report.cases += 1;
        PerturbCaseDetail detail{c.id, {}};
        for (std::size_t e = 0; e < cfg.epsilons.size(); ++e) {
            const long long eps = cfg.epsilons[e];
            const long long trials = eps == 0 ? 1 : cfg.trials;
            long long hits = 0;
            for (long long t = 0; t < trials; ++t) {
                SplitMix64 rng(derive_stream(cfg.seed, c.id,
                                             static_cast<std::uint64_t>(eps),
                                             static_cast<std::uint64_t>(t)));
                const Program noisy =
                    perturb_endpoints(oracle, eps, static_cast<long long>(doc.n_lines()), rng);
                const auto outcome = resolve(noisy, doc, cfg.mode);
                if (compare_em(outcome.text, c.gold).trimmed) ++hits;
            }
            report.grid[e].trials += trials;
            report.grid[e].hits += hits;
            detail.rate_per_epsilon.push_back(static_cast<double>(hits) /
                                              static_cast<double>(trials));
        }
        report.details.push_back(std::move(detail));
    }
    for (PerturbCell& cell : report.grid)
        cell.rate = cell.trials > 0
                        ? static_cast<double>(cell.hits) / static_cast<double>(cell.trials)
                        : 0.0;
    return report;
}

}  // namespace editprog
