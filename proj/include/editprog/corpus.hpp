#pragma once

// Corpus case type plus loading and synthetic-corpus generation.
//
// Corpora are JSONL: one case per line with fields `id`, `doc`, `gold` and an
// optional `instruction` that is carried through into reports but never
// interpreted. The synthetic generator builds each gold by applying known
// line edits to its doc, so a line-level oracle exists by construction, and
// is fully deterministic from its seed.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "editprog/errors.hpp"
#include "editprog/rng.hpp"

namespace editprog {

struct CorpusCase {
    std::string id;
    std::string doc;
    std::string gold;
    std::optional<std::string> instruction;
};

enum class EditType { Replace, Insert, Delete, Compound };

struct EditMix {
    double replace = 1.0;
    double insert = 1.0;
    double del = 1.0;
    double compound = 1.0;
};

struct SynthConfig {
    std::uint64_t seed = 0;
    int cases = 10;
    int min_lines = 8, max_lines = 24;
    int min_edits = 1, max_edits = 3;
    EditMix mix;
    double boilerplate_prob = 0.0;  // chance a case gets repeated stock lines
    bool trailing_newline = true;   // docs/golds end with a single '\n'
};

namespace detail {

inline const std::vector<std::string>& boilerplate_lines() {
    static const std::vector<std::string> lines = {
        "}", "    return result;", "# ----------------------------------------",
        "import os", "    pass",
    };
    return lines;
}

inline std::string synth_line(SplitMix64& rng, int case_idx, int serial) {
    static const char* words[] = {"config", "buffer", "index", "merge",  "cache",
                                  "stream", "handle", "queue", "report", "token"};
    std::string s = std::string(words[rng.below(10)]) + "_" + std::to_string(case_idx) +
                    "_" + std::to_string(serial) + " = " + std::string(words[rng.below(10)]) +
                    "(" + std::to_string(rng.below(1000)) + ")";
    return s;
}

inline EditType pick_edit_type(SplitMix64& rng, const EditMix& mix) {
    const double total = mix.replace + mix.insert + mix.del + mix.compound;
    double r = rng.unit() * total;
    if ((r -= mix.replace) < 0) return EditType::Replace;
    if ((r -= mix.insert) < 0) return EditType::Insert;
    if ((r -= mix.del) < 0) return EditType::Delete;
    return EditType::Compound;
}

}  // namespace detail

/// Deterministic synthetic corpus. Cases are independent streams of the root
/// seed, so changing the case count does not change earlier cases.
inline std::vector<CorpusCase> synth_corpus(const SynthConfig& cfg) {
    if (cfg.cases < 0 || cfg.min_lines < 1 || cfg.max_lines < cfg.min_lines ||
        cfg.min_edits < 0 || cfg.max_edits < cfg.min_edits)
        throw SchemaError("synth_corpus: invalid configuration");

    std::vector<CorpusCase> out;
    out.reserve(static_cast<std::size_t>(cfg.cases));
    int serial = 0;
    for (int c = 0; c < cfg.cases; ++c) {
        SplitMix64 rng(derive_stream(cfg.seed, "synth-case", static_cast<std::uint64_t>(c)));
        const int n = static_cast<int>(rng.between(cfg.min_lines, cfg.max_lines));
        std::vector<std::string> lines;
        lines.reserve(static_cast<std::size_t>(n));
        const bool boiler = rng.unit() < cfg.boilerplate_prob;
        for (int i = 0; i < n; ++i) {
            if (boiler && i > 0 && rng.unit() < 0.35) {
                const auto& stock = detail::boilerplate_lines();
                lines.push_back(stock[rng.below(stock.size())]);
            } else {
                lines.push_back(detail::synth_line(rng, c, serial++));
            }
        }

        // Pick disjoint edit regions right-to-left so indices stay valid.
        const int edits = static_cast<int>(rng.between(cfg.min_edits, cfg.max_edits));
        std::vector<std::string> gold_lines = lines;
        std::vector<int> starts;
        for (int e = 0; e < edits; ++e)
            starts.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(n))));
        std::sort(starts.rbegin(), starts.rend());
        starts.erase(std::unique(starts.begin(), starts.end()), starts.end());

        for (int s : starts) {
            const EditType type = detail::pick_edit_type(rng, cfg.mix);
            const int span = static_cast<int>(rng.between(1, 2));
            const int end = std::min<int>(s + span - 1, static_cast<int>(gold_lines.size()) - 1);
            switch (type) {
                case EditType::Replace: {
                    const int repl = static_cast<int>(rng.between(1, 3));
                    std::vector<std::string> news;
                    for (int i = 0; i < repl; ++i)
                        news.push_back(detail::synth_line(rng, c, serial++));
                    gold_lines.erase(gold_lines.begin() + s, gold_lines.begin() + end + 1);
                    gold_lines.insert(gold_lines.begin() + s, news.begin(), news.end());
                    break;
                }
                case EditType::Insert: {
                    const int ins = static_cast<int>(rng.between(1, 2));
                    std::vector<std::string> news;
                    for (int i = 0; i < ins; ++i)
                        news.push_back(detail::synth_line(rng, c, serial++));
                    gold_lines.insert(gold_lines.begin() + s, news.begin(), news.end());
                    break;
                }
                case EditType::Delete: {
                    if (static_cast<int>(gold_lines.size()) > end - s + 1)
                        gold_lines.erase(gold_lines.begin() + s, gold_lines.begin() + end + 1);
                    break;
                }
                case EditType::Compound: {  // replace plus a nearby insertion
                    gold_lines[static_cast<std::size_t>(s)] = detail::synth_line(rng, c, serial++);
                    const int at = std::min<int>(s + 2, static_cast<int>(gold_lines.size()));
                    gold_lines.insert(gold_lines.begin() + at, detail::synth_line(rng, c, serial++));
                    break;
                }
            }
        }

        auto join = [&](const std::vector<std::string>& ls) {
            std::string text;
            for (std::size_t i = 0; i < ls.size(); ++i) {
                if (i) text += '\n';
                text += ls[i];
            }
            if (cfg.trailing_newline && !text.empty()) text += '\n';
            return text;
        };

        CorpusCase cc;
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "synth-%04d", c);
        cc.id = idbuf;
        cc.doc = join(lines);
        cc.gold = join(gold_lines);
        out.push_back(std::move(cc));
    }
    return out;
}

}  // namespace editprog
