#pragma once

// Shared generators for property-style tests.

#include <string>
#include <vector>

#include "editprog/grammar.hpp"
#include "editprog/rng.hpp"

namespace testgen {

using editprog::SplitMix64;

// Random text over a printable-ish alphabet with newlines; avoids the
// U+27E8/U+27E9/U+2024 entity codepoints so escape stays inside its domain.
inline std::string random_text(SplitMix64& rng, std::size_t max_len, bool allow_newlines = true) {
    static const char alphabet[] =
        "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 <>/=\"-_.,;:()";
    const std::size_t len = rng.below(max_len + 1);
    std::string s;
    s.reserve(len);
    for (std::size_t i = 0; i < len; ++i) {
        if (allow_newlines && rng.below(8) == 0) {
            s += '\n';
        } else {
            s += alphabet[rng.below(sizeof(alphabet) - 1)];
        }
    }
    return s;
}

// Random text salted with reserved structural substrings at random spots.
inline std::string random_text_with_literals(SplitMix64& rng, std::size_t max_len) {
    std::string s = random_text(rng, max_len);
    const std::size_t inserts = rng.below(4);
    for (std::size_t i = 0; i < inserts; ++i) {
        const auto& lit = editprog::kReservedLiterals[rng.below(editprog::kReservedLiterals.size())];
        const std::size_t at = rng.below(s.size() + 1);
        s.insert(at, lit.plain);
    }
    return s;
}

inline editprog::Program random_program(SplitMix64& rng, bool allow_tokens = true) {
    editprog::Program p;
    const std::size_t n_ops = 1 + rng.below(6);
    const bool tokens = allow_tokens && rng.below(4) == 0;
    for (std::size_t i = 0; i < n_ops; ++i) {
        switch (rng.below(2)) {
            case 0: {
                const long long a = static_cast<long long>(rng.below(200)) + (tokens ? 0 : 1);
                const long long b = a + static_cast<long long>(rng.below(40));
                if (tokens)
                    p.ops.emplace_back(editprog::CopyTokens{a, b});
                else
                    p.ops.emplace_back(editprog::CopyLines{a, b});
                break;
            }
            default:
                p.ops.emplace_back(editprog::Gen{random_text_with_literals(rng, 60)});
                break;
        }
    }
    return p;
}

// A (doc, gold) pair where gold applies a few random line edits to doc.
struct DocGoldPair {
    std::string doc;
    std::string gold;
};

inline DocGoldPair random_doc_gold(SplitMix64& rng, int max_lines = 30) {
    const int n = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_lines)));
    std::vector<std::string> lines;
    for (int i = 0; i < n; ++i)
        lines.push_back("line " + std::to_string(i) + " " + random_text(rng, 16, false));
    std::vector<std::string> gold = lines;
    const int edits = static_cast<int>(rng.below(4));
    for (int e = 0; e < edits && !gold.empty(); ++e) {
        const std::size_t at = rng.below(gold.size());
        switch (rng.below(3)) {
            case 0: gold[at] = "edited " + random_text(rng, 12, false); break;
            case 1: gold.insert(gold.begin() + static_cast<long>(at), "inserted " + random_text(rng, 12, false)); break;
            default: gold.erase(gold.begin() + static_cast<long>(at)); break;
        }
    }
    auto join = [&](const std::vector<std::string>& ls) {
        std::string t;
        for (std::size_t i = 0; i < ls.size(); ++i) {
            if (i) t += '\n';
            t += ls[i];
        }
        return t;
    };
    DocGoldPair pair{join(lines), join(gold)};
    if (rng.below(2)) pair.doc += '\n';
    if (rng.below(2)) pair.gold += '\n';
    return pair;
}

}  // namespace testgen
