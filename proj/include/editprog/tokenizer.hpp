#pragma once

// Tokenizer abstraction used by the decoder FSM, the ceilings, and the format
// harness. Two implementations ship:
//
//  * ByteTokenizer — ids 0..255 are raw bytes; lossless on every input.
//  * VocabTokenizer — greedy longest-match over a user-supplied vocabulary
//    with per-byte fallback into the reserved id block [0, 256). This is not
//    BPE; it exists to give controllable fragmentation behavior for the
//    structural-literal portability study.
//
// Vocabulary file format: UTF-8, one entry per line, either `token<TAB>id`
// or a bare `token` (ids auto-assigned in file order starting at 256). Lines
// are not trimmed, so entries with leading spaces (e.g. " lines") work.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "editprog/errors.hpp"

namespace editprog {

using TokenId = std::int32_t;

class Tokenizer {
  public:
    virtual ~Tokenizer() = default;

    virtual std::vector<TokenId> encode(std::string_view text) const = 0;
    virtual std::string decode(std::span<const TokenId> ids) const = 0;
    /// Text of a single token id.
    virtual std::string piece(TokenId id) const = 0;
    /// One past the largest valid token id.
    virtual std::size_t vocab_size() const = 0;
    /// Stable identity string, echoed into reports.
    virtual std::string identity() const = 0;

    std::string decode(const std::vector<TokenId>& ids) const {
        return decode(std::span<const TokenId>(ids));
    }
    /// True when decode(encode(text)) == text.
    bool round_trips(std::string_view text) const {
        return decode(encode(text)) == text;
    }
};

class ByteTokenizer final : public Tokenizer {
  public:
    std::vector<TokenId> encode(std::string_view text) const override {
        std::vector<TokenId> out;
        out.reserve(text.size());
        for (unsigned char c : text) out.push_back(static_cast<TokenId>(c));
        return out;
    }

    std::string decode(std::span<const TokenId> ids) const override {
        std::string out;
        out.reserve(ids.size());
        for (TokenId id : ids) {
            if (id < 0 || id > 255) throw TokenizerError("byte tokenizer: id out of range");
            out.push_back(static_cast<char>(static_cast<unsigned char>(id)));
        }
        return out;
    }

    std::string piece(TokenId id) const override { return decode(std::span<const TokenId>(&id, 1)); }
    std::size_t vocab_size() const override { return 256; }
    std::string identity() const override { return "byte"; }
};

class VocabTokenizer final : public Tokenizer {
  public:
    /// `entries` in file order; explicit ids must be >= 256 (the byte block is
    /// reserved) and unique.
    static VocabTokenizer from_entries(const std::vector<std::pair<std::string, TokenId>>& entries,
                                       std::string identity_label) {
        VocabTokenizer t;
        t.identity_ = std::move(identity_label);
        TokenId next_auto = 256;
        for (const auto& [text, given] : entries) {
            if (text.empty()) throw SchemaError("vocab entry must be non-empty");
            TokenId id = given;
            if (id < 0) {
                id = next_auto++;
            } else if (id < 256) {
                throw SchemaError("vocab entry id " + std::to_string(id) +
                                  " collides with the reserved byte block");
            } else {
                next_auto = std::max(next_auto, id + 1);
            }
            if (!t.by_text_.emplace(text, id).second)
                throw SchemaError("duplicate vocab entry: " + text);
            if (!t.by_id_.emplace(id, text).second)
                throw SchemaError("duplicate vocab id: " + std::to_string(id));
            t.max_len_ = std::max(t.max_len_, text.size());
            t.end_id_ = std::max(t.end_id_, id + 1);
        }
        return t;
    }

    static VocabTokenizer from_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw SchemaError("cannot open vocabulary file: " + path);
        std::vector<std::pair<std::string, TokenId>> entries;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            auto tab = line.find('\t');
            if (tab == std::string::npos) {
                entries.emplace_back(line, -1);
            } else {
                TokenId id = 0;
                try {
                    id = static_cast<TokenId>(std::stol(line.substr(tab + 1)));
                } catch (const std::exception&) {
                    throw SchemaError("bad id column in vocabulary line: " + line);
                }
                entries.emplace_back(line.substr(0, tab), id);
            }
        }
        return from_entries(entries, "vocab:" + path);
    }

    std::vector<TokenId> encode(std::string_view text) const override {
        std::vector<TokenId> out;
        std::size_t p = 0;
        while (p < text.size()) {
            std::size_t try_len = std::min(max_len_, text.size() - p);
            bool matched = false;
            for (std::size_t len = try_len; len >= 1; --len) {
                auto it = by_text_.find(std::string(text.substr(p, len)));
                if (it != by_text_.end()) {
                    out.push_back(it->second);
                    p += len;
                    matched = true;
                    break;
                }
            }
            if (!matched) {  // byte fallback keeps encode total and lossless
                out.push_back(static_cast<TokenId>(static_cast<unsigned char>(text[p])));
                ++p;
            }
        }
        return out;
    }

    std::string decode(std::span<const TokenId> ids) const override {
        std::string out;
        for (TokenId id : ids) out += piece(id);
        return out;
    }

    std::string piece(TokenId id) const override {
        if (id >= 0 && id < 256) return std::string(1, static_cast<char>(static_cast<unsigned char>(id)));
        auto it = by_id_.find(id);
        if (it == by_id_.end()) throw TokenizerError("unknown token id " + std::to_string(id));
        return it->second;
    }

    std::size_t vocab_size() const override { return static_cast<std::size_t>(end_id_); }
    std::string identity() const override { return identity_; }

    /// Ids in [256, vocab_size) may be unassigned when explicit ids leave
    /// gaps; the FSM's vocabulary sweep needs to know which ids exist.
    bool has_id(TokenId id) const {
        return (id >= 0 && id < 256) || by_id_.count(id) > 0;
    }

  private:
    std::unordered_map<std::string, TokenId> by_text_;
    std::map<TokenId, std::string> by_id_;
    std::size_t max_len_ = 0;
    TokenId end_id_ = 256;
    std::string identity_ = "vocab";
};

/// All token ids that exist for `tok` (the byte block plus assigned entries).
inline std::vector<TokenId> all_token_ids(const Tokenizer& tok) {
    std::vector<TokenId> ids;
    const auto* vocab = dynamic_cast<const VocabTokenizer*>(&tok);
    for (TokenId id = 0; id < static_cast<TokenId>(tok.vocab_size()); ++id) {
        if (vocab && !vocab->has_id(id)) continue;
        ids.push_back(id);
    }
    return ids;
}

}  // namespace editprog
