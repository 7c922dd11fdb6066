#pragma once

// JSON/JSONL input and output: kernel curves, fixed costs, corpus
// aggregates, corpora, and report envelopes. Reports echo the exact
// configuration (seeds, modes, fixture content hashes) that produced them
// and use insertion-ordered JSON so identical inputs yield byte-identical
// files.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "editprog/align.hpp"
#include "editprog/corpus.hpp"
#include "editprog/costmodel.hpp"
#include "editprog/errors.hpp"
#include "editprog/rng.hpp"

namespace editprog {

using OrderedJson = nlohmann::ordered_json;

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("cannot write file: " + path);
    out << content;
}

/// FNV-1a content hash, hex-encoded; echoed into reports as fixture identity.
inline std::string fixture_hash(const std::string& path) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(read_file(path))));
    return buf;
}

// --- Kernel curve ---------------------------------------------------------------

inline KernelCurve kernel_curve_from_json(const OrderedJson& j) {
    try {
        KernelCurve curve;
        curve.model = j.at("model").get<std::string>();
        curve.prefix_tokens = j.at("prefix_tokens").get<long long>();
        for (const auto& p : j.at("points")) {
            curve.points.push_back({p.at("n").get<double>(), p.at("ar_ms").get<double>(),
                                    p.at("pp_ms").get<double>()});
        }
        curve.validate();
        return curve;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("bad kernel curve JSON: ") + e.what());
    }
}

inline KernelCurve load_kernel_curve(const std::string& path) {
    return kernel_curve_from_json(OrderedJson::parse(read_file(path)));
}

// --- Fixed costs ------------------------------------------------------------------

inline FixedCosts fixed_costs_from_json(const OrderedJson& j) {
    try {
        FixedCosts costs{j.at("tau_ms").get<double>(), j.at("c_mask_ms").get<double>(),
                         j.at("c_sync_ms").get<double>(), j.at("c_forced_ms").get<double>()};
        costs.validate();
        return costs;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("bad fixed-costs JSON: ") + e.what());
    }
}

inline FixedCosts load_fixed_costs(const std::string& path) {
    return fixed_costs_from_json(OrderedJson::parse(read_file(path)));
}

// --- Corpus aggregates ---------------------------------------------------------------

inline CorpusAggregates aggregates_from_json(const OrderedJson& j) {
    try {
        CorpusAggregates agg;
        agg.corpus = j.at("corpus").get<std::string>();
        agg.n = j.at("n").get<long long>();
        agg.t_total = j.at("t_total").get<long long>();
        agg.t_copy = j.at("t_copy").get<long long>();
        agg.t_gen = j.at("t_gen").get<long long>();
        agg.k_copy = j.at("k_copy").get<long long>();
        agg.mean_span = j.at("mean_span_tokens").get<double>();
        agg.p50_span = j.at("p50_span_tokens").get<double>();
        agg.p95_span = j.at("p95_span_tokens").get<double>();
        if (agg.t_total != agg.t_copy + agg.t_gen)
            throw SchemaError("aggregates violate t_total = t_copy + t_gen: " + agg.corpus);
        return agg;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("bad aggregates JSON: ") + e.what());
    }
}

inline std::vector<CorpusAggregates> load_aggregates(const std::string& path) {
    const auto j = OrderedJson::parse(read_file(path));
    std::vector<CorpusAggregates> out;
    for (const auto& row : j.at("corpora")) out.push_back(aggregates_from_json(row));
    return out;
}

inline OrderedJson aggregates_to_json(const CorpusAggregates& agg) {
    OrderedJson j;
    j["corpus"] = agg.corpus;
    j["n"] = agg.n;
    j["t_total"] = agg.t_total;
    j["t_copy"] = agg.t_copy;
    j["t_gen"] = agg.t_gen;
    j["f_line"] = agg.f_line();
    j["k_copy"] = agg.k_copy;
    j["mean_span_tokens"] = agg.mean_span;
    j["p50_span_tokens"] = agg.p50_span;
    j["p95_span_tokens"] = agg.p95_span;
    return j;
}

// --- Corpora (JSONL) --------------------------------------------------------------------

inline std::vector<CorpusCase> load_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open corpus: " + path);
    std::vector<CorpusCase> cases;
    std::vector<std::string> seen_ids;
    std::string line;
    long long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        OrderedJson j;
        try {
            j = OrderedJson::parse(line);
            CorpusCase c;
            c.id = j.at("id").get<std::string>();
            c.doc = j.at("doc").get<std::string>();
            c.gold = j.at("gold").get<std::string>();
            if (j.contains("instruction"))
                c.instruction = j.at("instruction").get<std::string>();
            for (const auto& id : seen_ids)
                if (id == c.id)
                    throw SchemaError("duplicate case id '" + c.id + "' at line " +
                                      std::to_string(line_no));
            seen_ids.push_back(c.id);
            cases.push_back(std::move(c));
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError("bad corpus line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cases;
}

inline void save_corpus(const std::string& path, const std::vector<CorpusCase>& cases) {
    std::string out;
    for (const CorpusCase& c : cases) {
        OrderedJson j;
        j["id"] = c.id;
        j["doc"] = c.doc;
        j["gold"] = c.gold;
        if (c.instruction) j["instruction"] = *c.instruction;
        out += j.dump();
        out += '\n';
    }
    write_file(path, out);
}

}  // namespace editprog
