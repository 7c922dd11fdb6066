// editprog: grammar-constrained copy/gen edit programs, their oracles, the
// decoder FSM simulator, edit-format baselines, and the splice cost model,
// behind one command-line surface.
//
// Every subcommand prints a human-readable table to stdout and emits a JSON
// report (to --out when given, appended to stdout otherwise). Reports echo
// the configuration that produced them, including content hashes of file
// inputs, and are byte-identical for identical inputs and seeds.
//
// Exit codes: 0 success; 1 per-case failures present; 2 harness error.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "editprog/align.hpp"
#include "editprog/costmodel.hpp"
#include "editprog/formats.hpp"
#include "editprog/fsm.hpp"
#include "editprog/grammar.hpp"
#include "editprog/json_io.hpp"
#include "editprog/literal_table.hpp"
#include "editprog/perturb.hpp"
#include "editprog/resolver.hpp"
#include "editprog/tokenizer.hpp"

namespace ep = editprog;
using ep::OrderedJson;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCaseFailures = 1;
constexpr int kExitHarnessError = 2;

std::unique_ptr<ep::Tokenizer> make_tokenizer(const std::string& spec) {
    if (spec == "byte") return std::make_unique<ep::ByteTokenizer>();
    if (spec.rfind("vocab:", 0) == 0)
        return std::make_unique<ep::VocabTokenizer>(
            ep::VocabTokenizer::from_file(spec.substr(6)));
    throw ep::SchemaError("unknown tokenizer spec '" + spec + "' (expected byte or vocab:<file>)");
}

struct ReportSink {
    std::string out_path;  // empty: print to stdout
    OrderedJson report;

    explicit ReportSink(const std::string& command) {
        report["command"] = command;
        report["config"] = OrderedJson::object();
    }
    OrderedJson& config() { return report["config"]; }

    void config_file(const std::string& key, const std::string& path) {
        config()[key] = path;
        config()[key + "_hash"] = ep::fixture_hash(path);
    }

    void flush() const {
        const std::string text = report.dump(1) + "\n";
        if (out_path.empty()) {
            std::cout << text;
        } else {
            ep::write_file(out_path, text);
            std::cout << "report written to " << out_path << "\n";
        }
    }
};

std::string mode_name(ep::ResolveMode m) {
    return m == ep::ResolveMode::Strict ? "strict" : "clipped";
}

ep::ResolveMode parse_mode(const std::string& s) {
    if (s == "strict") return ep::ResolveMode::Strict;
    if (s == "clipped") return ep::ResolveMode::Clipped;
    throw ep::SchemaError("unknown mode '" + s + "'");
}

OrderedJson program_to_json(const ep::Program& p) {
    OrderedJson ops = OrderedJson::array();
    for (const ep::Op& op : p.ops) {
        OrderedJson j;
        if (const auto* c = std::get_if<ep::CopyLines>(&op)) {
            j["op"] = "copy_lines";
            j["start"] = c->start;
            j["end"] = c->end;
        } else if (const auto* t = std::get_if<ep::CopyTokens>(&op)) {
            j["op"] = "copy_tokens";
            j["start"] = t->start;
            j["end"] = t->end;
        } else {
            j["op"] = "gen";
            j["body"] = std::get<ep::Gen>(op).body;
        }
        ops.push_back(std::move(j));
    }
    return ops;
}

// ---------------------------------------------------------------------------
// Subcommand implementations. Each returns the process exit code.
// ---------------------------------------------------------------------------

int cmd_parse(const std::string& in_path, const std::string& out_path) {
    ReportSink sink("parse");
    sink.out_path = out_path;
    sink.config_file("input", in_path);
    const std::string text = ep::read_file(in_path);
    try {
        const ep::Program p = ep::parse_program(text);
        sink.report["ok"] = true;
        sink.report["ops"] = p.ops.size();
        sink.report["canonical"] = ep::serialize_program(p);
        sink.report["program"] = program_to_json(p);
        std::printf("parsed %zu ops\n%s\n", p.ops.size(), ep::serialize_program(p).c_str());
        sink.flush();
        return kExitOk;
    } catch (const ep::ParseError& e) {
        sink.report["ok"] = false;
        sink.report["error"] = e.what();
        sink.report["offset"] = e.offset;
        std::printf("parse error: %s\n", e.what());
        sink.flush();
        return kExitCaseFailures;
    }
}

int cmd_resolve(const std::string& program_path, const std::string& doc_path,
                const std::string& mode_str, const std::string& tok_spec,
                const std::string& out_path) {
    ReportSink sink("resolve");
    sink.out_path = out_path;
    sink.config_file("program", program_path);
    sink.config_file("doc", doc_path);
    sink.config()["mode"] = mode_str;
    sink.config()["tokenizer"] = tok_spec;

    const ep::Program p = ep::parse_program(ep::read_file(program_path));
    const ep::LineDoc doc(ep::read_file(doc_path));
    const auto tok = make_tokenizer(tok_spec);
    try {
        const auto outcome = ep::resolve(p, doc, parse_mode(mode_str), *tok);
        sink.report["ok"] = true;
        sink.report["text"] = outcome.text;
        OrderedJson warnings = OrderedJson::array();
        for (const auto& w : outcome.warnings) {
            warnings.push_back({{"op_index", w.op_index},
                                {"from", {w.from_start, w.from_end}},
                                {"to", {w.to_start, w.to_end}}});
        }
        sink.report["warnings"] = warnings;
        std::fwrite(outcome.text.data(), 1, outcome.text.size(), stdout);
        std::printf("\n-- %zu clip warning(s)\n", outcome.warnings.size());
        sink.flush();
        return kExitOk;
    } catch (const ep::ResolveError& e) {
        sink.report["ok"] = false;
        sink.report["error"] = e.what();
        sink.report["op_index"] = e.op_index;
        std::printf("resolve error: %s\n", e.what());
        sink.flush();
        return kExitCaseFailures;
    }
}

int cmd_oracle(const std::string& corpus_path, const std::string& doc_path,
               const std::string& gold_path, const std::string& granularity,
               const std::string& tok_spec, const std::string& out_path) {
    ReportSink sink("oracle");
    sink.out_path = out_path;
    sink.config()["granularity"] = granularity;
    sink.config()["tokenizer"] = tok_spec;
    const auto tok = make_tokenizer(tok_spec);

    std::vector<ep::CorpusCase> cases;
    if (!corpus_path.empty()) {
        sink.config_file("corpus", corpus_path);
        cases = ep::load_corpus(corpus_path);
    } else {
        sink.config_file("doc", doc_path);
        sink.config_file("gold", gold_path);
        cases.push_back({"cli", ep::read_file(doc_path), ep::read_file(gold_path), {}});
    }

    OrderedJson rows = OrderedJson::array();
    int failures = 0;
    for (const auto& c : cases) {
        OrderedJson row;
        row["id"] = c.id;
        try {
            const ep::LineDoc doc(c.doc);
            const ep::Program p = granularity == "token"
                                      ? ep::derive_oracle_token(c.doc, c.gold, *tok)
                                      : ep::derive_oracle_line(doc, c.gold);
            const auto outcome = ep::resolve(p, doc, ep::ResolveMode::Strict, *tok);
            row["ops"] = p.ops.size();
            row["program"] = ep::serialize_program(p);
            row["byte_exact"] = ep::compare_em(outcome.text, c.gold).byte_exact;
            if (!row["byte_exact"].get<bool>()) ++failures;
        } catch (const ep::Error& e) {
            row["error"] = e.what();
            ++failures;
        }
        rows.push_back(std::move(row));
    }
    sink.report["cases"] = rows.size();
    sink.report["failures"] = failures;
    sink.report["results"] = rows;
    std::printf("%zu case(s), %d failure(s)\n", rows.size(), failures);
    if (cases.size() == 1 && failures == 0)
        std::printf("%s\n", rows[0]["program"].get<std::string>().c_str());
    sink.flush();
    return failures ? kExitCaseFailures : kExitOk;
}

int cmd_roundtrip(const std::string& corpus_path, const std::string& granularity,
                  const std::string& tok_spec, const std::string& out_path) {
    ReportSink sink("roundtrip");
    sink.out_path = out_path;
    sink.config_file("corpus", corpus_path);
    sink.config()["granularity"] = granularity;
    sink.config()["tokenizer"] = tok_spec;
    const auto tok = make_tokenizer(tok_spec);
    const auto cases = ep::load_corpus(corpus_path);

    long long byte_exact = 0, trimmed = 0, failed = 0;
    OrderedJson failures = OrderedJson::array();
    for (const auto& c : cases) {
        try {
            const ep::LineDoc doc(c.doc);
            const ep::Program p = granularity == "token"
                                      ? ep::derive_oracle_token(c.doc, c.gold, *tok)
                                      : ep::derive_oracle_line(doc, c.gold);
            // Through the serialized form: the same path a decoder output takes.
            const ep::Program reparsed = ep::parse_program(ep::serialize_program(p));
            const auto outcome = ep::resolve(reparsed, doc, ep::ResolveMode::Strict, *tok);
            const auto em = ep::compare_em(outcome.text, c.gold);
            byte_exact += em.byte_exact;
            trimmed += em.trimmed;
            if (!em.byte_exact) {
                ++failed;
                failures.push_back({{"id", c.id}, {"reason", "not byte-exact"}});
            }
        } catch (const ep::Error& e) {
            ++failed;
            failures.push_back({{"id", c.id}, {"reason", e.what()}});
        }
    }
    sink.report["cases"] = cases.size();
    sink.report["byte_exact"] = byte_exact;
    sink.report["trimmed"] = trimmed;
    sink.report["failures"] = failures;
    std::printf("round-trip: %lld/%zu byte-exact (%.1f%%), %lld/%zu trimmed\n", byte_exact,
                cases.size(), 100.0 * static_cast<double>(byte_exact) / static_cast<double>(cases.size()),
                trimmed, cases.size());
    sink.flush();
    return failed ? kExitCaseFailures : kExitOk;
}

int cmd_ceiling(const std::string& corpus_path, const std::string& level, long long min_span,
                const std::string& tok_spec, const std::string& label,
                const std::string& out_path) {
    ReportSink sink("ceiling");
    sink.out_path = out_path;
    sink.config_file("corpus", corpus_path);
    sink.config()["level"] = level;
    sink.config()["tokenizer"] = tok_spec;
    const auto tok = make_tokenizer(tok_spec);
    const auto cases = ep::load_corpus(corpus_path);

    if (level == "line") {
        auto stats = ep::line_cover_stats(cases, *tok);
        stats.agg.corpus = label.empty() ? corpus_path : label;
        sink.report["aggregates"] = ep::aggregates_to_json(stats.agg);
        OrderedJson hist = OrderedJson::array();
        for (long long v : stats.hist.lengths) hist.push_back(v);
        sink.report["span_histogram"] = hist;
        OrderedJson excluded = OrderedJson::array();
        for (const auto& [id, why] : stats.excluded)
            excluded.push_back({{"id", id}, {"reason", why}});
        sink.report["excluded"] = excluded;
        std::printf("%-14s n=%lld T=%lld T_copy=%lld T_gen=%lld f_line=%.3f K=%lld "
                    "mean=%.1f p50=%.0f p95=%.0f\n",
                    stats.agg.corpus.c_str(), stats.agg.n, stats.agg.t_total, stats.agg.t_copy,
                    stats.agg.t_gen, stats.agg.f_line(), stats.agg.k_copy, stats.agg.mean_span,
                    stats.agg.p50_span, stats.agg.p95_span);
        sink.flush();
        return stats.excluded.empty() ? kExitOk : kExitCaseFailures;
    }

    sink.config()["min_span"] = min_span;
    long long covered = 0, total = 0, spans = 0;
    OrderedJson rows = OrderedJson::array();
    for (const auto& c : cases) {
        const auto rep =
            ep::greedy_token_cover(tok->encode(c.doc), tok->encode(c.gold), min_span);
        covered += rep.covered;
        total += rep.total;
        spans += rep.spans;
        rows.push_back({{"id", c.id}, {"f", rep.f}, {"spans", rep.spans},
                        {"mean_span", rep.mean_span}});
    }
    const double f = total ? static_cast<double>(covered) / static_cast<double>(total) : 0.0;
    sink.report["m"] = min_span;
    sink.report["covered"] = covered;
    sink.report["total"] = total;
    sink.report["f"] = f;
    sink.report["spans"] = spans;
    sink.report["mean_span"] =
        spans ? static_cast<double>(covered) / static_cast<double>(spans) : 0.0;
    sink.report["cases"] = rows;
    std::printf("token cover @ m=%lld: f=%.3f spans=%lld mean=%.1f\n", min_span, f, spans,
                spans ? static_cast<double>(covered) / static_cast<double>(spans) : 0.0);
    sink.flush();
    return kExitOk;
}

int cmd_bounds(const std::string& aggregates_path, const std::string& corpus_path,
               const std::string& kernel_path, const std::string& variant, long long m,
               const std::string& tok_spec, const std::string& out_path) {
    ReportSink sink("bounds");
    sink.out_path = out_path;
    sink.config_file("kernel", kernel_path);
    sink.config()["variant"] = variant;
    const auto curve = ep::load_kernel_curve(kernel_path);

    struct Row {
        ep::CorpusAggregates agg;
        ep::SpanHistogram hist;
        bool has_hist = false;
    };
    std::vector<Row> rows;
    if (!aggregates_path.empty()) {
        sink.config_file("aggregates", aggregates_path);
        for (auto& agg : ep::load_aggregates(aggregates_path)) rows.push_back({agg, {}, false});
    } else {
        sink.config_file("corpus", corpus_path);
        sink.config()["tokenizer"] = tok_spec;
        const auto tok = make_tokenizer(tok_spec);
        auto stats = ep::line_cover_stats(ep::load_corpus(corpus_path), *tok);
        stats.agg.corpus = corpus_path;
        rows.push_back({stats.agg, stats.hist, true});
    }

    OrderedJson results = OrderedJson::array();
    for (const auto& row : rows) {
        OrderedJson j;
        j["corpus"] = row.agg.corpus;
        double value = 0;
        if (variant == "m8") {
            sink.config()["m"] = m;
            value = ep::speedup_bound(row.agg, nullptr, curve, ep::BoundVariant::ConservativeM, m)
                        .value;
        } else if (variant == "nbar") {
            value = ep::speedup_bound(row.agg, nullptr, curve, ep::BoundVariant::AspirationalNbar)
                        .value;
        } else if (variant == "exact") {
            if (!row.has_hist)
                throw ep::SchemaError(
                    "the exact variant needs span histograms; pass --corpus instead of "
                    "--aggregates");
            value = ep::speedup_bound(row.agg, &row.hist, curve, ep::BoundVariant::ExactHistogram)
                        .value;
        } else {
            throw ep::SchemaError("unknown bound variant '" + variant + "'");
        }
        j["bound"] = value;
        std::printf("%-14s bound_%s = %.2fx\n", row.agg.corpus.c_str(), variant.c_str(), value);
        results.push_back(std::move(j));
    }
    sink.report["bounds"] = results;
    sink.flush();
    return kExitOk;
}

int cmd_auto_m(const std::string& kernel_path, const std::string& costs_path, double threshold,
               const std::string& out_path) {
    ReportSink sink("auto-m");
    sink.out_path = out_path;
    sink.config_file("kernel", kernel_path);
    sink.config_file("costs", costs_path);
    sink.config()["threshold"] = threshold;
    const auto curve = ep::load_kernel_curve(kernel_path);
    const auto costs = ep::load_fixed_costs(costs_path);
    const auto res = ep::auto_m(curve, costs, threshold);

    sink.report["m_strict"] = res.m_strict;
    sink.report["m_safe"] = res.m_safe;
    sink.report["c_ms"] = res.c_ms;
    sink.report["tau_ms"] = res.tau_ms;
    OrderedJson evals = OrderedJson::array();
    for (const auto& e : res.evaluations)
        evals.push_back({{"n", e.n}, {"s", e.s}, {"threshold", e.threshold},
                         {"qualifies", e.qualifies}});
    sink.report["evaluations"] = evals;
    std::printf("m* strict (s > max(%.2f, 1 + c/(N tau))) = %lld\n", threshold, res.m_strict);
    std::printf("m* safe   (first measured N with s > 1.5) = %lld\n", res.m_safe);
    std::printf("  N        s(N)   1+c/(N tau)\n");
    for (const auto& e : res.evaluations)
        std::printf("  %-6lld %7.3f   %.4f %s\n", e.n, e.s, e.threshold,
                    e.qualifies ? "ok" : "");
    sink.flush();
    return kExitOk;
}

int cmd_perturb(const std::string& corpus_path, const std::string& eps_csv, long long trials,
                std::uint64_t seed, const std::string& mode_str, const std::string& out_path) {
    ReportSink sink("perturb");
    sink.out_path = out_path;
    sink.config_file("corpus", corpus_path);
    sink.config()["eps"] = eps_csv;
    sink.config()["trials"] = trials;
    sink.config()["seed"] = seed;
    sink.config()["mode"] = mode_str;

    ep::PerturbConfig cfg;
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.mode = parse_mode(mode_str);
    cfg.epsilons.clear();
    std::stringstream ss{eps_csv};
    std::string item;
    while (std::getline(ss, item, ',')) cfg.epsilons.push_back(std::stoll(item));

    const auto report = ep::perturbation_study(ep::load_corpus(corpus_path), cfg);
    OrderedJson grid = OrderedJson::array();
    std::printf("eps   trials   EM rate\n");
    for (const auto& cell : report.grid) {
        grid.push_back({{"epsilon", cell.epsilon}, {"trials", cell.trials},
                        {"hits", cell.hits}, {"rate", cell.rate}});
        std::printf("%-5lld %-8lld %6.2f%%\n", cell.epsilon, cell.trials, 100.0 * cell.rate);
    }
    sink.report["cases"] = report.cases;
    sink.report["grid"] = grid;
    OrderedJson details = OrderedJson::array();
    for (const auto& d : report.details) {
        OrderedJson row;
        row["id"] = d.case_id;
        row["rates"] = d.rate_per_epsilon;
        details.push_back(std::move(row));
    }
    sink.report["details"] = details;
    OrderedJson excluded = OrderedJson::array();
    for (const auto& [id, why] : report.excluded)
        excluded.push_back({{"id", id}, {"reason", why}});
    sink.report["excluded"] = excluded;
    sink.flush();
    return report.excluded.empty() ? kExitOk : kExitCaseFailures;
}

int cmd_compare_formats(const std::string& corpus_path, const std::string& tok_spec,
                        long long context, const std::string& out_path) {
    ReportSink sink("compare-formats");
    sink.out_path = out_path;
    sink.config_file("corpus", corpus_path);
    sink.config()["tokenizer"] = tok_spec;
    sink.config()["context"] = context;
    const auto tok = make_tokenizer(tok_spec);
    const auto report = ep::format_head_to_head(ep::load_corpus(corpus_path), *tok, context);

    OrderedJson formats = OrderedJson::array();
    std::printf("%-18s %8s %8s %8s %9s %7s %6s\n", "format", "mean", "median", "p95", "total",
                "RT-EM", "fails");
    bool failures = false;
    for (const auto& f : report.formats) {
        OrderedJson j;
        j["format"] = f.format;
        j["cases"] = f.cases;
        j["mean_tokens"] = f.mean_tokens;
        j["median_tokens"] = f.median_tokens;
        j["p95_tokens"] = f.p95_tokens;
        j["total_tokens"] = f.total_tokens;
        j["rt_em"] = f.rt_em_rate();
        OrderedJson fails = OrderedJson::array();
        for (const auto& d : f.details)
            if (!d.rt_em)
                fails.push_back({{"id", d.case_id}, {"reason", d.failure},
                                 {"anchor_ambiguity", d.anchor_ambiguity}});
        failures |= !fails.empty();
        j["failures"] = fails;
        formats.push_back(std::move(j));
        std::printf("%-18s %8.1f %8.0f %8.0f %9lld %6.2f %6lld\n", f.format.c_str(),
                    f.mean_tokens, f.median_tokens, f.p95_tokens, f.total_tokens, f.rt_em_rate(),
                    f.cases - f.rt_em_pass);
    }
    sink.report["cases"] = report.cases;
    sink.report["formats"] = formats;
    sink.flush();
    return failures ? kExitCaseFailures : kExitOk;
}

int cmd_fsm_sim(const std::string& corpus_path, const std::string& policy_name,
                std::uint64_t seed, long long runs, const std::string& granularity,
                const std::string& tok_spec, long long max_ops, long long gen_limit,
                bool bounded, const std::string& out_path) {
    ReportSink sink("fsm-sim");
    sink.out_path = out_path;
    sink.config_file("corpus", corpus_path);
    sink.config()["policy"] = policy_name;
    sink.config()["seed"] = seed;
    sink.config()["runs"] = runs;
    sink.config()["granularity"] = granularity;
    sink.config()["tokenizer"] = tok_spec;
    sink.config()["max_ops"] = max_ops;
    sink.config()["gen_limit"] = gen_limit;
    sink.config()["bounded_ranges"] = bounded;

    const auto tok = make_tokenizer(tok_spec);
    const auto table = ep::build_literal_table(*tok);
    const auto cases = ep::load_corpus(corpus_path);

    long long total_runs = 0, parsed = 0, replay_identity = 0;
    ep::TraceAccounting totals;
    auto accumulate = [&](const ep::DecodeResult& res) {
        const auto acc = ep::trace_accounting(res.trace);
        totals.decoded += acc.decoded;
        totals.copied += acc.copied;
        totals.forced += acc.forced;
        totals.splices += acc.splices;
        totals.masked_steps += acc.masked_steps;
        totals.free_tokens += acc.free_tokens;
    };

    for (const auto& c : cases) {
        const ep::LineDoc doc(c.doc);
        if (policy_name == "replay") {
            const ep::Program oracle =
                granularity == "token" ? ep::derive_oracle_token(c.doc, c.gold, *tok)
                                       : ep::derive_oracle_line(doc, c.gold);
            const auto res = ep::replay_program(oracle, doc, *tok, table, bounded);
            ++total_runs;
            parsed += ep::parse_program(res.trace.program_text(*tok)) == res.program;
            replay_identity += res.program == oracle;
            accumulate(res);
        } else {
            ep::DecodeLimits limits;
            limits.max_ops = max_ops;
            limits.max_free_per_gen = gen_limit;
            ep::DecodeOptions opts;
            opts.bounded_ranges = bounded;
            opts.granularity = granularity == "token" ? ep::CopyGranularity::Tokens
                                                      : ep::CopyGranularity::Lines;
            for (long long r = 0; r < runs; ++r) {
                ep::RandomPolicy policy(ep::derive_stream(seed, c.id, static_cast<std::uint64_t>(r)),
                                        *tok);
                const auto res = ep::run_decode(policy, doc, *tok, table, limits, opts);
                ++total_runs;
                parsed += ep::parse_program(res.trace.program_text(*tok)) == res.program;
                accumulate(res);
            }
        }
    }

    sink.report["runs"] = total_runs;
    sink.report["parsed"] = parsed;
    if (policy_name == "replay") sink.report["replay_identity"] = replay_identity;
    sink.report["decoded"] = totals.decoded;
    sink.report["copied"] = totals.copied;
    sink.report["forced"] = totals.forced;
    sink.report["splices"] = totals.splices;
    std::printf("%lld/%lld runs parse (%.2f%%)", parsed, total_runs,
                total_runs ? 100.0 * static_cast<double>(parsed) / static_cast<double>(total_runs) : 0.0);
    if (policy_name == "replay") std::printf("; %lld replay identical", replay_identity);
    std::printf("\ndecoded=%lld copied=%lld forced=%lld splices=%lld\n", totals.decoded,
                totals.copied, totals.forced, totals.splices);
    sink.flush();
    return parsed == total_runs ? kExitOk : kExitCaseFailures;
}

int cmd_pointer_compare(const std::string& corpus_path, const std::string& kernel_path,
                        const std::string& tok_spec, const std::string& out_path) {
    ReportSink sink("pointer-compare");
    sink.out_path = out_path;
    sink.config_file("corpus", corpus_path);
    sink.config_file("kernel", kernel_path);
    sink.config()["tokenizer"] = tok_spec;
    const auto curve = ep::load_kernel_curve(kernel_path);
    const auto tok = make_tokenizer(tok_spec);

    double sum_pointer = 0, sum_cad = 0;
    long long n = 0;
    OrderedJson rows = OrderedJson::array();
    for (const auto& c : ep::load_corpus(corpus_path)) {
        const ep::LineDoc doc(c.doc);
        const ep::Program oracle = ep::derive_oracle_line(doc, c.gold);
        const auto r = ep::pointer_fp_compare(oracle, curve, *tok, doc);
        rows.push_back({{"id", c.id}, {"pointer_fp", r.pointer_fp}, {"cad_fp", r.cad_fp},
                        {"ratio", r.ratio}});
        sum_pointer += r.pointer_fp;
        sum_cad += r.cad_fp;
        ++n;
    }
    sink.report["cases"] = n;
    sink.report["mean_pointer_fp"] = n ? sum_pointer / static_cast<double>(n) : 0.0;
    sink.report["mean_cad_fp"] = n ? sum_cad / static_cast<double>(n) : 0.0;
    sink.report["ratio"] = sum_cad > 0 ? sum_pointer / sum_cad : 0.0;
    sink.report["details"] = rows;
    std::printf("pointer FP mean = %.2f, splice-decoder FP mean = %.2f, ratio = %.2f\n",
                n ? sum_pointer / static_cast<double>(n) : 0.0,
                n ? sum_cad / static_cast<double>(n) : 0.0,
                sum_cad > 0 ? sum_pointer / sum_cad : 0.0);
    sink.flush();
    return kExitOk;
}

int cmd_combined_spec(const std::string& corpus_path, const std::string& kernel_path,
                      const std::string& costs_path, double s_spec, const std::string& tok_spec,
                      const std::string& out_path) {
    ReportSink sink("combined-spec");
    sink.out_path = out_path;
    sink.config_file("corpus", corpus_path);
    sink.config_file("kernel", kernel_path);
    sink.config_file("costs", costs_path);
    sink.config()["s_spec"] = s_spec;
    sink.config()["tokenizer"] = tok_spec;
    const auto curve = ep::load_kernel_curve(kernel_path);
    const auto costs = ep::load_fixed_costs(costs_path);
    const auto tok = make_tokenizer(tok_spec);

    double sum_cad = 0, sum_comb = 0;
    long long n = 0;
    OrderedJson rows = OrderedJson::array();
    for (const auto& c : ep::load_corpus(corpus_path)) {
        const ep::LineDoc doc(c.doc);
        const ep::Program oracle = ep::derive_oracle_line(doc, c.gold);
        ep::SpanHistogram hist;
        long long t_gen = 0, k_gen = 0;
        for (const ep::Op& op : oracle.ops) {
            if (const auto* cl = std::get_if<ep::CopyLines>(&op)) {
                hist.lengths.push_back(static_cast<long long>(
                    tok->encode(doc.join_lines(static_cast<std::size_t>(cl->start - 1),
                                               static_cast<std::size_t>(cl->end - 1)))
                        .size()));
            } else {
                t_gen += static_cast<long long>(
                    tok->encode(ep::strip_gen_body(std::get<ep::Gen>(op).body)).size());
                ++k_gen;
            }
        }
        const auto r = ep::combined_speedup(t_gen, hist, static_cast<long long>(hist.count()),
                                            k_gen, costs, curve, s_spec);
        rows.push_back({{"id", c.id}, {"cad_only", r.cad_only}, {"combined", r.combined}});
        sum_cad += r.cad_only;
        sum_comb += r.combined;
        ++n;
    }
    const double mean_cad = n ? sum_cad / static_cast<double>(n) : 0.0;
    const double mean_comb = n ? sum_comb / static_cast<double>(n) : 0.0;
    sink.report["cases"] = n;
    sink.report["mean_cad_only"] = mean_cad;
    sink.report["mean_combined"] = mean_comb;
    sink.report["details"] = rows;
    std::printf("mean speedup: splice-only %.2fx, with s_spec=%.2f speculation %.2fx (+%.2f)\n",
                mean_cad, s_spec, mean_comb, mean_comb - mean_cad);
    sink.flush();
    return kExitOk;
}

int cmd_synth(std::uint64_t seed, int cases, int min_lines, int max_lines, int min_edits,
              int max_edits, const std::string& mix_str, double boilerplate,
              const std::string& out_path) {
    if (out_path.empty()) throw ep::SchemaError("synth requires --out <corpus.jsonl>");
    ep::SynthConfig cfg;
    cfg.seed = seed;
    cfg.cases = cases;
    cfg.min_lines = min_lines;
    cfg.max_lines = max_lines;
    cfg.min_edits = min_edits;
    cfg.max_edits = max_edits;
    cfg.boilerplate_prob = boilerplate;
    double w[4] = {1, 1, 1, 1};
    if (!mix_str.empty() &&
        std::sscanf(mix_str.c_str(), "%lf:%lf:%lf:%lf", &w[0], &w[1], &w[2], &w[3]) != 4)
        throw ep::SchemaError("bad --mix (expected replace:insert:delete:compound weights)");
    cfg.mix = {w[0], w[1], w[2], w[3]};

    const auto corpus = ep::synth_corpus(cfg);
    ep::save_corpus(out_path, corpus);
    std::printf("wrote %zu case(s) to %s\n", corpus.size(), out_path.c_str());
    return kExitOk;
}

int cmd_escape_audit(const std::string& corpus_path, const std::string& field,
                     const std::string& out_path) {
    ReportSink sink("escape-audit");
    sink.out_path = out_path;
    sink.config_file("corpus", corpus_path);
    sink.config()["field"] = field;

    long long total_hits = 0;
    OrderedJson rows = OrderedJson::array();
    for (const auto& c : ep::load_corpus(corpus_path)) {
        auto audit_one = [&](const std::string& which, const std::string& text) {
            const auto hits = ep::audit_reserved_literals(text);
            if (hits.empty()) return;
            OrderedJson row;
            row["id"] = c.id;
            row["field"] = which;
            OrderedJson list = OrderedJson::array();
            for (const auto& h : hits)
                list.push_back({{"literal", std::string(h.literal)}, {"offset", h.offset}});
            row["hits"] = list;
            rows.push_back(std::move(row));
            total_hits += static_cast<long long>(hits.size());
        };
        if (field == "gold" || field == "both") audit_one("gold", c.gold);
        if (field == "doc" || field == "both") audit_one("doc", c.doc);
    }
    sink.report["hits"] = total_hits;
    sink.report["occurrences"] = rows;
    std::printf("%lld reserved-literal occurrence(s) in %s field(s)\n", total_hits,
                field.c_str());
    sink.flush();
    return total_hits ? kExitCaseFailures : kExitOk;
}

int cmd_tokenizer_report(const std::vector<std::string>& tok_specs, const std::string& out_path) {
    ReportSink sink("tokenizer-report");
    sink.out_path = out_path;
    OrderedJson names = OrderedJson::array();
    std::vector<std::unique_ptr<ep::Tokenizer>> owners;
    std::vector<const ep::Tokenizer*> toks;
    for (const auto& spec : tok_specs) {
        owners.push_back(make_tokenizer(spec));
        toks.push_back(owners.back().get());
        names.push_back(owners.back()->identity());
    }
    sink.config()["tokenizers"] = names;

    const auto rows = ep::portability_report(toks);
    OrderedJson jrows = OrderedJson::array();
    std::printf("%-24s", "literal");
    for (const auto& o : owners) std::printf(" %-16s", o->identity().c_str());
    std::printf("\n");
    for (const auto& r : rows) {
        OrderedJson j;
        j["literal"] = r.literal;
        j["pieces"] = r.pieces;
        jrows.push_back(std::move(j));
        std::printf("%-24s", r.literal.c_str());
        for (std::size_t p : r.pieces) std::printf(" %-16zu", p);
        std::printf("\n");
    }
    sink.report["rows"] = jrows;
    sink.flush();
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"copy/gen edit-program toolkit"};
    app.require_subcommand(1);

    // Shared option storage; each subcommand binds the flags it uses.
    std::string out_path, tok_spec = "byte", corpus_path, kernel_path, costs_path;
    std::string in_path, program_path, doc_path, gold_path, aggregates_path;
    std::string mode_str = "strict", granularity = "line", variant = "m8", level = "line";
    std::string policy_name = "replay", field = "gold", mix_str, label;
    std::vector<std::string> tok_specs;
    std::uint64_t seed = 0;
    long long trials = 5, min_span = 8, m_param = 8, context = 0, runs = 1;
    long long max_ops = 64, gen_limit = 1024;
    int cases = 10, min_lines = 8, max_lines = 24, min_edits = 1, max_edits = 3;
    double threshold = 1.0, s_spec = 2.5, boilerplate = 0.0;
    bool bounded = false;
    std::string eps_csv = "0,1,2,3,5";

    auto add_out = [&](CLI::App* sub) { sub->add_option("--out", out_path, "JSON report path"); };
    auto add_tok = [&](CLI::App* sub) {
        sub->add_option("--tokenizer", tok_spec, "byte or vocab:<file>");
    };

    auto* parse_cmd = app.add_subcommand("parse", "parse program text");
    parse_cmd->add_option("--in", in_path, "program text file")->required();
    add_out(parse_cmd);

    auto* resolve_cmd = app.add_subcommand("resolve", "expand a program against a document");
    resolve_cmd->add_option("--program", program_path)->required();
    resolve_cmd->add_option("--doc", doc_path)->required();
    resolve_cmd->add_option("--mode", mode_str, "strict|clipped");
    add_tok(resolve_cmd);
    add_out(resolve_cmd);

    auto* oracle_cmd = app.add_subcommand("oracle", "derive oracle programs");
    oracle_cmd->add_option("--corpus", corpus_path);
    oracle_cmd->add_option("--doc", doc_path);
    oracle_cmd->add_option("--gold", gold_path);
    oracle_cmd->add_option("--granularity", granularity, "line|token");
    add_tok(oracle_cmd);
    add_out(oracle_cmd);

    auto* roundtrip_cmd = app.add_subcommand("roundtrip", "oracle -> resolve -> compare");
    roundtrip_cmd->add_option("--corpus", corpus_path)->required();
    roundtrip_cmd->add_option("--granularity", granularity, "line|token");
    add_tok(roundtrip_cmd);
    add_out(roundtrip_cmd);

    auto* ceiling_cmd = app.add_subcommand("ceiling", "copy-ceiling statistics");
    ceiling_cmd->add_option("--corpus", corpus_path)->required();
    ceiling_cmd->add_option("--level", level, "line|token");
    ceiling_cmd->add_option("--min-span", min_span);
    ceiling_cmd->add_option("--label", label, "corpus label for the report");
    add_tok(ceiling_cmd);
    add_out(ceiling_cmd);

    auto* bounds_cmd = app.add_subcommand("bounds", "closed-form speedup bounds");
    bounds_cmd->add_option("--aggregates", aggregates_path);
    bounds_cmd->add_option("--corpus", corpus_path);
    bounds_cmd->add_option("--kernel", kernel_path)->required();
    bounds_cmd->add_option("--variant", variant, "m8|nbar|exact");
    bounds_cmd->add_option("--m", m_param);
    add_tok(bounds_cmd);
    add_out(bounds_cmd);

    auto* autom_cmd = app.add_subcommand("auto-m", "minimum-span policy from curve + costs");
    autom_cmd->add_option("--kernel", kernel_path)->required();
    autom_cmd->add_option("--costs", costs_path)->required();
    autom_cmd->add_option("--threshold", threshold);
    add_out(autom_cmd);

    auto* perturb_cmd = app.add_subcommand("perturb", "endpoint-noise study");
    perturb_cmd->add_option("--corpus", corpus_path)->required();
    perturb_cmd->add_option("--eps", eps_csv, "comma-separated magnitudes");
    perturb_cmd->add_option("--trials", trials);
    perturb_cmd->add_option("--seed", seed);
    perturb_cmd->add_option("--mode", mode_str, "clipped|strict");
    add_out(perturb_cmd);

    auto* formats_cmd = app.add_subcommand("compare-formats", "edit-format head-to-head");
    formats_cmd->add_option("--corpus", corpus_path)->required();
    formats_cmd->add_option("--context", context, "unified-diff context lines");
    add_tok(formats_cmd);
    add_out(formats_cmd);

    auto* fsm_cmd = app.add_subcommand("fsm-sim", "decoder FSM simulation");
    fsm_cmd->add_option("--corpus", corpus_path)->required();
    fsm_cmd->add_option("--policy", policy_name, "replay|random");
    fsm_cmd->add_option("--seed", seed);
    fsm_cmd->add_option("--runs", runs, "random runs per case");
    fsm_cmd->add_option("--granularity", granularity, "line|token");
    fsm_cmd->add_option("--max-ops", max_ops);
    fsm_cmd->add_option("--gen-limit", gen_limit);
    fsm_cmd->add_flag("--bounded-ranges", bounded, "restrict digit masks to the document");
    add_tok(fsm_cmd);
    add_out(fsm_cmd);

    auto* pointer_cmd = app.add_subcommand("pointer-compare", "pointer vs splice forward passes");
    pointer_cmd->add_option("--corpus", corpus_path)->required();
    pointer_cmd->add_option("--kernel", kernel_path)->required();
    add_tok(pointer_cmd);
    add_out(pointer_cmd);

    auto* combined_cmd = app.add_subcommand("combined-spec", "splice + speculation projection");
    combined_cmd->add_option("--corpus", corpus_path)->required();
    combined_cmd->add_option("--kernel", kernel_path)->required();
    combined_cmd->add_option("--costs", costs_path)->required();
    combined_cmd->add_option("--s-spec", s_spec);
    add_tok(combined_cmd);
    add_out(combined_cmd);

    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus");
    synth_cmd->add_option("--seed", seed);
    synth_cmd->add_option("--cases", cases);
    synth_cmd->add_option("--min-lines", min_lines);
    synth_cmd->add_option("--max-lines", max_lines);
    synth_cmd->add_option("--min-edits", min_edits);
    synth_cmd->add_option("--max-edits", max_edits);
    synth_cmd->add_option("--mix", mix_str, "replace:insert:delete:compound weights");
    synth_cmd->add_option("--boilerplate", boilerplate, "repeated-line probability");
    add_out(synth_cmd);

    auto* audit_cmd = app.add_subcommand("escape-audit", "reserved-literal audit");
    audit_cmd->add_option("--corpus", corpus_path)->required();
    audit_cmd->add_option("--field", field, "gold|doc|both");
    add_out(audit_cmd);

    auto* tokrep_cmd = app.add_subcommand("tokenizer-report", "structural-literal piece counts");
    tokrep_cmd->add_option("--tokenizer", tok_specs, "byte or vocab:<file> (repeatable)")
        ->required();
    add_out(tokrep_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (parse_cmd->parsed()) return cmd_parse(in_path, out_path);
        if (resolve_cmd->parsed())
            return cmd_resolve(program_path, doc_path, mode_str, tok_spec, out_path);
        if (oracle_cmd->parsed()) {
            if (corpus_path.empty() && (doc_path.empty() || gold_path.empty()))
                throw ep::SchemaError("oracle needs --corpus or both --doc and --gold");
            return cmd_oracle(corpus_path, doc_path, gold_path, granularity, tok_spec, out_path);
        }
        if (roundtrip_cmd->parsed())
            return cmd_roundtrip(corpus_path, granularity, tok_spec, out_path);
        if (ceiling_cmd->parsed())
            return cmd_ceiling(corpus_path, level, min_span, tok_spec, label, out_path);
        if (bounds_cmd->parsed())
            return cmd_bounds(aggregates_path, corpus_path, kernel_path, variant, m_param,
                              tok_spec, out_path);
        if (autom_cmd->parsed()) return cmd_auto_m(kernel_path, costs_path, threshold, out_path);
        if (perturb_cmd->parsed())
            return cmd_perturb(corpus_path, eps_csv, trials, seed, mode_str, out_path);
        if (formats_cmd->parsed())
            return cmd_compare_formats(corpus_path, tok_spec, context, out_path);
        if (fsm_cmd->parsed())
            return cmd_fsm_sim(corpus_path, policy_name, seed, runs, granularity, tok_spec,
                               max_ops, gen_limit, bounded, out_path);
        if (pointer_cmd->parsed())
            return cmd_pointer_compare(corpus_path, kernel_path, tok_spec, out_path);
        if (combined_cmd->parsed())
            return cmd_combined_spec(corpus_path, kernel_path, costs_path, s_spec, tok_spec,
                                     out_path);
        if (synth_cmd->parsed())
            return cmd_synth(seed, cases, min_lines, max_lines, min_edits, max_edits, mix_str,
                             boilerplate, out_path);
        if (audit_cmd->parsed()) return cmd_escape_audit(corpus_path, field, out_path);
        if (tokrep_cmd->parsed()) return cmd_tokenizer_report(tok_specs, out_path);
    } catch (const ep::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitHarnessError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitHarnessError;
    }
    return kExitHarnessError;
}
