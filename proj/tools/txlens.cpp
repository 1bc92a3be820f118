// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

// txlens: pre-signing risk analysis for EVM transactions.
//   txlens analyze --mode historical --tx <hash> [--fixture <file|dir>]
//   txlens analyze --mode simulate --to <addr> --sig "<fn(types)>" --args <a,b,...>
//   txlens eval --cases <manifest.json> --runs 3

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include <txlens/abi.hpp>
#include <txlens/errors.hpp>
#include <txlens/pipeline.hpp>
#include <txlens/threat_db.hpp>

#ifndef TXLENS_VERSION
#define TXLENS_VERSION "0.0.0"
#endif

namespace {

using namespace txlens;
namespace fs = std::filesystem;

std::optional<std::string> env(const char* key) {
    const char* v = std::getenv(key);
    if (!v || !*v) return std::nullopt;
    return std::string{v};
}

struct CommonOptions {
    std::string db_dir;
    std::string weights;
    std::string models;
    std::string out_dir;
    std::optional<std::size_t> max_rounds;
    std::string primary;
    std::string tie_break;
    std::string slot_hints;
    std::size_t workers{0};
};

void add_common(CLI::App& cmd, CommonOptions& o) {
    cmd.add_option("--db", o.db_dir, "Threat-intelligence directory (TXLENS_DB_DIR)");
    cmd.add_option("--weights", o.weights, "Dimension weight config JSON (TXLENS_WEIGHTS)");
    cmd.add_option("--models", o.models, "Comma-separated model descriptors (MODEL_1..MODEL_N)");
    cmd.add_option("--out", o.out_dir, "Report output directory (TXLENS_OUT_DIR)");
    cmd.add_option("--max-rounds", o.max_rounds, "Self-reflection rounds before the weighted vote (default 3)");
    cmd.add_option("--primary", o.primary, "Primary (summarizing) model id (PRIMARY_MODEL)");
    cmd.add_option("--tie-break", o.tie_break, "HIGHER_SEVERITY or LOWEST_MODEL_INDEX (CONSENSUS_TIE_BREAK)")
        ->check(CLI::IsMember({"HIGHER_SEVERITY", "LOWEST_MODEL_INDEX"}));
    cmd.add_option("--slot-hints", o.slot_hints, "Storage-slot classification hints JSON (TXLENS_SLOT_HINTS)");
}

//! Environment first, flags on top
RunConfig build_config(const CommonOptions& o) {
    RunConfig cfg;
    cfg.tool_version = TXLENS_VERSION;

    cfg.backends = o.models.empty() ? backends_from_env() : backends_from_spec(o.models);
    cfg.consensus.n = cfg.backends.size();
    if (auto m = env("CONSENSUS_MAX_ROUNDS")) cfg.consensus.max_rounds = std::stoul(*m);
    if (o.max_rounds) cfg.consensus.max_rounds = *o.max_rounds;
    cfg.consensus.primary_model = !o.primary.empty() ? o.primary : env("PRIMARY_MODEL").value_or("");
    const auto tie = !o.tie_break.empty() ? o.tie_break : env("CONSENSUS_TIE_BREAK").value_or("HIGHER_SEVERITY");
    auto rule = parse_tie_break(tie);
    if (!rule) throw ConfigError("unknown tie-break rule '" + tie + "'");
    cfg.consensus.tie_break = *rule;

    const auto db_dir = !o.db_dir.empty() ? std::optional<std::string>{o.db_dir} : env("TXLENS_DB_DIR");
    if (db_dir) cfg.db_paths = db_files_in(*db_dir);
    const auto weights = !o.weights.empty() ? std::optional<std::string>{o.weights} : env("TXLENS_WEIGHTS");
    if (weights) cfg.weight_config = *weights;
    const auto hints = !o.slot_hints.empty() ? std::optional<std::string>{o.slot_hints} : env("TXLENS_SLOT_HINTS");
    if (hints) cfg.slot_hints = *hints;
    cfg.output_dir = !o.out_dir.empty() ? o.out_dir : env("TXLENS_OUT_DIR").value_or(".");

    if (auto b = env("PROMPT_SECTION_BUDGET")) cfg.section_budget = std::stoul(*b);
    if (auto t = env("MODEL_TIMEOUT_MS")) cfg.model_timeout = std::chrono::milliseconds{std::stol(*t)};
    cfg.explorer_url = env("EXPLORER_API_URL");
    cfg.explorer_key = env("EXPLORER_API_KEY");
    cfg.decompiler_command = env("DECOMPILER_CMD");
    if (auto w = env("TXLENS_WORKERS")) cfg.workers = std::stoul(*w);
    if (o.workers) cfg.workers = o.workers;
    if (auto epoch = env("SOURCE_DATE_EPOCH")) cfg.fixed_timestamp = std::chrono::sys_seconds{std::chrono::seconds{std::stoll(*epoch)}};

    if (auto url = env("SIMULATOR_URL")) {
        const auto kind = env("SIMULATOR_KIND").value_or("local");
        cfg.trace_source.kind = kind == "remote" ? TraceSource::Kind::kRemoteSimulator : TraceSource::Kind::kLocalSimulator;
        cfg.trace_source.locator = *url;
        cfg.trace_source.credentials = env("SIMULATOR_API_KEY");
    }
    return cfg;
}

int report_failure(const AnalysisOutcome& outcome) {
    std::cerr << "txlens: " << to_string(*outcome.failed_stage) << " stage failed: " << outcome.error << "\n";
    return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    load_dotenv(env("TXLENS_ENV_FILE").value_or(".env"));

    CLI::App app{"Pre-signing risk analysis for EVM transactions"};
    app.set_version_flag("--version", TXLENS_VERSION);
    app.require_subcommand(1);

    CommonOptions common;
    std::string mode = "historical";
    std::string tx;
    std::string fixture;
    std::string to;
    std::string from = "0x0000000000000000000000000000000000000000";
    std::string sig;
    std::string args;
    std::string value = "0";
    bool quiet = false;

    auto* analyze = app.add_subcommand("analyze", "Analyze one transaction");
    analyze->add_option("--mode", mode, "historical or simulate")->check(CLI::IsMember({"historical", "simulate"}));
    analyze->add_option("--tx", tx, "Transaction hash (historical mode)");
    analyze->add_option("--fixture", fixture, "Normalized trace file, or a directory of <hash>.json files");
    analyze->add_option("--to", to, "Contract address (simulate mode)");
    analyze->add_option("--from", from, "Sender address (simulate mode)");
    analyze->add_option("--sig", sig, "Function signature, e.g. \"approve(address,uint256)\"");
    analyze->add_option("--args", args, "Comma-separated arguments");
    analyze->add_option("--value", value, "Wei sent with the call (simulate mode)");
    analyze->add_flag("-q,--quiet", quiet, "Do not print the summary");
    add_common(*analyze, common);

    std::string cases;
    std::size_t runs = 3;
    std::string eval_out;
    auto* eval = app.add_subcommand("eval", "Precision/recall over a labelled case manifest");
    eval->add_option("--cases", cases, "Case manifest JSON")->required();
    eval->add_option("--runs", runs, "Repetitions")->check(CLI::PositiveNumber);
    eval->add_option("--workers", common.workers, "Cases analyzed in parallel (TXLENS_WORKERS)");
    eval->add_option("--json", eval_out, "Also write metrics JSON here");
    add_common(*eval, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_code_for(Stage::kConfig);
    }

    RunConfig cfg;
    try {
        cfg = build_config(common);
    } catch (const std::exception& e) {
        std::cerr << "txlens: config stage failed: " << e.what() << "\n";
        return exit_code_for(Stage::kConfig);
    }

    if (analyze->parsed()) {
        AnalysisTarget target;
        if (mode == "historical") {
            cfg.mode = RunMode::kHistorical;
            if (!fixture.empty()) {
                cfg.trace_source = {TraceSource::Kind::kFixtureFile, fixture, std::nullopt};
                target.tx_reference = !tx.empty() ? tx : fs::path{fixture}.stem().string();
            } else {
                if (tx.empty()) {
                    std::cerr << "txlens: config stage failed: --tx is required in historical mode\n";
                    return exit_code_for(Stage::kConfig);
                }
                if (cfg.trace_source.locator.empty()) {
                    std::cerr << "txlens: config stage failed: set SIMULATOR_URL or pass --fixture\n";
                    return exit_code_for(Stage::kConfig);
                }
                target.tx_reference = tx;
            }
        } else {
            cfg.mode = RunMode::kSimulate;
            try {
                if (to.empty() || sig.empty()) throw ConfigError("--to and --sig are required in simulate mode");
                if (cfg.trace_source.locator.empty()) throw ConfigError("simulate mode needs SIMULATOR_URL");
                CallSpec call;
                auto to_addr = Address::parse_exact(to);
                auto from_addr = Address::parse_exact(from);
                auto wei = parse_decimal_u256(value);
                if (!to_addr || !from_addr) throw ConfigError("--to and --from must be 20-byte hex addresses");
                if (!wei) throw ConfigError("--value must be a decimal wei amount");
                call.to = *to_addr;
                call.from = *from_addr;
                call.value = *wei;
                call.data = encode_call(sig, split_args(args));
                target.call = std::move(call);
                target.tx_reference = "simulate-" + to_addr->hex() + "-" + canonical_signature(sig);
            } catch (const std::exception& e) {
                std::cerr << "txlens: config stage failed: " << e.what() << "\n";
                return exit_code_for(Stage::kConfig);
            }
        }

        const auto outcome = run_analysis(cfg, target);
        for (const auto& w : outcome.warnings) std::cerr << "txlens: warning: " << w << "\n";
        if (outcome.failed_stage) return report_failure(outcome);
        if (!quiet) std::cout << outcome.summary_text;
        if (outcome.report_path) std::cerr << "txlens: report written to " << outcome.report_path->string() << "\n";
        return outcome.exit_code;
    }

    try {
        cfg.mode = RunMode::kBatchEval;
        const auto manifest = load_manifest(cases);
        const auto metrics = run_eval(manifest, runs, cfg);
        std::cout << render_eval(metrics);
        if (!eval_out.empty()) {
            std::ofstream out(eval_out, std::ios::binary);
            out << eval_to_json(metrics);
        }
    } catch (const std::exception& e) {
        std::cerr << "txlens: config stage failed: " << e.what() << "\n";
        return exit_code_for(Stage::kConfig);
    }
    return 0;
}
