// Copyright (c) chamois-lite contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Command-line driver. `run` is the whole program minus process plumbing, so
// tests can drive it with string streams.
//
// Exit codes: 0 success, 1 rejection (checker said no, validation failed,
// out of fuel), 2 usage error (bad flags, unreadable or malformed input).

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "chamois/bench.hpp"
#include "chamois/cfg.hpp"
#include "chamois/facts.hpp"
#include "chamois/interval.hpp"
#include "chamois/json_io.hpp"
#include "chamois/parser.hpp"
#include "chamois/polycert.hpp"
#include "chamois/solver.hpp"
#include "chamois/symexec.hpp"

namespace chamois::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_rejected = 1;
inline constexpr int exit_usage = 2;

inline constexpr std::uint64_t default_seed = 1;
inline constexpr const char* seed_env = "CHAMOIS_LITE_SEED";

class InputError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot read " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) {
        throw InputError("cannot write " + path);
    }
}

inline json read_json(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
}

struct Globals {
    bool json_output = false;
    bool no_timestamp = false;
    std::optional<std::uint64_t> seed;

    [[nodiscard]] std::uint64_t effective_seed() const {
        if (seed) {
            return *seed;
        }
        if (const char* env = std::getenv(seed_env); env != nullptr && *env != '\0') {
            try {
                return std::stoull(env);
            } catch (const std::exception&) {
                throw InputError(std::string(seed_env) + " is not a number: " + env);
            }
        }
        return default_seed;
    }
};

struct Report {
    json body = json::object();
    std::vector<std::string> lines; // text rendering
    int exit_code = exit_ok;
};

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return ss.str();
}

inline json share_stats_json(const ShareStats& s) {
    return json{{"nodes_allocated", s.nodes_allocated},
                {"nodes_visited", s.nodes_visited},
                {"shortcut_hits", s.shortcut_hits}};
}

inline json arena_stats_json(const ArenaStats& s, std::size_t nodes) {
    return json{{"nodes", nodes},
                {"hits", s.hits},
                {"misses", s.misses},
                {"memo_hits", s.memo_hits},
                {"memo_misses", s.memo_misses}};
}

inline Function load_function(const std::string& path) { return parse(read_file(path)); }

// --- analyze ----------------------------------------------------------------

struct AnalyzeArgs {
    std::string file;
    std::string domain = "interval";
    std::string entry_state;
    std::size_t fuel = 0;
    std::string emit;
};

// Invariant over the original labels: solved on the renumbered function,
// unreachable locations bottom.
template <typename State>
Invariant<State> map_back(const Renumbered& rn, const Invariant<State>& solved, const State& bottom) {
    Invariant<State> out;
    for (const auto& [old, now] : rn.new_of_old) {
        out = out.set(old, *solved.find(now));
    }
    for (Loc l : rn.dropped) {
        out = out.set(l, bottom);
    }
    return out;
}

inline Report cmd_analyze(const AnalyzeArgs& a) {
    const Function f = load_function(a.file);
    const Renumbered rn = renumber(f);
    SolverOptions opts;
    opts.fuel = a.fuel;
    Report r;
    r.body["command"] = "analyze";
    r.body["function"] = f.name;
    r.body["domain"] = a.domain;
    const std::size_t fuel = a.fuel ? a.fuel : default_fuel(rn.function);

    auto out_of_fuel = [&](std::size_t picks) {
        r.exit_code = exit_rejected;
        r.body["status"] = "out of fuel";
        r.body["stats"] = json{{"picks", picks}, {"fuel", fuel}};
        r.lines.push_back("analyze " + f.name + " (" + a.domain + "): out of fuel after " + std::to_string(picks) +
                          " picks");
        return r;
    };

    json invariant;
    std::vector<std::string> state_lines;
    if (a.domain == "interval") {
        AbsState entry = AbsState::top();
        if (!a.entry_state.empty()) {
            json j = read_json(a.entry_state);
            entry = abs_state_from_json(j.contains("entry_state") ? j.at("entry_state") : j);
        }
        ShareStats stats;
        IntervalDomain d;
        d.join_options.stats = &stats;
        auto res = kildall(rn.function, d, entry, widening_points(rn.function), opts);
        if (!res.ok()) {
            return out_of_fuel(res.picks);
        }
        const auto inv = map_back(rn, *res.invariant, AbsState::bottom());
        if (!check_inductive(f, inv, entry, IntervalDomain{}).ok()) {
            throw std::logic_error("solver produced a non-inductive invariant");
        }
        invariant = interval_invariant_to_json(f.name, entry, inv);
        for (const auto& [l, s] : inv.bindings()) {
            state_lines.push_back("  " + std::to_string(l) + ": " + s.to_string());
        }
        r.body["stats"] = json{{"picks", res.picks}, {"fuel", fuel}, {"join", share_stats_json(stats)}};
    } else if (a.domain == "facts") {
        FactAnalysis fa = fact_kildall(rn.function, opts);
        if (!fa.result.ok()) {
            return out_of_fuel(fa.result.picks);
        }
        const auto inv = map_back(rn, *fa.result.invariant, FactState::unreached());
        if (!fact_check(f, inv, fa.table.facts(), fa.arena).ok()) {
            throw std::logic_error("solver produced a non-inductive fact invariant");
        }
        invariant = fact_invariant_to_json(f.name, fa.table.facts(), inv, fa.arena);
        for (std::size_t i = 0; i < fa.table.size(); ++i) {
            state_lines.push_back("  fact " + std::to_string(i + 1) + ": " + fa.table.facts()[i].to_string());
        }
        for (const auto& [l, s] : inv.bindings()) {
            state_lines.push_back("  " + std::to_string(l) + ": " + to_string(fa.arena, s));
        }
        r.body["stats"] = json{{"picks", fa.result.picks},
                               {"fuel", fuel},
                               {"facts", fa.table.size()},
                               {"set_arena", arena_stats_json(fa.arena.stats(), fa.arena.node_count())}};
    } else {
        throw InputError("unknown domain '" + a.domain + "' (expected interval or facts)");
    }
    if (!a.emit.empty()) {
        write_file(a.emit, invariant.dump(2) + "\n");
    }
    r.body["status"] = "ok";
    r.body["invariant"] = invariant;
    r.lines.push_back("analyze " + f.name + " (" + a.domain + "): ok, " +
                      std::to_string(r.body["stats"]["picks"].get<std::size_t>()) + " picks");
    r.lines.insert(r.lines.end(), state_lines.begin(), state_lines.end());
    return r;
}

// --- check ------------------------------------------------------------------

template <typename State, typename Show>
void report_counterexample(Report& r, const CounterExample<State>& cx, Show&& show) {
    r.exit_code = exit_rejected;
    r.body["status"] = "rejected";
    auto opt = [&](const std::optional<State>& s) { return s ? show(*s) : std::string("none"); };
    r.body["counterexample"] = json{{"from", cx.from},
                                    {"to", cx.to},
                                    {"reason", cx.reason},
                                    {"propagated", opt(cx.propagated)},
                                    {"claimed", opt(cx.claimed)}};
    const std::string edge = cx.from == 0 ? "entry -> " + std::to_string(cx.to)
                                          : std::to_string(cx.from) + " -> " + std::to_string(cx.to);
    r.lines.push_back("rejected: " + cx.reason + " on edge " + edge);
    r.lines.push_back("  propagated: " + opt(cx.propagated));
    r.lines.push_back("  claimed:    " + opt(cx.claimed));
}

inline Report cmd_check(const std::string& file, const std::string& inv_file) {
    const Function f = load_function(file);
    const json j = read_json(inv_file);
    Report r;
    r.body["command"] = "check";
    r.body["function"] = f.name;
    const std::string kind(detail::expect_string(detail::member(j, "kind"), "kind"));
    const std::string named(detail::expect_string(detail::member(j, "function"), "function"));
    if (named != f.name) {
        throw InputError("invariant is for function " + named + ", not " + f.name);
    }
    r.body["kind"] = kind;
    if (kind == "interval") {
        const auto file_inv = interval_invariant_from_json(j);
        auto res = check_inductive(f, file_inv.states, file_inv.entry_state, IntervalDomain{});
        if (!res.ok()) {
            report_counterexample(r, *res.counterexample, [](const AbsState& s) { return s.to_string(); });
            return r;
        }
    } else if (kind == "facts") {
        const auto file_inv = fact_invariant_from_json(j);
        SetArena arena;
        auto res = fact_check(f, file_inv.build(arena), file_inv.by_index, arena);
        if (!res.ok()) {
            report_counterexample(r, *res.counterexample, [&](const FactState& s) { return to_string(arena, s); });
            return r;
        }
    } else {
        throw FormatError("unknown invariant kind '" + kind + "'");
    }
    r.body["status"] = "ok";
    r.lines.push_back("check " + f.name + " (" + kind + "): inductive");
    return r;
}

// --- validate ---------------------------------------------------------------

inline Report cmd_validate(const std::string& src_file, const std::string& tgt_file) {
    const BlockFile src = parse_block_file(read_file(src_file));
    const BlockFile tgt = parse_block_file(read_file(tgt_file));
    const ValidationReport v = validate_blocks(src.function, src.live, tgt.function, tgt.live);
    Report r;
    r.body["command"] = "validate";
    r.body["verdict"] = std::string(to_string(v.verdict.kind));
    if (!v.verdict.equivalent()) {
        r.exit_code = exit_rejected;
        r.body["detail"] = v.verdict.message;
    }
    r.body["stats"] = json{{"dag_nodes", v.nodes}, {"would_be_tree_size", v.would_be_tree_size.str()}};
    r.lines.push_back("validate " + src.function.name + " -> " + tgt.function.name + ": " +
                      std::string(to_string(v.verdict.kind)) +
                      (v.verdict.equivalent() ? "" : " (" + v.verdict.message + ")"));
    r.lines.push_back("  dag nodes: " + std::to_string(v.nodes) + ", tree size: " + v.would_be_tree_size.str());
    return r;
}

// --- cse --------------------------------------------------------------------

inline Report cmd_cse(const std::string& file, const std::string& emit) {
    const Function f = load_function(file);
    const Renumbered rn = renumber(f);
    FactAnalysis fa = fact_kildall(rn.function);
    Report r;
    r.body["command"] = "cse";
    r.body["function"] = f.name;
    if (!fa.result.ok()) {
        r.exit_code = exit_rejected;
        r.body["status"] = "out of fuel";
        r.lines.push_back("cse " + f.name + ": out of fuel");
        return r;
    }
    const auto inv = map_back(rn, *fa.result.invariant, FactState::unreached());
    // apply_cse re-checks the invariant and refuses a rejected one.
    const Function g = apply_cse(f, inv, fa.table.facts(), fa.arena);
    std::vector<Loc> rewritten;
    for (const auto& [l, i] : f.code.bindings()) {
        if (!(g.at(l) == i)) {
            rewritten.push_back(l);
        }
    }
    const std::string text = print(g);
    if (!emit.empty()) {
        write_file(emit, text);
    }
    r.body["status"] = "ok";
    r.body["rewritten"] = rewritten;
    r.body["program"] = text;
    r.lines.push_back("cse " + f.name + ": " + std::to_string(rewritten.size()) + " instruction(s) rewritten");
    if (emit.empty()) {
        std::istringstream ss(text);
        for (std::string line; std::getline(ss, line);) {
            r.lines.push_back(line);
        }
    }
    return r;
}

// --- poly -------------------------------------------------------------------

inline std::string cert_to_string(const FarkasCert& c) {
    std::string out = "[";
    bool first = true;
    for (const auto& [i, l] : c.lambdas) {
        out += (first ? "" : ", ") + std::to_string(i) + ": " + l.str();
        first = false;
    }
    return out + "]";
}

inline Report cmd_poly_check(const std::string& p_file, const std::string& c_file, const std::string& cert_file) {
    const Polyhedron p = polyhedron_from_json(read_json(p_file));
    const Constraint c = constraint_from_json(read_json(c_file));
    const FarkasCert cert = cert_from_json(read_json(cert_file));
    const bool ok = check_entailment(p, c, cert);
    Report r;
    r.body["command"] = "poly check";
    r.body["constraint"] = c.to_string();
    r.body["status"] = ok ? "entailed" : "rejected";
    r.exit_code = ok ? exit_ok : exit_rejected;
    r.lines.push_back("poly check " + c.to_string() + ": " + (ok ? "certificate accepted" : "certificate rejected"));
    return r;
}

inline Report cmd_poly_include(const std::string& p_file, const std::string& q_file, const std::string& certs_file) {
    const Polyhedron p = polyhedron_from_json(read_json(p_file));
    const Polyhedron q = polyhedron_from_json(read_json(q_file));
    const auto certs = certs_from_json(read_json(certs_file));
    const bool ok = check_inclusion(p, q, certs);
    Report r;
    r.body["command"] = "poly include";
    r.body["status"] = ok ? "included" : "rejected";
    r.exit_code = ok ? exit_ok : exit_rejected;
    std::string detail;
    if (!ok && certs.size() != q.constraints.size()) {
        detail = " (" + std::to_string(certs.size()) + " certificates for " + std::to_string(q.constraints.size()) +
                 " constraints)";
        r.body["detail"] = detail.substr(2, detail.size() - 3);
    }
    r.lines.push_back(std::string("poly include: ") + (ok ? "inclusion certified" : "rejected") + detail);
    return r;
}

inline Report cmd_poly_project(const std::string& p_file, const std::string& var, const std::string& emit) {
    const Polyhedron p = polyhedron_from_json(read_json(p_file));
    const Var v = var_from_name(var);
    const Projection proj = fm_project(p, v);
    // The projection is an oracle: its certificates are re-checked here.
    const bool ok = check_inclusion(p, proj.result, proj.certs);
    Report r;
    r.body["command"] = "poly project";
    r.body["eliminate"] = var;
    r.body["status"] = ok ? "ok" : "rejected";
    r.body["polyhedron"] = to_json(proj.result);
    r.body["certificates"] = to_json(proj.certs);
    r.exit_code = ok ? exit_ok : exit_rejected;
    if (!emit.empty()) {
        write_file(emit, json{{"polyhedron", to_json(proj.result)}, {"certificates", to_json(proj.certs)}}.dump(2) +
                             "\n");
    }
    r.lines.push_back("poly project eliminating " + var + ": " + std::to_string(proj.result.constraints.size()) +
                      " constraint(s), certificates " + (ok ? "checked" : "REJECTED"));
    for (std::size_t i = 0; i < proj.result.constraints.size(); ++i) {
        r.lines.push_back("  " + proj.result.constraints[i].to_string() + "    " + cert_to_string(proj.certs[i]));
    }
    return r;
}

// --- bench ------------------------------------------------------------------

inline std::string fixed(double x, int digits) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(digits) << x;
    return ss.str();
}

inline Report cmd_bench(const std::string& scenario, std::uint64_t seed) {
    Report r;
    r.body["command"] = "bench";
    r.body["scenario"] = scenario;
    if (scenario == "join-scaling") {
        r.body["seed"] = seed;
        const auto rows = join_scaling({1000, 2000, 4000, 8000}, 10, seed);
        json table = json::array();
        r.lines.push_back("join-scaling (touched keys per join: 10, seed " + std::to_string(seed) + ")");
        r.lines.push_back("  keys   joins  naive/join  sharing/join  naive total  sharing total");
        for (const auto& row : rows) {
            table.push_back(json{{"keys", row.keys},
                                 {"joins", row.merges},
                                 {"naive_visits", row.naive_visits},
                                 {"sharing_visits", row.sharing_visits},
                                 {"naive_per_join", row.naive_per_join()},
                                 {"sharing_per_join", row.sharing_per_join()}});
            std::ostringstream ss;
            ss << "  " << std::setw(5) << row.keys << std::setw(8) << row.merges << std::setw(12)
               << fixed(row.naive_per_join(), 1) << std::setw(14) << fixed(row.sharing_per_join(), 1)
               << std::setw(13) << row.naive_visits << std::setw(15) << row.sharing_visits;
            r.lines.push_back(ss.str());
        }
        r.body["rows"] = table;
    } else if (scenario == "dag-scaling") {
        const auto rows = dag_scaling({5, 10, 20, 30, 40, 60});
        json table = json::array();
        r.lines.push_back("dag-scaling (r{i+1} := add r{i} r{i})");
        r.lines.push_back("  length  dag nodes  tree size");
        for (const auto& row : rows) {
            table.push_back(json{{"length", row.length},
                                 {"dag_nodes", row.nodes},
                                 {"would_be_tree_size", row.tree_size.str()},
                                 {"validated", row.validated}});
            std::ostringstream ss;
            ss << "  " << std::setw(6) << row.length << std::setw(11) << row.nodes << "  " << row.tree_size.str();
            r.lines.push_back(ss.str());
        }
        r.body["rows"] = table;
    } else {
        throw InputError("unknown bench scenario '" + scenario + "' (expected join-scaling or dag-scaling)");
    }
    r.body["status"] = "ok";
    return r;
}

// --- driver -----------------------------------------------------------------

inline void emit(const Report& r, const Globals& g, std::ostream& out) {
    if (g.json_output) {
        json body = r.body;
        if (!g.no_timestamp) {
            body["timestamp"] = utc_timestamp();
        }
        out << body.dump(2) << '\n';
        return;
    }
    for (const auto& line : r.lines) {
        out << line << '\n';
    }
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Static analysis and translation validation for a small register IR.", "chamois"};
    app.fallthrough();
    app.require_subcommand(1);

    Globals g;
    std::uint64_t seed_value = 0;
    app.add_flag("--json", g.json_output, "Print a JSON report");
    app.add_flag("--no-timestamp", g.no_timestamp, "Omit the timestamp from JSON reports");
    auto* seed_opt = app.add_option("--seed", seed_value, "Seed for generated workloads (default: $" +
                                                              std::string(seed_env) + " or 1)");

    AnalyzeArgs an;
    auto* analyze = app.add_subcommand("analyze", "Compute an invariant");
    analyze->add_option("file", an.file, "Program")->required();
    analyze->add_option("--domain", an.domain, "interval or facts")->check(CLI::IsMember({"interval", "facts"}));
    analyze->add_option("--entry-state", an.entry_state, "JSON register intervals at entry");
    analyze->add_option("--fuel", an.fuel, "Maximum picks (default: 50 per location)")->check(CLI::PositiveNumber);
    analyze->add_option("--emit", an.emit, "Write the invariant file here");

    std::string check_file;
    std::string check_inv;
    auto* check = app.add_subcommand("check", "Check an invariant file");
    check->add_option("file", check_file, "Program")->required();
    check->add_option("invariant", check_inv, "Invariant JSON")->required();

    std::string src_file;
    std::string tgt_file;
    auto* validate_cmd = app.add_subcommand("validate", "Validate a block transformation");
    validate_cmd->add_option("source", src_file, "Source block file")->required();
    validate_cmd->add_option("target", tgt_file, "Target block file")->required();

    std::string cse_file;
    std::string cse_emit;
    auto* cse = app.add_subcommand("cse", "Common subexpression elimination");
    cse->add_option("file", cse_file, "Program")->required();
    cse->add_option("--emit", cse_emit, "Write the transformed program here");

    auto* poly = app.add_subcommand("poly", "Polyhedra certificates");
    poly->require_subcommand(1);
    std::string pa;
    std::string pb;
    std::string pc;
    auto* poly_check = poly->add_subcommand("check", "Check a Farkas certificate for one constraint");
    poly_check->add_option("polyhedron", pa)->required();
    poly_check->add_option("constraint", pb)->required();
    poly_check->add_option("certificate", pc)->required();
    auto* poly_include = poly->add_subcommand("include", "Check P included in Q given one certificate per Q row");
    poly_include->add_option("polyhedron", pa)->required();
    poly_include->add_option("included_in", pb)->required();
    poly_include->add_option("certificates", pc)->required();
    std::string eliminate;
    std::string poly_emit;
    auto* poly_project = poly->add_subcommand("project", "Fourier-Motzkin projection with certificates");
    poly_project->add_option("polyhedron", pa)->required();
    poly_project->add_option("--eliminate", eliminate, "Variable to eliminate, e.g. x2")->required();
    poly_project->add_option("--emit", poly_emit, "Write projection and certificates here");

    std::string scenario;
    auto* bench = app.add_subcommand("bench", "Counter-based scaling scenarios");
    bench->add_option("scenario", scenario, "join-scaling or dag-scaling")->required();

    std::vector<const char*> argv{"chamois"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
    if (*seed_opt) {
        g.seed = seed_value;
    }

    try {
        Report r;
        if (*analyze) {
            r = cmd_analyze(an);
        } else if (*check) {
            r = cmd_check(check_file, check_inv);
        } else if (*validate_cmd) {
            r = cmd_validate(src_file, tgt_file);
        } else if (*cse) {
            r = cmd_cse(cse_file, cse_emit);
        } else if (*poly_check) {
            r = cmd_poly_check(pa, pb, pc);
        } else if (*poly_include) {
            r = cmd_poly_include(pa, pb, pc);
        } else if (*poly_project) {
            r = cmd_poly_project(pa, eliminate, poly_emit);
        } else if (*bench) {
            r = cmd_bench(scenario, g.effective_seed());
        }
        emit(r, g, out);
        return r.exit_code;
    } catch (const ParseError& e) {
        err << "error: parse: " << e.what() << '\n';
    } catch (const FormatError& e) {
        err << "error: format: " << e.what() << '\n';
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
    }
    return exit_usage;
}

} // namespace chamois::cli
