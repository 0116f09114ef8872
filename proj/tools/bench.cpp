// bench: run simulation experiments, regenerate the published tables, or
// dump simulated datasets.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "npnsearch/npnsearch.hpp"

namespace fs = std::filesystem;
using namespace npnsearch;

namespace {

struct ConditionFlags {
    int vars = 50;
    std::size_t edges = 50;
    std::size_t samples = 1000;
    int runs = 10;
    std::string dist = "G";
    std::string func = "L";
    std::uint64_t seed = 0;

    void add_to(CLI::App& app) {
        app.add_option("--vars", vars, "Number of variables")->check(CLI::PositiveNumber);
        app.add_option("--edges", edges, "Number of edges in each random DAG");
        app.add_option("--samples", samples, "Cases simulated per run")->check(CLI::PositiveNumber);
        app.add_option("--runs", runs, "Independent runs to average over")->check(CLI::PositiveNumber);
        app.add_option("--dist", dist, "Disturbance distribution")->check(CLI::IsMember({"G", "NG1", "NG2"}));
        app.add_option("--func", func, "Connection function")->check(CLI::IsMember({"L", "NL1", "NL2"}));
        app.add_option("--seed", seed, "Master seed");
    }

    ExperimentSpec spec() const {
        ExperimentSpec s;
        s.node_count = vars;
        s.edge_count = edges;
        s.case_count = samples;
        s.run_count = runs;
        s.disturbance = parse_disturbance(dist);
        s.connection = parse_connection(func);
        s.master_seed = seed;
        return s;
    }
};

struct ExecutionFlags {
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    double timeout = 0.0;

    void add_to(CLI::App& app) {
        app.add_option("--threads", threads, "Worker threads (results do not depend on this)")
            ->check(CLI::PositiveNumber);
        app.add_option("--timeout", timeout, "Per-cell time budget in seconds (0 = none)")
            ->check(CLI::NonNegativeNumber);
    }

    RunOptions options() const {
        RunOptions o;
        o.threads = threads;
        if (timeout > 0) o.cell_timeout = std::chrono::duration<double>(timeout);
        return o;
    }
};

/// Parses "1..18", "3-5", "1,5,8" and combinations.
std::vector<int> parse_table_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        std::size_t sep = item.find("..");
        std::size_t width = 2;
        if (sep == std::string::npos) {
            sep = item.find('-');
            width = 1;
        }
        int lo, hi;
        try {
            if (sep == std::string::npos) {
                lo = hi = std::stoi(item);
            } else {
                lo = std::stoi(item.substr(0, sep));
                hi = std::stoi(item.substr(sep + width));
            }
        } catch (const std::exception&) {
            throw CLI::ValidationError("--which", "cannot parse '" + item + "'");
        }
        if (lo < 1 || hi > 18 || lo > hi) throw CLI::ValidationError("--which", "tables are numbered 1..18");
        for (int t = lo; t <= hi; ++t) out.push_back(t);
    }
    if (out.empty()) throw CLI::ValidationError("--which", "no tables selected");
    return out;
}

bool report_failures(const ConditionResult& result, const std::string& context) {
    bool ok = true;
    for (const AlgorithmSummary& a : result.algorithms) {
        for (const std::string& e : a.errors) {
            std::cerr << context << ": " << a.name << " aborted, " << e << '\n';
            ok = false;
        }
    }
    return ok;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
}

int cmd_run(const ConditionFlags& cond, const ExecutionFlags& exec, const std::string& algos, double alpha,
            double penalty, const std::string& format, const std::string& out_path) {
    ExperimentSpec spec = cond.spec();
    spec.algorithms = parse_algorithms(algos, alpha, penalty);
    const ConditionResult result = run_condition(spec, exec.options());
    const bool ok = report_failures(result, spec.label());
    const std::string text = render_table(to_table(result), parse_table_format(format));
    if (out_path.empty() || out_path == "-") std::cout << text;
    else write_file(out_path, text);
    return ok ? 0 : 1;
}

int cmd_paper_tables(const std::string& which, std::uint64_t seed, std::optional<int> runs, const ExecutionFlags& exec,
                     const fs::path& dir) {
    fs::create_directories(dir);
    bool ok = true;
    for (int table : parse_table_list(which)) {
        ExperimentSpec spec = paper_table_spec(table, seed);
        if (runs) spec.run_count = *runs;
        const ConditionResult result = run_condition(spec, exec.options());
        ok = report_failures(result, "table " + std::to_string(table)) && ok;
        const ResultTable t = to_table(result);
        char stem[32];
        std::snprintf(stem, sizeof stem, "table_%02d", table);
        write_file(dir / (std::string(stem) + ".csv"), render_table(t, TableFormat::csv));
        write_file(dir / (std::string(stem) + ".md"), render_table(t, TableFormat::markdown));
        std::cerr << "table " << table << " (" << spec.label() << ") written\n";
    }
    return ok ? 0 : 1;
}

int cmd_gen_data(const ConditionFlags& cond, bool transform, const fs::path& dir) {
    fs::create_directories(dir);
    const ExperimentSpec spec = cond.spec();
    for (int r = 0; r < spec.run_count; ++r) {
        const SimulatedRun run = simulate_run(spec, r);
        char stem[32];
        std::snprintf(stem, sizeof stem, "run_%02d", r + 1);
        std::ostringstream data, graph, pattern;
        write_dataset(data, transform ? npn_transform(run.data) : run.data);
        write_graph(graph, run.model.dag);
        write_graph(pattern, run.truth);
        write_file(dir / (std::string(stem) + "_data.tsv"), data.str());
        write_file(dir / (std::string(stem) + "_graph.txt"), graph.str());
        write_file(dir / (std::string(stem) + "_pattern.txt"), pattern.str());
    }
    return 0;
}

/// Replaces "--config FILE" by the file's flat key=value entries, spliced in
/// as "--key=value" right after the subcommand so later flags override them.
std::vector<std::string> expand_config(std::vector<std::string> args, const std::vector<std::string>& subcommands) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string path;
        std::size_t width = 1;
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            width = 2;
        } else if (args[i].starts_with("--config=")) {
            path = args[i].substr(9);
        } else {
            continue;
        }
        args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + width));
        std::vector<std::string> injected;
        for (const CLI::ConfigItem& item : CLI::ConfigINI().from_file(path)) {
            if (item.name == "++" || item.name == "--") continue;
            if (!item.parents.empty())
                throw CLI::FileError("config sections are not supported: " + item.fullname());
            std::string value;
            for (const std::string& v : item.inputs) value += (value.empty() ? "" : ",") + v;
            injected.push_back("--" + item.name + "=" + value);
        }
        auto sub = std::find_first_of(args.begin(), args.end(), subcommands.begin(), subcommands.end());
        args.insert(sub == args.end() ? args.begin() : sub + 1, injected.begin(), injected.end());
        break;
    }
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonparanormal transform benchmark for PC, GES and PC-GES"};
    app.name("bench");
    app.require_subcommand(1);

    ConditionFlags run_cond;
    ExecutionFlags run_exec;
    std::string algos = "PC-S,PC-L,GES-AIC-S,GES-AIC-L,GES-BIC-S,GES-BIC-L,PC-GES-S,PC-GES-L";
    double alpha = 0.001;
    double penalty = kSmallProtocolPenalty;
    std::string format = "markdown";
    std::string out_path = "-";
    std::string config_help = "Flat key=value file with the same option names; flags override it";
    std::string config_file;
    CLI::App* run = app.add_subcommand("run", "Run one simulation condition and print its table");
    run->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    run->add_option("--config", config_file, config_help);
    run_cond.add_to(*run);
    run_exec.add_to(*run);
    run->add_option("--algos", algos, "Comma-separated algorithm names, e.g. PC-S,GES-BIC-L,PC-GES-S");
    run->add_option("--alpha", alpha, "PC significance level")->check(CLI::Range(0.0, 1.0));
    run->add_option("--penalty-discount", penalty, "Multiplier on the AIC/BIC penalty")->check(CLI::PositiveNumber);
    run->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "markdown"}));
    run->add_option("--out", out_path, "Output file ('-' for stdout)");

    std::string which = "1..18";
    std::uint64_t table_seed = 0;
    std::optional<int> table_runs;
    ExecutionFlags table_exec;
    std::string table_dir = "tables";
    CLI::App* tables = app.add_subcommand("paper-tables", "Regenerate Tables 1-18 as CSV and markdown");
    tables->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    tables->add_option("--config", config_file, config_help);
    tables->add_option("--which", which, "Tables to build: 1..18, 3-5, 1,5,8");
    tables->add_option("--seed", table_seed, "Master seed");
    tables->add_option("--runs", table_runs, "Override the number of runs per table")->check(CLI::PositiveNumber);
    table_exec.add_to(*tables);
    tables->add_option("--out", table_dir, "Output directory");

    ConditionFlags gen_cond;
    gen_cond.runs = 1;
    bool gen_transform = false;
    std::string gen_dir = "data";
    CLI::App* gen = app.add_subcommand("gen-data", "Dump simulated datasets with their true graphs");
    gen->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    gen->add_option("--config", config_file, config_help);
    gen_cond.add_to(*gen);
    gen->add_flag("--transform", gen_transform, "Apply the nonparanormal transform before writing");
    gen->add_option("--out", gen_dir, "Output directory");

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = expand_config(std::move(args), {"run", "paper-tables", "gen-data"});
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*run) return cmd_run(run_cond, run_exec, algos, alpha, penalty, format, out_path);
        if (*tables) return cmd_paper_tables(which, table_seed, table_runs, table_exec, table_dir);
        if (*gen) return cmd_gen_data(gen_cond, gen_transform, gen_dir);
    } catch (const std::exception& e) {
        std::cerr << "bench: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
