#pragma once

// Simulation benchmark: random DAG -> SEM -> data -> (optional npn) ->
// covariance -> search -> metrics against the true pattern, repeated and
// averaged per algorithm.

#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "npnsearch/errors.hpp"
#include "npnsearch/gauss.hpp"
#include "npnsearch/ges.hpp"
#include "npnsearch/graph.hpp"
#include "npnsearch/metrics.hpp"
#include "npnsearch/npn.hpp"
#include "npnsearch/pc.hpp"
#include "npnsearch/semsim.hpp"

namespace npnsearch {

enum class AlgorithmFamily { PC, GES, PC_GES };
/// S: raw covariance; L: covariance of npn-transformed data.
enum class Transform { S, L };

struct AlgorithmSpec {
    AlgorithmFamily family = AlgorithmFamily::PC;
    Transform transform = Transform::S;
    std::optional<ScoreConfig> score;
    std::optional<PcConfig> pc;

    std::string name() const {
        std::string out;
        switch (family) {
            case AlgorithmFamily::PC: out = "PC"; break;
            case AlgorithmFamily::GES: out = score && score->kind == ScoreKind::AIC ? "GES-AIC" : "GES-BIC"; break;
            case AlgorithmFamily::PC_GES: out = "PC-GES"; break;
        }
        return out + (transform == Transform::S ? "-S" : "-L");
    }
};

/// Parses names such as "PC-S", "GES-BIC-L" or "PC-GES-S".
inline AlgorithmSpec parse_algorithm(std::string_view name, double alpha = 0.001, double penalty_discount = 1.0) {
    AlgorithmSpec spec;
    std::string_view stem = name;
    if (stem.ends_with("-S")) spec.transform = Transform::S;
    else if (stem.ends_with("-L")) spec.transform = Transform::L;
    else throw ParseError("algorithm '" + std::string(name) + "' must end in -S or -L");
    stem.remove_suffix(2);
    PcConfig pc;
    pc.alpha = alpha;
    if (stem == "PC") {
        spec.family = AlgorithmFamily::PC;
        spec.pc = pc;
    } else if (stem == "GES-BIC" || stem == "GES-AIC") {
        spec.family = AlgorithmFamily::GES;
        spec.score = ScoreConfig{stem == "GES-AIC" ? ScoreKind::AIC : ScoreKind::BIC, penalty_discount};
    } else if (stem == "PC-GES") {
        spec.family = AlgorithmFamily::PC_GES;
        spec.pc = pc;
        spec.score = ScoreConfig{ScoreKind::BIC, penalty_discount};
    } else {
        throw ParseError("unknown algorithm '" + std::string(name) + "'");
    }
    return spec;
}

inline std::vector<AlgorithmSpec> parse_algorithms(std::string_view list, double alpha, double penalty_discount) {
    std::vector<AlgorithmSpec> out;
    while (!list.empty()) {
        const auto comma = list.find(',');
        const std::string_view item = list.substr(0, comma);
        if (!item.empty()) out.push_back(parse_algorithm(item, alpha, penalty_discount));
        if (comma == std::string_view::npos) break;
        list.remove_prefix(comma + 1);
    }
    if (out.empty()) throw ParseError("no algorithms given");
    return out;
}

struct ExperimentSpec {
    int node_count = 50;
    std::size_t edge_count = 50;
    std::size_t case_count = 1000;
    int run_count = 10;
    DisturbanceKind disturbance = DisturbanceKind::G;
    ConnectionKind connection = ConnectionKind::L;
    std::vector<AlgorithmSpec> algorithms;
    std::uint64_t master_seed = 0;

    /// Identifies the data stream; algorithms are deliberately not part of it.
    std::string label() const {
        return std::string(to_string(connection)) + "/" + std::string(to_string(disturbance)) + "/" +
               std::to_string(node_count) + "x" + std::to_string(edge_count) + "x" + std::to_string(case_count);
    }
};

inline const std::vector<std::string>& small_protocol_algorithms() {
    static const std::vector<std::string> names{"PC-S",      "PC-L",      "GES-AIC-S", "GES-AIC-L",
                                                "GES-BIC-S", "GES-BIC-L", "PC-GES-S",  "PC-GES-L"};
    return names;
}

inline const std::vector<std::string>& large_protocol_algorithms() {
    static const std::vector<std::string> names{"PC-S", "PC-L", "GES-BIC-S", "GES-BIC-L", "PC-GES-S", "PC-GES-L"};
    return names;
}

// Penalty discounts of the two protocols; the large one doubles the small one.
inline constexpr double kSmallProtocolPenalty = 2.0;
inline constexpr double kLargeProtocolPenalty = 2.0 * kSmallProtocolPenalty;

/// Tables 1-9: 50 nodes, 50 edges, 1000 cases, AIC included.
/// Tables 10-18: 500 nodes, 500 edges, 250 cases, AIC dropped.
/// Within each block the conditions run L, NL1, NL2 outer and G, NG1, NG2 inner.
inline ExperimentSpec paper_table_spec(int table, std::uint64_t master_seed) {
    if (table < 1 || table > 18) throw std::out_of_range("table number must be in 1..18");
    const bool large = table >= 10;
    const int k = (table - 1) % 9;
    ExperimentSpec spec;
    spec.connection = std::array{ConnectionKind::L, ConnectionKind::NL1, ConnectionKind::NL2}[k / 3];
    spec.disturbance = std::array{DisturbanceKind::G, DisturbanceKind::NG1, DisturbanceKind::NG2}[k % 3];
    spec.node_count = large ? 500 : 50;
    spec.edge_count = large ? 500 : 50;
    spec.case_count = large ? 250 : 1000;
    spec.run_count = 10;
    spec.master_seed = master_seed;
    const double penalty = large ? kLargeProtocolPenalty : kSmallProtocolPenalty;
    for (const std::string& name : large ? large_protocol_algorithms() : small_protocol_algorithms())
        spec.algorithms.push_back(parse_algorithm(name, 0.001, penalty));
    return spec;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(const void* bytes, std::size_t size, std::uint64_t h = 1469598103934665603ULL) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < size; ++i) h = (h ^ p[i]) * 1099511628211ULL;
    return h;
}

/// Stable seed for one run of one condition.
inline std::uint64_t derive_run_seed(std::uint64_t master_seed, std::string_view label, int run_index) {
    std::uint64_t h = fnv1a(&master_seed, sizeof master_seed);
    h = fnv1a(label.data(), label.size(), h);
    const std::int64_t r = run_index;
    h = fnv1a(&r, sizeof r, h);
    return splitmix64(h);
}

inline std::uint64_t hash_data(const DataMatrix& data) {
    const std::int64_t shape[2] = {data.rows(), data.cols()};
    const std::uint64_t h = fnv1a(shape, sizeof shape);
    return fnv1a(data.data(), static_cast<std::size_t>(data.size()) * sizeof(double), h);
}

struct SimulatedRun {
    std::uint64_t seed = 0;
    SemModel model;
    PatternGraph truth;
    DataMatrix data;
};

inline SimulatedRun simulate_run(const ExperimentSpec& spec, int run_index) {
    SimulatedRun run;
    run.seed = derive_run_seed(spec.master_seed, spec.label(), run_index);
    const Dag dag = random_dag(spec.node_count, spec.edge_count, splitmix64(run.seed ^ 1));
    run.model = parameterize(dag, spec.disturbance, spec.connection, splitmix64(run.seed ^ 2));
    run.truth = dag_to_cpdag(dag);
    run.data = simulate(run.model, spec.case_count, splitmix64(run.seed ^ 3));
    return run;
}

/// Runs one algorithm on already prepared covariance inputs.
inline PatternGraph run_algorithm(const AlgorithmSpec& algo, const CovarianceSummary& cov,
                                  std::optional<std::chrono::steady_clock::time_point> deadline = {}) {
    switch (algo.family) {
        case AlgorithmFamily::PC: {
            PcConfig pc = algo.pc.value_or(PcConfig{});
            pc.deadline = deadline;
            return pc_search(cov, pc);
        }
        case AlgorithmFamily::GES: return ges_search(cov, GesConfig{algo.score.value(), std::nullopt, deadline});
        case AlgorithmFamily::PC_GES:
            return pc_ges_search(cov, algo.pc.value_or(PcConfig{}), algo.score.value(), deadline);
    }
    throw std::logic_error("unhandled algorithm family");
}

struct CellOutcome {
    std::optional<MetricsReport> report;
    std::string error;
    std::uint64_t data_hash = 0;  // hash of the simulated (pre-transform) data consumed
};

struct RunRecord {
    std::uint64_t seed = 0;
    std::uint64_t data_hash = 0;
    std::string error;  // set when simulation itself failed
    std::vector<CellOutcome> cells;  // one per algorithm
};

struct AlgorithmSummary {
    std::string name;
    std::optional<MetricsReport> mean;  // empty when no run survived
    int surviving_runs = 0;
    std::vector<std::string> errors;
};

struct ConditionResult {
    std::vector<AlgorithmSummary> algorithms;
    std::vector<RunRecord> runs;

    bool complete() const {
        for (const RunRecord& r : runs) {
            if (!r.error.empty()) return false;
            for (const CellOutcome& c : r.cells)
                if (!c.report) return false;
        }
        return true;
    }

    const AlgorithmSummary& operator[](std::string_view name) const {
        for (const AlgorithmSummary& a : algorithms)
            if (a.name == name) return a;
        throw std::out_of_range("no algorithm named " + std::string(name));
    }
};

struct RunOptions {
    unsigned threads = 1;
    std::optional<std::chrono::duration<double>> cell_timeout;
};

inline RunRecord execute_run(const ExperimentSpec& spec, int run_index, const RunOptions& options) {
    RunRecord record;
    record.cells.resize(spec.algorithms.size());
    SimulatedRun sim;
    try {
        sim = simulate_run(spec, run_index);
    } catch (const std::exception& e) {
        record.error = e.what();
        for (CellOutcome& c : record.cells) c.error = std::string("simulation failed: ") + e.what();
        return record;
    }
    record.seed = sim.seed;
    record.data_hash = hash_data(sim.data);

    std::optional<CovarianceSummary> cov_s, cov_l;
    std::string cov_s_error, cov_l_error;
    for (std::size_t a = 0; a < spec.algorithms.size(); ++a) {
        const AlgorithmSpec& algo = spec.algorithms[a];
        CellOutcome& cell = record.cells[a];
        cell.data_hash = record.data_hash;
        try {
            std::optional<CovarianceSummary>& cov = algo.transform == Transform::S ? cov_s : cov_l;
            if (!cov) cov.emplace(covariance(algo.transform == Transform::S ? sim.data : npn_transform(sim.data)));
            std::optional<std::chrono::steady_clock::time_point> deadline;
            if (options.cell_timeout)
                deadline = std::chrono::steady_clock::now() +
                           std::chrono::duration_cast<std::chrono::steady_clock::duration>(*options.cell_timeout);
            const PatternGraph estimate = run_algorithm(algo, *cov, deadline);
            cell.report = compute_metrics(estimate, sim.truth);
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    }
    return record;
}

/// Executes every run of the condition. Runs may execute on several
/// threads; output is independent of the thread count.
inline ConditionResult run_condition(const ExperimentSpec& spec, const RunOptions& options = {}) {
    if (spec.run_count <= 0) throw std::invalid_argument("run count must be positive");
    if (spec.algorithms.empty()) throw std::invalid_argument("no algorithms to run");
    ConditionResult result;
    result.runs.resize(static_cast<std::size_t>(spec.run_count));

    std::atomic<int> next{0};
    auto worker = [&] {
        for (int r = next++; r < spec.run_count; r = next++) result.runs[r] = execute_run(spec, r, options);
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, spec.run_count));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
    }

    for (std::size_t a = 0; a < spec.algorithms.size(); ++a) {
        AlgorithmSummary summary;
        summary.name = spec.algorithms[a].name();
        std::vector<MetricsReport> reports;
        for (std::size_t r = 0; r < result.runs.size(); ++r) {
            const CellOutcome& cell = result.runs[r].cells[a];
            if (cell.report) reports.push_back(*cell.report);
            else summary.errors.push_back("run " + std::to_string(r + 1) + ": " + cell.error);
        }
        summary.surviving_runs = static_cast<int>(reports.size());
        if (!reports.empty()) summary.mean = aggregate(reports);
        result.algorithms.push_back(std::move(summary));
    }
    return result;
}

/// (algorithm name, mean report) columns in display order.
using ResultTable = std::vector<std::pair<std::string, std::optional<MetricsReport>>>;

inline ResultTable to_table(const ConditionResult& result) {
    ResultTable table;
    for (const AlgorithmSummary& a : result.algorithms) table.emplace_back(a.name, a.mean);
    return table;
}

enum class TableFormat { csv, markdown };

inline TableFormat parse_table_format(std::string_view s) {
    if (s == "csv") return TableFormat::csv;
    if (s == "markdown" || s == "md") return TableFormat::markdown;
    throw ParseError("unknown table format '" + std::string(s) + "'");
}

inline constexpr std::array<std::string_view, 4> kStatisticNames{"Adj FPR", "Adj RR", "Arrow FPR", "Arrow RR"};

namespace detail {

inline double statistic(const MetricsReport& r, std::size_t row) {
    switch (row) {
        case 0: return r.adj_fpr;
        case 1: return r.adj_rr;
        case 2: return r.arrow_fpr;
        default: return r.arrow_rr;
    }
}

/// Two decimals with trailing zeros dropped: 0.666 -> "0.67", 0.70 -> "0.7", 0 -> "0".
inline std::string two_decimals(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s(buf);
    if (s.find('.') != std::string::npos) {
        while (s.back() == '0') s.pop_back();
        if (s.back() == '.') s.pop_back();
    }
    if (s == "-0") s = "0";
    return s;
}

inline std::string full_precision(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

/// Rows are the four statistics, columns the algorithms in order.
inline std::string render_table(const ResultTable& table, TableFormat format) {
    if (table.empty()) throw EmptyResultError("nothing to render");
    std::ostringstream out;
    if (format == TableFormat::csv) {
        out << "statistic";
        for (const auto& [name, report] : table) out << ',' << name;
        out << '\n';
        for (std::size_t row = 0; row < kStatisticNames.size(); ++row) {
            out << kStatisticNames[row];
            for (const auto& [name, report] : table)
                out << ',' << (report ? detail::full_precision(detail::statistic(*report, row)) : "NA");
            out << '\n';
        }
    } else {
        out << '|';
        for (const auto& [name, report] : table) out << ' ' << '|' << ' ' << name;
        out << " |\n|---";
        for (std::size_t i = 0; i < table.size(); ++i) out << "|---:";
        out << "|\n";
        for (std::size_t row = 0; row < kStatisticNames.size(); ++row) {
            out << "| " << kStatisticNames[row];
            for (const auto& [name, report] : table)
                out << " | " << (report ? detail::two_decimals(detail::statistic(*report, row)) : "NA");
            out << " |\n";
        }
    }
    return out.str();
}

/// Inverse of render_table(..., csv).
inline ResultTable parse_csv_table(std::string_view text) {
    std::istringstream in{std::string(text)};
    auto split = [](const std::string& line) {
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ',')) fields.push_back(f);
        return fields;
    };
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty table");
    const auto header = split(line);
    if (header.size() < 2 || header[0] != "statistic") throw ParseError("bad table header");
    ResultTable table;
    for (std::size_t c = 1; c < header.size(); ++c) table.emplace_back(header[c], MetricsReport{});
    std::vector<bool> missing(table.size(), false);
    for (std::size_t row = 0; row < kStatisticNames.size(); ++row) {
        if (!std::getline(in, line)) throw ParseError("table has fewer than four rows");
        const auto fields = split(line);
        if (fields.size() != header.size() || fields[0] != kStatisticNames[row])
            throw ParseError("malformed row: " + line);
        for (std::size_t c = 1; c < fields.size(); ++c) {
            if (fields[c] == "NA") {
                missing[c - 1] = true;
                continue;
            }
            std::size_t used = 0;
            double v;
            try {
                v = std::stod(fields[c], &used);
            } catch (const std::exception&) {
                throw ParseError("bad number '" + fields[c] + "'");
            }
            if (used != fields[c].size()) throw ParseError("bad number '" + fields[c] + "'");
            MetricsReport& r = *table[c - 1].second;
            (row == 0 ? r.adj_fpr : row == 1 ? r.adj_rr : row == 2 ? r.arrow_fpr : r.arrow_rr) = v;
        }
    }
    for (std::size_t c = 0; c < table.size(); ++c)
        if (missing[c]) table[c].second.reset();
    return table;
}

/// Tab-separated dump: header X1..Xp, then one case per line.
inline void write_dataset(std::ostream& out, const DataMatrix& data) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) out << (j ? "\t" : "") << 'X' << (j + 1);
    out << '\n';
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        for (Eigen::Index j = 0; j < data.cols(); ++j) out << (j ? "\t" : "") << detail::full_precision(data(i, j));
        out << '\n';
    }
}

inline DataMatrix read_dataset(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty dataset");
    std::size_t cols = 0;
    {
        std::istringstream header(line);
        std::string name;
        while (header >> name) ++cols;
    }
    if (cols == 0) throw ParseError("dataset header names no variables");
    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        double v;
        std::size_t count = 0;
        while (ls >> v) {
            values.push_back(v);
            ++count;
        }
        if (count != cols) throw ParseError("row " + std::to_string(rows + 1) + " has " + std::to_string(count) +
                                            " values, expected " + std::to_string(cols));
        ++rows;
    }
    DataMatrix data(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) data(i, j) = values[i * cols + j];
    return data;
}

}  // namespace npnsearch
