#include "mfgsim/outputs.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "mfgsim/errors.hpp"

namespace mfgsim {

using nlohmann::json;

namespace {

std::string fmt(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

std::string or_dash(const std::string& s) { return s.empty() ? "-" : s; }

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw SimError(ErrorCode::io_error, "cannot write " + path.string());
    }
    out << content;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw SimError(ErrorCode::io_error, "cannot read " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

std::string render_events_log(const RunMetrics& metrics) {
    std::string out;
    for (const EventRecord& record : metrics.event_log) {
        out += std::to_string(record.tick);
        out += '\t';
        out += record.kind;
        out += '\t';
        out += or_dash(record.agent);
        out += '\t';
        out += or_dash(record.part);
        out += '\t';
        out += or_dash(record.detail);
        out += '\n';
    }
    return out;
}

std::string render_metrics_csv(const RunMetrics& metrics, Tick stride) {
    SummaryTables tables = summarize(metrics, stride);
    std::string out = "tick,completed_cum";
    for (const auto& [agent, _] : tables.utilization) {
        out += ",util:" + agent;
    }
    out += '\n';
    for (std::size_t row = 0; row < tables.ticks.size(); ++row) {
        out += std::to_string(tables.ticks[row]);
        out += ',' + std::to_string(tables.completed[row]);
        for (const auto& [agent, series] : tables.utilization) {
            out += ',' + fmt(series[row]);
        }
        out += '\n';
    }
    return out;
}

std::string render_summary(const Scenario& scenario, const RunMetrics& metrics) {
    std::ostringstream out;
    out << "scenario: " << metrics.scenario_name << '\n';
    out << "horizon: " << metrics.horizon << '\n';
    out << "released: " << metrics.released_parts << '\n';
    out << "completed: " << metrics.completed_parts << '\n';
    out << "failed: " << metrics.failed_parts << '\n';
    out << "in_system_at_horizon: "
        << metrics.released_parts - metrics.completed_parts - metrics.failed_parts
        << '\n';
    if (!metrics.completion_ticks.empty()) {
        Tick last = 0;
        for (const auto& [part, tick] : metrics.completion_ticks) {
            last = std::max(last, tick);
        }
        out << "last_completion_tick: " << last << '\n';
    }
    out << "disruptions:\n";
    for (const DisruptionEntry& entry : scenario.schedule.entries) {
        out << "  " << entry.agent << " down [" << entry.breakdown_tick << ", "
            << entry.breakdown_tick + entry.mttr << ")";
        for (const ExploreEpisode& episode : metrics.explorations) {
            if (episode.disruption.disrupted_agent != entry.agent ||
                episode.disruption.detected_at != entry.breakdown_tick) {
                continue;
            }
            if (episode.success) {
                out << " -> takeover by " << episode.exploration_agent << " (rounds="
                    << episode.rounds << ")";
            } else {
                out << " -> exploration failed (" << episode.failure << ")";
            }
        }
        out << '\n';
    }
    return out.str();
}

std::string render_run_meta(const Scenario& scenario, const RunMetrics& metrics,
                            std::uint64_t seed, bool exploration,
                            const std::string& policy_type) {
    json meta;
    meta["scenario"] = metrics.scenario_name;
    meta["seed"] = seed;
    meta["exploration"] = exploration;
    meta["policy"] = policy_type;
    meta["horizon"] = metrics.horizon;
    meta["stride"] = scenario.options.stride;
    meta["released"] = metrics.released_parts;
    meta["completed"] = metrics.completed_parts;
    meta["failed"] = metrics.failed_parts;
    json agents = json::array();
    for (const auto& [agent, _] : metrics.utilization_series) agents.push_back(agent);
    meta["agents"] = std::move(agents);
    json windows = json::array();
    for (const DisruptionEntry& entry : scenario.schedule.entries) {
        windows.push_back({{"agent", entry.agent},
                           {"from", entry.breakdown_tick},
                           {"to", entry.breakdown_tick + entry.mttr}});
    }
    meta["disruptions"] = std::move(windows);
    return meta.dump(2) + "\n";
}

std::string render_plot_script(const RunMetrics& metrics) {
    std::ostringstream out;
    out << "set datafile separator ','\n";
    out << "set key outside\n";
    out << "set xlabel 'tick'\n";
    out << "set terminal pngcairo size 1200,500\n";
    out << "set output 'throughput.png'\n";
    out << "set ylabel 'completed parts'\n";
    out << "plot 'metrics.csv' using 1:2 with steps title 'completed'\n";
    out << "set output 'utilization.png'\n";
    out << "set ylabel 'utilization'\n";
    out << "plot";
    int column = 3;
    bool first = true;
    for (const auto& [agent, _] : metrics.utilization_series) {
        if (!first) out << ",";
        out << " 'metrics.csv' using 1:" << column << " with lines title '" << agent
            << "'";
        first = false;
        ++column;
    }
    out << '\n';
    return out.str();
}

void write_run_outputs(const std::string& out_dir, const Scenario& scenario,
                       const RunMetrics& metrics, std::uint64_t seed,
                       bool exploration, const std::string& policy_type) {
    std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "events.log", render_events_log(metrics));
    write_file(dir / "metrics.csv", render_metrics_csv(metrics, scenario.options.stride));
    write_file(dir / "summary.txt", render_summary(scenario, metrics));
    write_file(dir / "run_meta.json",
               render_run_meta(scenario, metrics, seed, exploration, policy_type));
    write_file(dir / "plot.gp", render_plot_script(metrics));
}

int run_command(const RunOptions& options) {
    try {
        Scenario scenario = load_scenario(options.scenario);
        if (options.exploration) scenario.options.exploration = *options.exploration;
        if (options.seed) scenario.options.seed = *options.seed;
        if (options.horizon) scenario.options.horizon = *options.horizon;
        if (options.policy_type) scenario.policy.type = *options.policy_type;
        if (options.service_url) scenario.policy.service_url = *options.service_url;

        Engine engine(scenario, Engine::make_policy(scenario));
        if (options.dump_snapshots) engine.set_snapshot_dump_dir(options.out_dir);
        RunMetrics metrics = engine.run();
        write_run_outputs(options.out_dir, scenario, metrics, scenario.options.seed,
                          scenario.options.exploration, scenario.policy.type);
        std::cout << render_summary(scenario, metrics);
        return 0;
    } catch (const SimError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

namespace {

struct LoadedRun {
    json meta;
    std::vector<std::string> csv_lines;
};

LoadedRun load_run(const std::string& dir) {
    LoadedRun run;
    run.meta = json::parse(read_file(std::filesystem::path(dir) / "run_meta.json"));
    std::istringstream csv(read_file(std::filesystem::path(dir) / "metrics.csv"));
    std::string line;
    while (std::getline(csv, line)) {
        if (!line.empty()) run.csv_lines.push_back(line);
    }
    return run;
}

std::vector<double> csv_column(const std::vector<std::string>& lines, std::size_t col) {
    std::vector<double> values;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        std::istringstream row(lines[i]);
        std::string cell;
        for (std::size_t c = 0; c <= col; ++c) std::getline(row, cell, ',');
        values.push_back(std::stod(cell));
    }
    return values;
}

}  // namespace

int compare_command(const std::string& dir_a, const std::string& dir_b) {
    try {
        LoadedRun a = load_run(dir_a);
        LoadedRun b = load_run(dir_b);
        if (a.meta.at("scenario") != b.meta.at("scenario") ||
            a.meta.at("agents") != b.meta.at("agents")) {
            throw SimError(ErrorCode::incompatible_runs,
                           "runs use different scenarios or agent sets");
        }

        std::cout << "scenario: " << a.meta.at("scenario").get<std::string>() << '\n';
        std::cout << "run A: " << dir_a << " (exploration="
                  << (a.meta.at("exploration").get<bool>() ? "on" : "off") << ")\n";
        std::cout << "run B: " << dir_b << " (exploration="
                  << (b.meta.at("exploration").get<bool>() ? "on" : "off") << ")\n";

        int completed_a = a.meta.at("completed").get<int>();
        int completed_b = b.meta.at("completed").get<int>();
        int failed_a = a.meta.at("failed").get<int>();
        int failed_b = b.meta.at("failed").get<int>();
        std::cout << "completed: " << completed_a << " vs " << completed_b
                  << " (delta " << completed_b - completed_a << ")\n";
        std::cout << "failed: " << failed_a << " vs " << failed_b << " (delta "
                  << failed_b - failed_a << ")\n";

        // Final throughput delta over the shared series length.
        std::vector<double> thr_a = csv_column(a.csv_lines, 1);
        std::vector<double> thr_b = csv_column(b.csv_lines, 1);
        std::size_t rows = std::min(thr_a.size(), thr_b.size());
        if (rows > 0) {
            std::cout << "final cumulative completions: " << thr_a[rows - 1] << " vs "
                      << thr_b[rows - 1] << '\n';
        }

        // Per-agent utilization deltas over each disruption window.
        std::istringstream header(a.csv_lines.at(0));
        std::vector<std::string> columns;
        std::string cell;
        while (std::getline(header, cell, ',')) columns.push_back(cell);
        Tick stride = a.meta.value("stride", Tick{1});

        for (const json& window : a.meta.at("disruptions")) {
            std::string agent = window.at("agent").get<std::string>();
            Tick from = window.at("from").get<Tick>();
            Tick to = window.at("to").get<Tick>();
            std::string column_name = "util:" + agent;
            auto it = std::find(columns.begin(), columns.end(), column_name);
            if (it == columns.end()) continue;
            std::size_t col = static_cast<std::size_t>(it - columns.begin());
            std::vector<double> util_a = csv_column(a.csv_lines, col);
            std::vector<double> util_b = csv_column(b.csv_lines, col);
            double sum_a = 0.0, sum_b = 0.0;
            int n = 0;
            for (Tick t = from; t < to; t += stride) {
                std::size_t row = static_cast<std::size_t>(t / stride);
                if (row >= util_a.size() || row >= util_b.size()) break;
                sum_a += util_a[row];
                sum_b += util_b[row];
                ++n;
            }
            if (n == 0) continue;
            std::cout << "util " << agent << " over [" << from << "," << to
                      << "): " << fmt(sum_a / n) << " vs " << fmt(sum_b / n)
                      << " (delta " << fmt(sum_b / n - sum_a / n) << ")\n";
        }
        return 0;
    } catch (const SimError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::incompatible_runs ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

int validate_command(const std::string& path) {
    try {
        Scenario scenario = load_scenario(path);
        std::cout << "ok: " << scenario.name << " (" << scenario.agents.size()
                  << " agents, " << scenario.states.size() << " states)\n";
        return 0;
    } catch (const SimError& e) {
        std::cerr << e.what() << '\n';
        return 1;
    }
}

}  // namespace mfgsim
