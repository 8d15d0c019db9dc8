#include "gme/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

using namespace gme;

namespace {

constexpr int kUsageError = 2;

/// Calls job(i) for i in [0, count) on up to `workers` threads.
template <class Job>
void parallel_for(std::size_t count, unsigned workers, Job job)
{
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write '" + path + "'");
    return out;
}

int combine(int a, int b)
{
    if (a == 1 || b == 1)
        return 1;
    return std::max(a, b);
}

struct RunFlags {
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> steps;
    std::size_t runs = 1;
    unsigned workers = 1;
    std::string trace_out;
    std::string csv_out;
};

int cmd_run(const RunFlags& f)
{
    auto s = load_scenario(f.scenario);
    if (f.steps)
        s.steps = *f.steps;
    const auto base = f.seed.value_or(s.seed);

    std::vector<RunReport> reports(f.runs);
    parallel_for(f.runs, f.workers, [&](std::size_t i) { reports[i] = run_scenario(s, base + i); });

    std::unique_ptr<std::ofstream> csv;
    if (!f.csv_out.empty()) {
        csv = std::make_unique<std::ofstream>(open_out(f.csv_out));
        write_invocation_csv_header(*csv);
    }
    int status = 0;
    for (auto& r : reports) {
        if (!f.trace_out.empty()) {
            const auto path = f.runs == 1 ? f.trace_out : f.trace_out + "." + std::to_string(r.seed);
            auto out = open_out(path);
            write_trace_jsonl(out, r);
            r.trace_path = path;
        }
        if (&r != &reports.front())
            std::cout << "\n";
        write_report(std::cout, r);
        if (csv)
            write_invocation_csv(*csv, r);
        status = combine(status, r.exit_status());
    }
    return status;
}

struct ExploreFlags {
    std::string scenario;
    std::optional<std::uint64_t> max_states;
    std::optional<std::size_t> max_depth;
    std::optional<std::int64_t> token_cap;
    std::string csv_out;
};

int cmd_explore(const ExploreFlags& f)
{
    auto s = load_scenario(f.scenario);
    if (f.max_states)
        s.max_states = *f.max_states;
    if (f.max_depth)
        s.max_depth = *f.max_depth;
    if (f.token_cap)
        s.token_cap = *f.token_cap;
    const auto r = explore_scenario(s);
    write_explore_report(std::cout, s, r);
    if (!f.csv_out.empty()) {
        auto out = open_out(f.csv_out);
        out << "scenario_hash,algorithm,n,states,transitions,max_depth,max_token,token_cap,"
               "token_cap_cuts,truncated,deadlock_states";
        for (auto p : s.effective_monitors())
            out << ',' << to_string(p);
        out << '\n'
            << hex64(s.hash()) << ',' << s.algorithm << ',' << s.n << ',' << r.states << ','
            << r.transitions << ',' << r.max_depth << ',' << r.max_token << ',' << r.token_cap
            << ',' << r.token_cap_cuts << ',' << (r.truncated ? 1 : 0) << ',' << r.deadlock_states;
        for (auto p : s.effective_monitors())
            out << ',' << r.violation_count(p);
        out << '\n';
    }
    return explore_exit_status(r);
}

struct SweepFlags {
    std::string scenario;
    std::string algorithm;
    std::vector<int> ns;
    std::size_t seeds = 50;
    std::uint64_t seed = 1;
    std::optional<int> invocations;  // 3, or 1 for the adversarial schedule
    int window = 0;
    std::string schedule = "random";
    std::string workload = "conflicting";
    std::optional<std::uint64_t> steps;
    unsigned workers = 1;
    std::string csv_out;
};

int cmd_sweep(const SweepFlags& f)
{
    Scenario base;
    if (!f.scenario.empty()) {
        base = load_scenario(f.scenario);
        if (base.workload == "explicit")
            throw ConfigError("sweep needs a workload template, not explicit sessions");
    } else {
        if (f.algorithm.empty())
            throw ConfigError("sweep needs --scenario or --algorithm");
        base.name = "sweep";
        base.algorithm = f.algorithm;
        base.invocations = f.invocations.value_or(f.schedule == "adversarial" ? 1 : 3);
        base.window = f.window;
        base.schedule = f.schedule;
        base.workload = f.workload;
    }
    if (f.steps)
        base.steps = *f.steps;
    const std::size_t seeds = base.schedule == "random" ? f.seeds : 1;

    std::unique_ptr<std::ofstream> file;
    if (!f.csv_out.empty())
        file = std::make_unique<std::ofstream>(open_out(f.csv_out));
    std::ostream& out = file ? static_cast<std::ostream&>(*file) : std::cout;
    write_sweep_csv_header(out);

    int status = 0;
    std::optional<SweepRow> prev;
    for (int n : f.ns) {
        Scenario s = base;
        s.n = n;
        s.sessions.clear();
        if (s.workload == "explicit")
            s.workload.clear();
        resolve(s);
        std::vector<RunSummary> runs(seeds);
        parallel_for(seeds, f.workers,
                     [&](std::size_t i) { runs[i] = summarize(run_scenario(s, f.seed + i)); });
        auto row = aggregate(s, runs, prev ? &*prev : nullptr);
        write_sweep_csv(out, row);
        if (row.violations)
            status = combine(status, 1);
        if (row.truncated)
            status = combine(status, 3);
        prev = row;
    }
    return status;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Group mutual exclusion simulator: run, explore and sweep scenarios"};
    app.require_subcommand(1);

    RunFlags rf;
    auto* run_cmd = app.add_subcommand("run", "simulate a scenario and check its monitors");
    run_cmd->add_option("--scenario", rf.scenario, "scenario file")->required();
    run_cmd->add_option("--seed", rf.seed, "seed (overrides the scenario)");
    run_cmd->add_option("--steps", rf.steps, "step cap (overrides the scenario)");
    run_cmd->add_option("--runs", rf.runs, "number of consecutive seeds to run")
        ->check(CLI::PositiveNumber);
    run_cmd->add_option("--workers", rf.workers, "threads for independent seeds")
        ->check(CLI::PositiveNumber);
    run_cmd->add_option("--trace-out", rf.trace_out, "write the event trace as JSON lines");
    run_cmd->add_option("--csv-out", rf.csv_out, "write one CSV row per invocation");

    ExploreFlags ef;
    auto* explore_cmd = app.add_subcommand("explore", "visit every interleaving of a scenario");
    explore_cmd->add_option("--scenario", ef.scenario, "scenario file")->required();
    explore_cmd->add_option("--max-states", ef.max_states, "state cap");
    explore_cmd->add_option("--max-depth", ef.max_depth, "depth cap");
    explore_cmd->add_option("--token-cap", ef.token_cap, "cut paths whose integer token exceeds this");
    explore_cmd->add_option("--csv-out", ef.csv_out, "write a one-row CSV summary");

    SweepFlags sf;
    auto* sweep_cmd = app.add_subcommand("sweep", "RMR scaling over a list of process counts");
    sweep_cmd->add_option("--scenario", sf.scenario, "template scenario (n is replaced)");
    sweep_cmd->add_option("--algorithm", sf.algorithm, "glb, bwbgme or bl (without --scenario)")
        ->check(CLI::IsMember({"glb", "bwbgme", "bl"}));
    sweep_cmd->add_option("--n", sf.ns, "process counts, e.g. 4,8,16")->required()->delimiter(',');
    sweep_cmd->add_option("--seeds", sf.seeds, "random schedules per process count")
        ->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--seed", sf.seed, "first seed");
    sweep_cmd->add_option("--invocations", sf.invocations, "invocations per process (default 3, adversarial 1)")
        ->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--window", sf.window, "random schedule window, 0 means 2N");
    sweep_cmd->add_option("--schedule", sf.schedule, "random, round-robin or adversarial")
        ->check(CLI::IsMember({"random", "round-robin", "adversarial"}));
    sweep_cmd->add_option("--workload", sf.workload, "conflicting or same-session")
        ->check(CLI::IsMember({"conflicting", "same-session"}));
    sweep_cmd->add_option("--steps", sf.steps, "step cap per run");
    sweep_cmd->add_option("--workers", sf.workers, "threads for independent seeds")
        ->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--csv-out", sf.csv_out, "write the table here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    try {
        if (*run_cmd)
            return cmd_run(rf);
        if (*explore_cmd)
            return cmd_explore(ef);
        return cmd_sweep(sf);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    }
}
