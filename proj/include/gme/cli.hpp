#pragma once

// Scenario files, run/explore/sweep drivers and their report formats.

#include "gme/bl.hpp"
#include "gme/bwbgme.hpp"
#include "gme/monitors.hpp"
#include "gme/sched.hpp"

#include <iosfwd>

namespace gme {

/// Malformed scenario text. `line` is 1-based, 0 when not tied to a line.
class ScenarioError : public ConfigError {
public:
    ScenarioError(const std::string& where, int line, const std::string& msg);
    int line() const { return line_; }

private:
    int line_;
};

struct Scenario {
    std::string name = "<scenario>";
    std::string algorithm;
    int n = 0;
    /// Per-process session lists, index pid-1. Filled from sessions.<pid>
    /// keys, from the workload template, or by a named schedule.
    std::vector<std::vector<std::int64_t>> sessions;
    std::string workload;  ///< "explicit", "conflicting", "same-session" or a schedule's own
    int invocations = 1;
    int cs_steps = 0;
    std::string schedule = "random";  ///< random, round-robin, scripted, adversarial, fill, shared-cs, hanging
    int window = 0;                   ///< random schedule window, 0 means 2N
    std::vector<Pid> script;
    bool finish = false;  ///< after a finite schedule, round-robin until all complete
    std::uint64_t seed = 1;
    std::optional<Color> initial_color;       ///< bwbgme only
    std::optional<BwbgmeVariant> variant;     ///< bwbgme only
    std::vector<Property> monitors;           ///< empty means the algorithm's defaults
    std::uint64_t steps = 1'000'000;
    std::uint64_t max_states = 50'000'000;
    std::size_t max_depth = 100'000;
    std::int64_t token_cap = 0;

    /// Effective values, after defaults.
    int effective_window() const { return window > 0 ? window : 2 * n; }
    std::vector<Property> effective_monitors() const;

    /// Canonical text of everything except the name and the seed.
    std::string canonical() const;
    /// FNV-1a 64 of canonical().
    std::uint64_t hash() const;
};

Scenario parse_scenario(std::istream& in, const std::string& name = "<scenario>");
Scenario parse_scenario_text(const std::string& text, const std::string& name = "<scenario>");
Scenario load_scenario(const std::string& path);

/// Recomputes the derived parts of `s` after a field change (n, workload
/// template, named schedules) and validates it. parse_scenario calls this.
void resolve(Scenario& s);

std::shared_ptr<const AlgorithmSpec> build_spec(const Scenario& s);
Workload build_workload(const Scenario& s);
std::unique_ptr<SchedulePolicy> build_schedule(const Scenario& s, std::uint64_t seed);

struct TokenCommit {
    std::uint64_t step;
    Pid pid;
    std::int64_t number;
};

struct RunReport {
    std::string scenario;
    std::uint64_t scenario_hash = 0;
    std::uint64_t seed = 0;
    std::string algorithm;
    int n = 0;
    std::optional<Color> initial_color;
    std::optional<BwbgmeVariant> variant;
    std::uint64_t steps = 0;
    bool truncated = false;
    bool deadlocked = false;
    std::vector<Verdict> verdicts;
    std::vector<InvocationRecord> invocations;
    RmrReport rmr;
    std::vector<TokenCommit> commits;  ///< nonzero token numbers written, in order
    std::int64_t max_token = 0;
    std::optional<BlockCounts> blocks;  ///< bl only
    std::optional<std::string> trace_path;
    Trace trace;

    bool violated() const;
    /// 0 pass, 1 violation, 3 truncation.
    int exit_status() const;
};

/// Runs `s` once with `seed`. The trace is kept in the report.
RunReport run_scenario(const Scenario& s, std::uint64_t seed);

void write_report(std::ostream& out, const RunReport& r);

/// One CSV row per invocation.
void write_invocation_csv_header(std::ostream& out);
void write_invocation_csv(std::ostream& out, const RunReport& r);

/// Line-delimited JSON: a header record, one record per event, an end record.
void write_trace_jsonl(std::ostream& out, const RunReport& r);

ExplorationReport explore_scenario(const Scenario& s);
void write_explore_report(std::ostream& out, const Scenario& s, const ExplorationReport& r);
/// 0 clean, 1 violation or deadlock, 3 truncated without violations.
int explore_exit_status(const ExplorationReport& r);

/// Per-run figures a sweep aggregates.
struct RunSummary {
    std::uint64_t seed = 0;
    std::uint64_t max_invocation_rmr = 0;
    double mean_invocation_rmr = 0.0;
    std::uint64_t total_rmr = 0;
    std::size_t complete = 0;
    std::size_t incomplete = 0;
    bool violated = false;
    bool truncated = false;
};

RunSummary summarize(const RunReport& r);

struct SweepRow {
    std::string algorithm;
    std::string schedule;
    int n = 0;
    std::size_t runs = 0;
    std::uint64_t max_invocation_rmr = 0;
    double mean_invocation_rmr = 0.0;
    double mean_total_rmr = 0.0;
    std::uint64_t max_total_rmr = 0;
    std::size_t violations = 0;
    std::size_t truncated = 0;
    std::optional<double> max_ratio;    ///< max_invocation_rmr over the previous row's
    std::optional<double> total_ratio;  ///< mean_total_rmr over the previous row's
};

/// Aggregates runs of one N; `prev` is the row of the previous N, if any.
SweepRow aggregate(const Scenario& s, const std::vector<RunSummary>& runs, const SweepRow* prev);

void write_sweep_csv_header(std::ostream& out);
void write_sweep_csv(std::ostream& out, const SweepRow& row);

std::string hex64(std::uint64_t x);

}  // namespace gme
