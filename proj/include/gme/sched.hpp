#pragma once

// Schedule sources and the exhaustive state-space explorer.

#include "gme/machine.hpp"
#include "gme/monitors.hpp"

#include <functional>
#include <random>

namespace gme {

/// Fixed pid sequence; ends the run when exhausted.
class ScriptedSchedule final : public SchedulePolicy {
public:
    explicit ScriptedSchedule(std::vector<Pid> pids) : pids_(std::move(pids)) {}
    std::optional<Pid> next(const System& sys) override;
    std::size_t position() const { return pos_; }

private:
    std::vector<Pid> pids_;
    std::size_t pos_ = 0;
};

/// 1, 2, ..., N, 1, 2, ...
class RoundRobinSchedule final : public SchedulePolicy {
public:
    std::optional<Pid> next(const System& sys) override;

private:
    Pid next_ = 1;
};

/// Seeded random interleaving in which every process appears at least once
/// in every `window` consecutive slots. The pid sequence depends only on
/// (seed, window, N), never on the system state.
class RandomSchedule final : public SchedulePolicy {
public:
    RandomSchedule(std::uint64_t seed, int window) : rng_(seed), window_(window) {}
    std::optional<Pid> next(const System& sys) override;
    Pid next_pid(int n);

private:
    std::mt19937_64 rng_;
    int window_;
    std::uint64_t t_ = 0;
    std::vector<std::uint64_t> deadline_;  // index pid-1: last slot it may next appear in
};

/// First `length` pids of RandomSchedule(seed, window) for N processes.
/// Throws ConfigError unless window >= n.
std::vector<Pid> random_schedule(std::uint64_t seed, int window, int n, std::size_t length);

/// Drives a private copy of a System to produce a scripted schedule.
class ScriptBuilder {
public:
    explicit ScriptBuilder(System sys) : sys_(std::move(sys)) { sys_.set_checked(false); }

    using Until = std::function<bool(const TraceEvent&, const System&)>;

    /// Step `pid` until `done` holds for one of its events.
    ScriptBuilder& advance(Pid pid, const Until& done, int limit = 100000);
    ScriptBuilder& until_marker(Pid pid, Marker m);
    ScriptBuilder& until_failed_wait(Pid pid);
    ScriptBuilder& until_write_at(Pid pid, int line);

    const std::vector<Pid>& script() const { return script_; }
    const System& system() const { return sys_; }

private:
    System sys_;
    std::vector<Pid> script_;
};

/// Recursive worst case for Burns-Lamport: in each round the lowest
/// remaining process wins while P_n is made to block once on every other
/// remaining process. Expects one invocation per process. Throws for n < 2.
std::vector<Pid> bl_adversarial_schedule(int n);

/// Two same-session processes share the CS, one leaves and flips the color,
/// a third same-session process joins with the new color, a conflicting
/// fourth arrives and waits on the second; the third then leaves. Pids 1-3
/// request session 1, pid 4 session 2, GlobalColor starts white. Generated
/// against the naive exit rule, where it ends with P4 entering next to P2.
std::vector<Pid> bwbgme_shared_cs_schedule();
Workload bwbgme_shared_cs_workload();

/// P1 stops after reading GlobalColor in its doorway; P2 and P3 then run
/// complete invocations in turn. All three share one session.
std::vector<Pid> bwbgme_hanging_schedule();
Workload bwbgme_hanging_workload();

/// Every process in turn completes its doorway with its own session, so
/// tokens 1..n are committed; P1 then runs a full invocation and starts a
/// second one with session n+1. Ends right after that second doorway.
std::vector<Pid> bwbgme_fill_schedule(int n);
Workload bwbgme_fill_workload(int n);

struct ExploreOptions {
    std::uint64_t max_states = 50'000'000;
    std::size_t max_depth = 100'000;
    /// Paths where some integer token exceeds this are cut. 0 picks
    /// 4 * N * (total invocations).
    std::int64_t token_cap = 0;
    bool exact_keys = false;       ///< store whole keys instead of 128-bit fingerprints
    bool collect_keys = false;     ///< keep every reachable System::state_key()
    std::size_t sample_every = 0;  ///< keep (path, key) of every k-th new state
    std::size_t merge_pairs = 0;   ///< keep up to this many (path, path) pairs reaching one state
    std::size_t keep_counterexamples = 3;  ///< per property
};

struct Counterexample {
    Property property;
    std::vector<Pid> path;
    std::string detail;
};

struct ExplorationReport {
    std::uint64_t states = 0;
    std::uint64_t transitions = 0;
    std::size_t max_depth = 0;
    std::map<Property, std::uint64_t> violations;
    std::uint64_t deadlock_states = 0;
    std::int64_t max_token = 0;
    std::int64_t token_cap = 0;
    std::uint64_t token_cap_cuts = 0;
    bool truncated = false;
    std::vector<Counterexample> counterexamples;
    std::vector<Counterexample> deadlocks;
    std::vector<std::string> keys;
    std::vector<std::pair<std::vector<Pid>, std::string>> samples;
    std::vector<std::pair<std::vector<Pid>, std::vector<Pid>>> merges;

    std::uint64_t violation_count(Property p) const;
    std::uint64_t total_violations() const;
    bool clean() const { return total_violations() == 0 && deadlock_states == 0; }
};

/// Depth-first search over every interleaving of `workload` on `spec`.
/// States are keyed on global store, local environments, workload
/// positions and the monitors' automaton state; caches are ignored.
/// Checks mutual exclusion, FCFS (glb, bwbgme), the flip invariant and token bound
/// (bwbgme) and deadlock at every state. A violating state is recorded
/// and not expanded.
ExplorationReport explore(std::shared_ptr<const AlgorithmSpec> spec, const Workload& workload,
                          const ExploreOptions& options = {});

std::string to_string(const ExplorationReport& r);

}  // namespace gme
