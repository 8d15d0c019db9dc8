#pragma once

// Burns-Lamport one-bit mutual exclusion. Sessions are ignored: every pair
// of processes conflicts.

#include "gme/machine.hpp"

#include <map>
#include <memory>

namespace gme {

namespace bl {

enum Pc : int {
    kRemainder = 0,
    kSetBit,      // line 1, label L
    kScanLower,   // lines 2-3
    kResetBit,    // line 4
    kWaitLower,   // line 5, followed by goto L
    kWaitHigher,  // lines 9-10
    kEmptyLoop,   // lines 9-11 with i = N: no shared access
    kCritical,
    kClearBit,    // exit write
};

}  // namespace bl

class BlAlgorithm final : public AlgorithmSpec {
public:
    explicit BlAlgorithm(int n);

    std::string_view name() const override { return "bl"; }
    std::vector<RegisterDecl> registers() const override;
    std::span<const PcInfo> pcs() const override;
    void step(Pid pid, LocalEnv& env, StepContext& ctx) const override;
    std::optional<bool> wait_condition(Pid pid, const LocalEnv& env,
                                       const Memory& mem) const override;
    bool uses_sessions() const override { return false; }

private:
    void after_lower_scan(Pid i, LocalEnv& env, StepContext& ctx) const;
    void next_higher(LocalEnv& env, StepContext& ctx) const;
};

std::shared_ptr<const AlgorithmSpec> build_bl(int n);

struct BlockCounts {
    std::vector<std::uint64_t> per_process;  ///< index pid-1
    /// blocked_by[(waiter, blocker)] = number of block events
    std::map<std::pair<Pid, Pid>, std::uint64_t> blocked_by;

    std::uint64_t of(Pid p) const { return per_process.at(static_cast<std::size_t>(p - 1)); }
    std::uint64_t by(Pid waiter, Pid blocker) const;
};

/// Number of times each process starts waiting at line 5 or line 10 with the
/// condition observed false. A run of consecutive false evaluations of the
/// same wait counts once. Throws ConfigError for non-BL traces.
BlockCounts block_events(const Trace& trace);

}  // namespace gme
