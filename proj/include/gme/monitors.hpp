#pragma once

// Property checkers over trace events. Each monitor is a TraceObserver that
// can run inline with a simulation; the check_* functions feed a finished
// trace through a fresh monitor.

#include "gme/machine.hpp"

#include <array>
#include <map>
#include <memory>

namespace gme {

enum class Property {
    MutualExclusion,
    Fcfs,
    BoundedExit,
    ConcurrentEntry,
    FlipInvariant,
    TokenBound,
    Progress,
    GlbLineRmr,
};

std::string_view to_string(Property p);
Property parse_property(std::string_view s);

enum class Status { Pass, Fail, Inapplicable };

std::string_view to_string(Status s);

struct Witness {
    std::uint64_t step = 0;
    Pid pid = 0;

    friend bool operator==(const Witness&, const Witness&) = default;
};

struct Verdict {
    Verdict() = default;
    Verdict(Property p, Status s = Status::Pass, std::vector<Witness> w = {}, std::string d = {})
        : property(p), status(s), witness(std::move(w)), detail(std::move(d))
    {
    }

    Property property = Property::MutualExclusion;
    Status status = Status::Pass;
    std::vector<Witness> witness;  ///< first violation found, empty on pass
    std::string detail;

    bool failed() const { return status == Status::Fail; }
};

std::string to_string(const Verdict& v);

inline constexpr std::size_t kSectionCount = 5;

/// One invocation as seen in a trace.
struct InvocationRecord {
    Pid pid = 0;
    int invocation = 0;
    std::int64_t session = 0;
    std::optional<std::uint64_t> doorway_start;
    std::optional<std::uint64_t> doorway_complete;
    std::optional<std::uint64_t> cs_enter;
    std::optional<std::uint64_t> cs_exit;
    std::optional<std::uint64_t> exit_complete;
    std::array<std::uint64_t, kSectionCount> rmr{};      ///< indexed by Section
    std::array<std::uint64_t, kSectionCount> shared{};   ///< shared accesses by Section
    std::array<std::uint64_t, kSectionCount> writes{};
    std::uint64_t entry_steps = 0;  ///< own steps in doorway and waiting room
    std::uint64_t false_waits = 0;  ///< false wait evaluations in the entry section
    std::optional<CellValue> token;  ///< own Token value last written before cs-enter

    std::uint64_t total_rmr() const;
    bool complete() const { return exit_complete.has_value(); }
};

/// Builds InvocationRecords as events arrive.
class InvocationCollector : public TraceObserver {
public:
    void begin(const TraceHeader& header) override;
    void observe(const TraceEvent& ev) override;
    const std::vector<InvocationRecord>& records() const { return records_; }

private:
    std::vector<InvocationRecord> records_;
    std::map<std::pair<Pid, int>, std::size_t> index_;
};

std::vector<InvocationRecord> collect_invocations(const Trace& trace);

class Monitor : public TraceObserver {
public:
    virtual Property property() const = 0;
    virtual Verdict verdict() const = 0;
};

/// No two conflicting processes in the CS at the same time. Without
/// sessions every pair conflicts.
class MutualExclusionMonitor final : public Monitor {
public:
    void begin(const TraceHeader& header) override;
    void observe(const TraceEvent& ev) override;
    Property property() const override { return Property::MutualExclusion; }
    Verdict verdict() const override { return verdict_; }

private:
    struct Inside {
        std::int64_t session;
        std::uint64_t since;
    };
    bool uses_sessions_ = true;
    std::map<Pid, Inside> inside_;
    Verdict verdict_{Property::MutualExclusion};
};

/// If P_i completes its doorway before a conflicting P_j starts its own,
/// P_j does not enter the CS before P_i.
class FcfsMonitor final : public Monitor {
public:
    void begin(const TraceHeader& header) override;
    void observe(const TraceEvent& ev) override;
    Property property() const override { return Property::Fcfs; }
    Verdict verdict() const override { return verdict_; }

private:
    struct Current {
        std::int64_t session = 0;
        std::optional<std::uint64_t> doorway_complete;
        bool entered = false;
        std::map<Pid, std::uint64_t> preceded_by;  ///< pid -> its doorway-complete step
    };
    bool uses_sessions_ = true;
    std::map<Pid, Current> current_;
    Verdict verdict_{Property::Fcfs};
};

/// Allowed number of shared accesses in one exit section.
struct ExitBound {
    std::uint64_t min = 0;
    std::uint64_t max = 0;
    bool writes_only = false;
};

/// GLB: exactly two writes. BL: exactly one write. BWBGME: 1..N+2 accesses.
ExitBound default_exit_bound(std::string_view algorithm, int n);

class BoundedExitMonitor final : public Monitor {
public:
    explicit BoundedExitMonitor(std::optional<ExitBound> bound = std::nullopt) : bound_(bound) {}
    void begin(const TraceHeader& header) override;
    void observe(const TraceEvent& ev) override;
    Property property() const override { return Property::BoundedExit; }
    Verdict verdict() const override { return verdict_; }
    std::uint64_t max_observed() const { return max_; }

private:
    struct Count {
        std::uint64_t shared = 0;
        std::uint64_t reads = 0;
        std::uint64_t own_steps = 0;
    };
    std::optional<ExitBound> bound_;
    ExitBound active_;
    std::map<Pid, Count> counts_;
    std::uint64_t max_ = 0;
    Verdict verdict_{Property::BoundedExit};
};

/// With a single session in the whole workload no wait line may ever
/// evaluate false. Other workloads get an inapplicable verdict.
class ConcurrentEntryMonitor final : public Monitor {
public:
    void begin(const TraceHeader& header) override;
    void observe(const TraceEvent& ev) override;
    Property property() const override { return Property::ConcurrentEntry; }
    Verdict verdict() const override { return verdict_; }
    std::uint64_t max_entry_steps() const { return max_entry_; }

private:
    bool applicable_ = true;
    std::map<Pid, std::uint64_t> entry_steps_;
    std::uint64_t max_entry_ = 0;
    Verdict verdict_{Property::ConcurrentEntry};
};

/// GlobalColor changes at most once between a process's doorway read of it
/// and the end of that process's exit section.
class FlipInvariantMonitor final : public Monitor {
public:
    void begin(const TraceHeader& header) override;
    void observe(const TraceEvent& ev) override;
    Property property() const override { return Property::FlipInvariant; }
    Verdict verdict() const override;

    struct Flip {
        std::uint64_t step;
        Pid pid;
        Color to;
    };
    const std::vector<Flip>& flips() const { return flips_; }

private:
    struct Window {
        std::uint64_t opened;
        int flips = 0;
    };
    bool applicable_ = true;
    Color color_ = Color::White;
    std::map<Pid, Window> open_;
    std::vector<Flip> flips_;
    Verdict verdict_{Property::FlipInvariant};
};

/// No committed token number above N+1. Also tracks the largest number seen,
/// for every algorithm with a Token register.
class TokenBoundMonitor final : public Monitor {
public:
    void begin(const TraceHeader& header) override;
    void observe(const TraceEvent& ev) override;
    Property property() const override { return Property::TokenBound; }
    Verdict verdict() const override;
    std::int64_t max_token() const { return max_; }

private:
    bool applicable_ = true;
    int n_ = 0;
    std::int64_t max_ = 0;
    Verdict verdict_{Property::TokenBound};
};

/// Deadlock: some event left every active process effectively blocked.
/// Starvation (heuristic): an invocation that never reaches the CS although
/// at least two invocations of other processes completed after its doorway.
class ProgressMonitor final : public Monitor {
public:
    void begin(const TraceHeader& header) override;
    void observe(const TraceEvent& ev) override;
    Property property() const override { return Property::Progress; }
    Verdict verdict() const override;

private:
    InvocationCollector collector_;
    std::optional<Witness> deadlock_;
};

/// GLB only: one pass of the line-8 or line-9 wait for a fixed j costs at
/// most five RMRs, summed over all its evaluations.
class GlbLineRmrMonitor final : public Monitor {
public:
    static constexpr std::uint64_t kLimit = 5;

    void begin(const TraceHeader& header) override;
    void observe(const TraceEvent& ev) override;
    Property property() const override { return Property::GlbLineRmr; }
    Verdict verdict() const override { return verdict_; }
    std::uint64_t max_line8() const { return max_[0]; }
    std::uint64_t max_line9() const { return max_[1]; }
    std::uint64_t passes() const { return passes_; }

private:
    struct Segment {
        int invocation = -1;
        int line = 0;
        int j = 0;
        std::uint64_t rmr = 0;
        std::uint64_t first = 0;
    };
    bool applicable_ = true;
    std::map<Pid, Segment> seg_;
    std::array<std::uint64_t, 2> max_{};
    std::uint64_t passes_ = 0;
    Verdict verdict_{Property::GlbLineRmr};
};

std::unique_ptr<Monitor> make_monitor(Property p);
/// Monitors that apply to the named algorithm by default.
std::vector<Property> default_properties(std::string_view algorithm);

/// Owns a set of monitors and exposes them as observers.
class MonitorSet {
public:
    explicit MonitorSet(const std::vector<Property>& props);
    std::vector<TraceObserver*> observers() const;
    std::vector<Verdict> verdicts() const;
    bool any_failed() const;
    template <class M>
    const M* find() const
    {
        for (const auto& m : monitors_)
            if (auto* p = dynamic_cast<const M*>(m.get()))
                return p;
        return nullptr;
    }

private:
    std::vector<std::unique_ptr<Monitor>> monitors_;
};

Verdict check_mutual_exclusion(const Trace& trace);
Verdict check_fcfs(const Trace& trace);
Verdict check_bounded_exit(const Trace& trace, std::optional<ExitBound> bound = std::nullopt);
Verdict check_concurrent_entry(const Trace& trace);
Verdict check_flip_invariant(const Trace& trace);
Verdict check_token_bound(const Trace& trace);
Verdict check_progress(const Trace& trace);
Verdict check_glb_line_rmr(const Trace& trace);
Verdict check(Property p, const Trace& trace);

struct Stat {
    std::uint64_t min = 0;
    double mean = 0.0;
    std::uint64_t max = 0;
    std::size_t count = 0;
};

Stat summarize(const std::vector<std::uint64_t>& xs);

struct RmrReport {
    std::array<Stat, kSectionCount> by_section{};  ///< per-invocation RMR in each section
    Stat per_invocation;                            ///< total RMR per complete invocation
    std::vector<std::uint64_t> per_process;         ///< all RMRs of each process, index pid-1
    std::uint64_t total = 0;
    std::size_t complete = 0;
    std::size_t incomplete = 0;
};

RmrReport rmr_report(const std::vector<InvocationRecord>& records, int n);

}  // namespace gme
