#pragma once

// Step-level execution of N processes over the CC memory model.

#include "gme/memcc.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gme {

enum class Section : std::uint8_t { Remainder, Doorway, Waiting, CS, Exit };

std::string_view to_string(Section s);

enum class Access : std::uint8_t { Local, Read, Write, Idle };

std::string_view to_string(Access a);

/// Section-transition markers carried by a TraceEvent (bit set).
enum Marker : std::uint8_t {
    kDoorwayStart = 1 << 0,
    kDoorwayComplete = 1 << 1,
    kCsEnter = 1 << 2,
    kCsExit = 1 << 3,
    kExitComplete = 1 << 4,
};

/// Set on the step that finishes one evaluation of a wait-until condition.
enum class WaitOutcome : std::uint8_t { None, Passed, Failed };

struct TraceEvent {
    std::uint64_t step = 0;
    Pid pid = 0;
    int line = 0;  ///< pseudocode line of the executed statement
    Access access = Access::Local;
    std::optional<RegisterId> reg;
    std::optional<CellValue> value;
    bool rmr = false;
    Section section = Section::Remainder;  ///< section the step belongs to
    std::uint8_t markers = 0;
    WaitOutcome wait = WaitOutcome::None;
    int loop_index = 0;  ///< loop variable j at the time of the step, 0 if none
    std::int64_t session = 0;
    int invocation = -1;  ///< 0-based invocation number, -1 when idle
    bool all_blocked = false;  ///< after this step every active process is effectively blocked

    bool has(Marker m) const { return (markers & m) != 0; }
    bool shared() const { return access == Access::Read || access == Access::Write; }
};

struct TraceHeader {
    std::string algorithm;
    int n = 0;
    bool uses_sessions = true;
    std::optional<Color> initial_global_color;
    bool single_session = false;
};

struct Invocation {
    std::int64_t session = 1;
    int cs_steps = 0;  ///< local steps spent inside the critical section
};

/// Finite per-process request sequences.
struct Workload {
    std::vector<std::vector<Invocation>> per_process;

    int processes() const { return static_cast<int>(per_process.size()); }
    std::size_t total_invocations() const;
    bool single_session() const;

    /// Every process requests its own session (pid) `count` times.
    static Workload conflicting(int n, int count, int cs_steps = 0);
    /// Every process requests session 1 `count` times.
    static Workload same_session(int n, int count, int cs_steps = 0);
    static Workload from_sessions(const std::vector<std::vector<std::int64_t>>& sessions,
                                  int cs_steps = 0);
};

/// Private state of one process.
struct LocalEnv {
    int pc = 0;
    int sub = 0;  ///< read index inside a multi-read condition evaluation
    int j = 0;
    std::int64_t mysession = 0;
    Color mycolor = Color::White;
    std::int64_t mynumber = 0;
    Triple other{};
    std::int64_t acc = 0;      ///< running maximum while scanning tokens
    std::int64_t scratch = 0;  ///< value held between reads of one evaluation
    int cs_left = 0;
    int started = 0;  ///< invocations begun so far

    friend bool operator==(const LocalEnv&, const LocalEnv&) = default;
};

struct PcInfo {
    int line;
    Section section;
    bool wait;
    std::string_view label;
};

class StepContext;

/// A mutual-exclusion algorithm compiled to a step-level state machine.
/// Each call to step() performs at most one shared-memory access.
class AlgorithmSpec {
public:
    explicit AlgorithmSpec(int n);
    virtual ~AlgorithmSpec() = default;

    int n() const { return n_; }

    virtual std::string_view name() const = 0;
    virtual std::vector<RegisterDecl> registers() const = 0;
    virtual std::span<const PcInfo> pcs() const = 0;
    /// Execute one atomic step of `pid`. Called with pc at the remainder pc
    /// only after the machine loaded a new invocation.
    virtual void step(Pid pid, LocalEnv& env, StepContext& ctx) const = 0;
    /// Full wait condition of the line `env.pc` evaluated against the global
    /// store; nullopt when pc is not a wait line.
    virtual std::optional<bool> wait_condition(Pid pid, const LocalEnv& env,
                                               const Memory& mem) const = 0;
    /// False for classical mutual exclusion, where every pair conflicts.
    virtual bool uses_sessions() const { return true; }
    /// Initial value of GlobalColor, when the algorithm has one.
    virtual std::optional<Color> initial_global_color() const { return std::nullopt; }

    static constexpr int kRemainderPc = 0;

    const PcInfo& pc_info(int pc) const;
    Section section_of(const LocalEnv& env) const { return pc_info(env.pc).section; }

    /// Throws ConfigError unless every doorway and exit pc is free of waits.
    void certify() const;

private:
    int n_;
};

/// Mediates the single shared access a step is allowed and fills in the
/// step's TraceEvent.
class StepContext {
public:
    StepContext(Memory& mem, Pid pid, TraceEvent& ev) : mem_(mem), pid_(pid), ev_(ev) {}

    CellValue read(RegisterId reg);
    void write(RegisterId reg, const CellValue& v);

    std::int64_t read_int(RegisterId reg) { return std::get<std::int64_t>(read(reg)); }
    bool read_bool(RegisterId reg) { return std::get<bool>(read(reg)); }
    Color read_color(RegisterId reg) { return std::get<Color>(read(reg)); }
    Triple read_triple(RegisterId reg) { return std::get<Triple>(read(reg)); }

    void line(int l) { ev_.line = l; }
    void mark(Marker m) { ev_.markers |= m; }
    void wait(bool passed) { ev_.wait = passed ? WaitOutcome::Passed : WaitOutcome::Failed; }
    void section(Section s) { ev_.section = s; }

    bool accessed() const { return accessed_; }

private:
    void claim();

    Memory& mem_;
    Pid pid_;
    TraceEvent& ev_;
    bool accessed_ = false;
};

/// Global store, caches, ledger and every process's runtime.
class System {
public:
    System(std::shared_ptr<const AlgorithmSpec> spec, Workload workload);

    /// One atomic step of `pid`. A process in the remainder section with an
    /// exhausted workload produces an Idle event and no state change.
    TraceEvent step(Pid pid);

    bool effectively_blocked(Pid pid) const;
    /// At least one process is outside the remainder section and every such
    /// process is effectively blocked.
    bool deadlocked() const;
    /// No process can ever change the state again.
    bool stuck() const;

    bool finished(Pid pid) const;
    bool all_finished() const;
    bool has_pending_work(Pid pid) const;

    Section section(Pid pid) const;
    int n() const { return spec_->n(); }
    const AlgorithmSpec& spec() const { return *spec_; }
    std::shared_ptr<const AlgorithmSpec> spec_ptr() const { return spec_; }
    const Workload& workload() const { return *workload_; }
    const Memory& memory() const { return mem_; }
    Memory& memory() { return mem_; }
    const LocalEnv& local(Pid pid) const { return envs_.at(static_cast<std::size_t>(pid - 1)); }
    std::uint64_t steps() const { return steps_; }

    /// When on (the default) every step re-verifies cache coherence.
    void set_checked(bool on) { checked_ = on; }

    /// Compact encoding of global store, local environments and workload
    /// positions. Caches and ledger are deliberately left out.
    std::string state_key() const;
    void append_state_key(std::string& out) const;

private:
    std::shared_ptr<const AlgorithmSpec> spec_;
    std::shared_ptr<const Workload> workload_;
    Memory mem_;
    std::vector<LocalEnv> envs_;
    std::uint64_t steps_ = 0;
    bool checked_ = true;
};

/// Source of the next process to step.
class SchedulePolicy {
public:
    virtual ~SchedulePolicy() = default;
    /// nullopt ends the run.
    virtual std::optional<Pid> next(const System& sys) = 0;
};

/// Receives every TraceEvent of a run.
class TraceObserver {
public:
    virtual ~TraceObserver() = default;
    virtual void begin(const TraceHeader& header) { (void)header; }
    virtual void observe(const TraceEvent& ev) = 0;
};

struct Trace {
    TraceHeader header;
    std::vector<TraceEvent> events;
    bool truncated = false;  ///< step cap reached before every workload completed
};

TraceHeader make_header(const System& sys);

struct RunOutcome {
    Trace trace;
    bool truncated = false;
    bool deadlocked = false;  ///< run stopped because nothing could move
    std::uint64_t steps = 0;
};

/// Step `sys` in the order chosen by `schedule` until every workload is
/// complete, the schedule ends, or `step_cap` steps were taken. Every event
/// goes to every observer. `keep_trace` false leaves trace.events empty.
RunOutcome run(System& sys, SchedulePolicy& schedule, std::span<TraceObserver* const> observers,
               std::uint64_t step_cap, bool keep_trace = true);

}  // namespace gme
