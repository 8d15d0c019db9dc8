#include "gme/machine.hpp"

#include <algorithm>
#include <stdexcept>

namespace gme {

std::string_view to_string(Section s)
{
    switch (s) {
    case Section::Remainder: return "remainder";
    case Section::Doorway: return "doorway";
    case Section::Waiting: return "waiting";
    case Section::CS: return "cs";
    case Section::Exit: return "exit";
    }
    return "?";
}

std::string_view to_string(Access a)
{
    switch (a) {
    case Access::Local: return "local";
    case Access::Read: return "read";
    case Access::Write: return "write";
    case Access::Idle: return "idle";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Workload

std::size_t Workload::total_invocations() const
{
    std::size_t total = 0;
    for (const auto& p : per_process)
        total += p.size();
    return total;
}

bool Workload::single_session() const
{
    std::optional<std::int64_t> seen;
    for (const auto& p : per_process)
        for (const auto& inv : p) {
            if (seen && *seen != inv.session)
                return false;
            seen = inv.session;
        }
    return true;
}

Workload Workload::conflicting(int n, int count, int cs_steps)
{
    Workload w;
    for (int p = 1; p <= n; ++p)
        w.per_process.emplace_back(static_cast<std::size_t>(count), Invocation{p, cs_steps});
    return w;
}

Workload Workload::same_session(int n, int count, int cs_steps)
{
    Workload w;
    for (int p = 1; p <= n; ++p)
        w.per_process.emplace_back(static_cast<std::size_t>(count), Invocation{1, cs_steps});
    return w;
}

Workload Workload::from_sessions(const std::vector<std::vector<std::int64_t>>& sessions,
                                 int cs_steps)
{
    Workload w;
    for (const auto& list : sessions) {
        auto& row = w.per_process.emplace_back();
        for (auto s : list) {
            if (s <= 0)
                throw ConfigError("session numbers must be positive");
            row.push_back({s, cs_steps});
        }
    }
    return w;
}

// ---------------------------------------------------------------------------
// AlgorithmSpec

AlgorithmSpec::AlgorithmSpec(int n) : n_(n)
{
    if (n < 1)
        throw ConfigError("algorithm needs at least one process");
}

const PcInfo& AlgorithmSpec::pc_info(int pc) const
{
    const auto table = pcs();
    if (pc < 0 || static_cast<std::size_t>(pc) >= table.size())
        throw std::logic_error("pc out of range: " + std::to_string(pc));
    return table[static_cast<std::size_t>(pc)];
}

void AlgorithmSpec::certify() const
{
    const auto table = pcs();
    if (table.empty() || table[kRemainderPc].section != Section::Remainder)
        throw ConfigError(std::string(name()) + ": pc 0 must be the remainder section");
    for (const auto& info : table) {
        if (info.wait && (info.section == Section::Doorway || info.section == Section::Exit ||
                          info.section == Section::Remainder || info.section == Section::CS))
            throw ConfigError(std::string(name()) + ": wait line " + std::to_string(info.line) +
                              " outside the waiting room");
    }
}

// ---------------------------------------------------------------------------
// StepContext

void StepContext::claim()
{
    if (accessed_)
        throw std::logic_error("a step may perform at most one shared access");
    accessed_ = true;
}

CellValue StepContext::read(RegisterId reg)
{
    claim();
    auto r = mem_.read(pid_, reg);
    ev_.access = Access::Read;
    ev_.reg = reg;
    ev_.value = r.value;
    ev_.rmr = r.rmr;
    return r.value;
}

void StepContext::write(RegisterId reg, const CellValue& v)
{
    claim();
    mem_.write(pid_, reg, v);
    ev_.access = Access::Write;
    ev_.reg = reg;
    ev_.value = v;
    ev_.rmr = true;
}

// ---------------------------------------------------------------------------
// System

System::System(std::shared_ptr<const AlgorithmSpec> spec, Workload workload)
    : spec_(std::move(spec)),
      workload_(std::make_shared<const Workload>(std::move(workload))),
      mem_(spec_->registers(), spec_->n()),
      envs_(static_cast<std::size_t>(spec_->n()))
{
    spec_->certify();
    if (workload_->processes() != spec_->n())
        throw ConfigError("workload has " + std::to_string(workload_->processes()) +
                          " processes, algorithm expects " + std::to_string(spec_->n()));
}

bool System::has_pending_work(Pid pid) const
{
    const auto& env = local(pid);
    return static_cast<std::size_t>(env.started) <
           workload_->per_process[static_cast<std::size_t>(pid - 1)].size();
}

bool System::finished(Pid pid) const
{
    return local(pid).pc == AlgorithmSpec::kRemainderPc && !has_pending_work(pid);
}

bool System::all_finished() const
{
    for (Pid p = 1; p <= n(); ++p)
        if (!finished(p))
            return false;
    return true;
}

Section System::section(Pid pid) const
{
    return spec_->section_of(local(pid));
}

TraceEvent System::step(Pid pid)
{
    if (pid < 1 || pid > n())
        throw ConfigError("schedule names unknown process " + std::to_string(pid));
    TraceEvent ev;
    ev.step = steps_++;
    ev.pid = pid;
    auto& env = envs_[static_cast<std::size_t>(pid - 1)];
    const auto& info = spec_->pc_info(env.pc);
    ev.line = info.line;
    ev.section = info.section;

    if (env.pc == AlgorithmSpec::kRemainderPc) {
        if (!has_pending_work(pid)) {
            ev.access = Access::Idle;
            return ev;
        }
        const auto& inv =
            workload_->per_process[static_cast<std::size_t>(pid - 1)][static_cast<std::size_t>(env.started)];
        env.mysession = inv.session;
        env.cs_left = inv.cs_steps;
        ++env.started;
        ev.section = Section::Doorway;
    }
    ev.loop_index = env.j;
    ev.session = env.mysession;
    ev.invocation = env.started - 1;

    StepContext ctx(mem_, pid, ev);
    spec_->step(pid, env, ctx);

    if (checked_ && !mem_.coherent())
        throw std::logic_error("cache coherence violated after step " + std::to_string(ev.step));
    if (ev.has(kExitComplete)) {
        const int started = env.started;
        env = LocalEnv{};
        env.started = started;
    }
    return ev;
}

bool System::effectively_blocked(Pid pid) const
{
    const auto& env = local(pid);
    auto cond = spec_->wait_condition(pid, env, mem_);
    return cond.has_value() && !*cond;
}

bool System::deadlocked() const
{
    bool any_active = false;
    for (Pid p = 1; p <= n(); ++p) {
        if (section(p) == Section::Remainder)
            continue;
        any_active = true;
        if (!effectively_blocked(p))
            return false;
    }
    return any_active;
}

bool System::stuck() const
{
    if (!deadlocked())
        return false;
    for (Pid p = 1; p <= n(); ++p)
        if (section(p) == Section::Remainder && has_pending_work(p))
            return false;
    return true;
}

namespace {

void put_varint(std::string& out, std::int64_t v)
{
    auto u = (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
    while (u >= 0x80) {
        out.push_back(static_cast<char>((u & 0x7f) | 0x80));
        u >>= 7;
    }
    out.push_back(static_cast<char>(u));
}

void put_cell(std::string& out, const CellValue& v)
{
    switch (kind_of(v)) {
    case CellKind::Int: put_varint(out, std::get<std::int64_t>(v)); break;
    case CellKind::Bool: out.push_back(std::get<bool>(v) ? 1 : 0); break;
    case CellKind::Color: out.push_back(static_cast<char>(std::get<Color>(v))); break;
    case CellKind::Triple: {
        const auto& t = std::get<Triple>(v);
        put_varint(out, t.session);
        out.push_back(static_cast<char>(t.color));
        put_varint(out, t.number);
        break;
    }
    }
}

}  // namespace

void System::append_state_key(std::string& out) const
{
    for (const auto& cell : mem_.store())
        put_cell(out, cell);
    for (const auto& env : envs_) {
        put_varint(out, env.pc);
        put_varint(out, env.sub);
        put_varint(out, env.j);
        put_varint(out, env.mysession);
        out.push_back(static_cast<char>(env.mycolor));
        put_varint(out, env.mynumber);
        put_varint(out, env.other.session);
        out.push_back(static_cast<char>(env.other.color));
        put_varint(out, env.other.number);
        put_varint(out, env.acc);
        put_varint(out, env.scratch);
        put_varint(out, env.cs_left);
        put_varint(out, env.started);
    }
}

std::string System::state_key() const
{
    std::string out;
    out.reserve(64);
    append_state_key(out);
    return out;
}

// ---------------------------------------------------------------------------
// run

TraceHeader make_header(const System& sys)
{
    TraceHeader h;
    h.algorithm = std::string(sys.spec().name());
    h.n = sys.n();
    h.uses_sessions = sys.spec().uses_sessions();
    h.initial_global_color = sys.spec().initial_global_color();
    h.single_session = sys.workload().single_session();
    return h;
}

RunOutcome run(System& sys, SchedulePolicy& schedule, std::span<TraceObserver* const> observers,
               std::uint64_t step_cap, bool keep_trace)
{
    RunOutcome out;
    out.trace.header = make_header(sys);
    for (auto* obs : observers)
        obs->begin(out.trace.header);

    while (!sys.all_finished()) {
        if (out.steps >= step_cap) {
            out.truncated = true;
            break;
        }
        auto pid = schedule.next(sys);
        if (!pid)
            break;
        auto ev = sys.step(*pid);
        ev.all_blocked = sys.deadlocked();
        ++out.steps;
        for (auto* obs : observers)
            obs->observe(ev);
        if (keep_trace)
            out.trace.events.push_back(ev);
        if (ev.all_blocked && sys.stuck()) {
            out.deadlocked = true;
            break;
        }
    }
    out.trace.truncated = out.truncated;
    return out;
}

}  // namespace gme
