#include "gme/bl.hpp"

#include <array>
#include <tuple>

namespace gme {

namespace {

using namespace bl;

constexpr std::array<PcInfo, 9> kPcs{{
    {0, Section::Remainder, false, "remainder"},
    {1, Section::Waiting, false, "set-bit"},  // only reached by goto L
    {3, Section::Waiting, false, "scan-lower"},
    {4, Section::Waiting, false, "reset-bit"},
    {5, Section::Waiting, true, "wait-lower"},
    {10, Section::Waiting, true, "wait-higher"},
    {9, Section::Waiting, false, "empty-loop"},
    {11, Section::CS, false, "critical"},
    {12, Section::Exit, false, "clear-bit"},
}};

RegisterId competing(int i) { return {RegisterFamily::Competing, i}; }

}  // namespace

BlAlgorithm::BlAlgorithm(int n) : AlgorithmSpec(n) {}

std::vector<RegisterDecl> BlAlgorithm::registers() const
{
    return {{RegisterFamily::Competing, CellKind::Bool, n(), false}};
}

std::span<const PcInfo> BlAlgorithm::pcs() const
{
    return kPcs;
}

void BlAlgorithm::after_lower_scan(Pid i, LocalEnv& env, StepContext& ctx) const
{
    env.sub = 0;
    if (i < n()) {
        env.j = i + 1;
        env.pc = kWaitHigher;
    } else {
        env.j = 0;
        env.pc = kCritical;
        ctx.mark(kCsEnter);
    }
}

void BlAlgorithm::next_higher(LocalEnv& env, StepContext& ctx) const
{
    if (++env.j > n()) {
        env.j = 0;
        env.pc = kCritical;
        ctx.mark(kCsEnter);
    }
}

void BlAlgorithm::step(Pid i, LocalEnv& env, StepContext& ctx) const
{
    switch (env.pc) {
    case kRemainder:
    case kSetBit:
        // The doorway is the single write at L; on later visits (goto L)
        // the write belongs to the waiting room.
        if (env.pc == kRemainder) {
            ctx.mark(kDoorwayStart);
            ctx.mark(kDoorwayComplete);
        }
        ctx.line(1);
        ctx.write(competing(i), true);
        if (i > 1) {
            env.j = 1;
            env.pc = kScanLower;
        } else if (n() > 1) {
            env.j = 2;
            env.pc = kWaitHigher;
        } else {
            env.j = 0;
            env.pc = kEmptyLoop;
        }
        break;

    case kScanLower:
        if (ctx.read_bool(competing(env.j))) {
            env.pc = kResetBit;
        } else if (++env.j == i) {
            after_lower_scan(i, env, ctx);
        }
        break;

    case kResetBit:
        ctx.write(competing(i), false);
        env.pc = kWaitLower;
        break;

    case kWaitLower:
        if (!ctx.read_bool(competing(env.j))) {
            ctx.wait(true);
            env.j = 0;
            env.pc = kSetBit;
        } else {
            ctx.wait(false);
        }
        break;

    case kWaitHigher:
        if (!ctx.read_bool(competing(env.j))) {
            ctx.wait(true);
            next_higher(env, ctx);
        } else {
            ctx.wait(false);
        }
        break;

    case kEmptyLoop:
        env.pc = kCritical;
        ctx.mark(kCsEnter);
        break;

    case kCritical:
        if (env.cs_left > 0) {
            --env.cs_left;
        } else {
            ctx.mark(kCsExit);
            env.pc = kClearBit;
        }
        break;

    case kClearBit:
        ctx.write(competing(i), false);
        ctx.mark(kExitComplete);
        env.pc = kRemainder;
        break;

    default:
        throw std::logic_error("bl: bad pc");
    }
}

std::optional<bool> BlAlgorithm::wait_condition(Pid, const LocalEnv& env, const Memory& mem) const
{
    if (env.pc == kWaitLower || env.pc == kWaitHigher)
        return !std::get<bool>(mem.peek(competing(env.j)));
    return std::nullopt;
}

std::shared_ptr<const AlgorithmSpec> build_bl(int n)
{
    if (n < 1)
        throw ConfigError("bl needs n >= 1");
    return std::make_shared<BlAlgorithm>(n);
}

std::uint64_t BlockCounts::by(Pid waiter, Pid blocker) const
{
    auto it = blocked_by.find({waiter, blocker});
    return it == blocked_by.end() ? 0 : it->second;
}

BlockCounts block_events(const Trace& trace)
{
    if (trace.header.algorithm != "bl")
        throw ConfigError("block_events needs a bl trace, got " + trace.header.algorithm);
    BlockCounts out;
    out.per_process.assign(static_cast<std::size_t>(trace.header.n), 0);
    // last event per pid: (line, j, failed)
    std::vector<std::tuple<int, int, bool>> last(static_cast<std::size_t>(trace.header.n) + 1,
                                                 {0, 0, false});
    for (const auto& ev : trace.events) {
        if (ev.access == Access::Idle)
            continue;
        const bool failed = ev.wait == WaitOutcome::Failed;
        auto& prev = last[static_cast<std::size_t>(ev.pid)];
        if (failed && (ev.line == 5 || ev.line == 10)) {
            const bool continuing = std::get<2>(prev) && std::get<0>(prev) == ev.line &&
                                    std::get<1>(prev) == ev.loop_index;
            if (!continuing) {
                ++out.per_process[static_cast<std::size_t>(ev.pid - 1)];
                ++out.blocked_by[{ev.pid, ev.loop_index}];
            }
        }
        prev = {ev.line, ev.loop_index, failed};
    }
    return out;
}

}  // namespace gme
