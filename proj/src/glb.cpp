#include "gme/glb.hpp"

#include <algorithm>
#include <array>

namespace gme {

bool token_less(const TokenOrderKey& a, const TokenOrderKey& b)
{
    return a.number < b.number || (a.number == b.number && a.pid < b.pid);
}

namespace {

using namespace glb;

constexpr std::array<PcInfo, 10> kPcs{{
    {2, Section::Remainder, false, "remainder"},
    {4, Section::Doorway, false, "set-session"},
    {5, Section::Doorway, false, "read-tokens"},
    {5, Section::Doorway, false, "write-token"},
    {6, Section::Doorway, false, "clear-choosing"},
    {8, Section::Waiting, true, "wait-choosing"},
    {9, Section::Waiting, true, "wait-token"},
    {11, Section::CS, false, "critical"},
    {12, Section::Exit, false, "reset-token"},
    {13, Section::Exit, false, "reset-session"},
}};

RegisterId session(int i) { return {RegisterFamily::Session, i}; }
RegisterId token(int i) { return {RegisterFamily::Token, i}; }
RegisterId choosing(int i) { return {RegisterFamily::Choosing, i}; }

bool idle_or_same(std::int64_t other_session, std::int64_t mine)
{
    return other_session == 0 || other_session == mine;
}

}  // namespace

GlbAlgorithm::GlbAlgorithm(int n) : AlgorithmSpec(n) {}

std::vector<RegisterDecl> GlbAlgorithm::registers() const
{
    return {
        {RegisterFamily::Session, CellKind::Int, n(), std::int64_t{0}},
        {RegisterFamily::Token, CellKind::Int, n(), std::int64_t{0}},
        {RegisterFamily::Choosing, CellKind::Bool, n(), false},
    };
}

std::span<const PcInfo> GlbAlgorithm::pcs() const
{
    return kPcs;
}

int GlbAlgorithm::next_other(Pid self, int j) const
{
    ++j;
    if (j == self)
        ++j;
    return j;
}

void GlbAlgorithm::step(Pid i, LocalEnv& env, StepContext& ctx) const
{
    auto pass = [&] {
        ctx.wait(true);
        env.sub = 0;
        env.scratch = 0;
    };
    auto fail = [&] {
        ctx.wait(false);
        env.sub = 0;
        env.scratch = 0;
    };

    switch (env.pc) {
    case kRemainder:
        ctx.line(3);
        ctx.write(choosing(i), true);
        ctx.mark(kDoorwayStart);
        env.pc = kSetSession;
        break;

    case kSetSession:
        ctx.write(session(i), env.mysession);
        env.acc = 0;
        env.j = next_other(i, 0);
        env.pc = env.j > n() ? kWriteToken : kReadTokens;
        if (env.j > n())
            env.j = 0;
        break;

    case kReadTokens:
        env.acc = std::max(env.acc, ctx.read_int(token(env.j)));
        env.j = next_other(i, env.j);
        if (env.j > n()) {
            env.j = 0;
            env.pc = kWriteToken;
        }
        break;

    case kWriteToken:
        ctx.write(token(i), checked_add(env.acc, 1));
        env.acc = 0;
        env.pc = kClearChoosing;
        break;

    case kClearChoosing:
        ctx.write(choosing(i), false);
        ctx.mark(kDoorwayComplete);
        env.j = 1;
        env.sub = 0;
        env.pc = kWaitChoosing;
        break;

    case kWaitChoosing:
        // (Choosing[j] = false) or (Session[j] in {0, mysession})
        if (env.sub == 0) {
            if (!ctx.read_bool(choosing(env.j))) {
                pass();
                env.pc = kWaitToken;
            } else {
                env.sub = 1;
            }
        } else {
            if (idle_or_same(ctx.read_int(session(env.j)), env.mysession)) {
                pass();
                env.pc = kWaitToken;
            } else {
                fail();
            }
        }
        break;

    case kWaitToken: {
        // ((Token[i], i) < (Token[j], j)) or (Token[j] = 0) or (Session[j] in {0, mysession})
        bool passed = false;
        if (env.sub == 0) {
            env.scratch = ctx.read_int(token(i));
            env.sub = 1;
            break;
        }
        if (env.sub == 1) {
            const auto tj = ctx.read_int(token(env.j));
            if (token_less({env.scratch, i}, {tj, env.j}) || tj == 0) {
                passed = true;
            } else {
                env.sub = 2;
                env.scratch = 0;
                break;
            }
        } else {
            if (idle_or_same(ctx.read_int(session(env.j)), env.mysession))
                passed = true;
            else
                fail();
        }
        if (passed) {
            pass();
            if (++env.j > n()) {
                env.j = 0;
                env.pc = kCritical;
                ctx.mark(kCsEnter);
            } else {
                env.pc = kWaitChoosing;
            }
        }
        break;
    }

    case kCritical:
        if (env.cs_left > 0) {
            --env.cs_left;
        } else {
            ctx.mark(kCsExit);
            env.pc = kResetToken;
        }
        break;

    case kResetToken:
        ctx.write(token(i), std::int64_t{0});
        env.pc = kResetSession;
        break;

    case kResetSession:
        ctx.write(session(i), std::int64_t{0});
        ctx.mark(kExitComplete);
        env.pc = kRemainder;
        break;

    default:
        throw std::logic_error("glb: bad pc");
    }
}

std::optional<bool> GlbAlgorithm::wait_condition(Pid i, const LocalEnv& env,
                                                 const Memory& mem) const
{
    auto int_at = [&](RegisterId r) { return std::get<std::int64_t>(mem.peek(r)); };
    switch (env.pc) {
    case kWaitChoosing:
        return !std::get<bool>(mem.peek(choosing(env.j))) ||
               idle_or_same(int_at(session(env.j)), env.mysession);
    case kWaitToken: {
        const auto tj = int_at(token(env.j));
        return token_less({int_at(token(i)), i}, {tj, env.j}) || tj == 0 ||
               idle_or_same(int_at(session(env.j)), env.mysession);
    }
    default:
        return std::nullopt;
    }
}

std::shared_ptr<const AlgorithmSpec> build_glb(int n)
{
    if (n < 1)
        throw ConfigError("glb needs n >= 1");
    return std::make_shared<GlbAlgorithm>(n);
}

}  // namespace gme
