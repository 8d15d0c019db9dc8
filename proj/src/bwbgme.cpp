#include "gme/bwbgme.hpp"

#include <algorithm>
#include <array>

namespace gme {

Color opposite_color(Color c)
{
    switch (c) {
    case Color::Black: return Color::White;
    case Color::White: return Color::Black;
    case Color::Bottom: break;
    }
    throw ConfigError("opposite color is undefined for bottom");
}

bool has_priority(const PriorityKey& self, const PriorityKey& other, Color gc)
{
    if (self.color != other.color)
        return self.color != gc;
    return self.number < other.number || (self.number == other.number && self.pid < other.pid);
}

std::string_view to_string(BwbgmeVariant v)
{
    switch (v) {
    case BwbgmeVariant::Standard: return "standard";
    case BwbgmeVariant::NoNumberGuard: return "no-number-guard";
    case BwbgmeVariant::NoOppositeScan: return "no-opposite-scan";
    case BwbgmeVariant::Naive: return "naive";
    }
    return "?";
}

BwbgmeVariant parse_bwbgme_variant(std::string_view s)
{
    for (auto v : {BwbgmeVariant::Standard, BwbgmeVariant::NoNumberGuard,
                   BwbgmeVariant::NoOppositeScan, BwbgmeVariant::Naive})
        if (to_string(v) == s)
            return v;
    throw ConfigError("unknown bwbgme variant: " + std::string(s));
}

namespace {

using namespace bwbgme;

constexpr std::array<PcInfo, 14> kPcs{{
    {2, Section::Remainder, false, "remainder"},
    {4, Section::Doorway, false, "set-choosing"},
    {5, Section::Doorway, false, "read-color"},
    {8, Section::Doorway, false, "scan-tokens"},
    {14, Section::Doorway, false, "commit-token"},
    {15, Section::Doorway, false, "clear-choosing"},
    {17, Section::Waiting, true, "wait-choosing"},
    {18, Section::Waiting, false, "read-branch"},
    {19, Section::Waiting, true, "wait-same-color"},
    {21, Section::Waiting, true, "wait-other-color"},
    {24, Section::CS, false, "critical"},
    {26, Section::Exit, false, "opposite-scan"},
    {28, Section::Exit, false, "flip-color"},
    {34, Section::Exit, false, "reset-token"},
}};

constexpr RegisterId kGlobalColor{RegisterFamily::GlobalColor, 0};

RegisterId token(int i) { return {RegisterFamily::Token, i}; }
RegisterId choosing(int i) { return {RegisterFamily::Choosing, i}; }

bool idle_or_same(std::int64_t other_session, std::int64_t mine)
{
    return other_session == 0 || other_session == mine;
}

bool active_opposite(const Triple& t, Color mycolor)
{
    return t.session != 0 && t.color == opposite_color(mycolor);
}

// Line 19.
bool same_color_clear(const Triple& t, Pid i, const LocalEnv& env, int j)
{
    return (env.mynumber < t.number || (env.mynumber == t.number && i < j)) ||
           t.color != env.mycolor || idle_or_same(t.session, env.mysession);
}

}  // namespace

BwbgmeAlgorithm::BwbgmeAlgorithm(int n, Color initial_color, BwbgmeVariant variant)
    : AlgorithmSpec(n), initial_(initial_color), variant_(variant)
{
    if (initial_color == Color::Bottom)
        throw ConfigError("GlobalColor must start black or white");
}

std::vector<RegisterDecl> BwbgmeAlgorithm::registers() const
{
    return {
        {RegisterFamily::GlobalColor, CellKind::Color, 0, initial_},
        {RegisterFamily::Token, CellKind::Triple, n(), Triple{}},
        {RegisterFamily::Choosing, CellKind::Bool, n(), false},
    };
}

std::span<const PcInfo> BwbgmeAlgorithm::pcs() const
{
    return kPcs;
}

void BwbgmeAlgorithm::next_j(LocalEnv& env, StepContext& ctx) const
{
    env.sub = 0;
    env.other = {};
    if (++env.j > n()) {
        env.j = 0;
        env.pc = kCritical;
        ctx.mark(kCsEnter);
    } else {
        env.pc = kWaitChoosing;
    }
}

void BwbgmeAlgorithm::after_critical(LocalEnv& env) const
{
    const bool guard = env.mynumber != 1;
    switch (variant_) {
    case BwbgmeVariant::Standard:
        env.pc = guard ? kOppositeScan : kResetToken;
        break;
    case BwbgmeVariant::NoNumberGuard:
        env.pc = kOppositeScan;
        break;
    case BwbgmeVariant::NoOppositeScan:
        env.pc = guard ? kFlipColor : kResetToken;
        break;
    case BwbgmeVariant::Naive:
        env.pc = kFlipColor;
        break;
    }
    env.j = env.pc == kOppositeScan ? 1 : 0;
}

void BwbgmeAlgorithm::step(Pid i, LocalEnv& env, StepContext& ctx) const
{
    auto branch_on = [&](const Triple& t) {
        env.pc = t.color == env.mycolor ? kWaitSameColor : kWaitOtherColor;
        env.sub = 0;
    };

    switch (env.pc) {
    case kRemainder:
        ctx.line(3);
        ctx.write(token(i), Triple{env.mysession, Color::Bottom, 0});
        ctx.mark(kDoorwayStart);
        env.pc = kSetChoosing;
        break;

    case kSetChoosing:
        ctx.write(choosing(i), true);
        env.pc = kReadColor;
        break;

    case kReadColor:
        env.mycolor = ctx.read_color(kGlobalColor);
        env.mynumber = 0;
        env.j = 1;
        env.pc = kScanTokens;
        break;

    case kScanTokens: {
        const auto t = ctx.read_triple(token(env.j));
        if (t.color == env.mycolor && !idle_or_same(t.session, env.mysession))
            env.mynumber = std::max(env.mynumber, t.number);
        if (++env.j > n()) {
            env.j = 0;
            env.mynumber = checked_add(env.mynumber, 1);
            env.pc = kCommitToken;
        }
        break;
    }

    case kCommitToken:
        ctx.write(token(i), Triple{env.mysession, env.mycolor, env.mynumber});
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
        // (Choosing[j] = false) or (Token[j].session = mysession)
        if (env.sub == 0) {
            if (!ctx.read_bool(choosing(env.j))) {
                ctx.wait(true);
                env.pc = kReadBranch;
            } else {
                env.sub = 1;
            }
        } else {
            const auto t = ctx.read_triple(token(env.j));
            if (t.session == env.mysession) {
                ctx.wait(true);
                branch_on(t);
            } else {
                ctx.wait(false);
                env.sub = 0;
            }
        }
        break;

    case kReadBranch:
        branch_on(ctx.read_triple(token(env.j)));
        break;

    case kWaitSameColor:
        if (same_color_clear(ctx.read_triple(token(env.j)), i, env, env.j)) {
            ctx.wait(true);
            next_j(env, ctx);
        } else {
            ctx.wait(false);
        }
        break;

    case kWaitOtherColor:
        // (GlobalColor != mycolor) or (Token[j].color = mycolor) or
        // (Token[j].session in {0, mysession})
        if (env.sub == 0) {
            if (ctx.read_color(kGlobalColor) != env.mycolor) {
                ctx.wait(true);
                next_j(env, ctx);
            } else {
                env.sub = 1;
            }
        } else {
            const auto t = ctx.read_triple(token(env.j));
            if (t.color == env.mycolor || idle_or_same(t.session, env.mysession)) {
                ctx.wait(true);
                next_j(env, ctx);
            } else {
                ctx.wait(false);
                env.sub = 0;
            }
        }
        break;

    case kCritical:
        if (env.cs_left > 0) {
            --env.cs_left;
        } else {
            ctx.mark(kCsExit);
            after_critical(env);
        }
        break;

    case kOppositeScan:
        if (active_opposite(ctx.read_triple(token(env.j)), env.mycolor)) {
            env.j = 0;
            env.pc = kResetToken;
        } else if (++env.j > n()) {
            env.j = 0;
            env.pc = kFlipColor;
        }
        break;

    case kFlipColor:
        ctx.line(env.mycolor == Color::Black ? 28 : 30);
        ctx.write(kGlobalColor, opposite_color(env.mycolor));
        env.pc = kResetToken;
        break;

    case kResetToken:
        ctx.write(token(i), Triple{});
        ctx.mark(kExitComplete);
        env.pc = kRemainder;
        break;

    default:
        throw std::logic_error("bwbgme: bad pc");
    }
}

std::optional<bool> BwbgmeAlgorithm::wait_condition(Pid i, const LocalEnv& env,
                                                    const Memory& mem) const
{
    auto tok = [&](int j) { return std::get<Triple>(mem.peek(token(j))); };
    switch (env.pc) {
    case kWaitChoosing:
        return !std::get<bool>(mem.peek(choosing(env.j))) || tok(env.j).session == env.mysession;
    case kWaitSameColor:
        return same_color_clear(tok(env.j), i, env, env.j);
    case kWaitOtherColor: {
        const auto t = tok(env.j);
        return std::get<Color>(mem.peek(kGlobalColor)) != env.mycolor || t.color == env.mycolor ||
               idle_or_same(t.session, env.mysession);
    }
    default:
        return std::nullopt;
    }
}

std::shared_ptr<const AlgorithmSpec> build_bwbgme(int n, Color initial_color,
                                                  BwbgmeVariant variant)
{
    if (n < 1)
        throw ConfigError("bwbgme needs n >= 1");
    return std::make_shared<BwbgmeAlgorithm>(n, initial_color, variant);
}

bool opposite_color_scan(const Memory& mem, Color mycolor)
{
    for (int j = 1; j <= mem.processes(); ++j)
        if (active_opposite(std::get<Triple>(mem.peek(token(j))), mycolor))
            return true;
    return false;
}

std::pair<bool, int> opposite_color_scan(Memory& mem, Pid pid, Color mycolor)
{
    const Color target = opposite_color(mycolor);
    int reads = 0;
    for (int j = 1; j <= mem.processes(); ++j) {
        ++reads;
        const auto t = std::get<Triple>(mem.read(pid, token(j)).value);
        if (t.session != 0 && t.color == target)
            return {true, reads};
    }
    return {false, reads};
}

}  // namespace gme
