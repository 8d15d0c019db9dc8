#pragma once

// Black-and-white bakery algorithm for group mutual exclusion. Tokens are
// (session, color, number) triples with number bounded by N+1.

#include "gme/machine.hpp"

#include <memory>

namespace gme {

/// Opposite of a token or global color. Throws ConfigError for Bottom,
/// which has no opposite.
Color opposite_color(Color c);

/// Token of a committed process, compared relative to a GlobalColor value.
struct PriorityKey {
    Color color = Color::White;
    std::int64_t number = 0;
    Pid pid = 0;
};

/// True when `self` goes before the conflicting process `other` given the
/// current GlobalColor `gc`.
bool has_priority(const PriorityKey& self, const PriorityKey& other, Color gc);

namespace bwbgme {

enum Pc : int {
    kRemainder = 0,
    kSetChoosing,    // line 4
    kReadColor,      // line 5 (line 6 folded in)
    kScanTokens,     // lines 7-12, one Token[j] read per step
    kCommitToken,    // line 14 (line 13 folded into the last scan step)
    kClearChoosing,  // line 15
    kWaitChoosing,   // line 17
    kReadBranch,     // line 18, fresh Token[j] read when line 17 passed on Choosing
    kWaitSameColor,  // line 19
    kWaitOtherColor, // line 21
    kCritical,       // line 24
    kOppositeScan,   // line 26, OPPOSITECOLOR one read per step
    kFlipColor,      // line 28 / 30
    kResetToken,     // line 34
};

}  // namespace bwbgme

/// Exit-section variants. Only Standard is the real algorithm; the others
/// exist to show the monitors catch the failures the exit rules prevent.
enum class BwbgmeVariant {
    Standard,
    NoNumberGuard,   ///< skip the mynumber != 1 test
    NoOppositeScan,  ///< skip the OPPOSITECOLOR test
    Naive,           ///< always flip, as in the mutual-exclusion original
};

std::string_view to_string(BwbgmeVariant v);
BwbgmeVariant parse_bwbgme_variant(std::string_view s);

class BwbgmeAlgorithm final : public AlgorithmSpec {
public:
    BwbgmeAlgorithm(int n, Color initial_color, BwbgmeVariant variant);

    std::string_view name() const override { return "bwbgme"; }
    std::vector<RegisterDecl> registers() const override;
    std::span<const PcInfo> pcs() const override;
    void step(Pid pid, LocalEnv& env, StepContext& ctx) const override;
    std::optional<bool> wait_condition(Pid pid, const LocalEnv& env,
                                       const Memory& mem) const override;
    std::optional<Color> initial_global_color() const override { return initial_; }

    BwbgmeVariant variant() const { return variant_; }

private:
    void next_j(LocalEnv& env, StepContext& ctx) const;
    void after_critical(LocalEnv& env) const;

    Color initial_;
    BwbgmeVariant variant_;
};

std::shared_ptr<const AlgorithmSpec> build_bwbgme(int n, Color initial_color = Color::White,
                                                  BwbgmeVariant variant = BwbgmeVariant::Standard);

/// OPPOSITECOLOR evaluated directly on the global store: some process holds
/// an active token of the color opposite to `mycolor`.
bool opposite_color_scan(const Memory& mem, Color mycolor);

/// Same scan, but as the exit section performs it: one Token[j] read per
/// access through `pid`'s cache, stopping at the first hit. Returns the
/// result and the number of reads performed.
std::pair<bool, int> opposite_color_scan(Memory& mem, Pid pid, Color mycolor);

}  // namespace gme
