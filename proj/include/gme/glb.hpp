#pragma once

// Generalized bakery algorithm for group mutual exclusion with unbounded
// integer tokens.

#include "gme/machine.hpp"

#include <memory>

namespace gme {

/// (token number, pid), ordered lexicographically.
struct TokenOrderKey {
    std::int64_t number = 0;
    Pid pid = 0;
};

bool token_less(const TokenOrderKey& a, const TokenOrderKey& b);

namespace glb {

/// Program counters. Values index the table returned by pcs().
enum Pc : int {
    kRemainder = 0,
    kSetSession,     // line 4
    kReadTokens,     // line 5, one read of Token[j] per step, j != i
    kWriteToken,     // line 5, Token[i] := 1 + max
    kClearChoosing,  // line 6
    kWaitChoosing,   // line 8
    kWaitToken,      // line 9
    kCritical,       // line 11
    kResetToken,     // line 12
    kResetSession,   // line 13
};

inline constexpr int kDoorwayFirstLine = 3;
inline constexpr int kDoorwayLastLine = 6;

}  // namespace glb

class GlbAlgorithm final : public AlgorithmSpec {
public:
    explicit GlbAlgorithm(int n);

    std::string_view name() const override { return "glb"; }
    std::vector<RegisterDecl> registers() const override;
    std::span<const PcInfo> pcs() const override;
    void step(Pid pid, LocalEnv& env, StepContext& ctx) const override;
    std::optional<bool> wait_condition(Pid pid, const LocalEnv& env,
                                       const Memory& mem) const override;

private:
    int next_other(Pid self, int j) const;
};

std::shared_ptr<const AlgorithmSpec> build_glb(int n);

}  // namespace gme
