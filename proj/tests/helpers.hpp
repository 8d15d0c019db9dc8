#pragma once

#include "gme/machine.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace gme::testing {

inline std::vector<TraceEvent> drive(System& sys, const std::vector<Pid>& pids)
{
    std::vector<TraceEvent> out;
    for (Pid p : pids)
        out.push_back(sys.step(p));
    return out;
}

/// Step `pid` until `done(event)` holds for an event it produced.
inline std::vector<TraceEvent> step_until(System& sys, Pid pid,
                                          const std::function<bool(const TraceEvent&)>& done,
                                          int limit = 10000)
{
    std::vector<TraceEvent> out;
    for (int k = 0; k < limit; ++k) {
        out.push_back(sys.step(pid));
        if (done(out.back()))
            return out;
    }
    throw std::runtime_error("step_until: limit reached");
}

inline std::vector<TraceEvent> step_until_marker(System& sys, Pid pid, Marker m)
{
    return step_until(sys, pid, [m](const TraceEvent& e) { return e.has(m); });
}

inline std::vector<TraceEvent> solo_invocation(System& sys, Pid pid)
{
    return step_until_marker(sys, pid, kExitComplete);
}

inline int count_failed_waits(const std::vector<TraceEvent>& evs)
{
    int n = 0;
    for (const auto& e : evs)
        n += e.wait == WaitOutcome::Failed;
    return n;
}

}  // namespace gme::testing
