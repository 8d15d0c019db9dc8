// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "gme/cli.hpp"
#include "gme/glb.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

using namespace gme;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;
};

int failures = 0;
std::map<int, std::string> lines;  // printed in criterion order at the end

void criterion(int id, const std::string& title, const std::function<Outcome()>& body)
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.ok;
    char head[64];
    std::snprintf(head, sizeof head, "criterion %2d %s  ", id, o.ok ? "PASS" : "FAIL");
    char tail[32];
    std::snprintf(tail, sizeof tail, " (%.1f s)", secs);
    lines[id] = head + title + ": " + o.detail + tail;
    std::fprintf(stderr, "%s\n", lines[id].c_str());
}

Scenario scenario(const std::string& alg, int n, const std::string& workload, int invocations,
                  const std::string& schedule = "random")
{
    Scenario s;
    s.name = alg + "-n" + std::to_string(n);
    s.algorithm = alg;
    s.n = n;
    s.workload = workload;
    s.invocations = invocations;
    s.schedule = schedule;
    resolve(s);
    return s;
}

bool failed(const RunReport& r, Property p)
{
    for (const auto& v : r.verdicts)
        if (v.property == p)
            return v.failed();
    return false;
}

const Verdict* verdict(const RunReport& r, Property p)
{
    for (const auto& v : r.verdicts)
        if (v.property == p)
            return &v;
    return nullptr;
}

/// Every assignment of sessions {1,2} to n processes, one invocation each.
std::vector<std::vector<std::vector<std::int64_t>>> assignments(int n)
{
    std::vector<std::vector<std::vector<std::int64_t>>> out;
    for (int mask = 0; mask < (1 << n); ++mask) {
        std::vector<std::vector<std::int64_t>> s;
        for (int p = 0; p < n; ++p)
            s.push_back({1 + ((mask >> p) & 1)});
        out.push_back(s);
    }
    return out;
}

// Runs shared by several criteria.
std::vector<RunReport> sweep_runs;  // criterion 4
std::vector<RunReport> ce_runs;     // criterion 7
std::vector<RunReport> long_runs;   // criterion 10
std::vector<RunReport> bl_runs;     // criterion 3

std::vector<const RunReport*> all_runs()
{
    std::vector<const RunReport*> out;
    for (auto* v : {&sweep_runs, &ce_runs, &long_runs, &bl_runs})
        for (const auto& r : *v)
            out.push_back(&r);
    return out;
}

Outcome exhaustive(const std::string& alg, const std::vector<Color>& colors)
{
    std::uint64_t states = 0, me = 0, fcfs = 0, flip = 0, token = 0, dead = 0;
    std::int64_t max_token = 0;
    int runs = 0;
    bool truncated = false;
    for (auto c : colors) {
        for (const auto& a : assignments(3)) {
            auto spec = alg == "glb" ? build_glb(3) : build_bwbgme(3, c);
            auto r = explore(spec, Workload::from_sessions(a));
            ++runs;
            states += r.states;
            me += r.violation_count(Property::MutualExclusion);
            fcfs += r.violation_count(Property::Fcfs);
            flip += r.violation_count(Property::FlipInvariant);
            token += r.violation_count(Property::TokenBound);
            dead += r.deadlock_states;
            truncated |= r.truncated;
            max_token = std::max(max_token, r.max_token);
        }
    }
    std::ostringstream d;
    d << runs << " explorations, " << states << " states, ME " << me << ", FCFS " << fcfs
      << ", deadlocks " << dead;
    bool ok = me == 0 && fcfs == 0 && dead == 0 && !truncated;
    if (alg == "bwbgme") {
        d << ", flip " << flip << ", token-bound " << token << ", max token " << max_token;
        ok = ok && flip == 0 && token == 0 && max_token <= 4;
    }
    if (truncated)
        d << ", TRUNCATED";
    return {ok, d.str()};
}

}  // namespace

int main()
{
    criterion(1, "GLB exhaustive N=3, sessions from {1,2}", [] {
        return exhaustive("glb", {Color::White});
    });

    criterion(2, "BWBGME exhaustive N=3, sessions from {1,2}, both colors", [] {
        return exhaustive("bwbgme", {Color::White, Color::Black});
    });

    criterion(3, "Burns-Lamport adversarial block counts", [] {
        Outcome o;
        std::ostringstream d;
        std::map<int, std::uint64_t> total;
        for (int n : {2, 4, 6, 8, 10}) {
            auto r = run_scenario(scenario("bl", n, "conflicting", 1, "adversarial"), 1);
            const auto want = static_cast<std::uint64_t>(n * (n - 1) / 2);
            bool ok = r.blocks && r.blocks->of(n) == want && !r.violated() && !r.truncated &&
                      r.rmr.incomplete == 0;
            for (Pid j = 1; ok && j < n; ++j)
                ok = r.blocks->by(n, j) == static_cast<std::uint64_t>(j);
            d << "P" << n << "=" << (r.blocks ? r.blocks->of(n) : 0) << "/" << want << " ";
            o.ok = o.ok && ok;
            total[n] = r.rmr.total;
            bl_runs.push_back(std::move(r));
        }
        const double ratio = static_cast<double>(total[8]) / static_cast<double>(total[4]);
        d << "RMR(8)/RMR(4)=" << total[8] << "/" << total[4] << "=" << ratio;
        o.ok = o.ok && ratio >= 3.0;
        o.detail = d.str();
        return o;
    });

    criterion(4, "linear RMR scaling, N in {4,8,16}, 50 seeds", [] {
        Outcome o;
        std::ostringstream d;
        for (const std::string alg : {"glb", "bwbgme"}) {
            std::optional<SweepRow> prev;
            d << (alg == "glb" ? "" : "; ") << alg << " max";
            for (int n : {4, 8, 16}) {
                auto s = scenario(alg, n, "conflicting", 3);
                std::vector<RunSummary> sums;
                for (std::uint64_t seed = 1; seed <= 50; ++seed) {
                    auto r = run_scenario(s, seed);
                    r.trace.events.clear();
                    sums.push_back(summarize(r));
                    sweep_runs.push_back(std::move(r));
                }
                auto row = aggregate(s, sums, prev ? &*prev : nullptr);
                d << " " << row.max_invocation_rmr;
                if (row.max_ratio) {
                    d << " (x" << std::fixed;
                    d.precision(2);
                    d << *row.max_ratio << ")";
                    o.ok = o.ok && *row.max_ratio <= 2.5;
                }
                o.ok = o.ok && row.violations == 0 && row.truncated == 0;
                for (const auto& x : sums)
                    o.ok = o.ok && x.incomplete == 0;
                prev = row;
            }
        }
        o.detail = d.str();
        return o;
    });

    criterion(6, "BWBGME sequential fill N=5", [] {
        Scenario s;
        s.name = "fill";
        s.algorithm = "bwbgme";
        s.n = 5;
        s.schedule = "fill";
        resolve(s);
        auto r = run_scenario(s, 1);
        std::ostringstream d;
        bool ok = r.commits.size() == 6;
        for (const auto& c : r.commits)
            d << (&c == &r.commits.front() ? "" : " ") << "P" << c.pid << "=" << c.number;
        for (std::size_t k = 0; ok && k < 5; ++k)
            ok = r.commits[k].pid == static_cast<Pid>(k + 1) &&
                 r.commits[k].number == static_cast<std::int64_t>(k + 1);
        ok = ok && r.commits[5].pid == 1 && r.commits[5].number == 6 && !r.violated();
        return Outcome{ok, d.str()};
    });

    criterion(7, "concurrent entry, single session, N=8, 100 schedules", [] {
        std::uint64_t false_waits = 0, max_entry = 0;
        std::size_t runs = 0, inapplicable = 0;
        bool ok = true;
        for (const std::string alg : {"glb", "bwbgme"}) {
            auto s = scenario(alg, 8, "same-session", 3);
            for (std::uint64_t seed = 1; seed <= 100; ++seed) {
                auto r = run_scenario(s, seed);
                r.trace.events.clear();
                ++runs;
                const auto* v = verdict(r, Property::ConcurrentEntry);
                inapplicable += !v || v->status == Status::Inapplicable;
                ok = ok && v && v->status == Status::Pass && !r.violated() && !r.truncated;
                for (const auto& rec : r.invocations) {
                    false_waits += rec.false_waits;
                    max_entry = std::max(max_entry, rec.entry_steps);
                }
                ce_runs.push_back(std::move(r));
            }
        }
        ok = ok && false_waits == 0 && inapplicable == 0;
        std::ostringstream d;
        d << runs << " runs, false wait evaluations " << false_waits << ", longest entry "
          << max_entry << " steps";
        return Outcome{ok, d.str()};
    });

    criterion(10, "no starvation, N=6, 10 invocations, 1e5-step cap", [] {
        std::size_t runs = 0, incomplete = 0, truncated = 0, progress_fail = 0;
        std::uint64_t max_steps = 0;
        for (const std::string alg : {"glb", "bwbgme"}) {
            auto s = scenario(alg, 6, "conflicting", 10);
            s.steps = 100'000;
            for (std::uint64_t seed = 1; seed <= 20; ++seed) {
                auto r = run_scenario(s, seed);
                r.trace.events.clear();
                ++runs;
                incomplete += r.rmr.incomplete;
                truncated += r.truncated;
                progress_fail += failed(r, Property::Progress);
                max_steps = std::max(max_steps, r.steps);
                long_runs.push_back(std::move(r));
            }
        }
        std::ostringstream d;
        d << runs << " runs, invocations without CS " << incomplete << ", truncated " << truncated
          << ", progress failures " << progress_fail << ", longest run " << max_steps << " steps";
        return Outcome{incomplete == 0 && truncated == 0 && progress_fail == 0, d.str()};
    });

    criterion(5, "GLB line-8/line-9 RMR per pass <= 5", [] {
        std::size_t runs = 0, fails = 0;
        for (const auto* r : all_runs()) {
            if (r->algorithm != "glb")
                continue;
            const auto* v = verdict(*r, Property::GlbLineRmr);
            if (!v)
                continue;
            ++runs;
            fails += v->failed();
        }
        std::ostringstream d;
        d << runs << " glb runs checked, violations " << fails;
        return Outcome{runs > 0 && fails == 0, d.str()};
    });

    criterion(8, "bounded exit", [] {
        std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> range;
        std::size_t bad = 0, checked = 0;
        for (const auto* r : all_runs()) {
            bad += failed(*r, Property::BoundedExit);
            for (const auto& rec : r->invocations) {
                if (!rec.complete())
                    continue;
                ++checked;
                const auto shared = rec.shared[static_cast<std::size_t>(Section::Exit)];
                const auto writes = rec.writes[static_cast<std::size_t>(Section::Exit)];
                auto& [lo, hi] = range.try_emplace(r->algorithm, shared, shared).first->second;
                lo = std::min(lo, shared);
                hi = std::max(hi, shared);
                if (r->algorithm == "glb")
                    bad += !(shared == 2 && writes == 2);
                else if (r->algorithm == "bl")
                    bad += !(shared == 1 && writes == 1);
                else
                    bad += !(shared >= 1 && shared <= static_cast<std::uint64_t>(r->n) + 2);
            }
        }
        std::ostringstream d;
        d << checked << " exits";
        for (const auto& [alg, lh] : range)
            d << ", " << alg << " " << lh.first << ".." << lh.second;
        d << ", out of bound " << bad;
        return Outcome{checked > 0 && bad == 0 && range.size() == 3, d.str()};
    });

    criterion(9, "mutation sensitivity", [] {
        std::ostringstream d;
        bool ok = true;
        auto replay = [](BwbgmeVariant v, const std::vector<Pid>& script, const Workload& w) {
            System sys(build_bwbgme(w.processes(), Color::White, v), w);
            ScriptedSchedule sched(script);
            MonitorSet m(default_properties("bwbgme"));
            auto obs = m.observers();
            run(sys, sched, obs, 1'000'000, false);
            return m.verdicts();
        };
        auto describe = [](const std::vector<Verdict>& vs) {
            std::string s;
            for (const auto& v : vs)
                if (v.failed())
                    s += std::string(s.empty() ? "" : "+") + std::string(to_string(v.property));
            return s.empty() ? std::string("none") : s;
        };
        auto any_safety = [](const std::vector<Verdict>& vs) {
            for (const auto& v : vs)
                if (v.failed() && (v.property == Property::MutualExclusion ||
                                   v.property == Property::FlipInvariant))
                    return true;
            return false;
        };
        auto any_fail = [](const std::vector<Verdict>& vs) {
            for (const auto& v : vs)
                if (v.failed())
                    return true;
            return false;
        };

        // shared-CS narrative, exit rule without guard or scan
        const auto narrative = bwbgme_shared_cs_schedule();
        const auto nw = bwbgme_shared_cs_workload();
        auto naive = replay(BwbgmeVariant::Naive, narrative, nw);
        auto std_n = replay(BwbgmeVariant::Standard, narrative, nw);
        ok = ok && any_safety(naive) && !any_fail(std_n);
        d << "shared-CS schedule: naive " << describe(naive) << ", standard "
          << describe(std_n);

        // number guard removed: a doorway stalled after reading GlobalColor
        const auto hang = bwbgme_hanging_schedule();
        const auto hw = bwbgme_hanging_workload();
        auto no_guard = replay(BwbgmeVariant::NoNumberGuard, hang, hw);
        auto std_h = replay(BwbgmeVariant::Standard, hang, hw);
        ok = ok && any_safety(no_guard) && !any_fail(std_h);
        d << "; stalled-doorway schedule: no-number-guard " << describe(no_guard)
          << ", standard " << describe(std_h);

        // the scan alone removed: search for any violating interleaving
        auto r = explore(build_bwbgme(3, Color::White, BwbgmeVariant::NoOppositeScan),
                         Workload::from_sessions({{1}, {2}, {1}}));
        d << "; no-opposite-scan exhaustive N=3 (1,2,1): " << r.total_violations()
          << " violations";
        return Outcome{ok, d.str()};
    });

    for (const auto& [id, line] : lines)
        std::printf("%s\n", line.c_str());
    std::printf("%s\n", failures == 0 ? "all criteria pass" : "some criteria FAIL");
    return failures == 0 ? 0 : 1;
}
