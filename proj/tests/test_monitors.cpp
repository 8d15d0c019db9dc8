#include "doctest.h"

#include "gme/bl.hpp"
#include "gme/bwbgme.hpp"
#include "gme/glb.hpp"
#include "gme/monitors.hpp"
#include "gme/sched.hpp"

using namespace gme;

namespace {

// Hand-built traces: only the fields the monitors look at.
struct TraceMaker {
    Trace t;
    explicit TraceMaker(std::string alg = "glb", int n = 2, bool sessions = true)
    {
        t.header.algorithm = std::move(alg);
        t.header.n = n;
        t.header.uses_sessions = sessions;
        if (t.header.algorithm == "bwbgme")
            t.header.initial_global_color = Color::White;
    }
    TraceEvent& add(Pid pid, std::int64_t session, Section s, std::uint8_t markers = 0)
    {
        TraceEvent e;
        e.step = t.events.size();
        e.pid = pid;
        e.session = session;
        e.section = s;
        e.markers = markers;
        e.invocation = 0;
        t.events.push_back(e);
        return t.events.back();
    }
    // doorway start+complete, CS enter, CS exit, exit complete as separate events
    void doorway(Pid p, std::int64_t s)
    {
        add(p, s, Section::Doorway, kDoorwayStart);
        add(p, s, Section::Doorway, kDoorwayComplete);
    }
    void enter(Pid p, std::int64_t s) { add(p, s, Section::Waiting, kCsEnter); }
    void leave(Pid p, std::int64_t s) { add(p, s, Section::CS, kCsExit); }
    void exit(Pid p, std::int64_t s)
    {
        auto& e = add(p, s, Section::Exit, kExitComplete);
        e.access = Access::Write;
        e.reg = RegisterId{RegisterFamily::Token, p};
        e.value = std::int64_t{0};
    }
    void color_write(Pid p, Color c)
    {
        auto& e = add(p, 1, Section::Exit);
        e.access = Access::Write;
        e.reg = RegisterId{RegisterFamily::GlobalColor, 0};
        e.value = c;
    }
    void color_read(Pid p)
    {
        auto& e = add(p, 1, Section::Doorway);
        e.access = Access::Read;
        e.line = 5;
        e.reg = RegisterId{RegisterFamily::GlobalColor, 0};
        e.value = Color::White;
    }
};

Trace simulate(std::shared_ptr<const AlgorithmSpec> spec, Workload w, SchedulePolicy& s,
               std::uint64_t cap = 200000)
{
    System sys(std::move(spec), std::move(w));
    return run(sys, s, {}, cap).trace;
}

}  // namespace

TEST_CASE("property names round trip")
{
    for (auto p : {Property::MutualExclusion, Property::Fcfs, Property::BoundedExit,
                   Property::ConcurrentEntry, Property::FlipInvariant, Property::TokenBound,
                   Property::Progress, Property::GlbLineRmr})
        CHECK(parse_property(to_string(p)) == p);
    CHECK_THROWS_AS(parse_property("nope"), ConfigError);
    CHECK_THROWS_AS(MonitorSet({Property::Fcfs, Property::Fcfs}), ConfigError);
}

TEST_CASE("mutual exclusion: same session may share, different may not")
{
    TraceMaker same;
    same.enter(1, 3);
    same.enter(2, 3);
    CHECK_FALSE(check_mutual_exclusion(same.t).failed());

    TraceMaker diff;
    diff.enter(1, 3);
    diff.enter(2, 4);
    auto v = check_mutual_exclusion(diff.t);
    CHECK(v.failed());
    CHECK(v.witness == std::vector<Witness>{{0, 1}, {1, 2}});

    TraceMaker after;
    after.enter(1, 3);
    after.leave(1, 3);
    after.enter(2, 4);
    CHECK_FALSE(check_mutual_exclusion(after.t).failed());

    CHECK_FALSE(check_mutual_exclusion(Trace{}).failed());

    TraceMaker classic("bl", 2, false);
    classic.enter(1, 1);
    classic.enter(2, 1);
    CHECK(check_mutual_exclusion(classic.t).failed());
}

TEST_CASE("fcfs")
{
    TraceMaker reversed;
    reversed.doorway(1, 1);
    reversed.doorway(2, 2);
    reversed.enter(2, 2);
    reversed.enter(1, 1);
    auto v = check_fcfs(reversed.t);
    CHECK(v.failed());
    CHECK(v.witness == std::vector<Witness>{{1, 1}, {4, 2}});

    TraceMaker concurrent;
    concurrent.add(1, 1, Section::Doorway, kDoorwayStart);
    concurrent.add(2, 2, Section::Doorway, kDoorwayStart);
    concurrent.add(1, 1, Section::Doorway, kDoorwayComplete);
    concurrent.add(2, 2, Section::Doorway, kDoorwayComplete);
    concurrent.enter(2, 2);
    concurrent.enter(1, 1);
    CHECK_FALSE(check_fcfs(concurrent.t).failed());

    TraceMaker same_session;
    same_session.doorway(1, 5);
    same_session.doorway(2, 5);
    same_session.enter(2, 5);
    same_session.enter(1, 5);
    CHECK_FALSE(check_fcfs(same_session.t).failed());

    // P2 gets in while P1, which doorway-preceded it, never does
    TraceMaker starved;
    starved.doorway(1, 1);
    starved.doorway(2, 2);
    starved.enter(2, 2);
    CHECK(check_fcfs(starved.t).failed());
}

TEST_CASE("bounded exit on real runs")
{
    RoundRobinSchedule rr;
    auto glb = simulate(build_glb(4), Workload::conflicting(4, 3), rr);
    CHECK(check_bounded_exit(glb).status == Status::Pass);
    for (const auto& r : collect_invocations(glb)) {
        CHECK(r.shared[static_cast<std::size_t>(Section::Exit)] == 2);
        CHECK(r.writes[static_cast<std::size_t>(Section::Exit)] == 2);
    }

    RoundRobinSchedule rr2;
    auto bl = simulate(build_bl(4), Workload::conflicting(4, 3), rr2);
    CHECK(check_bounded_exit(bl).status == Status::Pass);

    // solo bwbgme exit is the token reset only
    System sys(build_bwbgme(3), Workload::conflicting(3, 1));
    ScriptedSchedule s(std::vector<Pid>(40, 2));
    auto solo = run(sys, s, {}, 40).trace;
    auto recs = collect_invocations(solo);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].shared[static_cast<std::size_t>(Section::Exit)] == 1);
    CHECK_FALSE(check_bounded_exit(solo).failed());

    // a tighter bound than the real one is caught
    CHECK(check_bounded_exit(glb, ExitBound{1, 1, true}).failed());
}

TEST_CASE("concurrent entry")
{
    RandomSchedule r1(3, 8);
    auto glb = simulate(build_glb(4), Workload::same_session(4, 3), r1);
    CHECK(check_concurrent_entry(glb).status == Status::Pass);

    RandomSchedule r2(4, 8);
    auto bw = simulate(build_bwbgme(4), Workload::same_session(4, 3), r2);
    CHECK(check_concurrent_entry(bw).status == Status::Pass);

    RandomSchedule r3(5, 8);
    auto multi = simulate(build_glb(4), Workload::conflicting(4, 1), r3);
    CHECK(check_concurrent_entry(multi).status == Status::Inapplicable);

    TraceMaker fake;
    fake.t.header.single_session = true;
    fake.add(1, 1, Section::Waiting).wait = WaitOutcome::Failed;
    CHECK(check_concurrent_entry(fake.t).failed());
}

TEST_CASE("flip invariant")
{
    TraceMaker glb;
    CHECK(check_flip_invariant(glb.t).status == Status::Inapplicable);

    System sys(build_bwbgme(3), Workload::conflicting(3, 1));
    ScriptedSchedule s(std::vector<Pid>(60, 1));
    CHECK(check_flip_invariant(run(sys, s, {}, 60).trace).status == Status::Pass);

    TraceMaker twice("bwbgme", 3);
    twice.color_read(1);
    twice.color_write(2, Color::Black);
    twice.color_write(3, Color::White);
    auto v = check_flip_invariant(twice.t);
    CHECK(v.failed());
    CHECK(v.witness == std::vector<Witness>{{0, 1}, {2, 3}});

    // rewriting the current value is not a flip
    TraceMaker same("bwbgme", 3);
    same.color_read(1);
    same.color_write(2, Color::Black);
    same.color_write(3, Color::Black);
    CHECK_FALSE(check_flip_invariant(same.t).failed());

    // the window closes at exit-complete
    TraceMaker closed("bwbgme", 3);
    closed.color_read(1);
    closed.color_write(2, Color::Black);
    closed.exit(1, 1);
    closed.color_write(3, Color::White);
    CHECK_FALSE(check_flip_invariant(closed.t).failed());
}

TEST_CASE("token bound")
{
    RandomSchedule r(11, 12);
    auto t = simulate(build_bwbgme(6), Workload::conflicting(6, 4), r);
    auto v = check_token_bound(t);
    CHECK(v.status == Status::Pass);

    TraceMaker big("bwbgme", 3);
    auto& e = big.add(2, 2, Section::Doorway);
    e.access = Access::Write;
    e.reg = RegisterId{RegisterFamily::Token, 2};
    e.value = Triple{2, Color::Black, 5};
    CHECK(check_token_bound(big.t).failed());

    TraceMaker ok("bwbgme", 3);
    auto& f = ok.add(2, 2, Section::Doorway);
    f.access = Access::Write;
    f.reg = RegisterId{RegisterFamily::Token, 2};
    f.value = Triple{2, Color::Black, 4};
    CHECK(check_token_bound(ok.t).status == Status::Pass);
}

TEST_CASE("progress")
{
    for (auto spec : {build_glb(4), build_bwbgme(4)}) {
        RoundRobinSchedule rr;
        auto t = simulate(spec, Workload::conflicting(4, 3), rr);
        CHECK(check_progress(t).status == Status::Pass);
        for (const auto& r : collect_invocations(t))
            CHECK(r.complete());
    }

    TraceMaker dead;
    dead.add(1, 1, Section::Waiting).all_blocked = true;
    CHECK(check_progress(dead.t).failed());

    TraceMaker starving;
    starving.doorway(1, 1);
    for (Pid p : {2, 3}) {
        starving.doorway(p, p);
        starving.enter(p, p);
        starving.leave(p, p);
        starving.exit(p, p);
    }
    auto v = check_progress(starving.t);
    CHECK(v.failed());
    CHECK(v.witness.front() == Witness{1, 1});

    TraceMaker one_overtake;
    one_overtake.doorway(1, 1);
    one_overtake.doorway(2, 2);
    one_overtake.enter(2, 2);
    one_overtake.leave(2, 2);
    one_overtake.exit(2, 2);
    CHECK_FALSE(check_progress(one_overtake.t).failed());
}

TEST_CASE("glb per-line rmr on random schedules")
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RandomSchedule r(seed, 10);
        auto t = simulate(build_glb(5), Workload::conflicting(5, 3), r);
        GlbLineRmrMonitor m;
        m.begin(t.header);
        for (const auto& e : t.events)
            m.observe(e);
        CHECK(m.verdict().status == Status::Pass);
        CHECK(m.max_line8() <= 5);
        CHECK(m.max_line9() <= 5);
        CHECK(m.passes() > 0);
    }
    TraceMaker bw("bwbgme", 2);
    CHECK(check_glb_line_rmr(bw.t).status == Status::Inapplicable);
}

TEST_CASE("monitors are pure functions of the trace")
{
    RandomSchedule r(9, 8);
    auto t = simulate(build_bwbgme(4), Workload::conflicting(4, 2), r);
    for (auto p : default_properties("bwbgme")) {
        auto a = check(p, t);
        auto b = check(p, t);
        CHECK(a.status == b.status);
        CHECK(a.witness == b.witness);
        CHECK(a.detail == b.detail);
    }
}

TEST_CASE("fcfs and deadlock freedom leave no starvation on complete traces")
{
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        for (auto spec : {build_glb(4), build_bwbgme(4)}) {
            RandomSchedule r(seed, 6);
            auto t = simulate(spec, Workload::conflicting(4, 3), r);
            if (!check_fcfs(t).failed() && !t.truncated)
                CHECK_FALSE(check_progress(t).failed());
        }
    }
}

TEST_CASE("invocation records and rmr report")
{
    RoundRobinSchedule rr;
    auto t = simulate(build_glb(3), Workload::conflicting(3, 2), rr);
    auto recs = collect_invocations(t);
    REQUIRE(recs.size() == 6);
    for (const auto& r : recs) {
        CHECK(*r.doorway_start < *r.doorway_complete);
        CHECK(*r.doorway_complete < *r.cs_enter);
        CHECK(*r.cs_enter < *r.cs_exit);
        CHECK(*r.cs_exit < *r.exit_complete);
        REQUIRE(r.token.has_value());
        CHECK(std::get<std::int64_t>(*r.token) > 0);
    }
    auto rep = rmr_report(recs, 3);
    CHECK(rep.complete == 6);
    CHECK(rep.incomplete == 0);
    std::uint64_t sum = 0;
    for (auto p : rep.per_process)
        sum += p;
    CHECK(sum == rep.total);
    CHECK(rep.by_section[static_cast<std::size_t>(Section::Exit)].min == 2);
    CHECK(rep.by_section[static_cast<std::size_t>(Section::CS)].max == 0);
    CHECK(rep.per_invocation.count == 6);
}
