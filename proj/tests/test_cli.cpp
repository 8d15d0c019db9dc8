#include "doctest.h"

#include "gme/cli.hpp"

#include <json.hpp>

#include <sstream>

using namespace gme;

namespace {

const std::string kDir = GME_SCENARIO_DIR;

int error_line(const std::string& text)
{
    try {
        parse_scenario_text(text, "t.scn");
    } catch (const ScenarioError& e) {
        return e.line();
    }
    return -1;
}

std::string error_text(const std::string& text)
{
    try {
        parse_scenario_text(text, "t.scn");
    } catch (const ScenarioError& e) {
        return e.what();
    }
    return {};
}

std::size_t columns(const std::string& line) { return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1; }

}  // namespace

TEST_CASE("minimal scenario takes defaults")
{
    auto s = parse_scenario_text("gme-scenario 1\nalgorithm = glb\nn = 3\n");
    CHECK(s.algorithm == "glb");
    CHECK(s.n == 3);
    CHECK(s.workload == "conflicting");
    CHECK(s.sessions == std::vector<std::vector<std::int64_t>>{{1}, {2}, {3}});
    CHECK(s.schedule == "random");
    CHECK(s.effective_window() == 6);
    CHECK(s.effective_monitors() == default_properties("glb"));
}

TEST_CASE("comments, blank lines and spacing are ignored")
{
    auto a = parse_scenario_text("gme-scenario 1\nalgorithm=bwbgme\nn=2\n");
    auto b = parse_scenario_text(
        "# header comment\n\n  gme-scenario 1  \nalgorithm =   bwbgme # trailing\n\n n = 2\n");
    CHECK(a.canonical() == b.canonical());
    CHECK(a.hash() == b.hash());
}

TEST_CASE("explicit sessions")
{
    auto s = parse_scenario_text(
        "gme-scenario 1\nalgorithm = bwbgme\nsessions.2 = 2, 3\nsessions.1 = 1 1\n"
        "initial_color = black\nvariant = naive\n");
    CHECK(s.n == 2);
    CHECK(s.workload == "explicit");
    CHECK(s.sessions == std::vector<std::vector<std::int64_t>>{{1, 1}, {2, 3}});
    CHECK(s.initial_color == Color::Black);
    CHECK(s.variant == BwbgmeVariant::Naive);
    auto w = build_workload(s);
    CHECK(w.per_process[1][1].session == 3);
}

TEST_CASE("hash tracks every field but the seed")
{
    const std::string base = "gme-scenario 1\nalgorithm = glb\nn = 3\n";
    const auto h = parse_scenario_text(base).hash();
    CHECK(parse_scenario_text(base + "seed = 99\n").hash() == h);
    CHECK(parse_scenario_text(base + "window = 7\n").hash() != h);
    CHECK(parse_scenario_text(base + "invocations = 2\n").hash() != h);
    CHECK(parse_scenario_text(base + "cs_steps = 1\n").hash() != h);
    CHECK(parse_scenario_text(base + "monitors = fcfs\n").hash() != h);
    CHECK(parse_scenario_text("gme-scenario 1\nalgorithm = glb\nn = 4\n").hash() != h);
}

TEST_CASE("parse errors carry line numbers")
{
    CHECK(error_line("algorithm = glb\n") == 1);
    CHECK(error_line("\n\ngme-scenario 2\n") == 3);
    CHECK(error_line("gme-scenario 1\nalgorithm = glb\nn = 3\nbogus = 1\n") == 4);
    CHECK(error_line("gme-scenario 1\nalgorithm = glb\nn = 3\nn = 4\n") == 4);
    CHECK(error_line("gme-scenario 1\nalgorithm = glb\nn = three\n") == 3);
    CHECK(error_line("gme-scenario 1\nalgorithm = glb\nn = 0\n") == 3);
    CHECK(error_line("gme-scenario 1\nalgorithm = peterson\n") == 2);
    CHECK(error_line("gme-scenario 1\nalgorithm = glb\njust text\n") == 3);
    CHECK(error_line("gme-scenario 1\nalgorithm = glb\nn = 2\nschedule = lottery\n") == 4);
    CHECK(error_line("gme-scenario 1\nalgorithm = glb\nn = 2\nsessions.1 = 1 0\n") == 4);
    CHECK(error_line("gme-scenario 1\nalgorithm = glb\nn = 2\nscript = 1 x\n") == 4);
    CHECK(error_line("gme-scenario 1\nalgorithm = glb\nn = 2\nmonitors = fcfs, speed\n") == 4);
    CHECK(error_line("gme-scenario 1\nalgorithm = bwbgme\nn = 2\nvariant = greedy\n") == 4);
    CHECK(error_line("gme-scenario 1\nalgorithm = bwbgme\nn = 2\ninitial_color = red\n") == 4);
    CHECK(error_line("") == 0);
    CHECK(error_text("gme-scenario 1\nalgorithm = glb\nn = 3\nbogus = 1\n") ==
          "t.scn:4: unknown key 'bogus'");
}

TEST_CASE("semantic errors")
{
    auto bad = [](const std::string& body) {
        CHECK_THROWS_AS(parse_scenario_text("gme-scenario 1\n" + body), ScenarioError);
    };
    bad("n = 2\n");                                                     // no algorithm
    bad("algorithm = glb\n");                                           // no n
    bad("algorithm = glb\nn = 2\ninitial_color = white\n");             // bwbgme only
    bad("algorithm = bl\nn = 2\nvariant = naive\n");                    // bwbgme only
    bad("algorithm = glb\nn = 3\nsessions.1 = 1\nsessions.3 = 2\n");    // gap
    bad("algorithm = glb\nn = 1\nsessions.1 = 1\nsessions.2 = 2\n");    // beyond n
    bad("algorithm = glb\nsessions.1 = 1\nworkload = conflicting\n");   // both
    bad("algorithm = glb\nsessions.1 = 1\ninvocations = 2\n");          // template only
    bad("algorithm = glb\nn = 2\nschedule = scripted\n");               // no script
    bad("algorithm = glb\nn = 2\nschedule = scripted\nscript = 1 3\n"); // pid range
    bad("algorithm = glb\nn = 2\nscript = 1 2\n");                      // not scripted
    bad("algorithm = glb\nn = 4\nwindow = 3\n");                        // window < n
    bad("algorithm = glb\nn = 3\nschedule = adversarial\n");            // bl only
    bad("algorithm = bl\nn = 3\nschedule = adversarial\ninvocations = 2\n");
    bad("algorithm = glb\nn = 4\nschedule = fill\n");                   // bwbgme only
    bad("algorithm = bwbgme\nn = 5\nschedule = shared-cs\n");           // fixed n
    bad("algorithm = bwbgme\nn = 4\nschedule = fill\nworkload = same-session\n");
    bad("algorithm = glb\nn = 2\nmonitors = fcfs, fcfs\n");
    CHECK_THROWS_AS(load_scenario(kDir + "/missing.scn"), ScenarioError);
}

TEST_CASE("every bundled scenario parses")
{
    for (const char* f :
         {"glb_round_robin", "glb_explore_n2", "glb_random", "bwbgme_explore_n3", "bwbgme_fill",
          "bwbgme_shared_cs_naive", "bwbgme_hanging_no_guard", "bwbgme_explore_no_guard",
          "bl_adversarial_n6", "same_session_n8"}) {
        CAPTURE(f);
        CHECK_NOTHROW(load_scenario(kDir + "/" + f + ".scn"));
    }
}

TEST_CASE("run: glb round robin passes every monitor")
{
    auto r = run_scenario(load_scenario(kDir + "/glb_round_robin.scn"), 1);
    CHECK(r.exit_status() == 0);
    CHECK(r.verdicts.size() == default_properties("glb").size());
    for (const auto& v : r.verdicts)
        CHECK(v.status != Status::Fail);
    CHECK(r.rmr.complete == 12);
    CHECK(r.rmr.incomplete == 0);
}

TEST_CASE("run: bl adversarial block table")
{
    auto r = run_scenario(load_scenario(kDir + "/bl_adversarial_n6.scn"), 1);
    REQUIRE(r.blocks);
    CHECK(r.blocks->of(6) == 15);
    for (Pid j = 1; j < 6; ++j)
        CHECK(r.blocks->by(6, j) == static_cast<std::uint64_t>(j));
    std::ostringstream out;
    write_report(out, r);
    CHECK(out.str().find("P6  15") != std::string::npos);
}

TEST_CASE("run: bwbgme fill reaches N+1")
{
    auto r = run_scenario(load_scenario(kDir + "/bwbgme_fill.scn"), 1);
    REQUIRE(r.commits.size() >= 6);
    for (int k = 0; k < 5; ++k) {
        CHECK(r.commits[static_cast<std::size_t>(k)].pid == k + 1);
        CHECK(r.commits[static_cast<std::size_t>(k)].number == k + 1);
    }
    CHECK(r.commits[5].pid == 1);
    CHECK(r.commits[5].number == 6);
    CHECK(r.max_token == 6);
    CHECK(r.exit_status() == 0);
}

TEST_CASE("run: mutated scenarios fail with the expected monitor")
{
    auto naive = run_scenario(load_scenario(kDir + "/bwbgme_shared_cs_naive.scn"), 1);
    CHECK(naive.exit_status() == 1);
    bool me = false;
    for (const auto& v : naive.verdicts)
        me |= v.property == Property::MutualExclusion && v.failed();
    CHECK(me);

    auto hang = run_scenario(load_scenario(kDir + "/bwbgme_hanging_no_guard.scn"), 1);
    CHECK(hang.exit_status() == 1);
}

TEST_CASE("run: step cap gives the truncation status")
{
    auto s = load_scenario(kDir + "/glb_random.scn");
    s.steps = 40;
    auto r = run_scenario(s, 1);
    CHECK(r.truncated);
    CHECK(r.exit_status() == 3);
}

TEST_CASE("reports are deterministic in (scenario, seed)")
{
    auto s = load_scenario(kDir + "/glb_random.scn");
    auto text = [&](std::uint64_t seed) {
        auto r = run_scenario(s, seed);
        std::ostringstream o;
        write_report(o, r);
        write_invocation_csv(o, r);
        write_trace_jsonl(o, r);
        return o.str();
    };
    CHECK(text(5) == text(5));
    CHECK(text(5) != text(6));
}

TEST_CASE("invocation csv")
{
    auto s = load_scenario(kDir + "/glb_round_robin.scn");
    auto r = run_scenario(s, 3);
    std::ostringstream o;
    write_invocation_csv_header(o);
    write_invocation_csv(o, r);
    std::istringstream in(o.str());
    std::string header;
    std::getline(in, header);
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(columns(line) == columns(header));
        CHECK(line.rfind(hex64(s.hash()) + ",3,glb,4,", 0) == 0);
    }
    CHECK(rows == r.invocations.size());
}

TEST_CASE("trace jsonl")
{
    auto r = run_scenario(load_scenario(kDir + "/bwbgme_fill.scn"), 1);
    std::ostringstream o;
    write_trace_jsonl(o, r);
    std::istringstream in(o.str());
    std::string line;
    std::vector<nlohmann::json> recs;
    while (std::getline(in, line))
        recs.push_back(nlohmann::json::parse(line));
    REQUIRE(recs.size() == r.trace.events.size() + 2);
    CHECK(recs.front()["type"] == "header");
    CHECK(recs.front()["algorithm"] == "bwbgme");
    CHECK(recs.front()["n"] == 5);
    CHECK(recs.front()["initial_global_color"] == "white");
    CHECK(recs.back()["type"] == "end");
    CHECK(recs.back()["steps"] == r.steps);
    std::uint64_t rmr = 0;
    bool saw_triple = false;
    for (std::size_t k = 1; k + 1 < recs.size(); ++k) {
        const auto& e = recs[k];
        CHECK(e["step"] == k - 1);
        rmr += e["rmr"].get<bool>();
        if (e["value"].is_object()) {
            saw_triple = true;
            CHECK(e["value"].contains("number"));
        }
    }
    CHECK(rmr == r.rmr.total);
    CHECK(saw_triple);
}

TEST_CASE("explore through scenarios")
{
    auto glb = load_scenario(kDir + "/glb_explore_n2.scn");
    auto r = explore_scenario(glb);
    CHECK(r.clean());
    CHECK(explore_exit_status(r) == 0);

    auto bw = parse_scenario_text(
        "gme-scenario 1\nalgorithm = bwbgme\nsessions.1 = 1\nsessions.2 = 2\nsessions.3 = 1\n");
    auto b = explore_scenario(bw);
    CHECK(b.clean());
    CHECK(b.max_token <= 4);

    auto broken = explore_scenario(load_scenario(kDir + "/bwbgme_explore_no_guard.scn"));
    CHECK(broken.violation_count(Property::FlipInvariant) > 0);
    CHECK(explore_exit_status(broken) == 1);

    glb.max_states = 10;
    auto cut = explore_scenario(glb);
    CHECK(cut.truncated);
    CHECK(explore_exit_status(cut) == 3);
}

TEST_CASE("sweep aggregation")
{
    auto s = parse_scenario_text("gme-scenario 1\nalgorithm = glb\nn = 4\n");
    std::vector<RunSummary> small;
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
        small.push_back(summarize(run_scenario(s, seed)));
    auto r4 = aggregate(s, small, nullptr);
    CHECK(r4.runs == 5);
    CHECK_FALSE(r4.max_ratio);
    CHECK(r4.violations == 0);
    CHECK(r4.max_invocation_rmr > 0);

    s.n = 8;
    s.sessions.clear();
    s.workload = "conflicting";
    resolve(s);
    CHECK(s.sessions.size() == 8);
    std::vector<RunSummary> big;
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
        big.push_back(summarize(run_scenario(s, seed)));
    auto r8 = aggregate(s, big, &r4);
    REQUIRE(r8.max_ratio);
    CHECK(*r8.max_ratio == doctest::Approx(static_cast<double>(r8.max_invocation_rmr) /
                                          static_cast<double>(r4.max_invocation_rmr)));
    std::ostringstream o;
    write_sweep_csv_header(o);
    write_sweep_csv(o, r8);
    std::istringstream in(o.str());
    std::string h, row;
    std::getline(in, h);
    std::getline(in, row);
    CHECK(columns(h) == columns(row));
}
