#include "gme/cli.hpp"

#include "gme/glb.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace gme {

ScenarioError::ScenarioError(const std::string& where, int line, const std::string& msg)
    : ConfigError(line > 0 ? where + ":" + std::to_string(line) + ": " + msg : where + ": " + msg),
      line_(line)
{
}

namespace {

constexpr std::string_view kHeader = "gme-scenario";
constexpr int kVersion = 1;

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!cur.empty())
                out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty())
        out.push_back(std::move(cur));
    return out;
}

template <class T>
std::optional<T> parse_number(const std::string& s)
{
    T v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        return std::nullopt;
    return v;
}

std::optional<Color> parse_color(const std::string& s)
{
    if (s == "white")
        return Color::White;
    if (s == "black")
        return Color::Black;
    return std::nullopt;
}

const std::set<std::string> kSchedules{"random",      "round-robin", "scripted", "adversarial",
                                       "fill",        "shared-cs",   "hanging"};

bool fixes_workload(const std::string& schedule)
{
    return schedule == "fill" || schedule == "shared-cs" || schedule == "hanging";
}

std::vector<std::vector<std::int64_t>> sessions_of(const Workload& w)
{
    std::vector<std::vector<std::int64_t>> out;
    for (const auto& row : w.per_process) {
        out.emplace_back();
        for (const auto& inv : row)
            out.back().push_back(inv.session);
    }
    return out;
}

std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::optional<std::int64_t> token_number(const CellValue& v)
{
    if (auto* i = std::get_if<std::int64_t>(&v))
        return *i;
    if (auto* t = std::get_if<Triple>(&v))
        return t->number;
    return std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------------------
// scenario

std::vector<Property> Scenario::effective_monitors() const
{
    return monitors.empty() ? default_properties(algorithm) : monitors;
}

std::string Scenario::canonical() const
{
    std::ostringstream o;
    o << kHeader << ' ' << kVersion << '\n';
    o << "algorithm=" << algorithm << '\n' << "n=" << n << '\n';
    for (std::size_t p = 0; p < sessions.size(); ++p) {
        o << "sessions." << p + 1 << '=';
        for (std::size_t k = 0; k < sessions[p].size(); ++k)
            o << (k ? " " : "") << sessions[p][k];
        o << '\n';
    }
    o << "cs_steps=" << cs_steps << '\n' << "schedule=" << schedule << '\n';
    if (schedule == "random")
        o << "window=" << effective_window() << '\n';
    if (schedule == "scripted") {
        o << "script=";
        for (std::size_t k = 0; k < script.size(); ++k)
            o << (k ? " " : "") << script[k];
        o << '\n';
    }
    o << "finish=" << (finish ? "true" : "false") << '\n';
    if (initial_color)
        o << "initial_color=" << to_string(*initial_color) << '\n';
    if (variant)
        o << "variant=" << to_string(*variant) << '\n';
    o << "monitors=";
    const auto mons = effective_monitors();
    for (std::size_t k = 0; k < mons.size(); ++k)
        o << (k ? "," : "") << to_string(mons[k]);
    o << '\n';
    o << "steps=" << steps << '\n' << "max_states=" << max_states << '\n'
      << "max_depth=" << max_depth << '\n' << "token_cap=" << token_cap << '\n';
    return o.str();
}

std::uint64_t Scenario::hash() const { return fnv1a(canonical()); }

void resolve(Scenario& s)
{
    auto fail = [&](const std::string& msg) { throw ScenarioError(s.name, 0, msg); };
    if (s.algorithm != "glb" && s.algorithm != "bwbgme" && s.algorithm != "bl")
        fail("unknown algorithm '" + s.algorithm + "'");
    if (!kSchedules.count(s.schedule))
        fail("unknown schedule '" + s.schedule + "'");
    if (s.algorithm != "bwbgme" && (s.initial_color || s.variant))
        fail("initial_color and variant apply to bwbgme only");
    if (s.cs_steps < 0)
        fail("cs_steps must be >= 0");
    if (s.invocations < 1)
        fail("invocations must be >= 1");

    if (fixes_workload(s.schedule)) {
        if (s.algorithm != "bwbgme")
            fail("schedule '" + s.schedule + "' needs algorithm bwbgme");
        if (s.workload != "" && s.workload != s.schedule)
            fail("schedule '" + s.schedule + "' fixes its own workload");
        const int fixed = s.schedule == "shared-cs" ? 4 : s.schedule == "hanging" ? 3 : 0;
        if (fixed && s.n != 0 && s.n != fixed)
            fail("schedule '" + s.schedule + "' needs n=" + std::to_string(fixed));
        if (fixed)
            s.n = fixed;
        if (s.n < 1)
            fail("n must be >= 1");
        s.workload = s.schedule;
        if (s.schedule == "fill")
            s.sessions = sessions_of(bwbgme_fill_workload(s.n));
        else if (s.schedule == "shared-cs")
            s.sessions = sessions_of(bwbgme_shared_cs_workload());
        else
            s.sessions = sessions_of(bwbgme_hanging_workload());
    } else {
        if (s.n < 1)
            fail("n must be >= 1");
        if (s.workload.empty())
            s.workload = s.sessions.empty() ? "conflicting" : "explicit";
        if (s.workload == "conflicting")
            s.sessions = sessions_of(Workload::conflicting(s.n, s.invocations));
        else if (s.workload == "same-session")
            s.sessions = sessions_of(Workload::same_session(s.n, s.invocations));
        else if (s.workload != "explicit")
            fail("unknown workload '" + s.workload + "'");
    }
    if (static_cast<int>(s.sessions.size()) != s.n)
        fail("sessions given for " + std::to_string(s.sessions.size()) + " processes, n=" +
             std::to_string(s.n));
    for (const auto& row : s.sessions)
        for (auto x : row)
            if (x < 1)
                fail("session numbers must be >= 1");

    if (s.schedule == "adversarial") {
        if (s.algorithm != "bl")
            fail("schedule 'adversarial' needs algorithm bl");
        if (s.n < 2)
            fail("schedule 'adversarial' needs n >= 2");
        for (const auto& row : s.sessions)
            if (row.size() != 1)
                fail("schedule 'adversarial' needs one invocation per process");
    }
    if (s.schedule == "scripted") {
        if (s.script.empty())
            fail("schedule 'scripted' needs a script");
        for (auto p : s.script)
            if (p < 1 || p > s.n)
                fail("script pid " + std::to_string(p) + " out of range");
    } else if (!s.script.empty()) {
        fail("script given but schedule is '" + s.schedule + "'");
    }
    if (s.schedule == "random" && s.window != 0 && s.window < s.n)
        fail("window must be >= n");
    std::set<Property> seen;
    for (auto p : s.monitors)
        if (!seen.insert(p).second)
            fail("monitor '" + std::string(to_string(p)) + "' listed twice");
}

Scenario parse_scenario(std::istream& in, const std::string& name)
{
    Scenario s;
    s.name = name;
    std::string raw;
    int lineno = 0;
    bool header = false;
    std::map<std::string, int> seen;
    std::map<int, std::vector<std::int64_t>> explicit_sessions;
    int sessions_line = 0;

    while (std::getline(in, raw)) {
        ++lineno;
        auto hash = raw.find('#');
        const auto line = trim(std::string_view(raw).substr(0, hash));
        if (line.empty())
            continue;
        auto fail = [&](const std::string& msg) { throw ScenarioError(name, lineno, msg); };
        if (!header) {
            std::istringstream hs(line);
            std::string word;
            std::string version;
            hs >> word >> version;
            if (word != kHeader)
                fail("expected header '" + std::string(kHeader) + " " +
                     std::to_string(kVersion) + "'");
            if (version != std::to_string(kVersion))
                fail("unsupported scenario version '" + version + "'");
            header = true;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail("expected key = value");
        const auto key = trim(std::string_view(line).substr(0, eq));
        const auto value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty())
            fail("empty key");
        if (seen.count(key))
            fail("duplicate key '" + key + "' (first on line " + std::to_string(seen[key]) + ")");
        seen[key] = lineno;

        auto integer = [&](auto& into, long long lo) {
            using T = std::remove_reference_t<decltype(into)>;
            auto v = parse_number<T>(value);
            if (!v || static_cast<long long>(*v) < lo)
                fail("'" + key + "' needs an integer >= " + std::to_string(lo) + ", got '" +
                     value + "'");
            into = *v;
        };

        if (key == "algorithm") {
            if (value != "glb" && value != "bwbgme" && value != "bl")
                fail("unknown algorithm '" + value + "'");
            s.algorithm = value;
        } else if (key == "n") {
            integer(s.n, 1);
        } else if (key.rfind("sessions.", 0) == 0) {
            auto pid = parse_number<int>(key.substr(9));
            if (!pid || *pid < 1)
                fail("bad process id in '" + key + "'");
            std::vector<std::int64_t> row;
            for (const auto& tok : split_list(value)) {
                auto v = parse_number<std::int64_t>(tok);
                if (!v || *v < 1)
                    fail("session numbers must be integers >= 1, got '" + tok + "'");
                row.push_back(*v);
            }
            explicit_sessions[*pid] = std::move(row);
            sessions_line = sessions_line ? sessions_line : lineno;
        } else if (key == "workload") {
            if (value != "conflicting" && value != "same-session")
                fail("unknown workload '" + value + "'");
            s.workload = value;
        } else if (key == "invocations") {
            integer(s.invocations, 1);
        } else if (key == "cs_steps") {
            integer(s.cs_steps, 0);
        } else if (key == "schedule") {
            if (!kSchedules.count(value))
                fail("unknown schedule '" + value + "'");
            s.schedule = value;
        } else if (key == "window") {
            integer(s.window, 1);
        } else if (key == "script") {
            for (const auto& tok : split_list(value)) {
                auto v = parse_number<int>(tok);
                if (!v || *v < 1)
                    fail("script entries must be pids >= 1, got '" + tok + "'");
                s.script.push_back(*v);
            }
        } else if (key == "finish") {
            if (value != "true" && value != "false")
                fail("'finish' needs true or false");
            s.finish = value == "true";
        } else if (key == "seed") {
            integer(s.seed, 0);
        } else if (key == "initial_color") {
            auto c = parse_color(value);
            if (!c)
                fail("initial_color must be white or black");
            s.initial_color = c;
        } else if (key == "variant") {
            try {
                s.variant = parse_bwbgme_variant(value);
            } catch (const ConfigError& e) {
                fail(e.what());
            }
        } else if (key == "monitors") {
            if (value != "default") {
                for (const auto& tok : split_list(value)) {
                    try {
                        s.monitors.push_back(parse_property(tok));
                    } catch (const ConfigError& e) {
                        fail(e.what());
                    }
                }
            }
        } else if (key == "steps") {
            integer(s.steps, 1);
        } else if (key == "max_states") {
            integer(s.max_states, 1);
        } else if (key == "max_depth") {
            integer(s.max_depth, 1);
        } else if (key == "token_cap") {
            integer(s.token_cap, 0);
        } else {
            fail("unknown key '" + key + "'");
        }
    }
    if (!header)
        throw ScenarioError(name, lineno, "missing header '" + std::string(kHeader) + " " +
                                              std::to_string(kVersion) + "'");
    auto missing = [&](const char* key) {
        throw ScenarioError(name, 0, std::string("missing key '") + key + "'");
    };
    if (s.algorithm.empty())
        missing("algorithm");

    if (!explicit_sessions.empty()) {
        auto fail = [&](const std::string& msg) { throw ScenarioError(name, sessions_line, msg); };
        if (!s.workload.empty())
            fail("give either sessions.<pid> or workload, not both");
        if (seen.count("invocations"))
            fail("invocations applies to the workload template only");
        const int top = explicit_sessions.rbegin()->first;
        if (s.n == 0)
            s.n = top;
        for (int p = 1; p <= s.n; ++p)
            if (!explicit_sessions.count(p))
                fail("sessions." + std::to_string(p) + " missing");
        if (top > s.n)
            fail("sessions." + std::to_string(top) + " exceeds n=" + std::to_string(s.n));
        for (auto& [p, row] : explicit_sessions)
            s.sessions.push_back(std::move(row));
        s.workload = "explicit";
    } else if (s.n == 0 && !fixes_workload(s.schedule)) {
        missing("n");
    }
    resolve(s);
    return s;
}

Scenario parse_scenario_text(const std::string& text, const std::string& name)
{
    std::istringstream in(text);
    return parse_scenario(in, name);
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ScenarioError(path, 0, "cannot open file");
    return parse_scenario(in, path);
}

std::shared_ptr<const AlgorithmSpec> build_spec(const Scenario& s)
{
    if (s.algorithm == "glb")
        return build_glb(s.n);
    if (s.algorithm == "bl")
        return build_bl(s.n);
    if (s.algorithm == "bwbgme")
        return build_bwbgme(s.n, s.initial_color.value_or(Color::White),
                            s.variant.value_or(BwbgmeVariant::Standard));
    throw ConfigError("unknown algorithm '" + s.algorithm + "'");
}

Workload build_workload(const Scenario& s) { return Workload::from_sessions(s.sessions, s.cs_steps); }

namespace {

/// Finite script, then optionally round-robin over whatever is left.
class ScriptThenRoundRobin final : public SchedulePolicy {
public:
    ScriptThenRoundRobin(std::vector<Pid> script, bool finish)
        : script_(std::move(script)), finish_(finish)
    {
    }
    std::optional<Pid> next(const System& sys) override
    {
        if (auto p = script_.next(sys))
            return p;
        if (!finish_)
            return std::nullopt;
        return rr_.next(sys);
    }

private:
    ScriptedSchedule script_;
    RoundRobinSchedule rr_;
    bool finish_;
};

std::vector<Pid> named_script(const Scenario& s)
{
    if (s.schedule == "scripted")
        return s.script;
    if (s.schedule == "adversarial")
        return bl_adversarial_schedule(s.n);
    if (s.schedule == "fill")
        return bwbgme_fill_schedule(s.n);
    if (s.schedule == "shared-cs")
        return bwbgme_shared_cs_schedule();
    return bwbgme_hanging_schedule();
}

}  // namespace

std::unique_ptr<SchedulePolicy> build_schedule(const Scenario& s, std::uint64_t seed)
{
    if (s.schedule == "random")
        return std::make_unique<RandomSchedule>(seed, s.effective_window());
    if (s.schedule == "round-robin")
        return std::make_unique<RoundRobinSchedule>();
    return std::make_unique<ScriptThenRoundRobin>(named_script(s), s.finish);
}

// ---------------------------------------------------------------------------
// run

bool RunReport::violated() const
{
    return std::any_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.failed(); });
}

int RunReport::exit_status() const
{
    if (violated())
        return 1;
    return truncated ? 3 : 0;
}

RunReport run_scenario(const Scenario& s, std::uint64_t seed)
{
    RunReport r;
    r.scenario = s.name;
    r.scenario_hash = s.hash();
    r.seed = seed;
    r.algorithm = s.algorithm;
    r.n = s.n;
    r.initial_color = s.initial_color;
    r.variant = s.variant;

    System sys(build_spec(s), build_workload(s));
    auto schedule = build_schedule(s, seed);
    MonitorSet monitors(s.effective_monitors());
    InvocationCollector collector;
    auto obs = monitors.observers();
    obs.push_back(&collector);
    auto out = run(sys, *schedule, obs, s.steps);

    r.steps = out.steps;
    r.truncated = out.truncated;
    r.deadlocked = out.deadlocked;
    r.verdicts = monitors.verdicts();
    r.invocations = collector.records();
    r.rmr = rmr_report(r.invocations, s.n);
    for (const auto& e : out.trace.events) {
        if (e.access != Access::Write || !e.reg || e.reg->family != RegisterFamily::Token ||
            e.reg->index != e.pid || !e.value)
            continue;
        auto num = token_number(*e.value);
        if (num && *num > 0) {
            r.commits.push_back({e.step, e.pid, *num});
            r.max_token = std::max(r.max_token, *num);
        }
    }
    if (s.algorithm == "bl")
        r.blocks = block_events(out.trace);
    r.trace = std::move(out.trace);
    return r;
}

namespace {

std::string stat_text(const Stat& st)
{
    if (st.count == 0)
        return "-";
    std::ostringstream o;
    o << st.min << " / " << std::fixed << std::setprecision(2) << st.mean << " / " << st.max;
    return o.str();
}

std::string opt_step(const std::optional<std::uint64_t>& x)
{
    return x ? std::to_string(*x) : std::string();
}

}  // namespace

std::string hex64(std::uint64_t x)
{
    std::ostringstream o;
    o << std::hex << std::setw(16) << std::setfill('0') << x;
    return o.str();
}

void write_report(std::ostream& out, const RunReport& r)
{
    out << "scenario   " << r.scenario << "\n";
    out << "hash       " << hex64(r.scenario_hash) << "  seed " << r.seed << "\n";
    out << "algorithm  " << r.algorithm << "  n " << r.n;
    if (r.initial_color)
        out << "  initial color " << to_string(*r.initial_color);
    if (r.variant)
        out << "  variant " << to_string(*r.variant);
    out << "\n";
    out << "steps      " << r.steps << (r.truncated ? "  (truncated at step cap)" : "")
        << (r.deadlocked ? "  (deadlocked)" : "") << "\n";
    out << "complete   " << r.rmr.complete << " of " << r.rmr.complete + r.rmr.incomplete
        << " invocations\n";
    out << "verdicts\n";
    for (const auto& v : r.verdicts) {
        out << "  " << std::left << std::setw(18) << to_string(v.property) << std::right
            << to_string(v.status);
        if (!v.witness.empty()) {
            out << "  at";
            for (const auto& w : v.witness)
                out << " step " << w.step << " P" << w.pid << ";";
        }
        if (!v.detail.empty())
            out << "  " << v.detail;
        out << "\n";
    }
    out << "rmr per complete invocation (min / mean / max)\n";
    for (auto sec : {Section::Doorway, Section::Waiting, Section::CS, Section::Exit})
        out << "  " << std::left << std::setw(10) << to_string(sec) << std::right
            << stat_text(r.rmr.by_section[static_cast<std::size_t>(sec)]) << "\n";
    out << "  " << std::left << std::setw(10) << "total" << std::right
        << stat_text(r.rmr.per_invocation) << "\n";
    out << "rmr total  " << r.rmr.total << "\n";
    if (!r.commits.empty()) {
        out << "max token  " << r.max_token << "\n";
        out << "tokens    ";
        for (const auto& c : r.commits)
            out << " P" << c.pid << "=" << c.number;
        out << "\n";
    }
    if (r.blocks) {
        out << "blocks\n";
        for (Pid p = 1; p <= r.n; ++p) {
            out << "  P" << p << "  " << r.blocks->of(p);
            bool any = false;
            for (Pid q = 1; q <= r.n; ++q) {
                if (auto k = r.blocks->by(p, q)) {
                    out << (any ? ", " : "  (") << "by P" << q << ": " << k;
                    any = true;
                }
            }
            out << (any ? ")" : "") << "\n";
        }
    }
    if (r.trace_path)
        out << "trace      " << *r.trace_path << "\n";
}

void write_invocation_csv_header(std::ostream& out)
{
    out << "scenario_hash,seed,algorithm,n,pid,invocation,session,token,doorway_start,"
           "doorway_complete,cs_enter,cs_exit,exit_complete,rmr_doorway,rmr_waiting,rmr_cs,"
           "rmr_exit,rmr_total,exit_shared,entry_steps,false_waits\n";
}

void write_invocation_csv(std::ostream& out, const RunReport& r)
{
    auto sec = [](const auto& arr, Section s) { return arr[static_cast<std::size_t>(s)]; };
    for (const auto& rec : r.invocations) {
        std::string token;
        if (rec.token)
            if (auto num = token_number(*rec.token))
                token = std::to_string(*num);
        out << hex64(r.scenario_hash) << ',' << r.seed << ',' << r.algorithm << ',' << r.n << ','
            << rec.pid << ',' << rec.invocation << ',' << rec.session << ',' << token << ','
            << opt_step(rec.doorway_start) << ',' << opt_step(rec.doorway_complete) << ','
            << opt_step(rec.cs_enter) << ',' << opt_step(rec.cs_exit) << ','
            << opt_step(rec.exit_complete) << ',' << sec(rec.rmr, Section::Doorway) << ','
            << sec(rec.rmr, Section::Waiting) << ',' << sec(rec.rmr, Section::CS) << ','
            << sec(rec.rmr, Section::Exit) << ',' << rec.total_rmr() << ','
            << sec(rec.shared, Section::Exit) << ',' << rec.entry_steps << ','
            << rec.false_waits << '\n';
    }
}

namespace {

nlohmann::json value_json(const CellValue& v)
{
    if (auto* i = std::get_if<std::int64_t>(&v))
        return *i;
    if (auto* b = std::get_if<bool>(&v))
        return *b;
    if (auto* c = std::get_if<Color>(&v))
        return std::string(to_string(*c));
    const auto& t = std::get<Triple>(v);
    return {{"session", t.session}, {"color", std::string(to_string(t.color))}, {"number", t.number}};
}

nlohmann::json markers_json(const TraceEvent& e)
{
    auto arr = nlohmann::json::array();
    const std::pair<Marker, const char*> names[] = {{kDoorwayStart, "doorway-start"},
                                                    {kDoorwayComplete, "doorway-complete"},
                                                    {kCsEnter, "cs-enter"},
                                                    {kCsExit, "cs-exit"},
                                                    {kExitComplete, "exit-complete"}};
    for (const auto& [m, name] : names)
        if (e.has(m))
            arr.push_back(name);
    return arr;
}

}  // namespace

void write_trace_jsonl(std::ostream& out, const RunReport& r)
{
    const auto& h = r.trace.header;
    nlohmann::json head{{"type", "header"},
                        {"format", 1},
                        {"scenario_hash", hex64(r.scenario_hash)},
                        {"seed", r.seed},
                        {"algorithm", h.algorithm},
                        {"n", h.n},
                        {"uses_sessions", h.uses_sessions},
                        {"single_session", h.single_session}};
    head["initial_global_color"] =
        h.initial_global_color ? nlohmann::json(std::string(to_string(*h.initial_global_color)))
                               : nlohmann::json(nullptr);
    out << head.dump() << '\n';
    for (const auto& e : r.trace.events) {
        nlohmann::json j{{"type", "event"},
                         {"step", e.step},
                         {"pid", e.pid},
                         {"line", e.line},
                         {"access", std::string(to_string(e.access))},
                         {"rmr", e.rmr},
                         {"section", std::string(to_string(e.section))},
                         {"markers", markers_json(e)},
                         {"j", e.loop_index},
                         {"session", e.session},
                         {"invocation", e.invocation},
                         {"all_blocked", e.all_blocked}};
        j["reg"] = e.reg ? nlohmann::json(to_string(*e.reg)) : nlohmann::json(nullptr);
        j["value"] = e.value ? value_json(*e.value) : nlohmann::json(nullptr);
        j["wait"] = e.wait == WaitOutcome::None     ? nlohmann::json(nullptr)
                    : e.wait == WaitOutcome::Passed ? nlohmann::json(true)
                                                    : nlohmann::json(false);
        out << j.dump() << '\n';
    }
    nlohmann::json end{{"type", "end"},
                       {"steps", r.steps},
                       {"truncated", r.truncated},
                       {"deadlocked", r.deadlocked}};
    out << end.dump() << '\n';
}

// ---------------------------------------------------------------------------
// explore

ExplorationReport explore_scenario(const Scenario& s)
{
    ExploreOptions opt;
    opt.max_states = s.max_states;
    opt.max_depth = s.max_depth;
    opt.token_cap = s.token_cap;
    return explore(build_spec(s), build_workload(s), opt);
}

void write_explore_report(std::ostream& out, const Scenario& s, const ExplorationReport& r)
{
    out << "scenario   " << s.name << "\n";
    out << "hash       " << hex64(s.hash()) << "\n";
    out << "algorithm  " << s.algorithm << "  n " << s.n;
    if (s.initial_color)
        out << "  initial color " << to_string(*s.initial_color);
    if (s.variant)
        out << "  variant " << to_string(*s.variant);
    out << "\n";
    const auto text = to_string(r);
    out << text;
    if (text.empty() || text.back() != '\n')
        out << "\n";
    out << "result     "
        << (explore_exit_status(r) == 0   ? "clean"
            : explore_exit_status(r) == 1 ? "violations found"
                                          : "truncated")
        << "\n";
}

int explore_exit_status(const ExplorationReport& r)
{
    if (!r.clean())
        return 1;
    return r.truncated ? 3 : 0;
}

// ---------------------------------------------------------------------------
// sweep

RunSummary summarize(const RunReport& r)
{
    RunSummary s;
    s.seed = r.seed;
    s.max_invocation_rmr = r.rmr.per_invocation.max;
    s.mean_invocation_rmr = r.rmr.per_invocation.mean;
    s.total_rmr = r.rmr.total;
    s.complete = r.rmr.complete;
    s.incomplete = r.rmr.incomplete;
    s.violated = r.violated();
    s.truncated = r.truncated;
    return s;
}

SweepRow aggregate(const Scenario& s, const std::vector<RunSummary>& runs, const SweepRow* prev)
{
    SweepRow row;
    row.algorithm = s.algorithm;
    row.schedule = s.schedule;
    row.n = s.n;
    row.runs = runs.size();
    double inv_sum = 0.0;
    std::size_t inv_count = 0;
    double total_sum = 0.0;
    for (const auto& r : runs) {
        row.max_invocation_rmr = std::max(row.max_invocation_rmr, r.max_invocation_rmr);
        row.max_total_rmr = std::max(row.max_total_rmr, r.total_rmr);
        inv_sum += r.mean_invocation_rmr * static_cast<double>(r.complete);
        inv_count += r.complete;
        total_sum += static_cast<double>(r.total_rmr);
        row.violations += r.violated;
        row.truncated += r.truncated;
    }
    row.mean_invocation_rmr = inv_count ? inv_sum / static_cast<double>(inv_count) : 0.0;
    row.mean_total_rmr = runs.empty() ? 0.0 : total_sum / static_cast<double>(runs.size());
    if (prev && prev->max_invocation_rmr > 0)
        row.max_ratio = static_cast<double>(row.max_invocation_rmr) /
                        static_cast<double>(prev->max_invocation_rmr);
    if (prev && prev->mean_total_rmr > 0)
        row.total_ratio = row.mean_total_rmr / prev->mean_total_rmr;
    return row;
}

void write_sweep_csv_header(std::ostream& out)
{
    out << "algorithm,schedule,n,runs,max_invocation_rmr,mean_invocation_rmr,max_total_rmr,"
           "mean_total_rmr,max_ratio,total_ratio,violations,truncated\n";
}

void write_sweep_csv(std::ostream& out, const SweepRow& row)
{
    auto fixed = [](double x) {
        std::ostringstream o;
        o << std::fixed << std::setprecision(4) << x;
        return o.str();
    };
    out << row.algorithm << ',' << row.schedule << ',' << row.n << ',' << row.runs << ','
        << row.max_invocation_rmr << ',' << fixed(row.mean_invocation_rmr) << ','
        << row.max_total_rmr << ',' << fixed(row.mean_total_rmr) << ','
        << (row.max_ratio ? fixed(*row.max_ratio) : "") << ','
        << (row.total_ratio ? fixed(*row.total_ratio) : "") << ',' << row.violations << ','
        << row.truncated << '\n';
}

}  // namespace gme
