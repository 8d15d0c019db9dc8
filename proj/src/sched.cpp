#include "gme/sched.hpp"

#include "gme/bl.hpp"
#include "gme/bwbgme.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace gme {

// ---------------------------------------------------------------------------
// schedules

std::optional<Pid> ScriptedSchedule::next(const System& sys)
{
    if (pos_ >= pids_.size())
        return std::nullopt;
    Pid p = pids_[pos_++];
    if (p < 1 || p > sys.n())
        throw ConfigError("scripted schedule names process " + std::to_string(p) + " but N = " +
                          std::to_string(sys.n()));
    return p;
}

std::optional<Pid> RoundRobinSchedule::next(const System& sys)
{
    Pid p = next_;
    next_ = next_ % sys.n() + 1;
    return p;
}

Pid RandomSchedule::next_pid(int n)
{
    if (window_ < n)
        throw ConfigError("fairness window " + std::to_string(window_) + " is smaller than N = " +
                          std::to_string(n));
    if (deadline_.empty())
        deadline_.assign(static_cast<std::size_t>(n), static_cast<std::uint64_t>(window_ - 1));

    // Earliest deadline first whenever the slack runs out, uniform otherwise.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return deadline_[static_cast<std::size_t>(a)] < deadline_[static_cast<std::size_t>(b)];
    });
    bool tight = false;
    for (std::size_t k = 0; k < order.size(); ++k)
        if (deadline_[static_cast<std::size_t>(order[k])] <= t_ + k)
            tight = true;
    int pick = order.front();
    if (!tight)
        pick = static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng_));
    deadline_[static_cast<std::size_t>(pick)] = t_ + static_cast<std::uint64_t>(window_);
    ++t_;
    return pick + 1;
}

std::optional<Pid> RandomSchedule::next(const System& sys)
{
    return next_pid(sys.n());
}

std::vector<Pid> random_schedule(std::uint64_t seed, int window, int n, std::size_t length)
{
    RandomSchedule s(seed, window);
    std::vector<Pid> out;
    out.reserve(length);
    for (std::size_t k = 0; k < length; ++k)
        out.push_back(s.next_pid(n));
    return out;
}

// ---------------------------------------------------------------------------
// script builder and scripted scenarios

ScriptBuilder& ScriptBuilder::advance(Pid pid, const Until& done, int limit)
{
    for (int k = 0; k < limit; ++k) {
        auto ev = sys_.step(pid);
        script_.push_back(pid);
        if (done(ev, sys_))
            return *this;
        if (ev.access == Access::Idle)
            throw std::logic_error("script builder: P" + std::to_string(pid) +
                                   " has no work left");
    }
    throw std::logic_error("script builder: P" + std::to_string(pid) + " did not get there in " +
                           std::to_string(limit) + " steps");
}

ScriptBuilder& ScriptBuilder::until_marker(Pid pid, Marker m)
{
    return advance(pid, [m](const TraceEvent& e, const System&) { return e.has(m); });
}

ScriptBuilder& ScriptBuilder::until_failed_wait(Pid pid)
{
    return advance(pid,
                   [](const TraceEvent& e, const System&) { return e.wait == WaitOutcome::Failed; });
}

ScriptBuilder& ScriptBuilder::until_write_at(Pid pid, int line)
{
    return advance(pid, [line](const TraceEvent& e, const System&) {
        return e.access == Access::Write && e.line == line;
    });
}

std::vector<Pid> bl_adversarial_schedule(int n)
{
    if (n < 2)
        throw ConfigError("the adversarial schedule needs n >= 2");
    ScriptBuilder b(System(build_bl(n), Workload::conflicting(n, 1)));
    for (int low = 1; low <= n - 1; ++low) {
        // participants are low..n; everyone below has finished
        b.until_write_at(n, 1);
        b.until_write_at(n - 1, 1);
        b.until_failed_wait(n);
        for (int m = n - 2; m >= low; --m) {
            b.until_write_at(m, 1);
            b.until_failed_wait(m + 1);
            b.until_failed_wait(n);
        }
        b.until_marker(low, kExitComplete);
    }
    b.until_marker(n, kExitComplete);
    return b.script();
}

Workload bwbgme_shared_cs_workload()
{
    return Workload::from_sessions({{1}, {1}, {1}, {2}});
}

std::vector<Pid> bwbgme_shared_cs_schedule()
{
    ScriptBuilder b(System(build_bwbgme(4, Color::White, BwbgmeVariant::Naive),
                           bwbgme_shared_cs_workload()));
    b.until_marker(1, kDoorwayComplete).until_marker(2, kDoorwayComplete);
    b.until_marker(1, kCsEnter).until_marker(2, kCsEnter);
    b.until_marker(1, kExitComplete);
    b.until_marker(3, kCsEnter);
    b.until_marker(4, kDoorwayComplete).until_failed_wait(4);
    b.until_marker(3, kExitComplete);
    b.until_marker(4, kCsEnter);
    return b.script();
}

Workload bwbgme_hanging_workload()
{
    return Workload::same_session(3, 1);
}

std::vector<Pid> bwbgme_hanging_schedule()
{
    ScriptBuilder b(System(build_bwbgme(3, Color::White, BwbgmeVariant::NoNumberGuard),
                           bwbgme_hanging_workload()));
    b.advance(1, [](const TraceEvent& e, const System&) {
        return e.access == Access::Read && e.line == 5;
    });
    b.until_marker(2, kExitComplete);
    b.until_marker(3, kExitComplete);
    return b.script();
}

std::vector<Pid> bwbgme_fill_schedule(int n)
{
    ScriptBuilder b(System(build_bwbgme(n), bwbgme_fill_workload(n)));
    for (Pid p = 1; p <= n; ++p)
        b.until_marker(p, kDoorwayComplete);
    b.until_marker(1, kExitComplete);
    b.until_marker(1, kDoorwayComplete);
    return b.script();
}

Workload bwbgme_fill_workload(int n)
{
    if (n < 1)
        throw ConfigError("fill needs at least one process");
    std::vector<std::vector<std::int64_t>> s(static_cast<std::size_t>(n));
    for (int p = 1; p <= n; ++p)
        s[static_cast<std::size_t>(p - 1)] = {p};
    s[0].push_back(n + 1);
    return Workload::from_sessions(s);
}

// ---------------------------------------------------------------------------
// explorer

std::uint64_t ExplorationReport::violation_count(Property p) const
{
    auto it = violations.find(p);
    return it == violations.end() ? 0 : it->second;
}

std::uint64_t ExplorationReport::total_violations() const
{
    std::uint64_t t = 0;
    for (const auto& [p, c] : violations)
        t += c;
    return t;
}

namespace {

// Automaton state of the safety checks, carried along each path.
struct Ext {
    std::vector<std::uint32_t> precedes;  // bit i-1: P_i doorway-precedes this process
    std::vector<std::int8_t> flips;       // -1 outside the color window

    void append(std::string& out) const
    {
        for (auto m : precedes) {
            out.push_back(static_cast<char>(m & 0xff));
            out.push_back(static_cast<char>((m >> 8) & 0xff));
            out.push_back(static_cast<char>((m >> 16) & 0xff));
        }
        for (auto f : flips)
            out.push_back(static_cast<char>(f));
    }
};

struct Fingerprint {
    std::uint64_t a, b;
    friend bool operator==(const Fingerprint&, const Fingerprint&) = default;
};

struct FingerprintHash {
    std::size_t operator()(const Fingerprint& f) const { return f.a ^ (f.b * 0x9e3779b97f4a7c15ULL); }
};

Fingerprint fingerprint(const std::string& key)
{
    std::uint64_t fnv = 0xcbf29ce484222325ULL;
    for (unsigned char c : key) {
        fnv ^= c;
        fnv *= 0x100000001b3ULL;
    }
    return {std::hash<std::string_view>{}(key), fnv};
}

class Visited {
public:
    explicit Visited(bool exact) : exact_(exact) {}
    bool insert(const std::string& key)
    {
        if (exact_)
            return exact_set_.insert(key).second;
        return fp_set_.insert(fingerprint(key)).second;
    }

private:
    bool exact_;
    std::unordered_set<std::string> exact_set_;
    std::unordered_set<Fingerprint, FingerprintHash> fp_set_;
};

struct Frame {
    System sys;
    Ext ext;
    Pid next = 1;
};

bool conflict(const AlgorithmSpec& spec, std::int64_t a, std::int64_t b)
{
    return !spec.uses_sessions() || a != b;
}

std::optional<Color> global_color(const System& sys)
{
    RegisterId gc{RegisterFamily::GlobalColor, 0};
    if (!sys.memory().has_register(gc))
        return std::nullopt;
    return std::get<Color>(sys.memory().peek(gc));
}

std::int64_t max_int_token(const System& sys)
{
    std::int64_t m = 0;
    for (Pid p = 1; p <= sys.n(); ++p) {
        RegisterId t{RegisterFamily::Token, p};
        if (!sys.memory().has_register(t))
            return 0;
        const auto& v = sys.memory().peek(t);
        if (const auto* i = std::get_if<std::int64_t>(&v))
            m = std::max(m, *i);
        else if (const auto* tr = std::get_if<Triple>(&v))
            m = std::max(m, tr->number);
    }
    return m;
}

}  // namespace

ExplorationReport explore(std::shared_ptr<const AlgorithmSpec> spec, const Workload& workload,
                          const ExploreOptions& opt)
{
    ExplorationReport rep;
    const int n = spec->n();
    if (n > 24)
        throw ConfigError("explorer supports at most 24 processes");
    const bool bw = spec->name() == "bwbgme";
    const bool int_tokens = spec->name() == "glb";
    const auto props = default_properties(spec->name());
    const bool fcfs = std::find(props.begin(), props.end(), Property::Fcfs) != props.end();
    rep.token_cap = opt.token_cap > 0
                        ? opt.token_cap
                        : 4 * static_cast<std::int64_t>(n) *
                              static_cast<std::int64_t>(std::max<std::size_t>(1, workload.total_invocations()));

    Visited visited(opt.exact_keys);
    std::unordered_set<std::string> all_keys;
    std::unordered_map<std::string, std::vector<Pid>> first_path;

    Frame root{System(spec, workload), {}, 1};
    root.sys.set_checked(false);
    root.ext.precedes.assign(static_cast<std::size_t>(n), 0);
    root.ext.flips.assign(static_cast<std::size_t>(n), -1);

    std::string key;
    auto full_key = [&](const Frame& f) {
        key.clear();
        f.sys.append_state_key(key);
        const auto sys_len = key.size();
        f.ext.append(key);
        return sys_len;
    };

    std::vector<Pid> path;
    std::vector<Frame> stack;
    {
        const auto sys_len = full_key(root);
        visited.insert(key);
        if (opt.collect_keys)
            all_keys.insert(key.substr(0, sys_len));
        rep.states = 1;
        rep.max_token = max_int_token(root.sys);
    }
    stack.push_back(std::move(root));

    auto record = [&](std::vector<Counterexample>& into, Property p, std::string detail,
                      std::size_t limit) {
        std::size_t have = 0;
        for (const auto& c : into)
            have += c.property == p;
        if (have < limit)
            into.push_back({p, path, std::move(detail)});
    };

    while (!stack.empty()) {
        auto& top = stack.back();
        // next enabled process of the top frame
        while (top.next <= n && top.sys.finished(top.next))
            ++top.next;
        if (top.next > n) {
            stack.pop_back();
            if (!path.empty())
                path.pop_back();
            continue;
        }
        const Pid pid = top.next++;

        if (rep.states >= opt.max_states) {
            rep.truncated = true;
            break;
        }
        if (path.size() + 1 > opt.max_depth) {
            rep.truncated = true;
            continue;
        }

        Frame child{top.sys, top.ext, 1};
        const auto color_before = global_color(child.sys);
        const auto ev = child.sys.step(pid);
        ++rep.transitions;
        path.push_back(pid);

        std::vector<std::pair<Property, std::string>> bad;
        auto& ext = child.ext;
        const auto& sys = child.sys;
        const auto i = static_cast<std::size_t>(pid - 1);

        // FCFS automaton
        if (fcfs && ev.has(kDoorwayStart)) {
            std::uint32_t mask = 0;
            for (Pid q = 1; q <= n; ++q)
                if (q != pid && sys.section(q) == Section::Waiting &&
                    conflict(*spec, sys.local(q).mysession, ev.session))
                    mask |= 1u << (q - 1);
            ext.precedes[i] = mask;
        }
        if (ev.has(kCsEnter)) {
            if (fcfs && ext.precedes[i] != 0)
                bad.emplace_back(Property::Fcfs, "P" + std::to_string(pid) +
                                                     " overtook a doorway-preceding process");
            ext.precedes[i] = 0;
            for (auto& m : ext.precedes)
                m &= ~(1u << (pid - 1));
        }

        // mutual exclusion
        if (ev.has(kCsEnter)) {
            for (Pid q = 1; q <= n; ++q)
                if (q != pid && sys.section(q) == Section::CS &&
                    conflict(*spec, sys.local(q).mysession, ev.session))
                    bad.emplace_back(Property::MutualExclusion,
                                     "P" + std::to_string(pid) + " and P" + std::to_string(q) +
                                         " in the CS");
        }

        if (bw) {
            if (ev.access == Access::Read && ev.line == 5 && ev.reg &&
                ev.reg->family == RegisterFamily::GlobalColor)
                ext.flips[i] = 0;
            const auto color_after = global_color(sys);
            if (color_before != color_after) {
                for (Pid q = 1; q <= n; ++q) {
                    auto& f = ext.flips[static_cast<std::size_t>(q - 1)];
                    if (f >= 0 && ++f >= 2)
                        bad.emplace_back(Property::FlipInvariant,
                                         "two flips inside the window of P" + std::to_string(q));
                }
            }
            if (ev.access == Access::Write && ev.reg && ev.reg->family == RegisterFamily::Token) {
                const auto& t = std::get<Triple>(*ev.value);
                if (t.color != Color::Bottom && t.number > n + 1)
                    bad.emplace_back(Property::TokenBound,
                                     "token number " + std::to_string(t.number));
            }
        }
        if (ev.has(kExitComplete))
            ext.flips[i] = -1;

        rep.max_token = std::max(rep.max_token, max_int_token(sys));

        const auto sys_len = full_key(child);
        if (!visited.insert(key)) {
            if (opt.merge_pairs > rep.merges.size()) {
                auto it = first_path.find(key);
                if (it != first_path.end() && it->second != path)
                    rep.merges.emplace_back(it->second, path);
            }
            path.pop_back();
            continue;
        }
        ++rep.states;
        rep.max_depth = std::max(rep.max_depth, path.size());
        if (opt.collect_keys)
            all_keys.insert(key.substr(0, sys_len));
        if (opt.sample_every && rep.states % opt.sample_every == 0)
            rep.samples.emplace_back(path, key.substr(0, sys_len));
        if (opt.merge_pairs > 0 && first_path.size() < 200000)
            first_path.emplace(key, path);

        if (!bad.empty()) {
            for (auto& [p, detail] : bad) {
                ++rep.violations[p];
                record(rep.counterexamples, p, std::move(detail), opt.keep_counterexamples);
            }
            path.pop_back();
            continue;
        }
        if (sys.deadlocked()) {
            ++rep.deadlock_states;
            record(rep.deadlocks, Property::Progress, "every active process is blocked",
                   opt.keep_counterexamples);
        }
        if (int_tokens && max_int_token(sys) > rep.token_cap) {
            ++rep.token_cap_cuts;
            path.pop_back();
            continue;
        }
        stack.push_back(std::move(child));
    }

    if (opt.collect_keys) {
        rep.keys.assign(all_keys.begin(), all_keys.end());
        std::sort(rep.keys.begin(), rep.keys.end());
    }
    return rep;
}

std::string to_string(const ExplorationReport& r)
{
    std::ostringstream os;
    os << "states " << r.states << ", transitions " << r.transitions << ", max depth "
       << r.max_depth << ", max token " << r.max_token << ", deadlock states "
       << r.deadlock_states;
    for (const auto& [p, c] : r.violations)
        os << ", " << to_string(p) << " violations " << c;
    if (r.token_cap_cuts)
        os << ", token cap " << r.token_cap << " cut " << r.token_cap_cuts << " paths";
    if (r.truncated)
        os << ", TRUNCATED";
    return os.str();
}

}  // namespace gme
