#include "gme/monitors.hpp"

#include <algorithm>
#include <sstream>

namespace gme {

namespace {

constexpr std::array<std::pair<Property, std::string_view>, 8> kPropertyNames{{
    {Property::MutualExclusion, "mutual-exclusion"},
    {Property::Fcfs, "fcfs"},
    {Property::BoundedExit, "bounded-exit"},
    {Property::ConcurrentEntry, "concurrent-entry"},
    {Property::FlipInvariant, "flip-invariant"},
    {Property::TokenBound, "token-bound"},
    {Property::Progress, "progress"},
    {Property::GlbLineRmr, "glb-line-rmr"},
}};

std::size_t idx(Section s) { return static_cast<std::size_t>(s); }

bool is_global_color(const TraceEvent& ev)
{
    return ev.reg && ev.reg->family == RegisterFamily::GlobalColor;
}

void fail(Verdict& v, std::vector<Witness> w, std::string detail)
{
    if (v.failed())
        return;
    v.status = Status::Fail;
    v.witness = std::move(w);
    v.detail = std::move(detail);
}

}  // namespace

std::string_view to_string(Property p)
{
    for (const auto& [prop, name] : kPropertyNames)
        if (prop == p)
            return name;
    return "?";
}

Property parse_property(std::string_view s)
{
    for (const auto& [prop, name] : kPropertyNames)
        if (name == s)
            return prop;
    throw ConfigError("unknown monitor: " + std::string(s));
}

std::string_view to_string(Status s)
{
    switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "FAIL";
    case Status::Inapplicable: return "n/a";
    }
    return "?";
}

std::string to_string(const Verdict& v)
{
    std::ostringstream os;
    os << to_string(v.property) << ": " << to_string(v.status);
    if (!v.witness.empty()) {
        os << " [";
        for (std::size_t k = 0; k < v.witness.size(); ++k)
            os << (k ? ", " : "") << "step " << v.witness[k].step << " P" << v.witness[k].pid;
        os << "]";
    }
    if (!v.detail.empty())
        os << " " << v.detail;
    return os.str();
}

// ---------------------------------------------------------------------------
// invocation records

std::uint64_t InvocationRecord::total_rmr() const
{
    std::uint64_t t = 0;
    for (auto r : rmr)
        t += r;
    return t;
}

void InvocationCollector::begin(const TraceHeader&)
{
    records_.clear();
    index_.clear();
}

void InvocationCollector::observe(const TraceEvent& ev)
{
    if (ev.access == Access::Idle || ev.invocation < 0)
        return;
    auto [it, fresh] = index_.try_emplace({ev.pid, ev.invocation}, records_.size());
    if (fresh) {
        auto& r = records_.emplace_back();
        r.pid = ev.pid;
        r.invocation = ev.invocation;
        r.session = ev.session;
    }
    auto& r = records_[it->second];
    const auto s = idx(ev.section);
    r.rmr[s] += ev.rmr;
    if (ev.shared())
        ++r.shared[s];
    if (ev.access == Access::Write)
        ++r.writes[s];
    if (ev.section == Section::Doorway || ev.section == Section::Waiting) {
        ++r.entry_steps;
        r.false_waits += ev.wait == WaitOutcome::Failed;
        if (ev.access == Access::Write && ev.reg && ev.reg->family == RegisterFamily::Token &&
            ev.reg->index == ev.pid)
            r.token = ev.value;
    }
    if (ev.has(kDoorwayStart))
        r.doorway_start = ev.step;
    if (ev.has(kDoorwayComplete))
        r.doorway_complete = ev.step;
    if (ev.has(kCsEnter))
        r.cs_enter = ev.step;
    if (ev.has(kCsExit))
        r.cs_exit = ev.step;
    if (ev.has(kExitComplete))
        r.exit_complete = ev.step;
}

std::vector<InvocationRecord> collect_invocations(const Trace& trace)
{
    InvocationCollector c;
    c.begin(trace.header);
    for (const auto& ev : trace.events)
        c.observe(ev);
    return c.records();
}

// ---------------------------------------------------------------------------
// mutual exclusion

void MutualExclusionMonitor::begin(const TraceHeader& header)
{
    uses_sessions_ = header.uses_sessions;
    inside_.clear();
    verdict_ = Verdict{Property::MutualExclusion};
}

void MutualExclusionMonitor::observe(const TraceEvent& ev)
{
    if (ev.has(kCsEnter)) {
        for (const auto& [q, in] : inside_) {
            if (q == ev.pid || (uses_sessions_ && in.session == ev.session))
                continue;
            fail(verdict_, {{in.since, q}, {ev.step, ev.pid}},
                 "sessions " + std::to_string(in.session) + " and " +
                     std::to_string(ev.session) + " overlap in the CS");
        }
        inside_[ev.pid] = {ev.session, ev.step};
    }
    if (ev.has(kCsExit))
        inside_.erase(ev.pid);
}

// ---------------------------------------------------------------------------
// FCFS

void FcfsMonitor::begin(const TraceHeader& header)
{
    uses_sessions_ = header.uses_sessions;
    current_.clear();
    verdict_ = Verdict{Property::Fcfs};
}

void FcfsMonitor::observe(const TraceEvent& ev)
{
    if (ev.has(kDoorwayStart)) {
        Current c;
        c.session = ev.session;
        for (const auto& [i, other] : current_) {
            if (i == ev.pid || !other.doorway_complete || other.entered)
                continue;
            if (uses_sessions_ && other.session == ev.session)
                continue;
            c.preceded_by[i] = *other.doorway_complete;
        }
        current_[ev.pid] = std::move(c);
    }
    if (ev.has(kDoorwayComplete))
        current_[ev.pid].doorway_complete = ev.step;
    if (ev.has(kCsEnter)) {
        auto& me = current_[ev.pid];
        if (!me.preceded_by.empty()) {
            const auto& [i, dc] = *me.preceded_by.begin();
            fail(verdict_, {{dc, i}, {ev.step, ev.pid}},
                 "P" + std::to_string(ev.pid) + " entered before doorway-preceding P" +
                     std::to_string(i));
        }
        me.entered = true;
        for (auto& [q, other] : current_)
            other.preceded_by.erase(ev.pid);
    }
    if (ev.has(kExitComplete))
        current_.erase(ev.pid);
}

// ---------------------------------------------------------------------------
// bounded exit

ExitBound default_exit_bound(std::string_view algorithm, int n)
{
    if (algorithm == "glb")
        return {2, 2, true};
    if (algorithm == "bl")
        return {1, 1, true};
    if (algorithm == "bwbgme")
        return {1, static_cast<std::uint64_t>(n) + 2, false};
    throw ConfigError("no exit bound for algorithm " + std::string(algorithm));
}

void BoundedExitMonitor::begin(const TraceHeader& header)
{
    active_ = bound_ ? *bound_ : default_exit_bound(header.algorithm, header.n);
    counts_.clear();
    max_ = 0;
    verdict_ = Verdict{Property::BoundedExit};
}

void BoundedExitMonitor::observe(const TraceEvent& ev)
{
    if (ev.section != Section::Exit || ev.access == Access::Idle)
        return;
    auto& c = counts_[ev.pid];
    ++c.own_steps;
    c.shared += ev.shared();
    c.reads += ev.access == Access::Read;
    if (!ev.has(kExitComplete))
        return;
    max_ = std::max(max_, c.shared);
    if (c.shared < active_.min || c.shared > active_.max || (active_.writes_only && c.reads > 0))
        fail(verdict_, {{ev.step, ev.pid}},
             "exit used " + std::to_string(c.shared) + " shared accesses (" +
                 std::to_string(c.reads) + " reads), allowed " + std::to_string(active_.min) +
                 ".." + std::to_string(active_.max));
    counts_.erase(ev.pid);
}

// ---------------------------------------------------------------------------
// concurrent entry

void ConcurrentEntryMonitor::begin(const TraceHeader& header)
{
    applicable_ = header.single_session;
    entry_steps_.clear();
    max_entry_ = 0;
    verdict_ = Verdict{Property::ConcurrentEntry};
    if (!applicable_) {
        verdict_.status = Status::Inapplicable;
        verdict_.detail = "workload has more than one session";
    }
}

void ConcurrentEntryMonitor::observe(const TraceEvent& ev)
{
    if (!applicable_)
        return;
    if (ev.section == Section::Doorway || ev.section == Section::Waiting) {
        auto& steps = entry_steps_[ev.pid];
        ++steps;
        if (ev.has(kCsEnter)) {
            max_entry_ = std::max(max_entry_, steps);
            steps = 0;
        }
        if (ev.wait == WaitOutcome::Failed)
            fail(verdict_, {{ev.step, ev.pid}},
                 "false evaluation of line " + std::to_string(ev.line) + " with j=" +
                     std::to_string(ev.loop_index));
    }
}

// ---------------------------------------------------------------------------
// flip invariant

void FlipInvariantMonitor::begin(const TraceHeader& header)
{
    applicable_ = header.algorithm == "bwbgme";
    color_ = header.initial_global_color.value_or(Color::White);
    open_.clear();
    flips_.clear();
    verdict_ = Verdict{Property::FlipInvariant};
}

void FlipInvariantMonitor::observe(const TraceEvent& ev)
{
    if (!applicable_)
        return;
    if (is_global_color(ev) && ev.access == Access::Read && ev.line == 5)
        open_[ev.pid] = {ev.step, 0};
    if (is_global_color(ev) && ev.access == Access::Write) {
        const auto to = std::get<Color>(*ev.value);
        if (to != color_) {
            color_ = to;
            flips_.push_back({ev.step, ev.pid, to});
            for (auto& [p, w] : open_) {
                if (++w.flips >= 2)
                    fail(verdict_, {{w.opened, p}, {ev.step, ev.pid}},
                         "GlobalColor flipped twice inside the window of P" + std::to_string(p));
            }
        }
    }
    if (ev.has(kExitComplete))
        open_.erase(ev.pid);
}

Verdict FlipInvariantMonitor::verdict() const
{
    if (!applicable_)
        return {Property::FlipInvariant, Status::Inapplicable, {}, "no GlobalColor"};
    auto v = verdict_;
    if (!v.failed())
        v.detail = std::to_string(flips_.size()) + " flips";
    return v;
}

// ---------------------------------------------------------------------------
// token bound

void TokenBoundMonitor::begin(const TraceHeader& header)
{
    applicable_ = header.algorithm == "bwbgme";
    n_ = header.n;
    max_ = 0;
    verdict_ = Verdict{Property::TokenBound};
}

void TokenBoundMonitor::observe(const TraceEvent& ev)
{
    if (ev.access != Access::Write || !ev.reg || ev.reg->family != RegisterFamily::Token)
        return;
    std::int64_t number = 0;
    if (const auto* t = std::get_if<Triple>(&*ev.value)) {
        if (t->color == Color::Bottom)
            return;
        number = t->number;
    } else if (const auto* i = std::get_if<std::int64_t>(&*ev.value)) {
        number = *i;
    }
    max_ = std::max(max_, number);
    if (applicable_ && number > n_ + 1)
        fail(verdict_, {{ev.step, ev.pid}},
             "token number " + std::to_string(number) + " exceeds N+1 = " +
                 std::to_string(n_ + 1));
}

Verdict TokenBoundMonitor::verdict() const
{
    auto v = verdict_;
    if (!applicable_)
        v.status = Status::Inapplicable;
    if (!v.failed())
        v.detail = "max token " + std::to_string(max_);
    return v;
}

// ---------------------------------------------------------------------------
// progress

void ProgressMonitor::begin(const TraceHeader& header)
{
    collector_.begin(header);
    deadlock_.reset();
}

void ProgressMonitor::observe(const TraceEvent& ev)
{
    collector_.observe(ev);
    if (ev.all_blocked && !deadlock_)
        deadlock_ = Witness{ev.step, ev.pid};
}

Verdict ProgressMonitor::verdict() const
{
    Verdict v{Property::Progress};
    if (deadlock_) {
        fail(v, {*deadlock_}, "every active process is blocked");
        return v;
    }
    const auto& recs = collector_.records();
    std::size_t waiting = 0;
    for (const auto& r : recs) {
        if (!r.doorway_complete || r.cs_enter)
            continue;
        ++waiting;
        std::vector<Witness> overtakers;
        for (const auto& o : recs)
            if (o.pid != r.pid && o.exit_complete && *o.exit_complete > *r.doorway_complete)
                overtakers.push_back({*o.exit_complete, o.pid});
        if (overtakers.size() >= 2) {
            std::sort(overtakers.begin(), overtakers.end(),
                      [](const Witness& a, const Witness& b) { return a.step < b.step; });
            fail(v, {{*r.doorway_complete, r.pid}, overtakers[1]},
                 "P" + std::to_string(r.pid) + " invocation " + std::to_string(r.invocation) +
                     " never entered while " + std::to_string(overtakers.size()) +
                     " later invocations completed");
            return v;
        }
    }
    v.detail = std::to_string(recs.size()) + " invocations, " + std::to_string(waiting) +
               " still waiting";
    return v;
}

// ---------------------------------------------------------------------------
// GLB per-line RMR

void GlbLineRmrMonitor::begin(const TraceHeader& header)
{
    applicable_ = header.algorithm == "glb";
    seg_.clear();
    max_ = {};
    passes_ = 0;
    verdict_ = Verdict{Property::GlbLineRmr};
    if (!applicable_)
        verdict_.status = Status::Inapplicable;
}

void GlbLineRmrMonitor::observe(const TraceEvent& ev)
{
    if (!applicable_ || ev.section != Section::Waiting || (ev.line != 8 && ev.line != 9))
        return;
    auto& s = seg_[ev.pid];
    if (s.invocation != ev.invocation || s.line != ev.line || s.j != ev.loop_index)
        s = {ev.invocation, ev.line, ev.loop_index, 0, ev.step};
    s.rmr += ev.rmr;
    auto& worst = max_[ev.line == 8 ? 0 : 1];
    worst = std::max(worst, s.rmr);
    if (s.rmr > kLimit)
        fail(verdict_, {{s.first, ev.pid}, {ev.step, ev.pid}},
             "line " + std::to_string(ev.line) + " with j=" + std::to_string(ev.loop_index) +
                 " cost " + std::to_string(s.rmr) + " RMRs");
    if (ev.wait == WaitOutcome::Passed) {
        ++passes_;
        s = Segment{};
    }
}

// ---------------------------------------------------------------------------
// sets and pure checks

std::unique_ptr<Monitor> make_monitor(Property p)
{
    switch (p) {
    case Property::MutualExclusion: return std::make_unique<MutualExclusionMonitor>();
    case Property::Fcfs: return std::make_unique<FcfsMonitor>();
    case Property::BoundedExit: return std::make_unique<BoundedExitMonitor>();
    case Property::ConcurrentEntry: return std::make_unique<ConcurrentEntryMonitor>();
    case Property::FlipInvariant: return std::make_unique<FlipInvariantMonitor>();
    case Property::TokenBound: return std::make_unique<TokenBoundMonitor>();
    case Property::Progress: return std::make_unique<ProgressMonitor>();
    case Property::GlbLineRmr: return std::make_unique<GlbLineRmrMonitor>();
    }
    throw std::logic_error("unknown property");
}

std::vector<Property> default_properties(std::string_view algorithm)
{
    using P = Property;
    if (algorithm == "glb")
        return {P::MutualExclusion, P::Fcfs, P::BoundedExit, P::ConcurrentEntry, P::Progress,
                P::GlbLineRmr};
    if (algorithm == "bwbgme")
        return {P::MutualExclusion, P::Fcfs, P::BoundedExit, P::ConcurrentEntry,
                P::FlipInvariant, P::TokenBound, P::Progress};
    if (algorithm == "bl")
        return {P::MutualExclusion, P::BoundedExit, P::Progress};
    throw ConfigError("unknown algorithm: " + std::string(algorithm));
}

MonitorSet::MonitorSet(const std::vector<Property>& props)
{
    for (auto p : props) {
        for (const auto& m : monitors_)
            if (m->property() == p)
                throw ConfigError("monitor selected twice: " + std::string(to_string(p)));
        monitors_.push_back(make_monitor(p));
    }
}

std::vector<TraceObserver*> MonitorSet::observers() const
{
    std::vector<TraceObserver*> out;
    for (const auto& m : monitors_)
        out.push_back(m.get());
    return out;
}

std::vector<Verdict> MonitorSet::verdicts() const
{
    std::vector<Verdict> out;
    for (const auto& m : monitors_)
        out.push_back(m->verdict());
    return out;
}

bool MonitorSet::any_failed() const
{
    for (const auto& m : monitors_)
        if (m->verdict().failed())
            return true;
    return false;
}

namespace {

Verdict feed(Monitor& m, const Trace& trace)
{
    m.begin(trace.header);
    for (const auto& ev : trace.events)
        m.observe(ev);
    return m.verdict();
}

}  // namespace

Verdict check_mutual_exclusion(const Trace& trace)
{
    MutualExclusionMonitor m;
    return feed(m, trace);
}

Verdict check_fcfs(const Trace& trace)
{
    FcfsMonitor m;
    return feed(m, trace);
}

Verdict check_bounded_exit(const Trace& trace, std::optional<ExitBound> bound)
{
    BoundedExitMonitor m(bound);
    return feed(m, trace);
}

Verdict check_concurrent_entry(const Trace& trace)
{
    ConcurrentEntryMonitor m;
    return feed(m, trace);
}

Verdict check_flip_invariant(const Trace& trace)
{
    FlipInvariantMonitor m;
    return feed(m, trace);
}

Verdict check_token_bound(const Trace& trace)
{
    TokenBoundMonitor m;
    return feed(m, trace);
}

Verdict check_progress(const Trace& trace)
{
    ProgressMonitor m;
    return feed(m, trace);
}

Verdict check_glb_line_rmr(const Trace& trace)
{
    GlbLineRmrMonitor m;
    return feed(m, trace);
}

Verdict check(Property p, const Trace& trace)
{
    auto m = make_monitor(p);
    return feed(*m, trace);
}

// ---------------------------------------------------------------------------
// RMR report

Stat summarize(const std::vector<std::uint64_t>& xs)
{
    Stat s;
    s.count = xs.size();
    if (xs.empty())
        return s;
    s.min = *std::min_element(xs.begin(), xs.end());
    s.max = *std::max_element(xs.begin(), xs.end());
    double sum = 0;
    for (auto x : xs)
        sum += static_cast<double>(x);
    s.mean = sum / static_cast<double>(xs.size());
    return s;
}

RmrReport rmr_report(const std::vector<InvocationRecord>& records, int n)
{
    RmrReport out;
    out.per_process.assign(static_cast<std::size_t>(n), 0);
    std::array<std::vector<std::uint64_t>, kSectionCount> by_section;
    std::vector<std::uint64_t> totals;
    for (const auto& r : records) {
        const auto t = r.total_rmr();
        out.per_process.at(static_cast<std::size_t>(r.pid - 1)) += t;
        out.total += t;
        if (!r.complete()) {
            ++out.incomplete;
            continue;
        }
        ++out.complete;
        totals.push_back(t);
        for (std::size_t s = 0; s < kSectionCount; ++s)
            by_section[s].push_back(r.rmr[s]);
    }
    out.per_invocation = summarize(totals);
    for (std::size_t s = 0; s < kSectionCount; ++s)
        out.by_section[s] = summarize(by_section[s]);
    return out;
}

}  // namespace gme
