#include "gme/memcc.hpp"

#include <atomic>
#include <numeric>

namespace gme {

namespace {

std::atomic<std::uint64_t> next_memory_id{1};

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::string_view to_string(Color c)
{
    switch (c) {
    case Color::Bottom: return "bottom";
    case Color::Black: return "black";
    case Color::White: return "white";
    }
    return "?";
}

CellKind kind_of(const CellValue& v)
{
    return static_cast<CellKind>(v.index());
}

std::string_view to_string(CellKind k)
{
    switch (k) {
    case CellKind::Int: return "int";
    case CellKind::Bool: return "bool";
    case CellKind::Color: return "color";
    case CellKind::Triple: return "triple";
    }
    return "?";
}

std::string to_string(const CellValue& v)
{
    return std::visit(overloaded{
                          [](std::int64_t i) { return std::to_string(i); },
                          [](bool b) { return std::string(b ? "true" : "false"); },
                          [](Color c) { return std::string(to_string(c)); },
                          [](const Triple& t) {
                              return "(" + std::to_string(t.session) + "," +
                                     std::string(to_string(t.color)) + "," +
                                     std::to_string(t.number) + ")";
                          },
                      },
                      v);
}

std::int64_t checked_add(std::int64_t a, std::int64_t b)
{
    std::int64_t r = 0;
    if (__builtin_add_overflow(a, b, &r))
        throw OverflowError("integer register overflow: " + std::to_string(a) + " + " +
                            std::to_string(b));
    return r;
}

std::string_view to_string(RegisterFamily f)
{
    switch (f) {
    case RegisterFamily::Session: return "Session";
    case RegisterFamily::Token: return "Token";
    case RegisterFamily::Choosing: return "Choosing";
    case RegisterFamily::GlobalColor: return "GlobalColor";
    case RegisterFamily::Competing: return "Competing";
    }
    return "?";
}

std::string to_string(const RegisterId& r)
{
    std::string s(to_string(r.family));
    if (r.index != 0)
        s += "[" + std::to_string(r.index) + "]";
    return s;
}

Memory::Memory(std::span<const RegisterDecl> decls, int processes)
    : id_(next_memory_id++),
      processes_(processes),
      decls_(decls.begin(), decls.end()),
      offset_(kFamilyCount, -1),
      count_(kFamilyCount, 0)
{
    if (processes < 1)
        throw ConfigError("memory needs at least one process");
    for (const auto& d : decls_) {
        const auto f = static_cast<std::size_t>(d.family);
        if (offset_[f] != -1)
            throw ConfigError("register family declared twice: " + std::string(to_string(d.family)));
        if (d.count < 0)
            throw ConfigError("negative register count");
        if (kind_of(d.initial) != d.kind)
            throw ConfigError("initial value kind mismatch for " + std::string(to_string(d.family)));
        offset_[f] = static_cast<int>(store_.size());
        count_[f] = d.count;
        const int cells = d.count == 0 ? 1 : d.count;
        for (int k = 0; k < cells; ++k) {
            store_.push_back(d.initial);
            kinds_.push_back(d.kind);
        }
    }
    caches_.assign(static_cast<std::size_t>(processes),
                   std::vector<std::optional<CellValue>>(store_.size()));
    rmr_.assign(static_cast<std::size_t>(processes), 0);
}

bool Memory::has_register(RegisterId reg) const
{
    const auto f = static_cast<std::size_t>(reg.family);
    if (f >= offset_.size() || offset_[f] < 0)
        return false;
    if (count_[f] == 0)
        return reg.index == 0;
    return reg.index >= 1 && reg.index <= count_[f];
}

std::size_t Memory::slot(RegisterId reg) const
{
    if (!has_register(reg))
        throw ConfigError("unknown register " + to_string(reg));
    const auto f = static_cast<std::size_t>(reg.family);
    return static_cast<std::size_t>(offset_[f] + (count_[f] == 0 ? 0 : reg.index - 1));
}

void Memory::check_pid(Pid pid) const
{
    if (pid < 1 || pid > processes_)
        throw ConfigError("process id out of range: " + std::to_string(pid));
}

ReadResult Memory::read(Pid pid, RegisterId reg)
{
    check_pid(pid);
    const auto s = slot(reg);
    auto& line = caches_[static_cast<std::size_t>(pid - 1)][s];
    if (line)
        return {*line, false};
    line = store_[s];
    ++rmr_[static_cast<std::size_t>(pid - 1)];
    return {store_[s], true};
}

void Memory::write(Pid pid, RegisterId reg, const CellValue& v)
{
    check_pid(pid);
    const auto s = slot(reg);
    if (kind_of(v) != kinds_[s])
        throw ConfigError("kind mismatch writing " + to_string(reg) + ": expected " +
                          std::string(to_string(kinds_[s])) + ", got " +
                          std::string(to_string(kind_of(v))));
    store_[s] = v;
    for (auto& cache : caches_)
        cache[s].reset();
    caches_[static_cast<std::size_t>(pid - 1)][s] = v;
    ++rmr_[static_cast<std::size_t>(pid - 1)];
}

const CellValue& Memory::peek(RegisterId reg) const
{
    return store_[slot(reg)];
}

bool Memory::is_cached(Pid pid, RegisterId reg) const
{
    check_pid(pid);
    return caches_[static_cast<std::size_t>(pid - 1)][slot(reg)].has_value();
}

std::uint64_t Memory::rmr(Pid pid) const
{
    check_pid(pid);
    return rmr_[static_cast<std::size_t>(pid - 1)];
}

std::uint64_t Memory::total_rmr() const
{
    return std::accumulate(rmr_.begin(), rmr_.end(), std::uint64_t{0});
}

bool Memory::coherent() const
{
    for (const auto& cache : caches_)
        for (std::size_t s = 0; s < store_.size(); ++s)
            if (cache[s] && *cache[s] != store_[s])
                return false;
    return true;
}

MemorySnapshot Memory::snapshot() const
{
    return {id_, store_, caches_, rmr_};
}

void Memory::restore(const MemorySnapshot& snap)
{
    if (snap.owner != id_ || snap.store.size() != store_.size() ||
        snap.caches.size() != caches_.size())
        throw StaleSnapshotError("snapshot does not belong to this memory");
    store_ = snap.store;
    caches_ = snap.caches;
    rmr_ = snap.rmr;
}

}  // namespace gme
