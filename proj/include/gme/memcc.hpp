#pragma once

// Cache-coherent shared memory: one global module, one cache per process,
// and remote-memory-reference (RMR) accounting.

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace gme {

/// Process identifier, 1-based.
using Pid = int;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OverflowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StaleSnapshotError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Color : std::uint8_t { Bottom, Black, White };

std::string_view to_string(Color c);

/// Token register content of the black-and-white algorithm. Read and
/// written as one unit.
struct Triple {
    std::int64_t session = 0;
    Color color = Color::Bottom;
    std::int64_t number = 0;

    friend bool operator==(const Triple&, const Triple&) = default;
};

enum class CellKind : std::uint8_t { Int, Bool, Color, Triple };

using CellValue = std::variant<std::int64_t, bool, Color, Triple>;

CellKind kind_of(const CellValue& v);
std::string_view to_string(CellKind k);
std::string to_string(const CellValue& v);

/// Addition that reports overflow instead of wrapping. Token integers are
/// unbounded in the model; a 64-bit cell must never silently wrap.
std::int64_t checked_add(std::int64_t a, std::int64_t b);

enum class RegisterFamily : std::uint8_t { Session, Token, Choosing, GlobalColor, Competing };

inline constexpr int kFamilyCount = 5;

std::string_view to_string(RegisterFamily f);

struct RegisterId {
    RegisterFamily family = RegisterFamily::Session;
    int index = 0;  ///< 1..N for arrays, 0 for the scalar GlobalColor

    friend bool operator==(const RegisterId&, const RegisterId&) = default;
};

std::string to_string(const RegisterId& r);

/// One shared variable family as declared by an algorithm.
struct RegisterDecl {
    RegisterFamily family;
    CellKind kind;
    int count;  ///< 0 declares a scalar register
    CellValue initial;
};

struct ReadResult {
    CellValue value;
    bool rmr = false;
};

/// Everything needed to put a Memory back exactly where it was.
struct MemorySnapshot {
    std::uint64_t owner = 0;
    std::vector<CellValue> store;
    std::vector<std::vector<std::optional<CellValue>>> caches;
    std::vector<std::uint64_t> rmr;

    friend bool operator==(const MemorySnapshot&, const MemorySnapshot&) = default;
};

/// Global memory module plus per-process caches under the CC model.
///
/// A read of a register not validly cached by the reader is remote: it
/// costs one RMR and fills the reader's cache. Every write is remote, goes
/// to the global module and invalidates every other process's copy. The
/// writer keeps a valid copy holding the value it wrote.
class Memory {
public:
    Memory(std::span<const RegisterDecl> decls, int processes);

    ReadResult read(Pid pid, RegisterId reg);
    void write(Pid pid, RegisterId reg, const CellValue& v);

    /// Global value without any cache or ledger effect.
    const CellValue& peek(RegisterId reg) const;
    bool is_cached(Pid pid, RegisterId reg) const;
    bool has_register(RegisterId reg) const;

    std::uint64_t rmr(Pid pid) const;
    std::uint64_t total_rmr() const;
    int processes() const { return processes_; }

    std::span<const CellValue> store() const { return store_; }
    std::span<const RegisterDecl> declarations() const { return decls_; }

    /// Every cached copy equals the global value.
    bool coherent() const;

    MemorySnapshot snapshot() const;
    void restore(const MemorySnapshot& snap);

private:
    std::size_t slot(RegisterId reg) const;
    void check_pid(Pid pid) const;

    std::uint64_t id_;
    int processes_;
    std::vector<RegisterDecl> decls_;
    std::vector<int> offset_;  // per family, -1 when undeclared
    std::vector<int> count_;   // per family
    std::vector<CellKind> kinds_;
    std::vector<CellValue> store_;
    std::vector<std::vector<std::optional<CellValue>>> caches_;
    std::vector<std::uint64_t> rmr_;
};

}  // namespace gme
