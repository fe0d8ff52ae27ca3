#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ex2sm/catalog.hpp"
#include "ex2sm/lerp.hpp"

namespace ex2sm {

// (sequence id, 0-based offset into the cleaned sequence).
// Rendered as "<seq>.<off>" in the text formats.
struct Position {
    std::uint32_t seq = 0;
    std::uint32_t off = 0;

    auto operator<=>(const Position&) const = default;
};

std::string format_position(Position p);
Position parse_position(std::string_view text);

// One row of the reduced suffix array: the suffix text truncated at the
// lerp length plus where it starts.
struct SuffixRecord {
    std::string text;
    Position pos;

    bool operator==(const SuffixRecord&) const = default;
};

// Orders records by (text bytewise, seq, off).
bool record_less(const SuffixRecord& a, const SuffixRecord& b);

// All suffix rows routed to one class key, optionally sorted.
struct ClassPartition {
    std::string key;
    unsigned lerp = 0;
    bool sorted = false;
    std::vector<SuffixRecord> records;
};

// One partition per scheme class (classified keys in byte order, residual
// last when the level > 0), holding every suffix of the sequence.
// Pre: sequence length >= 1 and lerp >= max(1, scheme level).
std::vector<ClassPartition> build_partitions(const Sequence& sequence, unsigned lerp,
                                             const ClassificationScheme& scheme);

// Bytewise lexicographic sort, ties by (seq, off). Idempotent.
void sort_partition(ClassPartition& partition);

// Ordered multi-way merge of sorted partitions sharing key and lerp.
ClassPartition merge_partitions(std::span<const ClassPartition> parts);

// Partitions holding one row per given position, truncated at lerp,
// classified and sorted.
std::vector<ClassPartition> build_restricted(const Catalog& catalog,
                                             std::span<const Position> positions, unsigned lerp,
                                             const ClassificationScheme& scheme);

// --- canonical text format -------------------------------------------------
// One record per line, "<text>\t<seq>.<off>", LF terminated, sorted order.
// File name "<classkey>.rsa" ("_short.rsa" for the residual class).

void write_partition_text(const ClassPartition& partition, std::ostream& out);
ClassPartition read_partition_text(std::istream& in, std::string_view key, unsigned lerp);

// --- compact binary format ---------------------------------------------------
// Positions only; suffix texts are reconstructed from the catalog payloads.
// This is the pipeline's working format; the text format stays normative.

struct BinaryPartition {
    std::string key;
    unsigned lerp = 0;
    std::vector<Position> positions;  // in sorted suffix order
};

void write_partition_binary(const std::filesystem::path& file, std::string_view key,
                            unsigned lerp, std::span<const Position> positions);
BinaryPartition read_partition_binary(std::filesystem::path const& file);

// Compares positions by their truncated suffix texts, ties by (seq, off).
class SuffixOrder {
public:
    SuffixOrder(const Catalog& catalog, unsigned lerp);

    std::string_view suffix(Position p) const {
        return views_[p.seq].substr(p.off, lerp_);
    }
    bool operator()(Position a, Position b) const {
        int c = suffix(a).compare(suffix(b));
        if (c != 0) return c < 0;
        if (a.seq != b.seq) return a.seq < b.seq;
        return a.off < b.off;
    }

private:
    std::vector<std::string_view> views_;
    unsigned lerp_;
};

// --- streaming partition set builder ----------------------------------------
// Routes suffix positions into per-class buffers, spilling sorted runs to
// disk when a buffer exceeds its share of the memory budget, and k-way
// merges the runs into one sorted binary partition file per class.

struct PartitionFileInfo {
    std::string key;
    std::filesystem::path file;  // empty when the class is empty
    std::uint64_t records = 0;
};

class PartitionSetBuilder {
public:
    struct Stats {
        std::uint64_t sort_ms = 0;
        std::uint64_t merge_ms = 0;
        std::uint64_t bytes_written = 0;  // final partition files
        std::uint64_t peak_bytes = 0;     // partition files plus live spill runs
    };

    PartitionSetBuilder(const Catalog& catalog, const ClassificationScheme& scheme,
                        unsigned lerp, std::filesystem::path dir, std::uint64_t memory_budget);
    ~PartitionSetBuilder();

    void add_sequence(std::uint32_t seq);
    void add_positions(std::span<const Position> positions);

    // Sorts, merges spilled runs, writes "<stem>.rsab" per non-empty class.
    // Returns infos for every scheme class in key order (residual last).
    std::vector<PartitionFileInfo> finalize(unsigned workers, Stats* stats = nullptr);

private:
    struct ClassBuffer;

    void route(std::uint32_t seq, std::uint32_t off, std::uint64_t remaining);
    void spill(ClassBuffer& buf);

    const Catalog* catalog_;
    const ClassificationScheme* scheme_;
    SuffixOrder order_;
    unsigned lerp_;
    std::filesystem::path dir_;
    std::vector<ClassBuffer> classes_;  // classified in key order, residual last
    std::array<int, 256> rank_{};
    std::size_t run_limit_ = 0;
    std::uint64_t live_run_bytes_ = 0;
    std::uint64_t peak_bytes_ = 0;
    bool finalized_ = false;
};

// --- partition directory manifest --------------------------------------------

struct PartitionManifest {
    std::string alphabet;
    unsigned level = 0;
    unsigned lerp = 0;
    std::string format;        // "binary" or "text"
    std::string catalog_path;  // set for the binary format
    std::vector<PartitionFileInfo> classes;
};

void save_partition_manifest(const std::filesystem::path& dir, const PartitionManifest& manifest);
PartitionManifest load_partition_manifest(const std::filesystem::path& dir);

}  // namespace ex2sm
