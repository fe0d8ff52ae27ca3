#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ex2sm/fasta.hpp"

namespace ex2sm {

// A cleaned sequence ready for analysis. Every byte of `symbols` is a
// member of the working alphabet; ids are contiguous from 0 in catalog
// order.
struct Sequence {
    std::uint32_t id = 0;
    std::string name;
    std::string symbols;

    std::uint64_t length() const { return symbols.size(); }
};

struct SequenceInfo {
    std::uint32_t id = 0;
    std::string name;
    std::uint64_t length = 0;
    std::string file;  // payload path relative to the catalog root
};

Sequence clean_sequence(const RawSequence& raw, const Alphabet& alphabet, std::uint32_t id);

// The set of sequences under analysis plus the alphabet they share.
// On disk a catalog is a directory holding catalog.json and one raw
// symbol-bytes file per sequence.
class Catalog {
public:
    // Persists the sequences under `root` and returns the catalog.
    // Pre: `sequences` non-empty unless allow_empty.
    static Catalog build(std::vector<Sequence> sequences, const std::filesystem::path& root,
                         const Alphabet& alphabet, bool allow_empty = false);

    // Reads catalog.json from `root`; payloads load lazily via ensure_payloads.
    static Catalog load(const std::filesystem::path& root);

    // In-memory catalog without persisted payloads (tests, synthetic runs).
    static Catalog from_strings(const std::vector<Sequence>& sequences, const Alphabet& alphabet);

    const std::string& alphabet() const { return alphabet_; }
    std::size_t alphabet_size() const { return alphabet_.size(); }
    const std::vector<SequenceInfo>& sequences() const { return infos_; }
    std::uint64_t total_length() const { return total_length_; }
    std::uint64_t max_sequence_length() const;
    const std::filesystem::path& root() const { return root_; }

    void ensure_payloads();
    bool payloads_loaded() const { return payloads_.size() == infos_.size(); }

    // Symbol bytes of one sequence. Contract: payloads loaded.
    const std::string& symbols(std::uint32_t seq) const;

    // Suffix starting at (seq, off) truncated to at most `lerp` symbols.
    std::string_view suffix(std::uint32_t seq, std::uint64_t off, unsigned lerp) const;

private:
    std::string alphabet_;
    std::vector<SequenceInfo> infos_;
    std::vector<std::string> payloads_;
    std::uint64_t total_length_ = 0;
    std::filesystem::path root_;
};

}  // namespace ex2sm
