#pragma once

#include <array>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace ex2sm {

// The working symbol set. Symbols are deduplicated and uppercased on
// construction; lowercase input letters map onto their uppercase symbol
// when cleaning. Symbols must be alphanumeric ASCII so that class keys
// can double as file name stems.
class Alphabet {
public:
    explicit Alphabet(std::string_view symbols);

    const std::string& symbols() const { return symbols_; }
    std::size_t size() const { return symbols_.size(); }
    bool contains(unsigned char c) const { return clean_table_[c] == static_cast<char>(c); }

    // 0 where the byte is dropped, otherwise the symbol it maps to.
    char map(unsigned char c) const { return clean_table_[c]; }

private:
    std::string symbols_;
    std::array<char, 256> clean_table_{};
};

// One FASTA record as read: description line (without '>') and the raw
// residue bytes with line terminators removed.
struct RawSequence {
    std::string header;
    std::string residues;
};

// Parses FASTA text. Records start at '>' lines; wrapped residue lines are
// concatenated. Blank lines are skipped. LF and CRLF both accepted.
// Throws format_error (naming the byte offset) when the first non-blank
// byte is not '>' or a header is empty.
std::vector<RawSequence> parse_fasta(std::istream& in);

// Drops every byte outside the alphabet, uppercasing alphabet letters.
// Idempotent; an all-foreign input yields an empty string.
std::string clean_residues(std::string_view raw, const Alphabet& alphabet);

}  // namespace ex2sm
