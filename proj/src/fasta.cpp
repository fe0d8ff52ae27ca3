#include "ex2sm/fasta.hpp"

#include <cctype>

#include "ex2sm/errors.hpp"

namespace ex2sm {

Alphabet::Alphabet(std::string_view symbols) {
    for (char raw : symbols) {
        unsigned char c = static_cast<unsigned char>(raw);
        if (!std::isalnum(c)) {
            throw parameter_error("alphabet symbols must be alphanumeric ASCII");
        }
        char up = static_cast<char>(std::toupper(c));
        if (clean_table_[static_cast<unsigned char>(up)] != 0) continue;  // duplicate
        symbols_.push_back(up);
        clean_table_[static_cast<unsigned char>(up)] = up;
        clean_table_[static_cast<unsigned char>(std::tolower(up))] = up;
    }
    if (symbols_.empty()) {
        throw parameter_error("alphabet must contain at least one symbol");
    }
}

namespace {

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool blank(const std::string& line) {
    for (char c : line) {
        if (c != ' ' && c != '\t' && c != '\r') return false;
    }
    return true;
}

}  // namespace

std::vector<RawSequence> parse_fasta(std::istream& in) {
    std::vector<RawSequence> records;
    std::string line;
    std::uint64_t offset = 0;  // byte offset of the current line start
    bool in_record = false;

    while (std::getline(in, line)) {
        std::uint64_t line_start = offset;
        offset += line.size() + (in.eof() ? 0 : 1);
        strip_cr(line);
        if (blank(line)) continue;

        if (line[0] == '>') {
            std::string header = line.substr(1);
            strip_cr(header);
            if (header.empty()) {
                throw format_error("empty FASTA header at byte offset " +
                                   std::to_string(line_start));
            }
            records.push_back(RawSequence{std::move(header), {}});
            in_record = true;
        } else if (!in_record) {
            std::uint64_t first = line_start;
            for (char c : line) {
                if (c == ' ' || c == '\t') { ++first; continue; }
                break;
            }
            throw format_error("expected '>' at byte offset " + std::to_string(first));
        } else {
            records.back().residues.append(line);
        }
    }
    return records;
}

std::string clean_residues(std::string_view raw, const Alphabet& alphabet) {
    std::string out;
    out.reserve(raw.size());
    for (char raw_byte : raw) {
        if (char mapped = alphabet.map(static_cast<unsigned char>(raw_byte))) {
            out.push_back(mapped);
        }
    }
    return out;
}

}  // namespace ex2sm
