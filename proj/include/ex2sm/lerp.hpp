#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ex2sm {

// l = ceil(log_m(n^2 / (2 * p_bar))), clamped to >= 1. The ceiling is
// cross-checked with exact integer arithmetic so a floating-point log can
// never shift the boundary: the result l is the smallest integer with
// m^l * 2 * p_bar >= n^2.
unsigned compute_lerp(std::uint64_t n, unsigned alphabet_size, double p_bar);

struct LerpParams {
    std::uint64_t n = 0;       // total symbol count
    unsigned m = 0;            // alphabet size
    double p_bar = 0.0;        // probability upper bound in (0, 1]
    unsigned lerp = 0;         // computed truncation length

    static LerpParams compute(std::uint64_t n, unsigned alphabet_size, double p_bar);
};

inline constexpr const char* kResidualKey = "_short";   // suffixes shorter than the level
inline constexpr const char* kSingleClassStem = "_all"; // file stem for the level-0 class

// Maps each suffix to the class named by its first `level` symbols.
// Suffixes shorter than the level go to a dedicated residual class.
// Level 0 has a single class whose key is the empty string.
class ClassificationScheme {
public:
    ClassificationScheme(std::string_view alphabet, unsigned level);

    unsigned level() const { return level_; }
    const std::string& alphabet() const { return alphabet_; }  // byte-sorted, distinct

    // The m^level classified keys in byte order; excludes the residual key.
    const std::vector<std::string>& keys() const { return keys_; }
    bool has_residual() const { return level_ > 0; }
    // m^level + (1 residual if level > 0)
    std::size_t class_count() const { return keys_.size() + (has_residual() ? 1 : 0); }

    // Key for a suffix (or prefix of one). Returns the residual key when the
    // input is shorter than the level. Throws parameter_error for symbols
    // outside the alphabet.
    std::string class_key(std::string_view suffix_prefix) const;

    bool is_residual(std::string_view key) const { return key == kResidualKey; }

    // File name stem for a class key ("" maps to "_all").
    static std::string stem(std::string_view key);

private:
    std::string alphabet_;
    unsigned level_;
    std::vector<std::string> keys_;
};

// Smallest classification level whose estimated largest class
// (total_length * lerp / m^level bytes, uniform estimate, doubled for sort
// working space) fits the budget. Capped so m^level <= 4096 and
// level <= lerp; when no level under the cap fits, returns the cap and
// sets *capped.
unsigned choose_level(std::uint64_t total_length, unsigned alphabet_size, unsigned lerp,
                      std::uint64_t memory_budget, bool* capped = nullptr);

}  // namespace ex2sm
