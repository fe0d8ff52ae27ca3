#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ex2sm/catalog.hpp"
#include "ex2sm/rsa.hpp"

namespace ex2sm {

// A repeated pattern with every starting position, positions strictly
// increasing by (seq, off).
struct PatternResult {
    std::string pattern;
    std::uint64_t count = 0;
    std::vector<Position> positions;

    bool operator==(const PatternResult&) const = default;
};

struct DetectConfig {
    unsigned spl = 0;             // report only lengths > spl
    unsigned max_len = 0;         // current lerp ceiling
    unsigned min_count = 2;       // minimum occurrences
    unsigned min_report_len = 1;  // lowest reported length

    unsigned report_floor() const { return std::max(spl, min_report_len - 1); }
    void validate() const;
};

// Receives patterns in ascending bytewise order; positions sorted by (seq, off).
using PatternSink =
    std::function<void(std::string_view pattern, std::span<const Position> positions)>;

namespace detail {

struct PatternRun {
    std::uint64_t start = 0;  // first row of the run
    std::uint64_t end = 0;    // last row (inclusive)
    unsigned depth = 0;       // pattern length
};

inline unsigned common_prefix(std::string_view a, std::string_view b) {
    std::size_t n = std::min(a.size(), b.size());
    std::size_t i = 0;
    while (i < n && a[i] == b[i]) ++i;
    return static_cast<unsigned>(i);
}

}  // namespace detail

// Single ordered scan over sorted suffix rows. Tracks the longest-common-
// prefix structure between adjacent rows; every prefix length shared by at
// least min_count consecutive rows is a repeated pattern. Runs are emitted
// in ascending pattern order: for intervals of the sorted array, ordering
// by (start row, depth) is bytewise pattern order.
//
// text_at(i) must return the truncated suffix text of row i; `positions`
// must hold one entry per row in the same order.
template <typename TextAt>
void arpad_scan(std::size_t rows, TextAt&& text_at, const Position* positions,
                const DetectConfig& cfg, const PatternSink& sink) {
    cfg.validate();
    const unsigned floor_len = cfg.report_floor();

    struct Open {
        unsigned depth;
        std::uint64_t start;
    };
    std::vector<Open> stack{{0, 0}};
    std::vector<detail::PatternRun> runs;

    for (std::size_t i = 1; i <= rows; ++i) {
        unsigned l = 0;
        if (i < rows) l = detail::common_prefix(text_at(i - 1), text_at(i));
        std::uint64_t start = i - 1;
        while (stack.back().depth > l) {
            Open top = stack.back();
            stack.pop_back();
            if (i - top.start >= cfg.min_count) {
                unsigned lower = std::max({stack.back().depth, l, floor_len});
                unsigned upper = std::min(top.depth, cfg.max_len);
                for (unsigned d = lower + 1; d <= upper; ++d) {
                    runs.push_back({top.start, i - 1, d});
                }
            }
            start = top.start;
        }
        if (stack.back().depth < l) stack.push_back({l, start});
    }

    std::sort(runs.begin(), runs.end(), [](const detail::PatternRun& a, const detail::PatternRun& b) {
        if (a.start != b.start) return a.start < b.start;
        return a.depth < b.depth;
    });

    std::vector<Position> buf;
    for (const detail::PatternRun& run : runs) {
        std::string_view pattern = std::string_view(text_at(run.end)).substr(0, run.depth);
        buf.assign(positions + run.start, positions + run.end + 1);
        std::sort(buf.begin(), buf.end());
        sink(pattern, buf);
    }
}

// All repeated patterns of one sorted partition whose length lies in
// (max(spl, min_report_len - 1), max_len], sorted by pattern.
std::vector<PatternResult> detect(const ClassPartition& partition, const DetectConfig& cfg);
void detect_to_sink(const ClassPartition& partition, const DetectConfig& cfg,
                    const PatternSink& sink);

// Patterns shorter than the classification level, assembled across the
// classes sharing the pattern as key prefix plus the residual class.
// `partitions` must hold the complete class set of the catalog.
std::vector<PatternResult> shallow_counts(const std::vector<ClassPartition>& partitions,
                                          const ClassificationScheme& scheme,
                                          const DetectConfig& cfg);

// Independent verification oracle: enumerates every substring window into a
// table and keeps entries occurring at least min_count times. Guarded to
// catalogs of at most 10^4 symbols.
std::vector<PatternResult> brute_force_oracle(const Catalog& catalog, unsigned min_len,
                                              unsigned max_len, unsigned min_count);

// --- canonical result line ----------------------------------------------------
// "<pattern>\t<count>\t<seq>.<off>[,<seq>.<off>]..." per line, LF, sorted by
// pattern; file "<classkey>.arpad". Occurrence lists with count > 100000
// spill to "<classkey>.arpad.pos" and the line carries "@<byte-offset>".

inline constexpr std::uint64_t kSpillThreshold = 100000;

void append_position_list(std::string& out, std::span<const Position> positions);
void append_result_line(std::string& out, std::string_view pattern,
                        std::span<const Position> positions);

struct ResultLineView {
    std::string_view pattern;
    std::uint64_t count = 0;
    std::string_view positions;  // raw field; may start with '@'
};

ResultLineView parse_result_line(std::string_view line);
std::vector<Position> parse_position_list(std::string_view field);

}  // namespace ex2sm
