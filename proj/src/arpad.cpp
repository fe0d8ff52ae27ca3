#include "ex2sm/arpad.hpp"

#include <charconv>
#include <unordered_map>

#include "ex2sm/errors.hpp"

namespace ex2sm {

void DetectConfig::validate() const {
    if (max_len < 1) throw parameter_error("max_len must be at least 1");
    if (spl >= max_len) throw parameter_error("spl must be smaller than max_len");
    if (min_count < 2) throw parameter_error("min_count must be at least 2");
    if (min_report_len < 1) throw parameter_error("min_report_len must be at least 1");
}

void detect_to_sink(const ClassPartition& partition, const DetectConfig& cfg,
                    const PatternSink& sink) {
    if (!partition.sorted) throw contract_error("detect requires a sorted partition");
    std::vector<Position> positions;
    positions.reserve(partition.records.size());
    for (const SuffixRecord& rec : partition.records) positions.push_back(rec.pos);
    arpad_scan(
        partition.records.size(),
        [&](std::size_t i) -> std::string_view { return partition.records[i].text; },
        positions.data(), cfg, sink);
}

std::vector<PatternResult> detect(const ClassPartition& partition, const DetectConfig& cfg) {
    std::vector<PatternResult> results;
    detect_to_sink(partition, cfg, [&](std::string_view pattern, std::span<const Position> pos) {
        results.push_back(PatternResult{std::string(pattern), pos.size(),
                                        std::vector<Position>(pos.begin(), pos.end())});
    });
    return results;
}

std::vector<PatternResult> shallow_counts(const std::vector<ClassPartition>& partitions,
                                          const ClassificationScheme& scheme,
                                          const DetectConfig& cfg) {
    cfg.validate();
    unsigned level = scheme.level();
    std::vector<PatternResult> results;
    if (level < 2) return results;

    std::unordered_map<std::string_view, const ClassPartition*> by_key;
    for (const ClassPartition& p : partitions) by_key.emplace(p.key, &p);
    for (const std::string& key : scheme.keys()) {
        if (!by_key.contains(key)) throw contract_error("missing class partition: " + key);
    }
    if (!by_key.contains(kResidualKey)) {
        throw contract_error("missing residual class partition");
    }
    const ClassPartition& residual = *by_key.at(kResidualKey);

    for (unsigned d = std::max(1u, cfg.min_report_len); d <= level - 1; ++d) {
        // every d-prefix present among the classified keys, in byte order
        std::string last;
        for (const std::string& key : scheme.keys()) {
            std::string prefix = key.substr(0, d);
            if (prefix == last) continue;
            last = prefix;

            std::vector<Position> positions;
            for (const std::string& k : scheme.keys()) {
                if (k.compare(0, d, prefix) != 0) continue;
                for (const SuffixRecord& rec : by_key.at(k)->records) {
                    positions.push_back(rec.pos);
                }
            }
            for (const SuffixRecord& rec : residual.records) {
                if (rec.text.size() >= d && rec.text.compare(0, d, prefix) == 0) {
                    positions.push_back(rec.pos);
                }
            }
            if (positions.size() < cfg.min_count) continue;
            std::sort(positions.begin(), positions.end());
            results.push_back(PatternResult{prefix, positions.size(), std::move(positions)});
        }
    }
    std::sort(results.begin(), results.end(),
              [](const PatternResult& a, const PatternResult& b) { return a.pattern < b.pattern; });
    return results;
}

std::vector<PatternResult> brute_force_oracle(const Catalog& catalog, unsigned min_len,
                                              unsigned max_len, unsigned min_count) {
    if (catalog.total_length() > 10000) {
        throw parameter_error("brute-force oracle is guarded to 10^4 symbols");
    }
    if (min_len < 1) throw parameter_error("min_len must be at least 1");
    if (min_count < 1) throw parameter_error("min_count must be at least 1");

    std::vector<PatternResult> results;
    std::uint64_t longest = catalog.max_sequence_length();
    for (std::uint64_t k = min_len; k <= std::min<std::uint64_t>(max_len, longest); ++k) {
        std::unordered_map<std::string_view, std::vector<Position>> table;
        for (std::uint32_t seq = 0; seq < catalog.sequences().size(); ++seq) {
            const std::string& s = catalog.symbols(seq);
            if (s.size() < k) continue;
            for (std::uint64_t off = 0; off + k <= s.size(); ++off) {
                table[std::string_view(s).substr(off, k)].push_back(
                    Position{seq, static_cast<std::uint32_t>(off)});
            }
        }
        for (auto& [pattern, positions] : table) {
            if (positions.size() < min_count) continue;
            // scan order is already (seq, off) ascending
            results.push_back(
                PatternResult{std::string(pattern), positions.size(), std::move(positions)});
        }
    }
    std::sort(results.begin(), results.end(),
              [](const PatternResult& a, const PatternResult& b) { return a.pattern < b.pattern; });
    return results;
}

// --- result line format --------------------------------------------------------

void append_position_list(std::string& out, std::span<const Position> positions) {
    char tmp[32];
    bool first = true;
    for (Position p : positions) {
        if (!first) out.push_back(',');
        first = false;
        auto r1 = std::to_chars(tmp, tmp + sizeof(tmp), p.seq);
        out.append(tmp, r1.ptr);
        out.push_back('.');
        auto r2 = std::to_chars(tmp, tmp + sizeof(tmp), p.off);
        out.append(tmp, r2.ptr);
    }
}

void append_result_line(std::string& out, std::string_view pattern,
                        std::span<const Position> positions) {
    out.append(pattern);
    out.push_back('\t');
    char tmp[32];
    auto r = std::to_chars(tmp, tmp + sizeof(tmp), positions.size());
    out.append(tmp, r.ptr);
    out.push_back('\t');
    append_position_list(out, positions);
    out.push_back('\n');
}

ResultLineView parse_result_line(std::string_view line) {
    std::size_t t1 = line.find('\t');
    if (t1 == std::string_view::npos) throw format_error("result line is missing the count field");
    std::size_t t2 = line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos) throw format_error("result line is missing the positions field");
    ResultLineView view;
    view.pattern = line.substr(0, t1);
    auto count_field = line.substr(t1 + 1, t2 - t1 - 1);
    auto r = std::from_chars(count_field.data(), count_field.data() + count_field.size(), view.count);
    if (r.ec != std::errc{} || r.ptr != count_field.data() + count_field.size()) {
        throw format_error("result line has a malformed count");
    }
    view.positions = line.substr(t2 + 1);
    return view;
}

std::vector<Position> parse_position_list(std::string_view field) {
    std::vector<Position> out;
    std::size_t at = 0;
    while (at < field.size()) {
        std::size_t comma = field.find(',', at);
        if (comma == std::string_view::npos) comma = field.size();
        out.push_back(parse_position(field.substr(at, comma - at)));
        at = comma + 1;
    }
    return out;
}

}  // namespace ex2sm
