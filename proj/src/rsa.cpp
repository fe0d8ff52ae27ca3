#include "ex2sm/rsa.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstring>
#include <fstream>
#include <functional>
#include <istream>
#include <memory>
#include <mutex>
#include <ostream>

#include <json.hpp>

#include "ex2sm/errors.hpp"
#include "ex2sm/parallel.hpp"

namespace ex2sm {

std::string format_position(Position p) {
    return std::to_string(p.seq) + "." + std::to_string(p.off);
}

Position parse_position(std::string_view text) {
    std::size_t dot = text.find('.');
    if (dot == std::string_view::npos) throw format_error("malformed position: missing '.'");
    Position p;
    auto head = text.substr(0, dot);
    auto tail = text.substr(dot + 1);
    auto r1 = std::from_chars(head.data(), head.data() + head.size(), p.seq);
    auto r2 = std::from_chars(tail.data(), tail.data() + tail.size(), p.off);
    if (r1.ec != std::errc{} || r1.ptr != head.data() + head.size() ||
        r2.ec != std::errc{} || r2.ptr != tail.data() + tail.size() || head.empty() || tail.empty()) {
        throw format_error("malformed position: " + std::string(text));
    }
    return p;
}

bool record_less(const SuffixRecord& a, const SuffixRecord& b) {
    int c = a.text.compare(b.text);
    if (c != 0) return c < 0;
    return a.pos < b.pos;
}

namespace {

void check_build_params(unsigned lerp, const ClassificationScheme& scheme) {
    if (lerp < 1) throw parameter_error("lerp must be at least 1");
    if (lerp < scheme.level()) {
        throw parameter_error("lerp must not be smaller than the classification level");
    }
}

struct ClassIndex {
    const ClassificationScheme* scheme;
    std::array<int, 256> rank{};
    std::size_t classified;

    explicit ClassIndex(const ClassificationScheme& s) : scheme(&s), classified(s.keys().size()) {
        rank.fill(-1);
        const std::string& a = s.alphabet();
        for (std::size_t i = 0; i < a.size(); ++i) {
            rank[static_cast<unsigned char>(a[i])] = static_cast<int>(i);
        }
    }

    // Index into [classified keys..., residual]. `sym` points at the suffix
    // start; `remaining` is its untruncated length.
    std::size_t of(const char* sym, std::uint64_t remaining) const {
        unsigned level = scheme->level();
        if (level == 0) return 0;
        if (remaining < level) return classified;  // residual
        std::size_t idx = 0;
        std::size_t m = scheme->alphabet().size();
        for (unsigned i = 0; i < level; ++i) {
            int r = rank[static_cast<unsigned char>(sym[i])];
            if (r < 0) throw parameter_error("symbol outside the alphabet while classifying");
            idx = idx * m + static_cast<std::size_t>(r);
        }
        return idx;
    }
};

std::vector<ClassPartition> make_empty_partitions(unsigned lerp, const ClassificationScheme& scheme) {
    std::vector<ClassPartition> parts;
    parts.reserve(scheme.class_count());
    for (const std::string& key : scheme.keys()) {
        parts.push_back(ClassPartition{key, lerp, false, {}});
    }
    if (scheme.has_residual()) {
        parts.push_back(ClassPartition{kResidualKey, lerp, false, {}});
    }
    return parts;
}

}  // namespace

std::vector<ClassPartition> build_partitions(const Sequence& sequence, unsigned lerp,
                                             const ClassificationScheme& scheme) {
    if (sequence.length() < 1) throw parameter_error("sequence must have at least one symbol");
    check_build_params(lerp, scheme);

    std::vector<ClassPartition> parts = make_empty_partitions(lerp, scheme);
    ClassIndex index(scheme);
    const std::string& s = sequence.symbols;
    for (std::size_t off = 0; off < s.size(); ++off) {
        std::uint64_t remaining = s.size() - off;
        std::size_t idx = index.of(s.data() + off, remaining);
        std::size_t take = std::min<std::uint64_t>(lerp, remaining);
        parts[idx].records.push_back(SuffixRecord{
            s.substr(off, take), Position{sequence.id, static_cast<std::uint32_t>(off)}});
    }
    return parts;
}

void sort_partition(ClassPartition& partition) {
    if (partition.sorted) return;
    std::sort(partition.records.begin(), partition.records.end(), record_less);
    partition.sorted = true;
}

ClassPartition merge_partitions(std::span<const ClassPartition> parts) {
    if (parts.empty()) throw parameter_error("merge needs at least one partition");
    const std::string& key = parts.front().key;
    unsigned lerp = parts.front().lerp;
    std::size_t total = 0;
    for (const ClassPartition& p : parts) {
        if (p.key != key || p.lerp != lerp) {
            throw parameter_error("cannot merge partitions with mismatched key or lerp");
        }
        if (!p.sorted) throw contract_error("merge requires sorted partitions");
        total += p.records.size();
    }

    ClassPartition out{key, lerp, true, {}};
    out.records.reserve(total);
    std::vector<std::size_t> cursor(parts.size(), 0);
    while (out.records.size() < total) {
        std::size_t best = parts.size();
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (cursor[i] >= parts[i].records.size()) continue;
            if (best == parts.size() ||
                record_less(parts[i].records[cursor[i]], parts[best].records[cursor[best]])) {
                best = i;
            }
        }
        out.records.push_back(parts[best].records[cursor[best]++]);
    }
    return out;
}

std::vector<ClassPartition> build_restricted(const Catalog& catalog,
                                             std::span<const Position> positions, unsigned lerp,
                                             const ClassificationScheme& scheme) {
    check_build_params(lerp, scheme);
    std::vector<ClassPartition> parts = make_empty_partitions(lerp, scheme);
    ClassIndex index(scheme);
    for (Position p : positions) {
        if (p.seq >= catalog.sequences().size() ||
            p.off >= catalog.sequences()[p.seq].length) {
            throw parameter_error("position " + format_position(p) + " is outside the catalog");
        }
        const std::string& s = catalog.symbols(p.seq);
        std::uint64_t remaining = s.size() - p.off;
        std::size_t idx = index.of(s.data() + p.off, remaining);
        std::size_t take = std::min<std::uint64_t>(lerp, remaining);
        parts[idx].records.push_back(SuffixRecord{s.substr(p.off, take), p});
    }
    for (ClassPartition& p : parts) sort_partition(p);
    return parts;
}

// --- text format ---------------------------------------------------------

void write_partition_text(const ClassPartition& partition, std::ostream& out) {
    if (!partition.sorted) throw contract_error("the partition text format requires sorted records");
    std::string buf;
    for (const SuffixRecord& rec : partition.records) {
        buf.append(rec.text);
        buf.push_back('\t');
        buf.append(format_position(rec.pos));
        buf.push_back('\n');
        if (buf.size() >= 1 << 18) {
            out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
            buf.clear();
        }
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw storage_error("failed writing partition text");
}

ClassPartition read_partition_text(std::istream& in, std::string_view key, unsigned lerp) {
    ClassPartition part{std::string(key), lerp, false, {}};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::size_t tab = line.rfind('\t');
        if (tab == std::string::npos || tab == 0) {
            throw format_error("partition line " + std::to_string(line_no) + " is malformed");
        }
        SuffixRecord rec{line.substr(0, tab), parse_position(std::string_view(line).substr(tab + 1))};
        if (rec.text.size() > lerp) {
            throw format_error("partition line " + std::to_string(line_no) + " exceeds the lerp length");
        }
        if (!part.records.empty() && record_less(rec, part.records.back())) {
            throw format_error("partition records out of order at line " + std::to_string(line_no));
        }
        part.records.push_back(std::move(rec));
    }
    part.sorted = true;
    return part;
}

// --- binary format ---------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'E', 'R', 'S', 'B'};
constexpr std::uint32_t kBinaryVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw format_error("truncated binary partition");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t get_u64(std::istream& in) {
    std::uint64_t lo = get_u32(in);
    std::uint64_t hi = get_u32(in);
    return lo | (hi << 32);
}

class BinaryPartitionWriter {
public:
    BinaryPartitionWriter(const std::filesystem::path& file, std::string_view key, unsigned lerp)
        : out_(file, std::ios::binary | std::ios::trunc), path_(file) {
        if (!out_) throw storage_error("cannot write " + file.string());
        std::string header;
        header.append(kMagic, 4);
        put_u32(header, kBinaryVersion);
        put_u32(header, lerp);
        put_u32(header, static_cast<std::uint32_t>(key.size()));
        header.append(key);
        put_u64(header, 0);  // count, patched in close()
        count_field_at_ = header.size() - 8;
        out_.write(header.data(), static_cast<std::streamsize>(header.size()));
    }

    void add(Position p) {
        put_u32(buf_, p.seq);
        put_u32(buf_, p.off);
        ++count_;
        if (buf_.size() >= 1 << 18) flush();
    }

    void add(std::span<const Position> positions) {
        for (Position p : positions) add(p);
    }

    std::uint64_t close() {
        flush();
        out_.seekp(static_cast<std::streamoff>(count_field_at_));
        std::string c;
        put_u64(c, count_);
        out_.write(c.data(), 8);
        out_.close();
        if (!out_) throw storage_error("failed writing " + path_.string());
        return count_;
    }

private:
    void flush() {
        out_.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
        if (!out_) throw storage_error("failed writing " + path_.string());
        buf_.clear();
    }

    std::ofstream out_;
    std::filesystem::path path_;
    std::string buf_;
    std::uint64_t count_ = 0;
    std::size_t count_field_at_ = 0;
};

struct BinaryHeader {
    std::string key;
    unsigned lerp = 0;
    std::uint64_t count = 0;
};

BinaryHeader read_binary_header(std::istream& in, const std::filesystem::path& file) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw format_error("not a binary partition file: " + file.string());
    }
    if (get_u32(in) != kBinaryVersion) {
        throw format_error("unsupported binary partition version in " + file.string());
    }
    BinaryHeader h;
    h.lerp = get_u32(in);
    std::uint32_t key_len = get_u32(in);
    h.key.resize(key_len);
    in.read(h.key.data(), key_len);
    h.count = get_u64(in);
    if (!in) throw format_error("truncated binary partition: " + file.string());
    return h;
}

// Buffered sequential reader over a binary partition's positions.
class RunCursor {
public:
    explicit RunCursor(const std::filesystem::path& file) : in_(file, std::ios::binary) {
        if (!in_) throw storage_error("cannot open " + file.string());
        header_ = read_binary_header(in_, file);
        remaining_ = header_.count;
        refill();
    }

    bool done() const { return idx_ >= buf_.size() && remaining_ == 0; }
    Position peek() const { return buf_[idx_]; }
    void advance() {
        ++idx_;
        if (idx_ >= buf_.size()) refill();
    }

private:
    void refill() {
        idx_ = 0;
        buf_.clear();
        std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(remaining_, 1 << 15));
        if (n == 0) return;
        buf_.resize(n);
        in_.read(reinterpret_cast<char*>(buf_.data()),
                 static_cast<std::streamsize>(n * sizeof(Position)));
        if (!in_) throw format_error("truncated binary partition while merging");
        remaining_ -= n;
    }

    std::ifstream in_;
    BinaryHeader header_;
    std::vector<Position> buf_;
    std::size_t idx_ = 0;
    std::uint64_t remaining_ = 0;
};

}  // namespace

void write_partition_binary(const std::filesystem::path& file, std::string_view key,
                            unsigned lerp, std::span<const Position> positions) {
    BinaryPartitionWriter w(file, key, lerp);
    w.add(positions);
    w.close();
}

BinaryPartition read_partition_binary(std::filesystem::path const& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw storage_error("cannot open " + file.string());
    BinaryHeader h = read_binary_header(in, file);

    static_assert(sizeof(Position) == 8);
    BinaryPartition part{h.key, h.lerp, {}};
    part.positions.resize(h.count);
    in.read(reinterpret_cast<char*>(part.positions.data()),
            static_cast<std::streamsize>(h.count * sizeof(Position)));
    if (!in) throw format_error("truncated binary partition: " + file.string());
    return part;
}

SuffixOrder::SuffixOrder(const Catalog& catalog, unsigned lerp) : lerp_(lerp) {
    views_.reserve(catalog.sequences().size());
    for (std::uint32_t i = 0; i < catalog.sequences().size(); ++i) {
        views_.push_back(catalog.symbols(i));
    }
}

// --- PartitionSetBuilder -----------------------------------------------------

struct PartitionSetBuilder::ClassBuffer {
    std::string key;
    std::string stem;
    std::vector<Position> buf;
    std::vector<std::filesystem::path> runs;
    std::uint64_t total = 0;
};

PartitionSetBuilder::PartitionSetBuilder(const Catalog& catalog,
                                         const ClassificationScheme& scheme, unsigned lerp,
                                         std::filesystem::path dir, std::uint64_t memory_budget)
    : catalog_(&catalog),
      scheme_(&scheme),
      order_(catalog, lerp),
      lerp_(lerp),
      dir_(std::move(dir)) {
    check_build_params(lerp, scheme);
    if (memory_budget == 0) throw parameter_error("memory budget must be positive");

    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw storage_error("cannot create partition directory " + dir_.string());

    for (const std::string& key : scheme.keys()) {
        classes_.push_back(ClassBuffer{key, ClassificationScheme::stem(key), {}, {}, 0});
    }
    if (scheme.has_residual()) {
        classes_.push_back(ClassBuffer{kResidualKey, kResidualKey, {}, {}, 0});
    }

    rank_.fill(-1);
    const std::string& a = scheme.alphabet();
    for (std::size_t i = 0; i < a.size(); ++i) {
        rank_[static_cast<unsigned char>(a[i])] = static_cast<int>(i);
    }
    run_limit_ = std::max<std::size_t>(
        std::size_t{8192}, memory_budget / (sizeof(Position) * 2 * classes_.size()));
}

PartitionSetBuilder::~PartitionSetBuilder() = default;

void PartitionSetBuilder::route(std::uint32_t seq, std::uint32_t off, std::uint64_t remaining) {
    unsigned level = scheme_->level();
    std::size_t idx = 0;
    if (level > 0) {
        if (remaining < level) {
            idx = classes_.size() - 1;  // residual
        } else {
            const char* sym = catalog_->symbols(seq).data() + off;
            std::size_t m = scheme_->alphabet().size();
            for (unsigned i = 0; i < level; ++i) {
                int r = rank_[static_cast<unsigned char>(sym[i])];
                if (r < 0) throw parameter_error("symbol outside the alphabet while classifying");
                idx = idx * m + static_cast<std::size_t>(r);
            }
        }
    }
    ClassBuffer& cb = classes_[idx];
    cb.buf.push_back(Position{seq, off});
    ++cb.total;
    if (cb.buf.size() >= run_limit_) spill(cb);
}

void PartitionSetBuilder::spill(ClassBuffer& cb) {
    std::sort(cb.buf.begin(), cb.buf.end(), order_);
    std::filesystem::path run =
        dir_ / (cb.stem + ".run" + std::to_string(cb.runs.size()) + ".rsab");
    write_partition_binary(run, cb.key, lerp_, cb.buf);
    live_run_bytes_ += std::filesystem::file_size(run);
    peak_bytes_ = std::max(peak_bytes_, live_run_bytes_);
    cb.runs.push_back(std::move(run));
    cb.buf.clear();
}

void PartitionSetBuilder::add_sequence(std::uint32_t seq) {
    const std::string& s = catalog_->symbols(seq);
    for (std::size_t off = 0; off < s.size(); ++off) {
        route(seq, static_cast<std::uint32_t>(off), s.size() - off);
    }
}

void PartitionSetBuilder::add_positions(std::span<const Position> positions) {
    for (Position p : positions) {
        if (p.seq >= catalog_->sequences().size() ||
            p.off >= catalog_->sequences()[p.seq].length) {
            throw parameter_error("position " + format_position(p) + " is outside the catalog");
        }
        route(p.seq, p.off, catalog_->sequences()[p.seq].length - p.off);
    }
}

std::vector<PartitionFileInfo> PartitionSetBuilder::finalize(unsigned workers, Stats* stats) {
    if (finalized_) throw contract_error("partition set already finalized");
    finalized_ = true;

    std::mutex mu;
    std::uint64_t final_bytes = 0;
    std::uint64_t sort_ms = 0;
    std::uint64_t merge_ms = 0;

    std::vector<std::size_t> task_order(classes_.size());
    for (std::size_t i = 0; i < classes_.size(); ++i) task_order[i] = i;
    std::sort(task_order.begin(), task_order.end(), [&](std::size_t a, std::size_t b) {
        return classes_[a].total > classes_[b].total;
    });

    std::vector<std::function<void()>> tasks;
    for (std::size_t idx : task_order) {
        ClassBuffer& cb = classes_[idx];
        if (cb.total == 0) continue;
        tasks.push_back([this, &cb, &mu, &final_bytes, &sort_ms, &merge_ms] {
            auto t0 = std::chrono::steady_clock::now();
            std::sort(cb.buf.begin(), cb.buf.end(), order_);
            auto t1 = std::chrono::steady_clock::now();

            std::filesystem::path file = dir_ / (cb.stem + ".rsab");
            if (cb.runs.empty()) {
                write_partition_binary(file, cb.key, lerp_, cb.buf);
            } else {
                // k-way merge of the spilled runs plus the in-memory tail
                BinaryPartitionWriter w(file, cb.key, lerp_);
                std::vector<std::unique_ptr<RunCursor>> cursors;
                cursors.reserve(cb.runs.size());
                for (const auto& run : cb.runs) cursors.push_back(std::make_unique<RunCursor>(run));
                std::size_t mem_idx = 0;
                while (true) {
                    int best = -1;
                    bool best_is_mem = false;
                    Position best_pos{};
                    for (std::size_t c = 0; c < cursors.size(); ++c) {
                        if (cursors[c]->done()) continue;
                        Position p = cursors[c]->peek();
                        if (best < 0 && !best_is_mem) { best = static_cast<int>(c); best_pos = p; continue; }
                        if (order_(p, best_pos)) { best = static_cast<int>(c); best_is_mem = false; best_pos = p; }
                    }
                    if (mem_idx < cb.buf.size()) {
                        Position p = cb.buf[mem_idx];
                        if ((best < 0 && !best_is_mem) || order_(p, best_pos)) {
                            best = -1; best_is_mem = true; best_pos = p;
                        }
                    }
                    if (best < 0 && !best_is_mem) break;
                    w.add(best_pos);
                    if (best_is_mem) ++mem_idx; else cursors[static_cast<std::size_t>(best)]->advance();
                }
                w.close();
            }
            cb.buf.clear();
            cb.buf.shrink_to_fit();
            auto t2 = std::chrono::steady_clock::now();

            std::uint64_t sz = std::filesystem::file_size(file);
            std::uint64_t freed = 0;
            for (const auto& run : cb.runs) {
                freed += std::filesystem::file_size(run);
                std::filesystem::remove(run);
            }
            cb.runs.clear();

            std::lock_guard lock(mu);
            final_bytes += sz;
            peak_bytes_ = std::max(peak_bytes_, live_run_bytes_ + final_bytes);
            live_run_bytes_ -= freed;
            sort_ms += std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
            merge_ms += std::chrono::duration_cast<std::chrono::milliseconds>(t2 - t1).count();
        });
    }
    parallel_run(tasks, workers);

    std::vector<PartitionFileInfo> infos;
    infos.reserve(classes_.size());
    for (const ClassBuffer& cb : classes_) {
        PartitionFileInfo info{cb.key, {}, cb.total};
        if (cb.total > 0) info.file = dir_ / (cb.stem + ".rsab");
        infos.push_back(std::move(info));
    }
    if (stats) {
        stats->sort_ms = sort_ms;
        stats->merge_ms = merge_ms;
        stats->bytes_written = final_bytes;
        stats->peak_bytes = peak_bytes_;
    }
    return infos;
}

// --- manifest ----------------------------------------------------------------

void save_partition_manifest(const std::filesystem::path& dir, const PartitionManifest& manifest) {
    nlohmann::json j;
    j["alphabet"] = manifest.alphabet;
    j["level"] = manifest.level;
    j["lerp"] = manifest.lerp;
    j["format"] = manifest.format;
    j["catalog"] = manifest.catalog_path;
    auto arr = nlohmann::json::array();
    for (const PartitionFileInfo& info : manifest.classes) {
        arr.push_back({{"key", info.key},
                       {"file", info.file.filename().string()},
                       {"records", info.records}});
    }
    j["classes"] = std::move(arr);
    std::ofstream out(dir / "partitions.json", std::ios::trunc);
    if (!out) throw storage_error("cannot write " + (dir / "partitions.json").string());
    out << j.dump(2) << "\n";
    if (!out) throw storage_error("write failed for " + (dir / "partitions.json").string());
}

PartitionManifest load_partition_manifest(const std::filesystem::path& dir) {
    std::ifstream in(dir / "partitions.json");
    if (!in) throw storage_error("cannot open " + (dir / "partitions.json").string());
    nlohmann::json j;
    try {
        in >> j;
        PartitionManifest m;
        m.alphabet = j.at("alphabet").get<std::string>();
        m.level = j.at("level").get<unsigned>();
        m.lerp = j.at("lerp").get<unsigned>();
        m.format = j.at("format").get<std::string>();
        m.catalog_path = j.at("catalog").get<std::string>();
        for (const auto& entry : j.at("classes")) {
            PartitionFileInfo info;
            info.key = entry.at("key").get<std::string>();
            std::string file = entry.at("file").get<std::string>();
            if (!file.empty()) info.file = dir / file;
            info.records = entry.at("records").get<std::uint64_t>();
            m.classes.push_back(std::move(info));
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw format_error("invalid partition manifest: " + std::string(e.what()));
    }
}

}  // namespace ex2sm
