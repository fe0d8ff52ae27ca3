#include "ex2sm/catalog.hpp"

#include <fstream>
#include <limits>

#include <json.hpp>

#include "ex2sm/errors.hpp"

namespace ex2sm {

namespace {

constexpr const char* kManifestName = "catalog.json";

std::string payload_file_name(std::uint32_t id) {
    return "seq" + std::to_string(id) + ".seq";
}

void validate_symbols(const Sequence& s, const Alphabet& alphabet) {
    for (char c : s.symbols) {
        if (!alphabet.contains(static_cast<unsigned char>(c))) {
            throw parameter_error("sequence " + std::to_string(s.id) +
                                  " contains a symbol outside the alphabet");
        }
    }
    if (s.symbols.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw parameter_error("sequence " + std::to_string(s.id) +
                              " exceeds the supported length");
    }
}

}  // namespace

Sequence clean_sequence(const RawSequence& raw, const Alphabet& alphabet, std::uint32_t id) {
    return Sequence{id, raw.header, clean_residues(raw.residues, alphabet)};
}

Catalog Catalog::from_strings(const std::vector<Sequence>& sequences, const Alphabet& alphabet) {
    Catalog cat;
    cat.alphabet_ = alphabet.symbols();
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        const Sequence& s = sequences[i];
        if (s.id != i) throw parameter_error("sequence ids must be contiguous from 0");
        validate_symbols(s, alphabet);
        cat.infos_.push_back(SequenceInfo{s.id, s.name, s.length(), {}});
        cat.payloads_.push_back(s.symbols);
        cat.total_length_ += s.length();
    }
    return cat;
}

Catalog Catalog::build(std::vector<Sequence> sequences, const std::filesystem::path& root,
                       const Alphabet& alphabet, bool allow_empty) {
    if (sequences.empty() && !allow_empty) {
        throw parameter_error("refusing to build an empty catalog without allow-empty");
    }
    std::error_code ec;
    std::filesystem::create_directories(root, ec);
    if (ec) throw storage_error("cannot create catalog root " + root.string() + ": " + ec.message());

    Catalog cat;
    cat.alphabet_ = alphabet.symbols();
    cat.root_ = root;
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        Sequence& s = sequences[i];
        if (s.id != i) throw parameter_error("sequence ids must be contiguous from 0");
        validate_symbols(s, alphabet);
        std::string file = payload_file_name(s.id);
        std::ofstream out(root / file, std::ios::binary | std::ios::trunc);
        if (!out) throw storage_error("cannot write " + (root / file).string());
        out.write(s.symbols.data(), static_cast<std::streamsize>(s.symbols.size()));
        if (!out) throw storage_error("write failed for " + (root / file).string());
        cat.infos_.push_back(SequenceInfo{s.id, s.name, s.length(), file});
        cat.total_length_ += s.length();
        cat.payloads_.push_back(std::move(s.symbols));
    }

    nlohmann::json manifest;
    manifest["alphabet"] = cat.alphabet_;
    manifest["total_length"] = cat.total_length_;
    auto seq_array = nlohmann::json::array();
    for (const SequenceInfo& info : cat.infos_) {
        seq_array.push_back({{"id", info.id},
                             {"name", info.name},
                             {"length", info.length},
                             {"file", info.file}});
    }
    manifest["sequences"] = std::move(seq_array);
    std::ofstream mf(root / kManifestName, std::ios::trunc);
    if (!mf) throw storage_error("cannot write " + (root / kManifestName).string());
    mf << manifest.dump(2) << "\n";
    if (!mf) throw storage_error("write failed for " + (root / kManifestName).string());
    return cat;
}

Catalog Catalog::load(const std::filesystem::path& root) {
    std::ifstream mf(root / kManifestName);
    if (!mf) throw storage_error("cannot open " + (root / kManifestName).string());
    nlohmann::json manifest;
    try {
        mf >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw format_error("invalid catalog manifest: " + std::string(e.what()));
    }

    Catalog cat;
    cat.root_ = root;
    try {
        cat.alphabet_ = manifest.at("alphabet").get<std::string>();
        cat.total_length_ = manifest.at("total_length").get<std::uint64_t>();
        for (const auto& entry : manifest.at("sequences")) {
            cat.infos_.push_back(SequenceInfo{entry.at("id").get<std::uint32_t>(),
                                              entry.at("name").get<std::string>(),
                                              entry.at("length").get<std::uint64_t>(),
                                              entry.at("file").get<std::string>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw format_error("invalid catalog manifest: " + std::string(e.what()));
    }
    for (std::size_t i = 0; i < cat.infos_.size(); ++i) {
        if (cat.infos_[i].id != i) throw format_error("catalog manifest ids are not contiguous");
    }
    return cat;
}

void Catalog::ensure_payloads() {
    if (payloads_loaded()) return;
    payloads_.clear();
    payloads_.reserve(infos_.size());
    for (const SequenceInfo& info : infos_) {
        std::ifstream in(root_ / info.file, std::ios::binary);
        if (!in) throw storage_error("cannot open sequence payload " + (root_ / info.file).string());
        std::string data(info.length, '\0');
        in.read(data.data(), static_cast<std::streamsize>(info.length));
        if (static_cast<std::uint64_t>(in.gcount()) != info.length) {
            throw format_error("sequence payload " + info.file + " is shorter than the manifest length");
        }
        payloads_.push_back(std::move(data));
    }
}

const std::string& Catalog::symbols(std::uint32_t seq) const {
    if (seq >= payloads_.size()) {
        throw contract_error("sequence payloads not loaded or id out of range");
    }
    return payloads_[seq];
}

std::string_view Catalog::suffix(std::uint32_t seq, std::uint64_t off, unsigned lerp) const {
    const std::string& s = symbols(seq);
    if (off >= s.size()) throw parameter_error("offset past end of sequence");
    std::size_t n = std::min<std::uint64_t>(lerp, s.size() - off);
    return {s.data() + off, n};
}

std::uint64_t Catalog::max_sequence_length() const {
    std::uint64_t best = 0;
    for (const SequenceInfo& info : infos_) best = std::max(best, info.length);
    return best;
}

}  // namespace ex2sm
