#include "ex2sm/lerp.hpp"

#include <algorithm>
#include <cmath>

#include <boost/multiprecision/cpp_int.hpp>

#include "ex2sm/errors.hpp"

namespace ex2sm {

namespace mp = boost::multiprecision;

unsigned compute_lerp(std::uint64_t n, unsigned alphabet_size, double p_bar) {
    if (n < 1) throw parameter_error("total length must be at least 1");
    if (alphabet_size < 2) throw parameter_error("alphabet size must be at least 2");
    if (!(p_bar > 0.0) || p_bar > 1.0) {
        throw parameter_error("probability bound must be in (0, 1]");
    }

    // Every finite double is a dyadic rational, so p_bar = mant * 2^exp
    // exactly and the ceiling test m^l * 2 * p_bar >= n^2 becomes pure
    // integer arithmetic.
    int exp2 = 0;
    double frac = std::frexp(p_bar, &exp2);
    mp::cpp_int mant = static_cast<std::uint64_t>(std::ldexp(frac, 53));
    int shift = exp2 - 53 + 1;  // +1 folds in the factor 2

    mp::cpp_int n2 = mp::cpp_int(n) * n;
    auto holds = [&](unsigned l) {
        mp::cpp_int lhs = mp::pow(mp::cpp_int(alphabet_size), l) * mant;
        mp::cpp_int rhs = n2;
        if (shift >= 0) lhs <<= shift; else rhs <<= -shift;
        return lhs >= rhs;
    };

    long double est = (2.0L * std::log(static_cast<long double>(n)) -
                       std::log(2.0L * static_cast<long double>(p_bar))) /
                      std::log(static_cast<long double>(alphabet_size));
    long start = std::max<long>(1, static_cast<long>(std::ceil(est)) - 2);
    unsigned l = static_cast<unsigned>(start);
    while (!holds(l)) ++l;
    return l;
}

LerpParams LerpParams::compute(std::uint64_t n, unsigned alphabet_size, double p_bar) {
    return LerpParams{n, alphabet_size, p_bar, compute_lerp(n, alphabet_size, p_bar)};
}

ClassificationScheme::ClassificationScheme(std::string_view alphabet, unsigned level)
    : level_(level) {
    alphabet_.assign(alphabet);
    std::sort(alphabet_.begin(), alphabet_.end());
    alphabet_.erase(std::unique(alphabet_.begin(), alphabet_.end()), alphabet_.end());
    if (alphabet_.size() < 2) throw parameter_error("alphabet size must be at least 2");

    keys_.push_back("");
    for (unsigned d = 0; d < level_; ++d) {
        std::vector<std::string> next;
        next.reserve(keys_.size() * alphabet_.size());
        for (const std::string& k : keys_) {
            for (char c : alphabet_) next.push_back(k + c);
        }
        keys_ = std::move(next);
        if (keys_.size() > 4096) {
            throw parameter_error("classification level produces more than 4096 classes");
        }
    }
}

std::string ClassificationScheme::class_key(std::string_view suffix_prefix) const {
    std::size_t take = std::min<std::size_t>(level_, suffix_prefix.size());
    for (std::size_t i = 0; i < take; ++i) {
        if (alphabet_.find(suffix_prefix[i]) == std::string::npos) {
            throw parameter_error("symbol outside the alphabet in class_key");
        }
    }
    if (suffix_prefix.size() < level_) return kResidualKey;
    return std::string(suffix_prefix.substr(0, level_));
}

std::string ClassificationScheme::stem(std::string_view key) {
    if (key.empty()) return kSingleClassStem;
    return std::string(key);
}

unsigned choose_level(std::uint64_t total_length, unsigned alphabet_size, unsigned lerp,
                      std::uint64_t memory_budget, bool* capped) {
    if (memory_budget == 0) throw parameter_error("memory budget must be positive");
    if (capped) *capped = false;

    unsigned cap = 0;
    std::uint64_t classes = 1;
    while (classes * alphabet_size <= 4096 && cap < lerp) {
        classes *= alphabet_size;
        ++cap;
    }

    long double per_class = static_cast<long double>(total_length) * lerp;
    for (unsigned level = 0; level <= cap; ++level) {
        if (per_class * 2.0L <= static_cast<long double>(memory_budget)) return level;
        per_class /= alphabet_size;
    }
    if (capped) *capped = true;
    return cap;
}

}  // namespace ex2sm
