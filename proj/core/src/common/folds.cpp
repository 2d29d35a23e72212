#include "dml/common/folds.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dml/common/error.hpp"
#include "dml/common/rng.hpp"

namespace dml {

FoldPartition::FoldPartition(std::vector<std::vector<int>> folds, int n, std::uint64_t seed)
    : folds_(std::move(folds)), labels_(static_cast<std::size_t>(n), -1), n_(n), seed_(seed) {
    for (std::size_t k = 0; k < folds_.size(); ++k) {
        for (int i : folds_[k]) {
            if (i < 0 || i >= n || labels_[static_cast<std::size_t>(i)] != -1)
                throw std::invalid_argument("FoldPartition: folds must be disjoint subsets of [0, n)");
            labels_[static_cast<std::size_t>(i)] = static_cast<int>(k);
        }
    }
    if (std::find(labels_.begin(), labels_.end(), -1) != labels_.end())
        throw std::invalid_argument("FoldPartition: folds must cover [0, n)");
}

std::vector<int> FoldPartition::complement(int k) const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(n_) - fold(k).size());
    for (int i = 0; i < n_; ++i)
        if (labels_[static_cast<std::size_t>(i)] != k) out.push_back(i);
    return out;
}

FoldPartition make_folds(int n, int k, std::uint64_t seed) {
    if (k < 2 || k > n)
        throw ConfigError("make_folds: need 2 <= K <= N (got K=" + std::to_string(k) + ", N=" + std::to_string(n) + ")");
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    shuffle(perm, rng);

    std::vector<std::vector<int>> folds(static_cast<std::size_t>(k));
    const int base = n / k;
    const int extra = n % k;
    int pos = 0;
    for (int f = 0; f < k; ++f) {
        const int size = base + (f < extra ? 1 : 0);
        auto& fold = folds[static_cast<std::size_t>(f)];
        fold.assign(perm.begin() + pos, perm.begin() + pos + size);
        std::sort(fold.begin(), fold.end());
        pos += size;
    }
    return FoldPartition(std::move(folds), n, seed);
}

}  // namespace dml
