#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dml {

/// K disjoint index sets covering {0, ..., N-1}. Fold sizes differ by at most one;
/// the first N mod K folds carry the extra element.
class FoldPartition {
public:
    FoldPartition(std::vector<std::vector<int>> folds, int n, std::uint64_t seed);

    int n() const noexcept { return n_; }
    int k() const noexcept { return static_cast<int>(folds_.size()); }
    std::uint64_t seed() const noexcept { return seed_; }

    std::span<const int> fold(int k) const { return folds_.at(static_cast<std::size_t>(k)); }
    /// Indices of all observations outside fold k, ascending.
    std::vector<int> complement(int k) const;
    /// Fold label of every observation.
    const std::vector<int>& labels() const noexcept { return labels_; }

private:
    std::vector<std::vector<int>> folds_;
    std::vector<int> labels_;
    int n_;
    std::uint64_t seed_;
};

/// Uniform random permutation of {0..N-1} sliced into K contiguous blocks.
/// Requires 2 <= K <= N.
FoldPartition make_folds(int n, int k, std::uint64_t seed);

}  // namespace dml
