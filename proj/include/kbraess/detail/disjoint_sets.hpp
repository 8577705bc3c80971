#pragma once

#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

namespace kbraess::detail {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    /// Returns false when x and y were already joined.
    bool unite(std::size_t x, std::size_t y) {
        x = find(x);
        y = find(y);
        if (x == y) return false;
        if (rank_[x] < rank_[y]) std::swap(x, y);
        parent_[y] = x;
        if (rank_[x] == rank_[y]) ++rank_[x];
        return true;
    }

    /// Dense labels 0..k-1, numbered in order of each set's smallest member.
    std::vector<std::size_t> labels() {
        std::vector<std::size_t> label(parent_.size());
        std::vector<std::size_t> root_label(parent_.size(), npos);
        std::size_t next = 0;
        for (std::size_t i = 0; i < parent_.size(); ++i) {
            auto r = find(i);
            if (root_label[r] == npos) root_label[r] = next++;
            label[i] = root_label[r];
        }
        return label;
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::vector<std::size_t> parent_;
    std::vector<unsigned> rank_;
};

}  // namespace kbraess::detail
