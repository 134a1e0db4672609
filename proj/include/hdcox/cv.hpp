#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "hdcox/dataset.hpp"
#include "hdcox/rng.hpp"

namespace hdcox {

/// Balanced fold assignment, a pure function of (key, n, folds).  Assignments
/// where some fold has no observed event are re-randomized up to 10 times.
inline std::vector<int> assign_folds(const SurvivalDataset& data, int folds, std::uint64_t key) {
    if (folds < 2) throw std::invalid_argument("assign_folds: folds must be >= 2");
    if (folds > data.n()) throw std::invalid_argument("assign_folds: more folds than subjects");
    const int n = data.n();
    for (int attempt = 0; attempt < 10; ++attempt) {
        CounterRng rng(CounterRng::stream_key(key, 0xf01d5ull, static_cast<std::uint64_t>(attempt)));
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = n - 1; i > 0; --i) {
            const int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
            std::swap(perm[i], perm[j]);
        }
        std::vector<int> fold(n);
        for (int i = 0; i < n; ++i) fold[perm[i]] = i % folds;

        std::vector<int> event_count(folds, 0);
        for (int i = 0; i < n; ++i)
            if (data.events[i]) ++event_count[fold[i]];
        bool ok = true;
        for (int k = 0; k < folds; ++k)
            if (event_count[k] == 0) ok = false;
        if (ok) return fold;
    }
    throw std::runtime_error("assign_folds: could not place an event in every fold");
}

inline std::vector<int> fold_members(const std::vector<int>& fold, int k, bool complement) {
    std::vector<int> rows;
    for (std::size_t i = 0; i < fold.size(); ++i)
        if ((fold[i] == k) != complement) rows.push_back(static_cast<int>(i));
    return rows;
}

} // namespace hdcox
