#ifndef LYAPCHI_DETAIL_SUMMATION_HPP
#define LYAPCHI_DETAIL_SUMMATION_HPP

#include <cstddef>
#include <span>

namespace lyapchi::detail {

// Pairwise (cascade) summation: O(log n) error growth and a fixed association
// order, so results do not depend on chunking or worker count.
inline double pairwise_sum(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n <= 16) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

template <class Fn>
inline double pairwise_sum_transform(std::size_t begin, std::size_t end, Fn&& fn) {
    const std::size_t n = end - begin;
    if (n <= 16) {
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) s += fn(i);
        return s;
    }
    const std::size_t mid = begin + n / 2;
    return pairwise_sum_transform(begin, mid, fn) +
           pairwise_sum_transform(mid, end, fn);
}

} // namespace lyapchi::detail

#endif // LYAPCHI_DETAIL_SUMMATION_HPP
