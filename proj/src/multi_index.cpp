#include "amplituder/multi_index.hpp"

#include <algorithm>

namespace ampl {

namespace {

void enumerate(int dim, int axis, int remaining, std::vector<int>& cur,
               std::vector<MultiIndex>& out) {
    if (axis == dim - 1) {
        cur[axis] = remaining;
        out.push_back(MultiIndex(cur));
        return;
    }
    for (int a = remaining; a >= 0; --a) {
        cur[axis] = a;
        enumerate(dim, axis + 1, remaining - a, cur, out);
    }
}

} // namespace

std::vector<MultiIndex> multi_indices_of_order(int dim, int order) {
    if (dim < 1) throw ValidationError("multi_indices_of_order: dim must be >= 1");
    if (order < 0) return {};
    std::vector<MultiIndex> out;
    std::vector<int> cur(dim, 0);
    enumerate(dim, 0, order, cur, out);
    std::sort(out.begin(), out.end(), [](const MultiIndex& a, const MultiIndex& b) {
        return GradedLexLess()(a, b);
    });
    return out;
}

} // namespace ampl
