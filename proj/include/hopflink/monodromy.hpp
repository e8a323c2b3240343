#pragma once

#include <vector>

#include "hopflink/link_types.hpp"

namespace hopflink {

/// Permutation of [1,N] that rearranges k contiguous blocks: cuts are
/// 1 = c_1 < c_2 < ... < c_{k+1} = N+1 and sigma(x) = x + shift_i on
/// [c_i, c_{i+1}). Stored sparsely so N may be astronomically large.
struct BlockPermutation {
    Int N = 0;
    std::vector<Int> cuts;    // size k+1, cuts.front() = 1, cuts.back() = N+1
    std::vector<Int> shifts;  // size k

    static BlockPermutation identity(Int n);
    Int apply(Int x) const;
    std::size_t block_count() const { return shifts.size(); }
    bool is_identity() const;
    friend bool operator==(const BlockPermutation&, const BlockPermutation&) = default;
};

/// Exchange of two adjacent blocks of sizes d1 and d2 starting at `offset`
/// (the block [offset, offset+d1) moves past [offset+d1, offset+d1+d2)).
struct TwoBlockSwap {
    Int d1 = 0;
    Int d2 = 0;
    Int offset = 1;
    friend bool operator==(const TwoBlockSwap&, const TwoBlockSwap&) = default;
};

/// Validates cuts/shifts and that sigma is a bijection of [1,N].
void validate_permutation(const BlockPermutation& p);

/// Merges adjacent blocks with equal shifts (minimal block representation).
BlockPermutation normalize(const BlockPermutation& p);

/// compose(p, q)(x) = p(q(x)); block structure refined exactly.
BlockPermutation compose(const BlockPermutation& p, const BlockPermutation& q);

BlockPermutation swap_to_permutation(const TwoBlockSwap& s, Int n);

/// At most k-1 two-block swaps whose composition (rightmost applied first)
/// equals sigma.
std::vector<TwoBlockSwap> decompose(const BlockPermutation& sigma);

/// d1+d2 twisted minus the two block twists: Twisted{d1+d2} - Twisted{d1}
/// - Twisted{d2}; Hopf invariant d1*d2.
LinkExpression swap_to_links(const TwoBlockSwap& s);

} // namespace hopflink
