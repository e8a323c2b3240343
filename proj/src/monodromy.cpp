#include "hopflink/monodromy.hpp"

#include <algorithm>

namespace hopflink {

BlockPermutation BlockPermutation::identity(Int n) {
    return BlockPermutation{n, {1, n + 1}, {0}};
}

Int BlockPermutation::apply(Int x) const {
    auto it = std::upper_bound(cuts.begin(), cuts.end(), x);
    if (it == cuts.begin() || it == cuts.end()) throw InvalidPermutation("apply: point out of range");
    std::size_t blk = static_cast<std::size_t>(it - cuts.begin()) - 1;
    return x + shifts[blk];
}

bool BlockPermutation::is_identity() const {
    for (Int s : shifts)
        if (s != 0) return false;
    return true;
}

void validate_permutation(const BlockPermutation& p) {
    if (p.N < 1) throw InvalidPermutation("N must be positive");
    if (p.cuts.size() < 2 || p.cuts.size() != p.shifts.size() + 1)
        throw InvalidPermutation("cuts/shifts size mismatch");
    if (p.cuts.front() != 1 || p.cuts.back() != p.N + 1)
        throw InvalidPermutation("cuts must span [1, N+1]");
    for (std::size_t i = 0; i + 1 < p.cuts.size(); ++i)
        if (p.cuts[i] >= p.cuts[i + 1]) throw InvalidPermutation("cuts must increase strictly");
    // images of the blocks must tile [1, N] exactly
    std::vector<std::pair<Int, Int>> images;
    for (std::size_t i = 0; i < p.shifts.size(); ++i) {
        Int lo = p.cuts[i] + p.shifts[i];
        Int hi = p.cuts[i + 1] + p.shifts[i];
        if (lo < 1 || hi > p.N + 1) throw InvalidPermutation("block image out of range");
        images.emplace_back(lo, hi);
    }
    std::sort(images.begin(), images.end());
    Int expect = 1;
    for (auto [lo, hi] : images) {
        if (lo != expect) throw InvalidPermutation("block images overlap or leave gaps");
        expect = hi;
    }
    if (expect != p.N + 1) throw InvalidPermutation("block images do not cover [1,N]");
}

BlockPermutation normalize(const BlockPermutation& p) {
    BlockPermutation r;
    r.N = p.N;
    r.cuts.push_back(p.cuts.front());
    for (std::size_t i = 0; i < p.shifts.size(); ++i) {
        if (!r.shifts.empty() && r.shifts.back() == p.shifts[i]) continue;
        if (!r.shifts.empty()) r.cuts.push_back(p.cuts[i]);
        r.shifts.push_back(p.shifts[i]);
    }
    r.cuts.push_back(p.cuts.back());
    return r;
}

BlockPermutation compose(const BlockPermutation& p, const BlockPermutation& q) {
    if (p.N != q.N) throw SizeMismatch("compose: sizes differ");
    // refine q's blocks by preimages of p's cuts under q
    std::vector<Int> cuts = q.cuts;
    for (std::size_t i = 0; i < q.shifts.size(); ++i) {
        Int lo = q.cuts[i], hi = q.cuts[i + 1], sh = q.shifts[i];
        for (Int pc : p.cuts) {
            Int pre = pc - sh; // q(x) = pc  <=>  x = pc - sh
            if (pre > lo && pre < hi) cuts.push_back(pre);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    BlockPermutation r;
    r.N = p.N;
    r.cuts = cuts;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        Int x = cuts[i];
        r.shifts.push_back(p.apply(q.apply(x)) - x);
    }
    r = normalize(r);
    validate_permutation(r);
    return r;
}

BlockPermutation swap_to_permutation(const TwoBlockSwap& s, Int n) {
    if (s.d1 < 1 || s.d2 < 1) throw InvalidPermutation("swap blocks must be nonempty");
    Int lo = s.offset;
    Int mid = lo + s.d1;
    Int hi = mid + s.d2;
    if (lo < 1 || hi > n + 1) throw InvalidPermutation("swap out of range");
    std::vector<Int> cuts{1};
    std::vector<Int> shifts;
    if (lo > 1) { shifts.push_back(0); cuts.push_back(lo); }
    shifts.push_back(s.d2);   // [lo, mid) moves past the second block
    cuts.push_back(mid);
    shifts.push_back(-s.d1);  // [mid, hi) moves down
    if (hi <= n) { cuts.push_back(hi); shifts.push_back(0); }
    cuts.push_back(n + 1);
    BlockPermutation r{n, std::move(cuts), std::move(shifts)};
    validate_permutation(r);
    return r;
}

std::vector<TwoBlockSwap> decompose(const BlockPermutation& sigma_in) {
    validate_permutation(sigma_in);
    BlockPermutation sigma = normalize(sigma_in);
    std::vector<TwoBlockSwap> swaps;
    Int n = sigma.N;
    std::size_t k = sigma.block_count();

    while (!sigma.is_identity()) {
        // first block that moves; its image must move up since everything
        // below is already fixed
        std::size_t blk = 0;
        while (blk < sigma.shifts.size() && sigma.shifts[blk] == 0) ++blk;
        Int w = sigma.cuts[blk];
        Int img = w + sigma.shifts[blk];
        if (img <= w) throw InvalidPermutation("decompose: first moving block must move up");

        // tau: [w, img) up by N+1-img, [img, N+1) down by img-w;
        // tau o sigma fixes [w, c_{blk+1})
        std::vector<Int> cuts{1};
        std::vector<Int> shifts;
        if (w > 1) { shifts.push_back(0); cuts.push_back(w); }
        shifts.push_back(n + 1 - img);
        cuts.push_back(img);
        shifts.push_back(-(img - w));
        cuts.push_back(n + 1);
        BlockPermutation tau{n, std::move(cuts), std::move(shifts)};
        validate_permutation(tau);

        sigma = compose(tau, sigma);
        swaps.push_back(TwoBlockSwap{n + 1 - img, img - w, w}); // tau^{-1}
        if (swaps.size() > k) throw InvalidPermutation("decompose: swap count exceeded block count");
    }
    return swaps;
}

LinkExpression swap_to_links(const TwoBlockSwap& s) {
    if (s.d1 < 1 || s.d2 < 1) throw PreconditionError("swap_to_links: blocks must be nonempty");
    LinkExpression e;
    e.add(+1, TwistedLink{s.d1 + s.d2});
    e.add(-1, TwistedLink{s.d1});
    e.add(-1, TwistedLink{s.d2});
    return e;
}

} // namespace hopflink
