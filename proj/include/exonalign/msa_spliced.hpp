#pragma once

// Multiple spliced alignment: a chain of multi-blocks, each holding at most
// one segment per sequence (CDS sequences and genes). Built by progressively
// merging the conserved blocks of the pairwise spliced alignments, with
// epsilon-compatibility between segments and support-score arbitration of
// conflicting placements.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "exonalign/align.hpp"
#include "exonalign/common.hpp"
#include "exonalign/ortho_pair.hpp"
#include "exonalign/scoring.hpp"
#include "exonalign/seqmodel.hpp"
#include "exonalign/spliced.hpp"

namespace exonalign {

using Segment = std::pair<int, int>;

struct SeqInfo {
    bool is_cds = false;
    int length = 0;
};
using Registry = std::map<std::string, SeqInfo>;

struct MultiBlock {
    std::map<std::string, Segment> segments; // absent sequences are simply missing

    bool has(const std::string& id) const { return segments.count(id) != 0; }
    Segment get(const std::string& id) const
    {
        auto it = segments.find(id);
        return it == segments.end() ? Segment{0, 0} : it->second;
    }
    int present_count() const { return static_cast<int>(segments.size()); }
};

struct MultipleSplicedAlignment {
    std::vector<MultiBlock> blocks; // in chain order
    Registry registry;
    std::vector<std::string> diagnostics;

    // Per-sequence segments across multi-blocks must be strictly increasing.
    void validate() const
    {
        std::map<std::string, int> last_end;
        for (const MultiBlock& mb : blocks) {
            for (const auto& [id, seg] : mb.segments) {
                auto reg = registry.find(id);
                if (reg == registry.end()) throw InternalError("multi-block references unknown sequence " + id);
                if (seg.first < 1 || seg.second < seg.first || seg.second > reg->second.length)
                    throw InternalError("multi-block has invalid segment for " + id);
                auto it = last_end.find(id);
                if (it != last_end.end() && seg.first <= it->second)
                    throw InternalError("multi-block segments of " + id + " are not increasing");
                last_end[id] = seg.second;
            }
        }
    }
};

// Two segments of one sequence are compatible when they share one extremity
// and the other extremities differ by at most epsilon (so one nests in the
// other).
inline bool segments_compatible(Segment s1, Segment s2, int epsilon)
{
    if (s1.first < 1 || s2.first < 1) return false;
    return (std::abs(s1.first - s2.first) <= epsilon && s1.second == s2.second) ||
           (s1.first == s2.first && std::abs(s1.second - s2.second) <= epsilon);
}

// The larger of two compatible (nested) segments.
inline Segment segment_hull(Segment s1, Segment s2)
{
    return {std::min(s1.first, s2.first), std::max(s1.second, s2.second)};
}

// Compatibility of a pairwise block (k,l,a,b) of the pair (x,y) with a
// multi-block, on the CDS side and on the gene side.
inline std::pair<bool, bool> block_multiblock_compatible(int k, int l, int a, int b,
                                                         const std::string& x,
                                                         const std::string& y,
                                                         const MultiBlock& mb, int epsilon)
{
    bool cds_side = mb.has(x) && segments_compatible({k, l}, mb.get(x), epsilon);
    bool gene_side = mb.has(y) && segments_compatible({a, b}, mb.get(y), epsilon);
    return {cds_side, gene_side};
}

// A block is safe to keep through a conflict only when its alignment is
// gap-free and at least tau identical.
inline bool is_correct_block(const Block& bl, double tau)
{
    return bl.conserved() && bl.identity >= tau && bl.detail.gap_columns() == 0;
}

namespace msa_detail {

struct BlockRef {
    const Block* bl;
    std::string x, y; // cds id, gene id
};

inline bool overlaps(Segment s, Segment t)
{
    return s.first <= t.second && t.first <= s.second;
}

} // namespace msa_detail

// Count of pairwise blocks supporting the occurrence of `segment` for
// `seq_id` inside `mb`: blocks between seq_id and counterpart sequences
// present in the multi-block that are compatible with the multi-block.
inline int support_score(const std::string& seq_id, Segment /*segment*/, const MultiBlock& mb,
                         const Registry& registry,
                         const std::map<AlignmentKey, const SplicedAlignment*>& index, int epsilon)
{
    bool seq_is_cds = registry.at(seq_id).is_cds;
    int score = 0;
    for (const auto& [other, seg] : mb.segments) {
        (void)seg;
        if (other == seq_id) continue;
        bool other_is_cds = registry.at(other).is_cds;
        const SplicedAlignment* aln = nullptr;
        std::string x, y;
        if (seq_is_cds && !other_is_cds) {
            x = seq_id;
            y = other;
        } else if (!seq_is_cds && other_is_cds) {
            x = other;
            y = seq_id;
        } else {
            continue;
        }
        auto it = index.find({x, y});
        if (it == index.end()) continue;
        aln = it->second;
        for (const Block& bl : aln->blocks) {
            if (!bl.conserved()) continue;
            auto [cs, gs] = block_multiblock_compatible(bl.k, bl.l, bl.a, bl.b, x, y, mb, epsilon);
            if (cs || gs) ++score;
        }
    }
    return score;
}

// Builds the multiple spliced alignment from pairwise alignments covering
// all (CDS, gene) pairs, the own-gene pairs included. Deterministic: blocks
// are processed by descending identity, then descending length, then
// (cds_id, gene_id, k).
inline MultipleSplicedAlignment build_msa(const std::vector<SplicedAlignment>& alignments,
                                          const Registry& registry, const Params& params)
{
    using msa_detail::BlockRef;
    const int eps = params.epsilon;
    auto index = index_alignments(alignments);

    std::vector<BlockRef> items;
    for (const SplicedAlignment& a : alignments)
        for (const Block& bl : a.blocks)
            if (bl.conserved()) items.push_back(BlockRef{&bl, a.cds_id, a.gene_id});
    std::sort(items.begin(), items.end(), [](const BlockRef& u, const BlockRef& v) {
        if (u.bl->identity != v.bl->identity) return u.bl->identity > v.bl->identity;
        if (u.bl->cds_length() != v.bl->cds_length()) return u.bl->cds_length() > v.bl->cds_length();
        if (u.x != v.x) return u.x < v.x;
        if (u.y != v.y) return u.y < v.y;
        return u.bl->k < v.bl->k;
    });

    std::vector<std::optional<MultiBlock>> mbs;
    MultipleSplicedAlignment out;
    out.registry = registry;

    // True when `seg` for `id` would overlap a segment of `id` held by a
    // multi-block other than `skip1`/`skip2`.
    auto overlaps_elsewhere = [&](const std::string& id, Segment seg, int skip1, int skip2) {
        for (size_t i = 0; i < mbs.size(); ++i) {
            if (!mbs[i]) continue;
            if (static_cast<int>(i) == skip1 || static_cast<int>(i) == skip2) continue;
            auto it = mbs[i]->segments.find(id);
            if (it != mbs[i]->segments.end() && msa_detail::overlaps(seg, it->second)) return true;
        }
        return false;
    };

    auto add_to_mb = [&](int idx, const std::string& id, Segment seg) {
        MultiBlock& mb = *mbs[static_cast<size_t>(idx)];
        auto it = mb.segments.find(id);
        if (it != mb.segments.end()) {
            if (!segments_compatible(seg, it->second, eps)) {
                out.diagnostics.push_back("kept existing occurrence of " + id +
                                          " against an incompatible block segment");
                return;
            }
            Segment hull = segment_hull(seg, it->second);
            if (hull != it->second && overlaps_elsewhere(id, hull, idx, -1)) {
                out.diagnostics.push_back("segment growth of " + id +
                                          " blocked by a neighbouring multi-block");
                return;
            }
            it->second = hull;
        } else {
            if (overlaps_elsewhere(id, seg, idx, -1)) {
                out.diagnostics.push_back("occurrence of " + id +
                                          " not installed: overlaps another multi-block");
                return;
            }
            mb.segments[id] = seg;
        }
    };

    for (const BlockRef& item : items) {
        const Block& bl = *item.bl;
        Segment xs{bl.k, bl.l}, ys{bl.a, bl.b};

        // candidate multi-blocks per side; at most two can share an extremity
        std::vector<int> cds_cands, gene_cands;
        for (size_t i = 0; i < mbs.size(); ++i) {
            if (!mbs[i]) continue;
            auto [cs, gs] =
                block_multiblock_compatible(bl.k, bl.l, bl.a, bl.b, item.x, item.y, *mbs[i], eps);
            if (cs) cds_cands.push_back(static_cast<int>(i));
            if (gs) gene_cands.push_back(static_cast<int>(i));
        }
        if (cds_cands.size() > 2 || gene_cands.size() > 2)
            throw InternalError("block compatible with more than two multi-blocks on one side");

        // keep the tighter candidate per side (smaller extremity slack)
        auto pick = [&](std::vector<int>& cands, const std::string& id, Segment seg) -> int {
            if (cands.empty()) return -1;
            if (cands.size() == 1) return cands[0];
            auto slack = [&](int idx) {
                Segment s = mbs[static_cast<size_t>(idx)]->get(id);
                return std::abs(s.first - seg.first) + std::abs(s.second - seg.second);
            };
            return slack(cands[0]) <= slack(cands[1]) ? cands[0] : cands[1];
        };
        int ci = pick(cds_cands, item.x, xs);
        int gi = pick(gene_cands, item.y, ys);

        if (ci < 0 && gi < 0) {
            // Case 1: a new multi-block
            if (overlaps_elsewhere(item.x, xs, -1, -1) || overlaps_elsewhere(item.y, ys, -1, -1)) {
                out.diagnostics.push_back("dropped block of (" + item.x + ", " + item.y +
                                          "): overlaps established multi-blocks");
                continue;
            }
            MultiBlock mb;
            mb.segments[item.x] = xs;
            mb.segments[item.y] = ys;
            mbs.push_back(std::move(mb));
            continue;
        }
        if (ci == gi || ci < 0 || gi < 0) {
            // Case 2: a single compatible multi-block absorbs the block
            int idx = ci >= 0 ? ci : gi;
            add_to_mb(idx, item.x, xs);
            add_to_mb(idx, item.y, ys);
            continue;
        }

        // Case 3: one multi-block per side
        MultiBlock& mi = *mbs[static_cast<size_t>(ci)];
        MultiBlock& mj = *mbs[static_cast<size_t>(gi)];
        bool mergeable = true;
        for (const auto& [id, seg] : mi.segments) {
            auto it = mj.segments.find(id);
            if (it != mj.segments.end() && !segments_compatible(seg, it->second, eps)) {
                mergeable = false;
                break;
            }
        }
        if (mergeable) {
            // Case 3.a: merge the two multi-blocks
            MultiBlock merged = mi;
            for (const auto& [id, seg] : mj.segments) {
                auto it = merged.segments.find(id);
                if (it == merged.segments.end()) merged.segments[id] = seg;
                else it->second = segment_hull(it->second, seg);
            }
            int keep = std::min(ci, gi), drop = std::max(ci, gi);
            mbs[static_cast<size_t>(keep)] = std::move(merged);
            mbs[static_cast<size_t>(drop)].reset();
            add_to_mb(keep, item.x, xs);
            add_to_mb(keep, item.y, ys);
            continue;
        }
        // Case 3.b
        if (!is_correct_block(bl, params.tau)) {
            out.diagnostics.push_back("discarded conflicting block of (" + item.x + ", " + item.y +
                                      "): below correctness bar");
            continue; // 3.b.i
        }
        // 3.b.ii: arbitrate by support; ties keep the CDS-side occurrence
        int si = support_score(item.x, mi.get(item.x), mi, registry, index, eps);
        int sj = support_score(item.y, mj.get(item.y), mj, registry, index, eps);
        if (si >= sj) {
            mj.segments.erase(item.y);
            add_to_mb(ci, item.x, xs);
            add_to_mb(ci, item.y, ys);
        } else {
            mi.segments.erase(item.x);
            add_to_mb(gi, item.x, xs);
            add_to_mb(gi, item.y, ys);
        }
    }

    // finalize: prune one-sequence multi-blocks, then order the chain
    std::vector<MultiBlock> alive;
    for (auto& mb : mbs)
        if (mb && mb->present_count() >= 2) alive.push_back(std::move(*mb));

    size_t n = alive.size();
    std::vector<std::vector<int>> after(n);
    std::vector<int> indeg(n, 0);
    for (size_t u = 0; u < n; ++u) {
        for (size_t v = 0; v < n; ++v) {
            if (u == v) continue;
            bool before = false;
            for (const auto& [id, seg] : alive[u].segments) {
                auto it = alive[v].segments.find(id);
                if (it != alive[v].segments.end() && seg.second < it->second.first) {
                    before = true;
                    break;
                }
            }
            if (before) {
                after[u].push_back(static_cast<int>(v));
                ++indeg[v];
            }
        }
    }
    std::set<int> ready;
    for (size_t i = 0; i < n; ++i)
        if (indeg[i] == 0) ready.insert(static_cast<int>(i));
    std::vector<int> order;
    while (!ready.empty()) {
        int u = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(u);
        for (int v : after[static_cast<size_t>(u)])
            if (--indeg[static_cast<size_t>(v)] == 0) ready.insert(v);
    }
    if (order.size() != n) {
        std::string bad;
        for (size_t i = 0; i < n; ++i)
            if (indeg[i] > 0)
                for (const auto& [id, seg] : alive[i].segments) bad += (bad.empty() ? "" : ",") + id;
        throw InternalError("multi-block chain has no consistent ordering; sequences involved: " + bad);
    }
    for (int u : order) out.blocks.push_back(std::move(alive[static_cast<size_t>(u)]));

    // coverage diagnostics for the CDS sequences
    for (const auto& [id, info] : registry) {
        if (!info.is_cds) continue;
        long covered = 0;
        for (const MultiBlock& mb : out.blocks)
            if (mb.has(id)) covered += mb.get(id).second - mb.get(id).first + 1;
        if (covered < info.length)
            out.diagnostics.push_back("CDS " + id + " only partially covered by multi-blocks (" +
                                      std::to_string(covered) + "/" + std::to_string(info.length) +
                                      " nt); deleted filler restores coverage in induced alignments");
    }

    out.validate();
    return out;
}

// The pairwise spliced alignment induced for the pair (x, y): the reduction
// of the multi-blocks where x is present, with deleted filler so that x is
// covered entirely.
inline SplicedAlignment induced_pairwise(const MultipleSplicedAlignment& msa, const std::string& x,
                                         const std::string& y, const std::string& x_seq,
                                         const std::string& y_seq, const ScoringScheme& scheme)
{
    if (!msa.registry.count(x) || !msa.registry.count(y))
        throw InputError("induced_pairwise: unknown sequence id");
    SplicedAlignment out;
    out.cds_id = x;
    out.gene_id = y;
    int m = static_cast<int>(x_seq.size());
    int pos = 1;
    int last_gene_end = 0;
    auto push_deleted = [&](int from, int to) {
        if (from > to) return;
        if (!out.blocks.empty() && !out.blocks.back().conserved()) out.blocks.back().l = to;
        else out.blocks.push_back(Block::make_deleted(from, to));
    };
    for (const MultiBlock& mb : msa.blocks) {
        if (!mb.has(x)) continue;
        Segment xs = mb.get(x);
        push_deleted(pos, xs.first - 1);
        if (mb.has(y) && mb.get(y).first > last_gene_end) {
            Segment ys = mb.get(y);
            AlignmentResult aln = global_align(segment(x_seq, xs.first, xs.second),
                                               segment(y_seq, ys.first, ys.second), scheme);
            out.blocks.push_back(
                Block::make_conserved(xs.first, xs.second, ys.first, ys.second, aln.detail));
            last_gene_end = ys.second;
        } else {
            push_deleted(xs.first, xs.second);
        }
        pos = xs.second + 1;
    }
    push_deleted(pos, m);
    out.validate(m, static_cast<int>(y_seq.size()));
    return out;
}

// ---------------------------------------------------------------------------
// MSA TSV: one line per (multi-block, present sequence):
//   mb_idx  seq_id  s  e
// ---------------------------------------------------------------------------

inline std::string msa_to_tsv(const MultipleSplicedAlignment& msa)
{
    std::string out;
    int idx = 0;
    for (const MultiBlock& mb : msa.blocks) {
        ++idx;
        for (const auto& [id, seg] : mb.segments)
            out += std::to_string(idx) + "\t" + id + "\t" + std::to_string(seg.first) + "\t" +
                   std::to_string(seg.second) + "\n";
    }
    return out;
}

} // namespace exonalign
