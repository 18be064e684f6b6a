#pragma once

// Structure-aware pairwise spliced alignment of a CDS sequence onto a gene.
//
// The aligner runs five steps: translated anchoring, anchor chaining with
// extension to CDS exon extremities, semi-global gap filling, splice-junction
// correction towards GT..AG sites, and block-end correction against the gene
// exon structure; a final identity filter discards weak blocks.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "exonalign/align.hpp"
#include "exonalign/anchors.hpp"
#include "exonalign/common.hpp"
#include "exonalign/scoring.hpp"
#include "exonalign/seqmodel.hpp"
#include "exonalign/spliced.hpp"

namespace exonalign {

namespace pw {

// Ungapped block over cs[k..l] / h[a..b] of equal length.
inline Block ungapped_block(int k, int l, int a, int b, const CdsSequence& cs, const Gene& h)
{
    PairwiseAlignmentDetail d;
    d.row1 = segment(cs.seq, k, l);
    d.row2 = segment(h.seq, a, b);
    if (d.row1.size() != d.row2.size()) throw InternalError("ungapped block with unequal segments");
    return Block::make_conserved(k, l, a, b, std::move(d));
}

// Number of matching positions in the ungapped pairing cs[k..k+len) / h[a..a+len).
inline int count_matches(const CdsSequence& cs, const Gene& h, int k, int a, int len)
{
    int m = 0;
    for (int off = 0; off < len; ++off)
        if (bases_match(cs.seq[static_cast<size_t>(k - 1 + off)],
                        h.seq[static_cast<size_t>(a - 1 + off)]))
            ++m;
    return m;
}

// Removes columns from the left of a conserved block until `gene_count` gene
// characters are gone; k/a advance by the consumed counts. Returns false if
// the trim would leave no aligned gene characters.
inline bool trim_left_gene(Block& bl, int gene_count)
{
    int gene_len = bl.b - bl.a + 1;
    if (gene_count <= 0 || gene_count >= gene_len) return false;
    int gdone = 0, cdone = 0;
    size_t col = 0;
    while (col < bl.detail.row1.size() && gdone < gene_count) {
        if (bl.detail.row1[col] != '-') ++cdone;
        if (bl.detail.row2[col] != '-') ++gdone;
        ++col;
    }
    if (cdone >= bl.cds_length()) return false;
    bl.detail.row1.erase(0, col);
    bl.detail.row2.erase(0, col);
    bl.k += cdone;
    bl.a += gene_count;
    bl.identity = block_identity(bl.detail);
    return true;
}

inline bool trim_right_gene(Block& bl, int gene_count)
{
    int gene_len = bl.b - bl.a + 1;
    if (gene_count <= 0 || gene_count >= gene_len) return false;
    int gdone = 0, cdone = 0;
    size_t col = bl.detail.row1.size();
    while (col > 0 && gdone < gene_count) {
        --col;
        if (bl.detail.row1[col] != '-') ++cdone;
        if (bl.detail.row2[col] != '-') ++gdone;
    }
    if (cdone >= bl.cds_length()) return false;
    bl.detail.row1.erase(col);
    bl.detail.row2.erase(col);
    bl.l -= cdone;
    bl.b -= gene_count;
    bl.identity = block_identity(bl.detail);
    return true;
}

// Removes columns from the right until `cds_count` CDS characters are gone.
inline bool trim_right_cds(Block& bl, int cds_count)
{
    if (cds_count <= 0 || cds_count >= bl.cds_length()) return false;
    int gdone = 0, cdone = 0;
    size_t col = bl.detail.row1.size();
    while (col > 0 && cdone < cds_count) {
        --col;
        if (bl.detail.row1[col] != '-') ++cdone;
        if (bl.detail.row2[col] != '-') ++gdone;
    }
    if (gdone >= bl.b - bl.a + 1) return false;
    bl.detail.row1.erase(col);
    bl.detail.row2.erase(col);
    bl.l -= cds_count;
    bl.b -= gdone;
    bl.identity = block_identity(bl.detail);
    return true;
}

inline bool trim_left_cds(Block& bl, int cds_count)
{
    if (cds_count <= 0 || cds_count >= bl.cds_length()) return false;
    int gdone = 0, cdone = 0;
    size_t col = 0;
    while (col < bl.detail.row1.size() && cdone < cds_count) {
        if (bl.detail.row1[col] != '-') ++cdone;
        if (bl.detail.row2[col] != '-') ++gdone;
        ++col;
    }
    if (gdone >= bl.b - bl.a + 1) return false;
    bl.detail.row1.erase(0, col);
    bl.detail.row2.erase(0, col);
    bl.k += cds_count;
    bl.a += gdone;
    bl.identity = block_identity(bl.detail);
    return true;
}

// The CDS exon containing position p (the exons tile the CDS).
inline const Exon& containing_exon(const std::vector<Exon>& cds_exons, int p)
{
    for (const Exon& e : cds_exons)
        if (e.start <= p && p <= e.end) return e;
    throw InternalError("CDS position " + std::to_string(p) + " outside the exon tiling");
}

// Merges chains of blocks that are adjacent in both sequences.
inline void merge_adjacent(std::vector<Block>& cons)
{
    std::vector<Block> out;
    for (Block& bl : cons) {
        if (!out.empty() && out.back().l + 1 == bl.k && out.back().b + 1 == bl.a) {
            Block& prev = out.back();
            prev.l = bl.l;
            prev.b = bl.b;
            prev.detail.row1 += bl.detail.row1;
            prev.detail.row2 += bl.detail.row2;
            prev.identity = block_identity(prev.detail);
        } else {
            out.push_back(std::move(bl));
        }
    }
    cons = std::move(out);
}

// Fuses consecutive conserved blocks separated by a short gap on both
// sequences into one block with an optimal internal alignment, whenever that
// does not lower the objective contribution. Slivers of this kind arise when
// an extension or fill run breaks inside an exon; a fused block keeps the
// exon in one piece.
inline void fuse_near_blocks(std::vector<Block>& cons, const CdsSequence& cs, const Gene& h,
                             const std::vector<Exon>& cds_exons, const GeneExonSet& gene_exons,
                             const ScoringScheme& scheme)
{
    constexpr int kMaxFuseGap = 15;
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 0; i + 1 < cons.size(); ++i) {
            Block& L = cons[i];
            Block& R = cons[i + 1];
            int cds_gap = R.k - L.l - 1;
            int gene_gap = R.a - L.b - 1;
            if (cds_gap < 0 || gene_gap < 0) continue;
            if (cds_gap == 0 && gene_gap == 0) continue; // plain adjacency, merged elsewhere
            if (cds_gap > kMaxFuseGap || gene_gap > kMaxFuseGap) continue;

            AlignmentResult merged =
                global_align(segment(cs.seq, L.k, R.l), segment(h.seq, L.a, R.b), scheme);
            long merged_value =
                merged.score + exon_score(L.k, R.l, L.a, R.b, cds_exons, gene_exons, scheme);
            long split_value =
                global_align(segment(cs.seq, L.k, L.l), segment(h.seq, L.a, L.b), scheme).score +
                global_align(segment(cs.seq, R.k, R.l), segment(h.seq, R.a, R.b), scheme).score +
                scheme.gap_run(cds_gap) +
                exon_score(L.k, L.l, L.a, L.b, cds_exons, gene_exons, scheme) +
                exon_score(R.k, R.l, R.a, R.b, cds_exons, gene_exons, scheme) +
                (cds_gap == 0 ? intron_score(h, {L.b, R.a}, scheme) : 0);
            if (merged_value < split_value) continue;

            Block fused = Block::make_conserved(L.k, R.l, L.a, R.b, merged.detail);
            cons[i] = std::move(fused);
            cons.erase(cons.begin() + static_cast<long>(i) + 1);
            changed = true;
            break;
        }
    }
}

// Full block chain over [1, m]: the conserved blocks plus deleted filler.
inline std::vector<Block> full_chain(const std::vector<Block>& cons, int m)
{
    std::vector<Block> out;
    int pos = 1;
    for (const Block& bl : cons) {
        if (bl.k > pos) out.push_back(Block::make_deleted(pos, bl.k - 1));
        out.push_back(bl);
        pos = bl.l + 1;
    }
    if (pos <= m) out.push_back(Block::make_deleted(pos, m));
    return out;
}

} // namespace pw

// ---------------------------------------------------------------------------
// Step 2a: anchor chaining
// ---------------------------------------------------------------------------

// Splits anchors at internal CDS exon junctions and rescores the pieces.
// Ungapped extensions routinely overrun a junction into intron sequence;
// the overrun inflates the anchor and can out-compete the true anchor of
// the next exon during chaining. Pieces that really continue across the
// junction on the gene stay adjacent and re-merge into one block later.
inline std::vector<Anchor> clip_anchors_at_cds_junctions(const std::vector<Anchor>& anchors,
                                                         const CdsSequence& cs, const Gene& h,
                                                         const ScoringScheme& scheme,
                                                         const Params& params)
{
    constexpr int kMinPiece = 6;
    std::vector<Anchor> out;
    for (const Anchor& an : anchors) {
        std::vector<int> cuts; // last CDS position of each piece
        for (const Exon& e : cs.cds_exons)
            if (e.end >= an.k && e.end < an.l) cuts.push_back(e.end);
        cuts.push_back(an.l);
        int pos = an.k;
        for (int cut : cuts) {
            if (cut - pos + 1 >= kMinPiece) {
                Anchor piece;
                piece.k = pos;
                piece.l = cut;
                piece.a = an.a + (pos - an.k);
                piece.b = an.a + (cut - an.k);
                piece.score =
                    anchor_detail::aa_score_of_span(cs.seq, h.seq, piece.k, piece.l, piece.a, scheme);
                piece.identity =
                    anchor_detail::nt_identity_of_span(cs.seq, h.seq, piece.k, piece.l, piece.a);
                piece.tier = params.tiers.tier_of(piece.score);
                if (piece.score > 0) out.push_back(piece);
            }
            pos = cut + 1;
        }
    }
    std::sort(out.begin(), out.end(), [](const Anchor& x, const Anchor& y) {
        if (x.score != y.score) return x.score > y.score;
        if (x.k != y.k) return x.k < y.k;
        return x.a < y.a;
    });
    return out;
}

// Keeps a maximum-weight chain (weight = anchor score) of anchors that are
// pairwise non-crossing, non-overlapping in both sequences, and consistent
// with the already selected blocks. Returns the selected anchors as blocks.
inline std::vector<Block> select_compatible_anchors(const std::vector<Anchor>& anchors,
                                                    const std::vector<Block>& existing,
                                                    const CdsSequence& cs, const Gene& h)
{
    // decompose into the free slots between existing blocks
    struct Slot {
        int klo, khi, alo, ahi;
    };
    std::vector<Slot> slots;
    {
        int klo = 1, alo = 1;
        for (const Block& bl : existing) {
            slots.push_back(Slot{klo, bl.k - 1, alo, bl.a - 1});
            klo = bl.l + 1;
            alo = bl.b + 1;
        }
        slots.push_back(Slot{klo, cs.length(), alo, h.length()});
    }

    std::vector<Block> picked;
    for (const Slot& slot : slots) {
        if (slot.khi < slot.klo || slot.ahi < slot.alo) continue;
        std::vector<Anchor> cand;
        for (const Anchor& an : anchors)
            if (an.k >= slot.klo && an.l <= slot.khi && an.a >= slot.alo && an.b <= slot.ahi)
                cand.push_back(an);
        if (cand.empty()) continue;
        std::sort(cand.begin(), cand.end(), [](const Anchor& x, const Anchor& y) {
            if (x.k != y.k) return x.k < y.k;
            if (x.l != y.l) return x.l < y.l;
            if (x.a != y.a) return x.a < y.a;
            return x.b < y.b;
        });
        size_t n = cand.size();
        std::vector<long> dp(n);
        std::vector<int> prev(n, -1);
        for (size_t i = 0; i < n; ++i) {
            dp[i] = cand[i].score;
            for (size_t j = 0; j < i; ++j) {
                if (cand[j].l < cand[i].k && cand[j].b < cand[i].a &&
                    dp[j] + cand[i].score > dp[i]) {
                    dp[i] = dp[j] + cand[i].score;
                    prev[i] = static_cast<int>(j);
                }
            }
        }
        size_t best = 0;
        for (size_t i = 1; i < n; ++i)
            if (dp[i] > dp[best]) best = i;
        std::vector<size_t> chain;
        for (int i = static_cast<int>(best); i >= 0; i = prev[static_cast<size_t>(i)])
            chain.push_back(static_cast<size_t>(i));
        std::reverse(chain.begin(), chain.end());
        for (size_t i : chain) {
            const Anchor& an = cand[i];
            picked.push_back(pw::ungapped_block(an.k, an.l, an.a, an.b, cs, h));
        }
    }
    std::sort(picked.begin(), picked.end(), [](const Block& x, const Block& y) { return x.k < y.k; });
    return picked;
}

// ---------------------------------------------------------------------------
// Step 2b: block extension towards CDS exon extremities
// ---------------------------------------------------------------------------

// Returns the number of neighbour trims applied.
inline int extend_blocks_cds(std::vector<Block>& cons, const CdsSequence& cs, const Gene& h,
                             const ScoringScheme&)
{
    int trims = 0;
    for (size_t i = 0; i < cons.size(); ++i) {
        // left end
        {
            Block& bl = cons[i];
            const Exon& ex = pw::containing_exon(cs.cds_exons, bl.k);
            if (bl.k != ex.start) {
                int len = bl.k - ex.start;
                int a2 = bl.a - len;
                Block* prev = i > 0 ? &cons[i - 1] : nullptr;
                int cds_floor = prev ? prev->l + 1 : 1;
                int gene_floor = prev ? prev->b + 1 : 1;
                if (a2 >= 1 && a2 >= gene_floor && ex.start >= cds_floor) {
                    // plain extension; identity must not decrease
                    int addm = pw::count_matches(cs, h, ex.start, a2, len);
                    int cols = bl.detail.columns();
                    int m0 = bl.detail.matches();
                    if (static_cast<double>(m0 + addm) * cols >=
                        static_cast<double>(m0) * (cols + len)) {
                        bl.detail.row1 = segment(cs.seq, ex.start, bl.k - 1) + bl.detail.row1;
                        bl.detail.row2 = segment(h.seq, a2, bl.a - 1) + bl.detail.row2;
                        bl.k = ex.start;
                        bl.a = a2;
                        bl.identity = block_identity(bl.detail);
                    }
                } else if (a2 >= 1 && prev && ex.start <= prev->l && ex.start > prev->k &&
                           (i < 2 || cons[i - 2].l < ex.start)) {
                    // the extension overlaps the previous block on the CDS:
                    // trim it iff both identities strictly increase
                    Block trimmed = *prev;
                    if (pw::trim_right_cds(trimmed, prev->l - ex.start + 1) &&
                        a2 > trimmed.b && trimmed.identity > prev->identity) {
                        int addm = pw::count_matches(cs, h, ex.start, a2, len);
                        int cols = bl.detail.columns();
                        int m0 = bl.detail.matches();
                        if (static_cast<double>(m0 + addm) * cols >
                            static_cast<double>(m0) * (cols + len)) {
                            ++trims;
                            *prev = trimmed;
                            bl.detail.row1 = segment(cs.seq, ex.start, bl.k - 1) + bl.detail.row1;
                            bl.detail.row2 = segment(h.seq, a2, bl.a - 1) + bl.detail.row2;
                            bl.k = ex.start;
                            bl.a = a2;
                            bl.identity = block_identity(bl.detail);
                        }
                    }
                }
            }
        }
        // right end
        {
            Block& bl = cons[i];
            const Exon& ex = pw::containing_exon(cs.cds_exons, bl.l);
            if (bl.l != ex.end) {
                int len = ex.end - bl.l;
                int b2 = bl.b + len;
                Block* next = i + 1 < cons.size() ? &cons[i + 1] : nullptr;
                int cds_ceil = next ? next->k - 1 : cs.length();
                int gene_ceil = next ? next->a - 1 : h.length();
                if (b2 <= h.length() && b2 <= gene_ceil && ex.end <= cds_ceil) {
                    int addm = pw::count_matches(cs, h, bl.l + 1, bl.b + 1, len);
                    int cols = bl.detail.columns();
                    int m0 = bl.detail.matches();
                    if (static_cast<double>(m0 + addm) * cols >=
                        static_cast<double>(m0) * (cols + len)) {
                        bl.detail.row1 += segment(cs.seq, bl.l + 1, ex.end);
                        bl.detail.row2 += segment(h.seq, bl.b + 1, b2);
                        bl.l = ex.end;
                        bl.b = b2;
                        bl.identity = block_identity(bl.detail);
                    }
                } else if (b2 <= h.length() && next && ex.end >= next->k && ex.end < next->l &&
                           (i + 2 >= cons.size() || cons[i + 2].k > ex.end)) {
                    Block trimmed = *next;
                    if (pw::trim_left_cds(trimmed, ex.end - next->k + 1) && b2 < trimmed.a &&
                        trimmed.identity > next->identity) {
                        int addm = pw::count_matches(cs, h, bl.l + 1, bl.b + 1, len);
                        int cols = bl.detail.columns();
                        int m0 = bl.detail.matches();
                        if (static_cast<double>(m0 + addm) * cols >
                            static_cast<double>(m0) * (cols + len)) {
                            ++trims;
                            *next = trimmed;
                            bl.detail.row1 += segment(cs.seq, bl.l + 1, ex.end);
                            bl.detail.row2 += segment(h.seq, bl.b + 1, b2);
                            bl.l = ex.end;
                            bl.b = b2;
                            bl.identity = block_identity(bl.detail);
                        }
                    }
                }
            }
        }
    }
    return trims;
}

// ---------------------------------------------------------------------------
// Step 3: semi-global filling of the remaining regions
// ---------------------------------------------------------------------------

namespace pw {

// Maximal runs of columns aligned in both rows, as conserved blocks.
// cds_off/gene_off are the 1-based coordinates of the first row characters.
inline std::vector<Block> runs_to_blocks(const PairwiseAlignmentDetail& d, int cds_off,
                                         int gene_off)
{
    std::vector<Block> out;
    int ci = cds_off - 1, gi = gene_off - 1; // last consumed coordinates
    int run_k = 0, run_a = 0;
    std::string r1, r2;
    auto flush = [&]() {
        if (run_k == 0) return;
        Block bl;
        bl.k = run_k;
        bl.l = ci;
        bl.a = run_a;
        bl.b = gi;
        bl.status = BlockStatus::Conserved;
        bl.detail.row1 = r1;
        bl.detail.row2 = r2;
        bl.identity = block_identity(bl.detail);
        out.push_back(bl);
        run_k = 0;
        r1.clear();
        r2.clear();
    };
    for (size_t col = 0; col < d.row1.size(); ++col) {
        bool c1 = d.row1[col] != '-';
        bool c2 = d.row2[col] != '-';
        if (c1 && c2) {
            if (run_k == 0) {
                run_k = ci + 1;
                run_a = gi + 1;
            }
            r1.push_back(d.row1[col]);
            r2.push_back(d.row2[col]);
        } else {
            flush();
        }
        if (c1) ++ci;
        if (c2) ++gi;
    }
    flush();
    return out;
}

} // namespace pw

inline void fill_gaps_global(std::vector<Block>& cons, const CdsSequence& cs, const Gene& h,
                             const ScoringScheme& scheme, double tau)
{
    struct Region {
        int u1, u2, gl, gr;
    };
    std::vector<Region> regions;
    {
        int pos = 1, gl = 1;
        for (const Block& bl : cons) {
            if (bl.k > pos) regions.push_back(Region{pos, bl.k - 1, gl, bl.a - 1});
            pos = bl.l + 1;
            gl = bl.b + 1;
        }
        if (pos <= cs.length()) regions.push_back(Region{pos, cs.length(), gl, h.length()});
    }

    std::vector<Block> added;
    for (const Region& r : regions) {
        if (r.gl > r.gr) continue;
        AlignmentResult aln =
            semiglobal_align(segment(cs.seq, r.u1, r.u2), segment(h.seq, r.gl, r.gr), scheme);
        std::vector<Block> runs = pw::runs_to_blocks(aln.detail, r.u1, r.gl);
        std::erase_if(runs, [&](const Block& bl) { return bl.identity < tau; });

        // Drop runs whose net contribution to the objective is negative:
        // each extra conserved run splits the deleted region and adds a gap
        // open pick-up, so tiny runs can cost more than they score.
        auto local_value = [&](const std::vector<Block>& kept) {
            long v = 0;
            int pos = r.u1;
            for (const Block& bl : kept) {
                if (bl.k > pos) v += scheme.gap_run(bl.k - pos);
                int mm = bl.detail.matches();
                v += mm * scheme.match + (bl.detail.columns() - mm) * scheme.mismatch;
                pos = bl.l + 1;
            }
            if (pos <= r.u2) v += scheme.gap_run(r.u2 - pos + 1);
            return v;
        };
        bool changed = true;
        while (changed && !runs.empty()) {
            changed = false;
            long cur = local_value(runs);
            long best_gain = 0;
            size_t best_idx = 0;
            for (size_t i = 0; i < runs.size(); ++i) {
                std::vector<Block> without = runs;
                without.erase(without.begin() + static_cast<long>(i));
                long gain = local_value(without) - cur;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_idx = i;
                }
            }
            if (best_gain > 0) {
                runs.erase(runs.begin() + static_cast<long>(best_idx));
                changed = true;
            }
        }
        for (Block& bl : runs) added.push_back(std::move(bl));
    }
    for (Block& bl : added) cons.push_back(std::move(bl));
    std::sort(cons.begin(), cons.end(), [](const Block& x, const Block& y) { return x.k < y.k; });
}

// ---------------------------------------------------------------------------
// Step 4: splice-junction correction
// ---------------------------------------------------------------------------

inline void correct_junctions(std::vector<Block>& cons, const CdsSequence& cs, const Gene& h,
                              const ScoringScheme& scheme, const Params& params)
{
    auto canonical = [&](int donor_b, int acceptor_a) {
        int lo = donor_b + 1, hi = acceptor_a - 1;
        if (hi - lo + 1 < 4) return false;
        return h.seq[static_cast<size_t>(lo - 1)] == 'G' && h.seq[static_cast<size_t>(lo)] == 'T' &&
               h.seq[static_cast<size_t>(hi - 2)] == 'A' && h.seq[static_cast<size_t>(hi - 1)] == 'G';
    };

    const int shift_max = params.junction_shift_max;
    const int gap_max = params.junction_gap_max * 3;

    for (size_t i = 0; i + 1 < cons.size(); ++i) {
        Block& L = cons[i];
        Block& R = cons[i + 1];
        if (R.k != L.l + 1) continue; // no induced intron: a deleted block intervenes
        if (canonical(L.b, R.a)) continue;

        long sim_old = global_align(segment(cs.seq, L.k, L.l), segment(h.seq, L.a, L.b), scheme).score +
                       global_align(segment(cs.seq, R.k, R.l), segment(h.seq, R.a, R.b), scheme).score;
        int intr_old = intron_score(h, {L.b, R.a}, scheme);

        struct Cand {
            int dd, da;
            double id_sum;
            AlignmentResult left, right;
        };
        std::optional<Cand> best;
        for (int dd = -shift_max; dd <= shift_max; ++dd) {
            if (L.l + dd < L.k || L.l + dd >= R.l) continue;
            if (L.b + dd < L.a) continue;
            for (int da = std::max(dd - gap_max, -shift_max);
                 da <= std::min(dd + gap_max, shift_max); ++da) {
                if (dd == 0 && da == 0) continue;
                int nb = L.b + dd, na = R.a + da;
                if (na > R.b || na - nb - 1 < 4) continue;
                if (!canonical(nb, na)) continue;
                AlignmentResult left =
                    global_align(segment(cs.seq, L.k, L.l + dd), segment(h.seq, L.a, nb), scheme);
                AlignmentResult right =
                    global_align(segment(cs.seq, L.l + dd + 1, R.l), segment(h.seq, na, R.b), scheme);
                double idl = block_identity(left.detail);
                double idr = block_identity(right.detail);
                if (idl < L.identity || idr < R.identity) continue;
                if (left.score + right.score + scheme.intr_both < sim_old + intr_old) continue;
                Cand c{dd, da, idl + idr, std::move(left), std::move(right)};
                if (!best || c.id_sum > best->id_sum ||
                    (c.id_sum == best->id_sum &&
                     (std::abs(c.dd) + std::abs(c.da) < std::abs(best->dd) + std::abs(best->da) ||
                      (std::abs(c.dd) + std::abs(c.da) == std::abs(best->dd) + std::abs(best->da) &&
                       (c.dd < best->dd || (c.dd == best->dd && c.da < best->da)))))) {
                    best = std::move(c);
                }
            }
        }
        if (best) {
            L.l += best->dd;
            L.b += best->dd;
            L.detail = best->left.detail;
            L.identity = block_identity(L.detail);
            R.k = L.l + 1;
            R.a += best->da;
            R.detail = best->right.detail;
            R.identity = block_identity(R.detail);
        }
    }
}

// ---------------------------------------------------------------------------
// Step 5: block-end correction against gene exons
// ---------------------------------------------------------------------------

// Returns the number of phase-1 trims applied.
inline int correct_block_ends_gene(std::vector<Block>& cons, const std::vector<Exon>& cds_exons,
                                   const GeneExonSet& gene_exons, const CdsSequence& cs,
                                   const Gene& h, const ScoringScheme&)
{
    int trims = 0;
    auto cds_start = [&](int k) {
        for (const Exon& e : cds_exons)
            if (e.start == k) return true;
        return false;
    };
    auto cds_end = [&](int l) {
        for (const Exon& e : cds_exons)
            if (e.end == l) return true;
        return false;
    };

    // phase 1: trim ends matching no exon extremity back to the closest gene
    // exon extremity inside the block
    for (Block& bl : cons) {
        if (!gene_exons.has_start(bl.a) && !cds_start(bl.k)) {
            int target = 0;
            for (const Exon& e : gene_exons.exons)
                if (e.start > bl.a && e.start <= bl.b && (target == 0 || e.start < target))
                    target = e.start;
            if (target != 0 && pw::trim_left_gene(bl, target - bl.a)) ++trims;
        }
        if (!gene_exons.has_end(bl.b) && !cds_end(bl.l)) {
            int target = 0;
            for (const Exon& e : gene_exons.exons)
                if (e.end >= bl.a && e.end < bl.b && e.end > target) target = e.end;
            if (target != 0 && pw::trim_right_gene(bl, bl.b - target)) ++trims;
        }
    }

    // phase 2: extend remaining ends to the closest available gene exon
    // extremity when the block identity does not decrease
    for (size_t i = 0; i < cons.size(); ++i) {
        Block& bl = cons[i];
        if (!gene_exons.has_start(bl.a) && !cds_start(bl.k)) {
            const Block* prev = i > 0 ? &cons[i - 1] : nullptr;
            int gene_floor = prev ? prev->b + 1 : 1;
            int cds_floor = prev ? prev->l + 1 : 1;
            int target = 0;
            for (const Exon& e : gene_exons.exons) {
                if (e.start >= bl.a || e.start < gene_floor) continue;
                int len = bl.a - e.start;
                if (bl.k - len < cds_floor) continue;
                if (target == 0 || e.start > target) target = e.start;
            }
            if (target != 0) {
                int len = bl.a - target;
                int addm = pw::count_matches(cs, h, bl.k - len, target, len);
                int cols = bl.detail.columns();
                int m0 = bl.detail.matches();
                if (static_cast<double>(m0 + addm) * cols >= static_cast<double>(m0) * (cols + len)) {
                    bl.detail.row1 = segment(cs.seq, bl.k - len, bl.k - 1) + bl.detail.row1;
                    bl.detail.row2 = segment(h.seq, target, bl.a - 1) + bl.detail.row2;
                    bl.k -= len;
                    bl.a = target;
                    bl.identity = block_identity(bl.detail);
                }
            }
        }
        if (!gene_exons.has_end(bl.b) && !cds_end(bl.l)) {
            const Block* next = i + 1 < cons.size() ? &cons[i + 1] : nullptr;
            int gene_ceil = next ? next->a - 1 : h.length();
            int cds_ceil = next ? next->k - 1 : cs.length();
            int target = 0;
            for (const Exon& e : gene_exons.exons) {
                if (e.end <= bl.b || e.end > gene_ceil) continue;
                int len = e.end - bl.b;
                if (bl.l + len > cds_ceil) continue;
                if (target == 0 || e.end < target) target = e.end;
            }
            if (target != 0) {
                int len = target - bl.b;
                int addm = pw::count_matches(cs, h, bl.l + 1, bl.b + 1, len);
                int cols = bl.detail.columns();
                int m0 = bl.detail.matches();
                if (static_cast<double>(m0 + addm) * cols >= static_cast<double>(m0) * (cols + len)) {
                    bl.detail.row1 += segment(cs.seq, bl.l + 1, bl.l + len);
                    bl.detail.row2 += segment(h.seq, bl.b + 1, target);
                    bl.l += len;
                    bl.b = target;
                    bl.identity = block_identity(bl.detail);
                }
            }
        }
    }
    return trims;
}

// ---------------------------------------------------------------------------
// Final filter and driver
// ---------------------------------------------------------------------------

// Conserved blocks with identity strictly below min_idty become deleted;
// adjacent deleted blocks are merged.
inline SplicedAlignment filter_min_identity(const SplicedAlignment& a, double min_idty)
{
    SplicedAlignment out;
    out.cds_id = a.cds_id;
    out.gene_id = a.gene_id;
    for (const Block& bl : a.blocks) {
        bool keep = bl.conserved() && bl.identity >= min_idty;
        if (keep) {
            out.blocks.push_back(bl);
        } else if (!out.blocks.empty() && !out.blocks.back().conserved()) {
            out.blocks.back().l = bl.l;
        } else {
            out.blocks.push_back(Block::make_deleted(bl.k, bl.l));
        }
    }
    return out;
}

// Per-step snapshots of the conserved-block chain, for diagnostics and the
// step-monotonicity properties.
struct SpliceTrace {
    std::vector<Block> after_step2;
    std::vector<Block> after_step3;
    std::vector<Block> after_step4;
    std::vector<Block> after_step5;
    int trims = 0; // neighbour trims in step 2 plus phase-1 trims in step 5
};

// Runs the full five-step heuristic followed by the identity filter.
inline SplicedAlignment splice_align(const CdsSequence& cs, const Gene& h,
                                     const GeneExonSet& gene_exons, const ScoringScheme& scheme,
                                     const Params& params, SpliceTrace* trace = nullptr)
{
    std::vector<Anchor> anchors =
        clip_anchors_at_cds_junctions(local_anchors(cs, h, scheme, params), cs, h, scheme, params);

    // Steps 1+2: chain anchors tier by tier, extending after each round
    std::vector<Block> cons;
    int trims = 0;
    for (int tier = 1; tier <= 4; ++tier) {
        std::vector<Anchor> group;
        for (const Anchor& an : anchors)
            if (an.tier == tier) group.push_back(an);
        if (group.empty()) continue;
        std::vector<Block> picked = select_compatible_anchors(group, cons, cs, h);
        for (Block& bl : picked) cons.push_back(std::move(bl));
        std::sort(cons.begin(), cons.end(),
                  [](const Block& x, const Block& y) { return x.k < y.k; });
        trims += extend_blocks_cds(cons, cs, h, scheme);
        pw::merge_adjacent(cons);
        pw::fuse_near_blocks(cons, cs, h, cs.cds_exons, gene_exons, scheme);
    }
    if (trace) trace->after_step2 = cons;

    // Step 3
    fill_gaps_global(cons, cs, h, scheme, params.tau);
    pw::merge_adjacent(cons);
    pw::fuse_near_blocks(cons, cs, h, cs.cds_exons, gene_exons, scheme);
    if (trace) trace->after_step3 = cons;

    // Step 4
    correct_junctions(cons, cs, h, scheme, params);
    pw::merge_adjacent(cons);
    if (trace) trace->after_step4 = cons;

    // Step 5
    trims += correct_block_ends_gene(cons, cs.cds_exons, gene_exons, cs, h, scheme);
    pw::merge_adjacent(cons);
    pw::fuse_near_blocks(cons, cs, h, cs.cds_exons, gene_exons, scheme);
    if (trace) {
        trace->after_step5 = cons;
        trace->trims = trims;
    }

    SplicedAlignment out;
    out.cds_id = cs.cds_id;
    out.gene_id = h.id;
    out.blocks = pw::full_chain(cons, cs.length());
    out = filter_min_identity(out, params.min_idty);
    out.validate(cs.length(), h.length());
    return out;
}

} // namespace exonalign
