#pragma once

// Downstream products of the multiple spliced alignment: CDS ortholog /
// close-paralog groups and the column-level multiple CDS alignment obtained
// by aligning each multi-block and concatenating the results.

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "exonalign/align.hpp"
#include "exonalign/common.hpp"
#include "exonalign/msa_spliced.hpp"
#include "exonalign/ortho_pair.hpp"
#include "exonalign/scoring.hpp"

namespace exonalign {

// ---------------------------------------------------------------------------
// Clustering from the multiple spliced alignment
// ---------------------------------------------------------------------------

struct MsaClusters {
    ClusterSet clusters;
    // in-group pairs labeled 'P' (close paralogs, same gene) or 'O'
    std::vector<std::tuple<std::string, std::string, char>> pairs;
};

// Two CDS belong to the same group when they are present in exactly the same
// multi-blocks and all present-length differences are congruent 0 modulo 3.
// Pairs within a group from the same gene are close paralogs.
inline MsaClusters cluster_from_msa(const MultipleSplicedAlignment& msa,
                                    const std::map<std::string, std::string>& cds_gene)
{
    std::vector<std::string> ids;
    for (const auto& [id, info] : msa.registry)
        if (info.is_cds) ids.push_back(id);
    std::sort(ids.begin(), ids.end());

    auto same_group = [&](const std::string& x, const std::string& y) {
        for (const MultiBlock& mb : msa.blocks) {
            bool px = mb.has(x), py = mb.has(y);
            if (px != py) return false;
            if (!px) continue;
            Segment sx = mb.get(x), sy = mb.get(y);
            int d = (sx.second - sx.first) - (sy.second - sy.first);
            if (((d % 3) + 3) % 3 != 0) return false;
        }
        return true;
    };

    UnionFind uf(ids.size());
    for (size_t i = 0; i < ids.size(); ++i)
        for (size_t j = i + 1; j < ids.size(); ++j)
            if (same_group(ids[i], ids[j])) uf.unite(static_cast<int>(i), static_cast<int>(j));

    std::map<int, std::vector<std::string>> groups;
    for (size_t i = 0; i < ids.size(); ++i)
        groups[uf.find(static_cast<int>(i))].push_back(ids[i]);

    MsaClusters out;
    for (auto& [root, members] : groups) out.clusters.clusters.push_back(std::move(members));
    out.clusters.normalize();
    for (const auto& cluster : out.clusters.clusters)
        for (size_t i = 0; i < cluster.size(); ++i)
            for (size_t j = i + 1; j < cluster.size(); ++j) {
                bool same_gene = cds_gene.at(cluster[i]) == cds_gene.at(cluster[j]);
                out.pairs.emplace_back(cluster[i], cluster[j], same_gene ? 'P' : 'O');
            }
    return out;
}

// Cluster lines as in the pairwise format plus a flag column: 'P' when the
// cluster contains at least one close-paralog pair, 'O' otherwise.
inline std::string msa_clusters_to_text(const MsaClusters& mc,
                                        const std::map<std::string, std::string>& cds_gene)
{
    std::string out;
    for (const auto& c : mc.clusters.clusters) {
        bool has_paralogs = false;
        for (size_t i = 0; i < c.size() && !has_paralogs; ++i)
            for (size_t j = i + 1; j < c.size(); ++j)
                if (cds_gene.at(c[i]) == cds_gene.at(c[j])) {
                    has_paralogs = true;
                    break;
                }
        for (size_t i = 0; i < c.size(); ++i) {
            if (i) out += ",";
            out += c[i];
        }
        out += "\t";
        out += has_paralogs ? 'P' : 'O';
        out += "\n";
    }
    return out;
}

inline std::string pair_labels_to_text(const MsaClusters& mc)
{
    std::string out;
    for (const auto& [a, b, flag] : mc.pairs) out += a + "\t" + b + "\t" + flag + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Progressive alignment of one multi-block's segments
// ---------------------------------------------------------------------------

namespace msa_align {

struct Profile {
    std::vector<std::string> ids;
    std::vector<std::string> rows; // equal length

    int width() const { return rows.empty() ? 0 : static_cast<int>(rows.front().size()); }
};

// Integer sum-of-pairs score of two profile columns (gap pairs contribute 0).
inline int column_pair_score(const Profile& A, int ca, const Profile& B, int cb,
                             const ScoringScheme& sc)
{
    int s = 0;
    for (const std::string& ra : A.rows) {
        char x = ra[static_cast<size_t>(ca)];
        if (x == '-') continue;
        for (const std::string& rb : B.rows) {
            char y = rb[static_cast<size_t>(cb)];
            if (y == '-') continue;
            s += bases_match(x, y) ? sc.match : sc.mismatch;
        }
    }
    return s;
}

// Aligns two profiles with an affine sum-of-pairs gap model (costs scaled by
// the row-pair count, so contiguous gap runs are strictly preferred);
// deterministic tie-break (diagonal, then A-column, then B-column).
inline Profile align_profiles(const Profile& A, const Profile& B, const ScoringScheme& sc)
{
    const int m = A.width(), n = B.width();
    const long pairs = static_cast<long>(A.rows.size()) * static_cast<long>(B.rows.size());
    const long open_ext = pairs * (sc.gap_open + sc.gap_extend);
    const long ext = pairs * sc.gap_extend;
    const long ninf = std::numeric_limits<long>::min() / 4;

    // states: 0 diagonal, 1 consuming A (gap in B), 2 consuming B
    std::vector<long> dp[3];
    std::vector<unsigned char> tb[3];
    for (int s = 0; s < 3; ++s) {
        dp[s].assign(static_cast<size_t>(m + 1) * (n + 1), ninf);
        tb[s].assign(static_cast<size_t>(m + 1) * (n + 1), 0);
    }
    auto at = [&](int s, int i, int j) -> long& {
        return dp[s][static_cast<size_t>(i) * (n + 1) + j];
    };
    auto tbat = [&](int s, int i, int j) -> unsigned char& {
        return tb[s][static_cast<size_t>(i) * (n + 1) + j];
    };
    auto pick = [&](long v0, long v1, long v2, long& out) -> unsigned char {
        if (v0 >= v1 && v0 >= v2) {
            out = v0;
            return 0;
        }
        if (v1 >= v2) {
            out = v1;
            return 1;
        }
        out = v2;
        return 2;
    };

    at(0, 0, 0) = 0;
    for (int i = 1; i <= m; ++i) {
        at(1, i, 0) = open_ext + (i - 1) * ext;
        tbat(1, i, 0) = 1;
    }
    for (int j = 1; j <= n; ++j) {
        at(2, 0, j) = open_ext + (j - 1) * ext;
        tbat(2, 0, j) = 2;
    }
    for (int i = 1; i <= m; ++i) {
        for (int j = 1; j <= n; ++j) {
            long sub = column_pair_score(A, i - 1, B, j - 1, sc);
            long v;
            unsigned char o;
            o = pick(at(0, i - 1, j - 1), at(1, i - 1, j - 1), at(2, i - 1, j - 1), v);
            if (v > ninf) {
                at(0, i, j) = v + sub;
                tbat(0, i, j) = o;
            }
            o = pick(at(0, i - 1, j) + open_ext, at(1, i - 1, j) + ext, at(2, i - 1, j) + open_ext,
                     v);
            if (v > ninf / 2) {
                at(1, i, j) = v;
                tbat(1, i, j) = o;
            }
            o = pick(at(0, i, j - 1) + open_ext, at(1, i, j - 1) + open_ext, at(2, i, j - 1) + ext,
                     v);
            if (v > ninf / 2) {
                at(2, i, j) = v;
                tbat(2, i, j) = o;
            }
        }
    }

    long best;
    unsigned char state = pick(at(0, m, n), at(1, m, n), at(2, m, n), best);

    // traceback into merged rows
    std::vector<std::string> ra(A.rows.size()), rb(B.rows.size());
    int i = m, j = n;
    while (i > 0 || j > 0) {
        unsigned char prev = tbat(state, i, j);
        if (state == 0) {
            for (size_t r = 0; r < A.rows.size(); ++r)
                ra[r].push_back(A.rows[r][static_cast<size_t>(i - 1)]);
            for (size_t r = 0; r < B.rows.size(); ++r)
                rb[r].push_back(B.rows[r][static_cast<size_t>(j - 1)]);
            --i;
            --j;
        } else if (state == 1) {
            for (size_t r = 0; r < A.rows.size(); ++r)
                ra[r].push_back(A.rows[r][static_cast<size_t>(i - 1)]);
            for (size_t r = 0; r < B.rows.size(); ++r) rb[r].push_back('-');
            --i;
        } else {
            for (size_t r = 0; r < A.rows.size(); ++r) ra[r].push_back('-');
            for (size_t r = 0; r < B.rows.size(); ++r)
                rb[r].push_back(B.rows[r][static_cast<size_t>(j - 1)]);
            --j;
        }
        state = prev;
    }
    Profile out;
    out.ids = A.ids;
    out.ids.insert(out.ids.end(), B.ids.begin(), B.ids.end());
    for (std::string& r : ra) {
        std::reverse(r.begin(), r.end());
        out.rows.push_back(std::move(r));
    }
    for (std::string& r : rb) {
        std::reverse(r.begin(), r.end());
        out.rows.push_back(std::move(r));
    }
    return out;
}

} // namespace msa_align

// Progressive multiple alignment of the segments of one multi-block:
// pairwise semi-global similarities, greedy guide joining by maximum
// similarity, profile-to-profile merging. Ties resolve by sequence id.
inline std::map<std::string, std::string>
align_multiblock(const std::vector<std::pair<std::string, std::string>>& segments,
                 const ScoringScheme& scheme)
{
    if (segments.empty()) throw InternalError("align_multiblock: no segments");
    std::vector<msa_align::Profile> profiles;
    for (const auto& [id, seq] : segments) {
        msa_align::Profile p;
        p.ids.push_back(id);
        p.rows.push_back(seq);
        profiles.push_back(std::move(p));
    }
    std::sort(profiles.begin(), profiles.end(),
              [](const msa_align::Profile& a, const msa_align::Profile& b) {
                  return a.ids.front() < b.ids.front();
              });

    // pairwise similarity of the original segments
    std::map<std::pair<std::string, std::string>, long> sim;
    for (size_t i = 0; i < segments.size(); ++i)
        for (size_t j = 0; j < segments.size(); ++j) {
            if (i == j) continue;
            long s = semiglobal_align(segments[i].second, segments[j].second, scheme).score;
            sim[{segments[i].first, segments[j].first}] = s;
        }
    auto profile_sim = [&](const msa_align::Profile& a, const msa_align::Profile& b) {
        long best = std::numeric_limits<long>::min();
        for (const std::string& x : a.ids)
            for (const std::string& y : b.ids) best = std::max(best, sim.at({x, y}));
        return best;
    };

    while (profiles.size() > 1) {
        size_t bi = 0, bj = 1;
        long best = std::numeric_limits<long>::min();
        for (size_t i = 0; i < profiles.size(); ++i)
            for (size_t j = i + 1; j < profiles.size(); ++j) {
                long s = profile_sim(profiles[i], profiles[j]);
                if (s > best) {
                    best = s;
                    bi = i;
                    bj = j;
                }
            }
        msa_align::Profile merged = msa_align::align_profiles(profiles[bi], profiles[bj], scheme);
        profiles.erase(profiles.begin() + static_cast<long>(bj));
        profiles[bi] = std::move(merged);
    }

    std::map<std::string, std::string> out;
    for (size_t r = 0; r < profiles.front().ids.size(); ++r)
        out[profiles.front().ids[r]] = profiles.front().rows[r];
    return out;
}

// ---------------------------------------------------------------------------
// The global multiple CDS alignment
// ---------------------------------------------------------------------------

struct MultiColumnAlignment {
    std::map<std::string, std::string> rows; // all registry sequences, equal length
    std::vector<int> provenance;             // per column: multi-block index (1-based), 0 = filler
    int columns = 0;
};

// Hook for substituting an external segment aligner; takes (id, segment)
// pairs, returns equal-length gapped rows covering each segment exactly.
using SegmentAligner = std::function<std::map<std::string, std::string>(
    const std::vector<std::pair<std::string, std::string>>&)>;

// Aligns each multi-block's present segments, pads absent rows with gaps and
// concatenates in chain order. CDS stretches not covered by any multi-block
// are inserted as unaligned filler so every CDS row strips back to its exact
// sequence. Gene rows contain only the exon segments present in multi-blocks.
inline MultiColumnAlignment
multiple_cds_alignment(const MultipleSplicedAlignment& msa,
                       const std::map<std::string, std::string>& sequences,
                       const ScoringScheme& scheme, const SegmentAligner& custom_aligner = {})
{
    MultiColumnAlignment out;
    std::vector<std::string> ids;
    for (const auto& [id, info] : msa.registry) {
        ids.push_back(id);
        if (!sequences.count(id)) throw InputError("missing sequence for '" + id + "'");
    }
    for (const std::string& id : ids) out.rows[id] = "";

    std::map<std::string, int> cursor; // next uncovered CDS position
    for (const auto& [id, info] : msa.registry)
        if (info.is_cds) cursor[id] = 1;

    auto emit_filler = [&](const std::string& id, int from, int to) {
        if (from > to) return;
        int w = to - from + 1;
        for (const std::string& other : ids)
            out.rows[other] += other == id ? segment(sequences.at(id), from, to)
                                           : std::string(static_cast<size_t>(w), '-');
        for (int c = 0; c < w; ++c) out.provenance.push_back(0);
    };

    int mb_idx = 0;
    for (const MultiBlock& mb : msa.blocks) {
        ++mb_idx;
        // unaligned CDS pieces that must precede this multi-block
        for (const std::string& id : ids) {
            if (!msa.registry.at(id).is_cds || !mb.has(id)) continue;
            emit_filler(id, cursor[id], mb.get(id).first - 1);
        }
        std::vector<std::pair<std::string, std::string>> segs;
        for (const auto& [id, seg] : mb.segments)
            segs.emplace_back(id, segment(sequences.at(id), seg.first, seg.second));
        std::map<std::string, std::string> aligned =
            custom_aligner ? custom_aligner(segs) : align_multiblock(segs, scheme);
        int w = static_cast<int>(aligned.begin()->second.size());
        for (const std::string& id : ids) {
            auto it = aligned.find(id);
            out.rows[id] += it != aligned.end() ? it->second : std::string(static_cast<size_t>(w), '-');
        }
        for (int c = 0; c < w; ++c) out.provenance.push_back(mb_idx);
        for (const auto& [id, seg] : mb.segments)
            if (msa.registry.at(id).is_cds) cursor[id] = seg.second + 1;
    }
    // trailing uncovered CDS pieces
    for (const std::string& id : ids) {
        if (!msa.registry.at(id).is_cds) continue;
        emit_filler(id, cursor[id], static_cast<int>(sequences.at(id).size()));
    }

    out.columns = static_cast<int>(out.provenance.size());
    for (const auto& [id, row] : out.rows)
        if (static_cast<int>(row.size()) != out.columns)
            throw InternalError("multiple alignment rows have unequal lengths");
    // CDS row round-trip must hold by construction
    for (const auto& [id, info] : msa.registry) {
        if (!info.is_cds) continue;
        std::string stripped;
        for (char c : out.rows.at(id))
            if (c != '-') stripped.push_back(c);
        if (stripped != sequences.at(id))
            throw InternalError("CDS row of " + id + " does not strip back to its sequence");
    }
    return out;
}

// Aligned FASTA, gap character '-', rows ordered genes first then CDS, each
// lexicographically.
inline std::string aligned_fasta(const MultiColumnAlignment& m, const Registry& registry)
{
    std::vector<std::string> genes, cds;
    for (const auto& [id, info] : registry) (info.is_cds ? cds : genes).push_back(id);
    std::sort(genes.begin(), genes.end());
    std::sort(cds.begin(), cds.end());
    std::string out;
    auto emit = [&](const std::string& id) {
        out += ">" + id + "\n";
        const std::string& row = m.rows.at(id);
        for (size_t i = 0; i < row.size(); i += 60) out += row.substr(i, 60) + "\n";
    };
    for (const std::string& id : genes) emit(id);
    for (const std::string& id : cds) emit(id);
    return out;
}

} // namespace exonalign
