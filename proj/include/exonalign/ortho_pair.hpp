#pragma once

// CDS orthology from reciprocal pairwise spliced alignments: two CDS are
// orthologs when they have the same exon count, one alignment recovers the
// other CDS's introns exactly (both, in reciprocal mode), and corresponding
// exon lengths are congruent modulo 3. The relation is closed transitively
// into ortholog groups.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "exonalign/common.hpp"
#include "exonalign/seqmodel.hpp"
#include "exonalign/spliced.hpp"

namespace exonalign {

enum class OrthologyMode { Permissive, Reciprocal };

inline OrthologyMode parse_mode(const std::string& s)
{
    if (s == "permissive") return OrthologyMode::Permissive;
    if (s == "reciprocal") return OrthologyMode::Reciprocal;
    throw InputError("unknown orthology mode '" + s + "' (use permissive or reciprocal)");
}

// A partition of CDS identifiers; clusters and members kept sorted.
struct ClusterSet {
    std::vector<std::vector<std::string>> clusters;

    void normalize()
    {
        for (auto& c : clusters) std::sort(c.begin(), c.end());
        std::sort(clusters.begin(), clusters.end());
    }

    bool operator==(const ClusterSet& other) const = default;

    // True when every cluster here is contained in some cluster of `coarser`.
    bool refines(const ClusterSet& coarser) const
    {
        std::map<std::string, size_t> where;
        for (size_t i = 0; i < coarser.clusters.size(); ++i)
            for (const std::string& id : coarser.clusters[i]) where[id] = i;
        for (const auto& c : clusters) {
            if (c.empty()) continue;
            auto it = where.find(c.front());
            if (it == where.end()) return false;
            for (const std::string& id : c) {
                auto jt = where.find(id);
                if (jt == where.end() || jt->second != it->second) return false;
            }
        }
        return true;
    }

    std::string to_text() const
    {
        std::string out;
        for (const auto& c : clusters) {
            for (size_t i = 0; i < c.size(); ++i) {
                if (i) out += ",";
                out += c[i];
            }
            out += "\n";
        }
        return out;
    }
};

struct UnionFind {
    std::vector<int> parent;

    explicit UnionFind(size_t n) : parent(n)
    {
        for (size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
    }
    int find(int x)
    {
        while (parent[static_cast<size_t>(x)] != x) {
            parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
            x = parent[static_cast<size_t>(x)];
        }
        return x;
    }
    void unite(int x, int y)
    {
        int rx = find(x), ry = find(y);
        if (rx != ry) parent[static_cast<size_t>(std::max(rx, ry))] = std::min(rx, ry);
    }
};

// Intron set equality as exact coordinate-pair sets.
inline bool same_introns(const std::vector<std::pair<int, int>>& x,
                         const std::vector<std::pair<int, int>>& y)
{
    std::set<std::pair<int, int>> sx(x.begin(), x.end());
    std::set<std::pair<int, int>> sy(y.begin(), y.end());
    return sx == sy;
}

// a1 aligns c1's sequence on c2's gene; a2 aligns c2's sequence on c1's gene.
inline bool are_orthologs(const Cds& c1, const SplicedAlignment& a1, const Cds& c2,
                          const SplicedAlignment& a2, OrthologyMode mode)
{
    if (c1.gene_id == c2.gene_id)
        throw InternalError("are_orthologs requires CDS from two different genes");
    if (a1.cds_id != c1.id || a1.gene_id != c2.gene_id || a2.cds_id != c2.id ||
        a2.gene_id != c1.gene_id)
        throw InternalError("are_orthologs: alignments do not match the claimed CDS/gene pair");

    // (1) same number of exons
    if (c1.exons.size() != c2.exons.size()) return false;

    // (2) one (or both) spliced alignments recover the other CDS's introns
    auto introns_of = [](const Cds& c) {
        std::vector<std::pair<int, int>> out;
        for (size_t i = 0; i + 1 < c.exons.size(); ++i)
            out.emplace_back(c.exons[i].end, c.exons[i + 1].start);
        return out;
    };
    bool fwd = same_introns(a1.introns(), introns_of(c2));
    bool rev = same_introns(a2.introns(), introns_of(c1));
    bool cond2 = mode == OrthologyMode::Permissive ? (fwd || rev) : (fwd && rev);
    if (!cond2) return false;

    // (3) corresponding exon lengths congruent modulo 3
    for (size_t i = 0; i < c1.exons.size(); ++i) {
        int d = c1.exons[i].length() - c2.exons[i].length();
        if (((d % 3) + 3) % 3 != 0) return false;
    }
    return true;
}

// Key for the alignment lookup: (cds_id, gene_id).
using AlignmentKey = std::pair<std::string, std::string>;

inline std::map<AlignmentKey, const SplicedAlignment*>
index_alignments(const std::vector<SplicedAlignment>& alignments)
{
    std::map<AlignmentKey, const SplicedAlignment*> index;
    for (const SplicedAlignment& a : alignments) index[{a.cds_id, a.gene_id}] = &a;
    return index;
}

// Transitive closure of the orthology relation over all CDS pairs from
// different genes. Requires an alignment for every (CDS, other gene) pair.
inline ClusterSet cluster_orthologs(const std::vector<Cds>& all_cds,
                                    const std::vector<SplicedAlignment>& alignments,
                                    OrthologyMode mode)
{
    auto index = index_alignments(alignments);
    UnionFind uf(all_cds.size());
    for (size_t i = 0; i < all_cds.size(); ++i) {
        for (size_t j = i + 1; j < all_cds.size(); ++j) {
            const Cds& c1 = all_cds[i];
            const Cds& c2 = all_cds[j];
            if (c1.gene_id == c2.gene_id) continue;
            auto f = index.find({c1.id, c2.gene_id});
            auto r = index.find({c2.id, c1.gene_id});
            if (f == index.end())
                throw InputError("missing alignment for pair (" + c1.id + ", " + c2.gene_id + ")");
            if (r == index.end())
                throw InputError("missing alignment for pair (" + c2.id + ", " + c1.gene_id + ")");
            if (are_orthologs(c1, *f->second, c2, *r->second, mode))
                uf.unite(static_cast<int>(i), static_cast<int>(j));
        }
    }
    std::map<int, std::vector<std::string>> groups;
    for (size_t i = 0; i < all_cds.size(); ++i)
        groups[uf.find(static_cast<int>(i))].push_back(all_cds[i].id);
    ClusterSet out;
    for (auto& [root, members] : groups) out.clusters.push_back(std::move(members));
    out.normalize();
    return out;
}

} // namespace exonalign
