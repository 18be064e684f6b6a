#pragma once

// Deterministic synthetic gene-family generator. A root gene with a random
// exon-intron structure evolves along a random binary tree with per-branch
// substitutions and optional exon loss / tandem exon duplication; each leaf
// gene carries CDS variants produced by exon skipping. The generator tracks
// exon ancestry, so ground truth (ortholog groups, intron canonicity, true
// segment homologies) is exact and ships with the emitted dataset.
//
// Substitutions never land on splice-site dinucleotides or within three
// nucleotides of an exon boundary; this keeps the structural ground truth
// well defined at any divergence.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "exonalign/common.hpp"
#include "exonalign/ortho_pair.hpp"
#include "exonalign/seqmodel.hpp"

namespace exonalign {

struct SimParams {
    std::uint64_t seed = 1;
    int n_species = 4;             // number of leaf genes
    double duplication_prob = 0.2; // probability that a tree split is a duplication
    double substitution_rate = 0.03; // per mutable site, per branch
    int exon_count_min = 2, exon_count_max = 5;
    int exon_len_min = 30, exon_len_max = 90;
    bool exon_len_multiple_of3 = false;
    int intron_len_min = 25, intron_len_max = 80;
    double exon_loss_prob = 0.0;        // per branch
    double exon_duplication_prob = 0.0; // per branch
    double canonical_intron_prob = 1.0;
    int max_cds_per_gene = 3;  // CDS variants per gene (exon-skipping)
    double exon_skip_prob = 0.3;

    void validate() const
    {
        auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
        if (n_species < 1) throw InputError("sim: n_species must be >= 1");
        if (!prob(duplication_prob) || !prob(substitution_rate) || !prob(exon_loss_prob) ||
            !prob(exon_duplication_prob) || !prob(canonical_intron_prob) || !prob(exon_skip_prob))
            throw InputError("sim: probabilities must be in [0,1]");
        if (exon_count_min < 1 || exon_count_max < exon_count_min)
            throw InputError("sim: bad exon count range");
        if (exon_len_min < 7 || exon_len_max < exon_len_min)
            throw InputError("sim: exon length range must start at >= 7");
        if (intron_len_min < 4 || intron_len_max < intron_len_min)
            throw InputError("sim: intron length range must start at >= 4");
        if (max_cds_per_gene < 1) throw InputError("sim: max_cds_per_gene must be >= 1");
        if (exon_len_multiple_of3 && exon_len_max / 3 * 3 < exon_len_min)
            throw InputError("sim: no multiple of 3 in the exon length range");
    }
};

struct SimExon {
    std::string seq;
    int root_id = 0; // ancestry marker, shared through speciation/duplication
};

struct SimIntron {
    std::string seq;
    bool canonical = false;
};

struct SimGene {
    std::string id;
    std::vector<SimExon> exons;
    std::vector<SimIntron> introns; // size = exons.size() - 1

    std::string sequence() const
    {
        std::string s;
        for (size_t i = 0; i < exons.size(); ++i) {
            s += exons[i].seq;
            if (i < introns.size()) s += introns[i].seq;
        }
        return s;
    }

    // 1-based coordinates of each exon in the materialized sequence.
    std::vector<Exon> exon_coords() const
    {
        std::vector<Exon> out;
        int pos = 1;
        for (size_t i = 0; i < exons.size(); ++i) {
            int len = static_cast<int>(exons[i].seq.size());
            out.push_back(Exon{pos, pos + len - 1});
            pos += len;
            if (i < introns.size()) pos += static_cast<int>(introns[i].seq.size());
        }
        return out;
    }
};

struct SimCds {
    std::string id;
    std::string gene_id;
    std::vector<int> exon_indices; // into the gene's exon list, increasing
};

struct Family {
    std::vector<SimGene> genes;
    std::vector<SimCds> cds;
    std::vector<std::string> events;
    ClusterSet truth_clusters;

    std::string fasta() const
    {
        std::string out;
        for (const SimGene& g : genes) {
            out += ">" + g.id + "\n";
            std::string s = g.sequence();
            for (size_t i = 0; i < s.size(); i += 60) out += s.substr(i, 60) + "\n";
        }
        return out;
    }

    std::string annotation() const
    {
        std::string out;
        std::map<std::string, std::vector<Exon>> coords;
        for (const SimGene& g : genes) coords[g.id] = g.exon_coords();
        for (const SimCds& c : cds)
            for (int e : c.exon_indices) {
                const Exon& ex = coords.at(c.gene_id)[static_cast<size_t>(e)];
                out += c.gene_id + "\t" + c.id + "\t" + std::to_string(ex.start) + "\t" +
                       std::to_string(ex.end) + "\n";
            }
        return out;
    }

    std::string truth_tsv() const
    {
        std::string out;
        for (const auto& cluster : truth_clusters.clusters) {
            out += "cluster\t";
            for (size_t i = 0; i < cluster.size(); ++i) {
                if (i) out += ",";
                out += cluster[i];
            }
            out += "\n";
        }
        for (const std::string& e : events) out += "event\t" + e + "\n";
        return out;
    }
};

namespace sim_detail {

inline char random_base(Rng& rng)
{
    static const char bases[4] = {'A', 'C', 'G', 'T'};
    return bases[rng.next_below(4)];
}

inline std::string random_seq(Rng& rng, int len)
{
    std::string s;
    s.reserve(static_cast<size_t>(len));
    for (int i = 0; i < len; ++i) s.push_back(random_base(rng));
    return s;
}

inline char substitute(Rng& rng, char c)
{
    static const char bases[4] = {'A', 'C', 'G', 'T'};
    char n = c;
    while (n == c) n = bases[rng.next_below(4)];
    return n;
}

// Per-branch mutation: substitutions on exon interiors and intron interiors,
// plus the optional structural events.
inline void mutate_branch(SimGene& g, const SimParams& p, Rng& rng, int& next_root_id,
                          std::vector<std::string>& events)
{
    for (SimExon& e : g.exons) {
        int len = static_cast<int>(e.seq.size());
        for (int i = 3; i < len - 3; ++i)
            if (rng.bernoulli(p.substitution_rate))
                e.seq[static_cast<size_t>(i)] = substitute(rng, e.seq[static_cast<size_t>(i)]);
    }
    for (SimIntron& in : g.introns) {
        int len = static_cast<int>(in.seq.size());
        for (int i = 2; i < len - 2; ++i)
            if (rng.bernoulli(p.substitution_rate))
                in.seq[static_cast<size_t>(i)] = substitute(rng, in.seq[static_cast<size_t>(i)]);
    }
    if (g.exons.size() > 1 && rng.bernoulli(p.exon_loss_prob)) {
        int e = rng.next_int(0, static_cast<int>(g.exons.size()) - 1);
        events.push_back("exon_loss\t" + g.id + "\troot_exon_" +
                         std::to_string(g.exons[static_cast<size_t>(e)].root_id));
        g.exons.erase(g.exons.begin() + e);
        if (e < static_cast<int>(g.introns.size())) g.introns.erase(g.introns.begin() + e);
        else g.introns.erase(g.introns.begin() + (e - 1));
    }
    if (rng.bernoulli(p.exon_duplication_prob)) {
        int e = rng.next_int(0, static_cast<int>(g.exons.size()) - 1);
        SimExon copy = g.exons[static_cast<size_t>(e)];
        SimIntron in;
        in.canonical = rng.bernoulli(p.canonical_intron_prob);
        in.seq = random_seq(rng, rng.next_int(p.intron_len_min, p.intron_len_max));
        if (in.canonical) {
            in.seq[0] = 'G';
            in.seq[1] = 'T';
            in.seq[in.seq.size() - 2] = 'A';
            in.seq[in.seq.size() - 1] = 'G';
        }
        events.push_back("exon_duplication\t" + g.id + "\troot_exon_" + std::to_string(copy.root_id));
        g.exons.insert(g.exons.begin() + e + 1, copy);
        g.introns.insert(g.introns.begin() + e, in);
        (void)next_root_id;
    }
}

// The truth spliced-alignment introns of mapping c's exons onto gene h:
// each exon maps to the first h exon with the same ancestry, kept only when
// increasing; introns are the junctions between adjacent mapped exons.
inline std::vector<std::pair<int, int>> true_induced_introns(const SimGene& g, const SimCds& c,
                                                             const SimGene& h)
{
    std::vector<Exon> hc = h.exon_coords();
    std::vector<std::pair<int, int>> introns;
    int last = -1; // last mapped h exon index
    for (int e : c.exon_indices) {
        int root = g.exons[static_cast<size_t>(e)].root_id;
        int found = -1;
        for (size_t f = 0; f < h.exons.size(); ++f)
            if (h.exons[f].root_id == root) {
                found = static_cast<int>(f);
                break;
            }
        if (found < 0 || found <= last) continue;
        if (last >= 0)
            introns.emplace_back(hc[static_cast<size_t>(last)].end, hc[static_cast<size_t>(found)].start);
        last = found;
    }
    return introns;
}

inline std::vector<std::pair<int, int>> annotated_introns(const SimGene& g, const SimCds& c)
{
    std::vector<Exon> gc = g.exon_coords();
    std::vector<std::pair<int, int>> out;
    for (size_t i = 0; i + 1 < c.exon_indices.size(); ++i)
        out.emplace_back(gc[static_cast<size_t>(c.exon_indices[i])].end,
                         gc[static_cast<size_t>(c.exon_indices[i + 1])].start);
    return out;
}

} // namespace sim_detail

// Deterministic family generation; identical seeds give byte-identical
// output.
inline Family generate_family(const SimParams& p)
{
    p.validate();
    Rng rng(p.seed);
    Family fam;

    // root gene
    SimGene root;
    root.id = "root";
    int ecount = rng.next_int(p.exon_count_min, p.exon_count_max);
    int next_root_id = 0;
    for (int e = 0; e < ecount; ++e) {
        SimExon ex;
        int len = rng.next_int(p.exon_len_min, p.exon_len_max);
        if (p.exon_len_multiple_of3) {
            len -= len % 3;
            if (len < p.exon_len_min) len += 3;
        }
        ex.seq = sim_detail::random_seq(rng, len);
        ex.root_id = next_root_id++;
        root.exons.push_back(std::move(ex));
        if (e + 1 < ecount) {
            SimIntron in;
            in.canonical = rng.bernoulli(p.canonical_intron_prob);
            in.seq = sim_detail::random_seq(rng, rng.next_int(p.intron_len_min, p.intron_len_max));
            if (in.canonical) {
                in.seq[0] = 'G';
                in.seq[1] = 'T';
                in.seq[in.seq.size() - 2] = 'A';
                in.seq[in.seq.size() - 1] = 'G';
            }
            root.introns.push_back(std::move(in));
        }
    }

    // evolve along a random binary tree until n_species leaves
    std::vector<SimGene> leaves{root};
    while (static_cast<int>(leaves.size()) < p.n_species) {
        int pick = rng.next_int(0, static_cast<int>(leaves.size()) - 1);
        SimGene parent = leaves[static_cast<size_t>(pick)];
        bool dup = rng.bernoulli(p.duplication_prob);
        SimGene left = parent, right = parent;
        sim_detail::mutate_branch(left, p, rng, next_root_id, fam.events);
        sim_detail::mutate_branch(right, p, rng, next_root_id, fam.events);
        fam.events.push_back(std::string(dup ? "duplication" : "speciation") + "\t" + parent.id);
        leaves.erase(leaves.begin() + pick);
        leaves.insert(leaves.begin() + pick, right);
        leaves.insert(leaves.begin() + pick, left);
    }
    for (size_t i = 0; i < leaves.size(); ++i) leaves[i].id = "g" + std::to_string(i);
    fam.genes = std::move(leaves);

    // CDS variants by exon skipping; the full chain always exists
    for (const SimGene& g : fam.genes) {
        std::set<std::vector<int>> seen;
        std::vector<int> full(g.exons.size());
        for (size_t e = 0; e < g.exons.size(); ++e) full[e] = static_cast<int>(e);
        seen.insert(full);
        int counter = 0;
        fam.cds.push_back(SimCds{g.id + "c" + std::to_string(counter++), g.id, full});
        for (int v = 1; v < p.max_cds_per_gene; ++v) {
            std::vector<int> pattern;
            for (size_t e = 0; e < g.exons.size(); ++e)
                if (!rng.bernoulli(p.exon_skip_prob)) pattern.push_back(static_cast<int>(e));
            if (pattern.empty() || seen.count(pattern)) continue;
            seen.insert(pattern);
            fam.cds.push_back(SimCds{g.id + "c" + std::to_string(counter++), g.id, pattern});
        }
    }

    // truth ortholog groups via the structural conditions on true alignments
    std::map<std::string, const SimGene*> gene_of;
    for (const SimGene& g : fam.genes) gene_of[g.id] = &g;
    UnionFind uf(fam.cds.size());
    for (size_t i = 0; i < fam.cds.size(); ++i) {
        for (size_t j = i + 1; j < fam.cds.size(); ++j) {
            const SimCds& c1 = fam.cds[i];
            const SimCds& c2 = fam.cds[j];
            if (c1.gene_id == c2.gene_id) continue;
            const SimGene& g1 = *gene_of.at(c1.gene_id);
            const SimGene& g2 = *gene_of.at(c2.gene_id);
            if (c1.exon_indices.size() != c2.exon_indices.size()) continue;
            bool fwd = sim_detail::true_induced_introns(g1, c1, g2) ==
                       sim_detail::annotated_introns(g2, c2);
            bool rev = sim_detail::true_induced_introns(g2, c2, g1) ==
                       sim_detail::annotated_introns(g1, c1);
            if (!fwd && !rev) continue;
            bool mod3 = true;
            for (size_t e = 0; e < c1.exon_indices.size(); ++e) {
                int l1 = static_cast<int>(g1.exons[static_cast<size_t>(c1.exon_indices[e])].seq.size());
                int l2 = static_cast<int>(g2.exons[static_cast<size_t>(c2.exon_indices[e])].seq.size());
                if (((l1 - l2) % 3 + 3) % 3 != 0) {
                    mod3 = false;
                    break;
                }
            }
            if (mod3) uf.unite(static_cast<int>(i), static_cast<int>(j));
        }
    }
    std::map<int, std::vector<std::string>> groups;
    for (size_t i = 0; i < fam.cds.size(); ++i)
        groups[uf.find(static_cast<int>(i))].push_back(fam.cds[i].id);
    for (auto& [root_idx, members] : groups) fam.truth_clusters.clusters.push_back(std::move(members));
    fam.truth_clusters.normalize();

    return fam;
}

// Mean per-site divergence between the homologous exons of two genes,
// measured directly on the generator's ancestry mapping.
inline double true_exon_divergence(const SimGene& g1, const SimGene& g2)
{
    long diff = 0, total = 0;
    for (const SimExon& e1 : g1.exons) {
        for (const SimExon& e2 : g2.exons) {
            if (e1.root_id != e2.root_id || e1.seq.size() != e2.seq.size()) continue;
            for (size_t i = 0; i < e1.seq.size(); ++i) {
                ++total;
                if (e1.seq[i] != e2.seq[i]) ++diff;
            }
            break;
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(diff) / static_cast<double>(total);
}

} // namespace exonalign
