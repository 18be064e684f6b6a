#pragma once

// Evaluation measures over pairwise spliced alignments (coverage and the
// exon-extremity / canonical-site ratios of internal block extremities) and
// over multiple CDS alignments (column identity, long-gap realness).

#include <map>
#include <string>
#include <vector>

#include "exonalign/common.hpp"
#include "exonalign/downstream.hpp"
#include "exonalign/scoring.hpp"
#include "exonalign/seqmodel.hpp"
#include "exonalign/spliced.hpp"

namespace exonalign {

struct PairwiseMetrics {
    double coverage = 0.0;                 // (A) CDS positions inside conserved blocks
    double cds_exon_extremity_ratio = 0.0; // (B) internal extremities on a CDS exon extremity
    double gene_exon_extremity_ratio = 0.0; // (C) same for the gene exon set
    double canonical_intron_ratio = 0.0;   // (D) induced introns with GT..AG interiors
    bool insufficient = false;             // fewer than 2 internal extremities / no introns
    int intron_count = 0;
    int canonical_donors = 0;   // per-site counts, reported alongside (D)
    int canonical_acceptors = 0;
};

inline PairwiseMetrics pairwise_metrics(const SplicedAlignment& a, const CdsSequence& cs,
                                        const GeneExonSet& gene_exons, const Gene& h)
{
    PairwiseMetrics pm;
    pm.coverage = a.coverage(cs.length());

    std::vector<const Block*> cons = a.cons();
    if (cons.empty()) {
        pm.insufficient = true;
        return pm;
    }

    // internal extremities: all conserved-block extremities except the first
    // block's start and the last block's end
    struct Extremity {
        int cds, gene;
        bool is_start;
    };
    std::vector<Extremity> internal;
    for (size_t i = 0; i < cons.size(); ++i) {
        if (i != 0) internal.push_back({cons[i]->k, cons[i]->a, true});
        if (i + 1 != cons.size()) internal.push_back({cons[i]->l, cons[i]->b, false});
    }
    if (internal.size() < 2) {
        pm.insufficient = true;
    } else {
        int cds_hits = 0, gene_hits = 0;
        for (const Extremity& e : internal) {
            bool cds_hit = false;
            for (const Exon& ex : cs.cds_exons)
                if ((e.is_start && ex.start == e.cds) || (!e.is_start && ex.end == e.cds)) {
                    cds_hit = true;
                    break;
                }
            if (cds_hit) ++cds_hits;
            bool gene_hit = e.is_start ? gene_exons.has_start(e.gene) : gene_exons.has_end(e.gene);
            if (gene_hit) ++gene_hits;
        }
        pm.cds_exon_extremity_ratio = static_cast<double>(cds_hits) / internal.size();
        pm.gene_exon_extremity_ratio = static_cast<double>(gene_hits) / internal.size();
    }

    auto introns = a.introns();
    pm.intron_count = static_cast<int>(introns.size());
    if (introns.empty()) {
        pm.insufficient = true;
        return pm;
    }
    int both = 0;
    for (auto [b, acc] : introns) {
        int lo = b + 1, hi = acc - 1;
        if (hi - lo + 1 < 4) continue;
        bool donor = h.seq[static_cast<size_t>(lo - 1)] == 'G' && h.seq[static_cast<size_t>(lo)] == 'T';
        bool acceptor =
            h.seq[static_cast<size_t>(hi - 2)] == 'A' && h.seq[static_cast<size_t>(hi - 1)] == 'G';
        if (donor) ++pm.canonical_donors;
        if (acceptor) ++pm.canonical_acceptors;
        if (donor && acceptor) ++both;
    }
    pm.canonical_intron_ratio = static_cast<double>(both) / introns.size();
    return pm;
}

struct MsaMetrics {
    double column_identity = 0.0;   // (A): identical non-gap columns with >= 2 rows present
    double long_gap_real_ratio = 0.0; // (B): long gaps at true exon junctions / all long gaps
    int long_gaps_total = 0;
    int long_gaps_real = 0;
    bool no_long_gaps = false; // 0/0 case; ratio reported as 1
};

// annotations: cds_id -> exon tiling in CDS coordinates.
inline MsaMetrics msa_metrics(const MultiColumnAlignment& m,
                              const std::map<std::string, std::vector<Exon>>& annotations,
                              const Registry& registry)
{
    MsaMetrics mm;
    if (m.columns == 0) {
        mm.no_long_gaps = true;
        mm.long_gap_real_ratio = 1.0;
        return mm;
    }

    int ident = 0;
    for (int c = 0; c < m.columns; ++c) {
        char seen = 0;
        int nongap = 0;
        bool same = true;
        for (const auto& [id, row] : m.rows) {
            char ch = row[static_cast<size_t>(c)];
            if (ch == '-') continue;
            ++nongap;
            if (seen == 0) seen = ch;
            else if (ch != seen) same = false;
        }
        if (nongap >= 2 && same && seen != 'N') ++ident;
    }
    mm.column_identity = static_cast<double>(ident) / m.columns;

    // long gaps: maximal '-' runs of length >= 20 strictly between two CDS
    // nucleotides; real when those nucleotides sit in consecutive exons
    for (const auto& [id, row] : m.rows) {
        auto reg = registry.find(id);
        if (reg == registry.end() || !reg->second.is_cds) continue;
        auto ann = annotations.find(id);
        if (ann == annotations.end())
            throw InputError("msa_metrics: no annotation for CDS '" + id + "'");
        auto exon_of = [&](int pos) {
            for (size_t e = 0; e < ann->second.size(); ++e)
                if (ann->second[e].start <= pos && pos <= ann->second[e].end)
                    return static_cast<int>(e);
            throw InputError("msa_metrics: CDS position outside annotation for '" + id + "'");
        };
        int consumed = 0;
        size_t c = 0;
        const std::string& r = row;
        while (c < r.size()) {
            if (r[c] != '-') {
                ++consumed;
                ++c;
                continue;
            }
            size_t start = c;
            while (c < r.size() && r[c] == '-') ++c;
            size_t len = c - start;
            bool internal = consumed > 0 && c < r.size();
            if (internal && len >= 20) {
                ++mm.long_gaps_total;
                int left = consumed;       // x[i]
                int right = consumed + 1;  // x[i+1]
                if (exon_of(right) == exon_of(left) + 1) ++mm.long_gaps_real;
            }
        }
    }
    if (mm.long_gaps_total == 0) {
        mm.no_long_gaps = true;
        mm.long_gap_real_ratio = 1.0;
    } else {
        mm.long_gap_real_ratio = static_cast<double>(mm.long_gaps_real) / mm.long_gaps_total;
    }
    return mm;
}

// ---------------------------------------------------------------------------
// Report formats
// ---------------------------------------------------------------------------

inline std::string pairwise_metrics_header()
{
    return "cds_id\tgene_id\tcoverage\tcds_extremity_ratio\tgene_extremity_ratio\t"
           "canonical_intron_ratio\tintrons\tcanonical_donors\tcanonical_acceptors\tflags\n";
}

inline std::string pairwise_metrics_row(const std::string& cds_id, const std::string& gene_id,
                                        const PairwiseMetrics& pm)
{
    return cds_id + "\t" + gene_id + "\t" + format_fraction(pm.coverage) + "\t" +
           format_fraction(pm.cds_exon_extremity_ratio) + "\t" +
           format_fraction(pm.gene_exon_extremity_ratio) + "\t" +
           format_fraction(pm.canonical_intron_ratio) + "\t" + std::to_string(pm.intron_count) +
           "\t" + std::to_string(pm.canonical_donors) + "\t" +
           std::to_string(pm.canonical_acceptors) + "\t" +
           (pm.insufficient ? "insufficient" : "-") + "\n";
}

inline std::string msa_metrics_text(const MsaMetrics& mm)
{
    std::string out;
    out += "column_identity\t" + format_fraction(mm.column_identity) + "\n";
    out += "long_gap_real_ratio\t" + format_fraction(mm.long_gap_real_ratio) +
           (mm.no_long_gaps ? "\tno_long_gaps" : "") + "\n";
    out += "long_gaps_real\t" + std::to_string(mm.long_gaps_real) + "\n";
    out += "long_gaps_total\t" + std::to_string(mm.long_gaps_total) + "\n";
    return out;
}

} // namespace exonalign
