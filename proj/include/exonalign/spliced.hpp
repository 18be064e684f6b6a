#pragma once

// Spliced alignment structure: an ordered chain of blocks mapping CDS
// segments onto non-overlapping, increasing gene segments, with deleted
// blocks for CDS regions absent from the gene. Includes the objective
// evaluators for the three problem variants.

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "exonalign/align.hpp"
#include "exonalign/common.hpp"
#include "exonalign/scoring.hpp"
#include "exonalign/seqmodel.hpp"

namespace exonalign {

enum class BlockStatus { Conserved, Deleted };

struct Block {
    int k = 0, l = 0; // CDS segment, 1-based inclusive
    int a = 0, b = 0; // gene segment; (0,0) for deleted blocks
    BlockStatus status = BlockStatus::Deleted;
    PairwiseAlignmentDetail detail; // conserved blocks only
    double identity = 0.0;

    bool conserved() const { return status == BlockStatus::Conserved; }
    int cds_length() const { return l - k + 1; }

    static Block make_deleted(int k, int l)
    {
        Block bl;
        bl.k = k;
        bl.l = l;
        bl.status = BlockStatus::Deleted;
        return bl;
    }
    static Block make_conserved(int k, int l, int a, int b, PairwiseAlignmentDetail d)
    {
        Block bl;
        bl.k = k;
        bl.l = l;
        bl.a = a;
        bl.b = b;
        bl.status = BlockStatus::Conserved;
        bl.detail = std::move(d);
        bl.identity = block_identity(bl.detail);
        return bl;
    }
};

struct SplicedAlignment {
    std::string cds_id;
    std::string gene_id;
    std::vector<Block> blocks; // tiles the CDS in order

    std::vector<const Block*> cons() const
    {
        std::vector<const Block*> out;
        for (const Block& bl : blocks)
            if (bl.conserved()) out.push_back(&bl);
        return out;
    }

    // Intron pairs (b_i, a_{i+1}) over adjacent conserved block pairs.
    std::vector<std::pair<int, int>> introns() const
    {
        std::vector<std::pair<int, int>> out;
        for (size_t i = 0; i + 1 < blocks.size(); ++i)
            if (blocks[i].conserved() && blocks[i + 1].conserved())
                out.emplace_back(blocks[i].b, blocks[i + 1].a);
        return out;
    }

    // Fraction of CDS positions inside conserved blocks.
    double coverage(int cds_length) const
    {
        long covered = 0;
        for (const Block& bl : blocks)
            if (bl.conserved()) covered += bl.cds_length();
        return cds_length == 0 ? 0.0 : static_cast<double>(covered) / cds_length;
    }

    // Checks the chain invariants; throws InternalError on violation.
    void validate(int cds_length, int gene_length) const
    {
        int expect = 1;
        int last_gene_end = 0;
        for (const Block& bl : blocks) {
            if (bl.k != expect || bl.l < bl.k || bl.l > cds_length)
                throw InternalError("spliced alignment does not tile the CDS at position " +
                                    std::to_string(expect));
            expect = bl.l + 1;
            if (bl.conserved()) {
                if (bl.a < 1 || bl.b < bl.a || bl.b > gene_length)
                    throw InternalError("conserved block has invalid gene segment");
                if (bl.a <= last_gene_end)
                    throw InternalError("conserved blocks are not increasing on the gene");
                last_gene_end = bl.b;
                if (bl.detail.ungapped1().size() != static_cast<size_t>(bl.cds_length()) ||
                    bl.detail.ungapped2().size() != static_cast<size_t>(bl.b - bl.a + 1))
                    throw InternalError("block detail does not cover its segments");
            } else if (bl.a != 0 || bl.b != 0) {
                throw InternalError("deleted block must have (a,b) = (0,0)");
            }
        }
        if (expect != cds_length + 1)
            throw InternalError("spliced alignment does not cover the CDS end");
    }
};

enum class SapVariant { I = 1, II = 2, III = 3 };

// Objective value of a spliced alignment. Conserved blocks contribute the
// optimal global alignment score of their segments; deleted blocks the
// affine cost of deleting the whole segment. Variant II adds intron scores,
// variant III adds the exon-correspondence scores as well.
inline long sap_objective(const SplicedAlignment& a, const CdsSequence& cs, const Gene& h,
                          const std::vector<Exon>& cds_exons, const GeneExonSet& gene_exons,
                          const ScoringScheme& scheme, SapVariant variant)
{
    long total = 0;
    for (const Block& bl : a.blocks) {
        if (bl.conserved()) {
            total += global_align(segment(cs.seq, bl.k, bl.l), segment(h.seq, bl.a, bl.b), scheme)
                         .score;
            if (variant == SapVariant::III)
                total += exon_score(bl.k, bl.l, bl.a, bl.b, cds_exons, gene_exons, scheme);
        } else {
            total += scheme.gap_run(bl.cds_length());
        }
    }
    if (variant != SapVariant::I)
        for (auto intron : a.introns()) total += intron_score(h, intron, scheme);
    return total;
}

// ---------------------------------------------------------------------------
// TSV serialization: one block per line,
//   cds_id  gene_id  idx  k  l  a  b  status  identity
// with 4-decimal identity and 1-based idx.
// ---------------------------------------------------------------------------

inline std::string format_fraction(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

inline std::string alignment_to_tsv(const SplicedAlignment& a)
{
    std::string out;
    int idx = 0;
    for (const Block& bl : a.blocks) {
        ++idx;
        out += a.cds_id + "\t" + a.gene_id + "\t" + std::to_string(idx) + "\t" +
               std::to_string(bl.k) + "\t" + std::to_string(bl.l) + "\t" + std::to_string(bl.a) +
               "\t" + std::to_string(bl.b) + "\t" +
               (bl.conserved() ? "conserved" : "deleted") + "\t" +
               format_fraction(bl.conserved() ? bl.identity : 0.0) + "\n";
    }
    return out;
}

// Parses the TSV form back. Block details are not stored in the file; the
// parsed alignment carries coordinates, status and identity only.
inline SplicedAlignment alignment_from_tsv(const std::string& text)
{
    SplicedAlignment a;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::vector<std::string> f = split(t, '\t');
        if (f.size() != 9)
            throw InputError("alignment line " + std::to_string(lineno) + ": expected 9 fields");
        if (a.blocks.empty()) {
            a.cds_id = f[0];
            a.gene_id = f[1];
        } else if (a.cds_id != f[0] || a.gene_id != f[1]) {
            throw InputError("alignment file mixes several (cds, gene) pairs");
        }
        Block bl;
        bl.k = parse_int(f[3], "k");
        bl.l = parse_int(f[4], "l");
        bl.a = parse_int(f[5], "a");
        bl.b = parse_int(f[6], "b");
        if (f[7] == "conserved") bl.status = BlockStatus::Conserved;
        else if (f[7] == "deleted") bl.status = BlockStatus::Deleted;
        else throw InputError("alignment line " + std::to_string(lineno) + ": bad status '" + f[7] + "'");
        try {
            bl.identity = std::stod(f[8]);
        } catch (const std::exception&) {
            throw InputError("alignment line " + std::to_string(lineno) + ": bad identity");
        }
        a.blocks.push_back(bl);
    }
    return a;
}

} // namespace exonalign
