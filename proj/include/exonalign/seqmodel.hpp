#pragma once

// Core sequence model: genes, exons, CDS and their derived structures,
// plus parsing and serialization of the FASTA / annotation inputs.
//
// Coordinates are 1-based inclusive everywhere in the public types;
// conversion to 0-based indexing happens only inside kernels.

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "exonalign/common.hpp"

namespace exonalign {

struct Gene {
    std::string id;
    std::string seq; // uppercase, over {A,C,G,T,N}

    int length() const { return static_cast<int>(seq.size()); }
};

// A segment (a,b) of a sequence, 1 <= a <= b <= length.
struct Exon {
    int start = 0;
    int end = 0;

    int length() const { return end - start + 1; }
    friend bool operator==(const Exon& x, const Exon& y) = default;
    friend auto operator<=>(const Exon& x, const Exon& y) = default;
};

// A CDS is a chain of non-overlapping exons in increasing order on its gene.
struct Cds {
    std::string id;
    std::string gene_id;
    std::vector<Exon> exons;

    friend bool operator==(const Cds& x, const Cds& y) = default;
};

// The spliced sequence of a CDS together with its exon tiling in CDS
// coordinates and the source introns in gene coordinates.
struct CdsSequence {
    std::string cds_id;
    std::string gene_id;
    std::string seq;                                // concatenated exon nucleotides
    std::vector<Exon> cds_exons;                    // tiles [1, |seq|] exactly
    std::vector<std::pair<int, int>> source_introns; // (b_i, a_{i+1}) in gene coordinates

    int length() const { return static_cast<int>(seq.size()); }
};

// Union of the exons of all CDS of one gene. Members may overlap.
struct GeneExonSet {
    std::string gene_id;
    std::vector<Exon> exons; // sorted, unique

    bool contains(int a, int b) const
    {
        Exon probe{a, b};
        return std::binary_search(exons.begin(), exons.end(), probe);
    }
    bool has_start(int a) const
    {
        for (const Exon& e : exons)
            if (e.start == a) return true;
        return false;
    }
    bool has_end(int b) const
    {
        for (const Exon& e : exons)
            if (e.end == b) return true;
        return false;
    }
};

// 1-based inclusive segment extraction.
inline std::string segment(const std::string& seq, int a, int b)
{
    if (a < 1 || b > static_cast<int>(seq.size()) || a > b + 1)
        throw InternalError("segment out of range");
    if (a > b) return {};
    return seq.substr(static_cast<size_t>(a - 1), static_cast<size_t>(b - a + 1));
}

// ---------------------------------------------------------------------------
// FASTA parsing
// ---------------------------------------------------------------------------

// Parses FASTA text into id -> uppercased sequence. The id is the first
// whitespace-delimited token of the header. Accepted characters are
// {A,C,G,T,N} plus their lowercase forms; anything else is an error,
// as are duplicate ids and empty records.
inline std::map<std::string, std::string> parse_fasta(const std::string& text)
{
    std::map<std::string, std::string> records;
    std::istringstream in(text);
    std::string line, id, seq;
    bool have_record = false;

    auto flush = [&]() {
        if (!have_record) return;
        if (seq.empty()) throw InputError("FASTA record '" + id + "' has an empty sequence");
        if (records.count(id)) throw InputError("duplicate FASTA id '" + id + "'");
        records[id] = seq;
    };

    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '>') {
            flush();
            std::string header = t.substr(1);
            size_t sp = header.find_first_of(" \t");
            id = sp == std::string::npos ? header : header.substr(0, sp);
            if (id.empty()) throw InputError("FASTA header with empty id");
            seq.clear();
            have_record = true;
        } else {
            if (!have_record) throw InputError("FASTA sequence data before first header");
            for (char c : t) {
                char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
                if (u != 'A' && u != 'C' && u != 'G' && u != 'T' && u != 'N')
                    throw InputError(std::string("invalid character '") + c + "' in FASTA record '" + id + "'");
                seq.push_back(u);
            }
        }
    }
    flush();
    return records;
}

// ---------------------------------------------------------------------------
// Annotation parsing: TSV lines  gene_id <TAB> cds_id <TAB> start <TAB> end,
// one exon per line, 1-based inclusive.
// ---------------------------------------------------------------------------

inline std::vector<Cds> parse_annotation(const std::string& text)
{
    std::vector<Cds> out;
    std::map<std::string, size_t> index; // cds_id -> position in out
    std::istringstream in(text);
    std::string line;
    int lineno = 0;

    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::vector<std::string> f = split(t, '\t');
        if (f.size() != 4)
            throw InputError("annotation line " + std::to_string(lineno) + ": expected 4 tab-separated fields");
        const std::string& gene_id = f[0];
        const std::string& cds_id = f[1];
        int a = parse_int(f[2], "exon start");
        int b = parse_int(f[3], "exon end");
        if (a < 1 || b < a)
            throw InputError("annotation line " + std::to_string(lineno) + ": invalid exon (" +
                             std::to_string(a) + "," + std::to_string(b) + ")");
        auto it = index.find(cds_id);
        if (it == index.end()) {
            index[cds_id] = out.size();
            out.push_back(Cds{cds_id, gene_id, {}});
            it = index.find(cds_id);
        } else if (out[it->second].gene_id != gene_id) {
            throw InputError("CDS '" + cds_id + "' is annotated on two different genes");
        }
        out[it->second].exons.push_back(Exon{a, b});
    }

    for (Cds& c : out) {
        std::sort(c.exons.begin(), c.exons.end(),
                  [](const Exon& x, const Exon& y) { return x.start < y.start; });
        for (size_t i = 0; i + 1 < c.exons.size(); ++i) {
            if (c.exons[i].end >= c.exons[i + 1].start)
                throw InputError("CDS '" + c.id + "' has overlapping or out-of-order exons");
        }
    }
    return out;
}

// Serializes CDS annotations back to the same TSV; '\n' line endings and no
// trailing blank line.
inline std::string serialize_annotation(const std::vector<Cds>& list)
{
    std::string out;
    for (const Cds& c : list)
        for (const Exon& e : c.exons)
            out += c.gene_id + "\t" + c.id + "\t" + std::to_string(e.start) + "\t" +
                   std::to_string(e.end) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Derived structures
// ---------------------------------------------------------------------------

inline CdsSequence cds_sequence(const Gene& gene, const Cds& cds)
{
    if (cds.exons.empty()) throw InputError("CDS '" + cds.id + "' has no exons");
    CdsSequence cs;
    cs.cds_id = cds.id;
    cs.gene_id = gene.id;
    int pos = 0;
    for (size_t i = 0; i < cds.exons.size(); ++i) {
        const Exon& e = cds.exons[i];
        if (e.start < 1 || e.end > gene.length())
            throw InputError("CDS '" + cds.id + "' exon (" + std::to_string(e.start) + "," +
                             std::to_string(e.end) + ") out of range for gene '" + gene.id +
                             "' of length " + std::to_string(gene.length()));
        cs.seq += segment(gene.seq, e.start, e.end);
        cs.cds_exons.push_back(Exon{pos + 1, pos + e.length()});
        pos += e.length();
        if (i + 1 < cds.exons.size())
            cs.source_introns.emplace_back(e.end, cds.exons[i + 1].start);
    }
    return cs;
}

// Warnings (never errors) about a CDS sequence that is not a textbook full
// CDS: length not a multiple of 3, missing ATG start, missing stop codon.
inline std::vector<std::string> validate_full_cds(const CdsSequence& cs)
{
    std::vector<std::string> diags;
    if (cs.length() % 3 != 0)
        diags.push_back(cs.cds_id + ": length " + std::to_string(cs.length()) + " is not a multiple of 3");
    if (cs.length() < 3 || cs.seq.substr(0, 3) != "ATG")
        diags.push_back(cs.cds_id + ": does not start with ATG");
    bool stop = false;
    if (cs.length() >= 3) {
        std::string last = cs.seq.substr(cs.seq.size() - 3);
        stop = last == "TAA" || last == "TAG" || last == "TGA";
    }
    if (!stop) diags.push_back(cs.cds_id + ": does not end with a stop codon");
    return diags;
}

// Union of the exons of the given CDS list that belong to gene_id.
inline GeneExonSet gene_exon_set(const std::string& gene_id, const std::vector<Cds>& all_cds)
{
    std::set<Exon> uniq;
    for (const Cds& c : all_cds)
        if (c.gene_id == gene_id)
            for (const Exon& e : c.exons) uniq.insert(e);
    GeneExonSet out;
    out.gene_id = gene_id;
    out.exons.assign(uniq.begin(), uniq.end());
    return out;
}

} // namespace exonalign
