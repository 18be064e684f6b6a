#pragma once

// Scoring knobs and the structure-aware score terms: nucleotide match model,
// intron scores for canonical splice sites, and exon-correspondence scores.

#include <fstream>
#include <sstream>
#include <string>

#include "exonalign/common.hpp"
#include "exonalign/seqmodel.hpp"

namespace exonalign {

// All numeric scoring constants. Fixed defaults, overridable from a flat
// key=value config file.
struct ScoringScheme {
    // nucleotide alignment
    int match = 2;
    int mismatch = -1;
    int gap_open = -4;   // charged once per gap run
    int gap_extend = -1; // charged per gapped position

    // intron scores by canonical splice-site content (GT donor / AG acceptor)
    int intr_both = 10;
    int intr_one = 4;
    int intr_none = 0;

    // block scores by exon correspondence in the CDS / gene structures
    int exon_both = 8;
    int exon_one = 3;
    int exon_none = 0;

    // translated anchoring (amino-acid space)
    int aa_match = 5;
    int aa_mismatch = -2;

    void validate() const
    {
        if (!(intr_both > intr_one && intr_one > intr_none))
            throw InputError("scoring: require intr_both > intr_one > intr_none");
        if (!(exon_both > exon_one && exon_one > exon_none))
            throw InputError("scoring: require exon_both > exon_one > exon_none");
        if (!(match > 0 && 0 > mismatch))
            throw InputError("scoring: require match > 0 > mismatch");
        if (gap_open > 0 || gap_extend > 0)
            throw InputError("scoring: gap penalties must be <= 0");
        if (!(aa_match > 0 && 0 > aa_mismatch))
            throw InputError("scoring: require aa_match > 0 > aa_mismatch");
    }

    // Cost of one gap run of the given length (<= 0).
    int gap_run(int len) const { return len <= 0 ? 0 : gap_open + len * gap_extend; }
};

// Raw anchor-score cutoffs separating the four anchor quality tiers
// (tier 1 strongest). Defaults come from the null-model calibration run
// shipped as the `calibrate` subcommand (40000 trials of 300x300 random
// pairs, seed 20250809: per-position-pair hit probabilities 1e-7 / 1e-5 /
// 1e-3 cross at scores 28 / 18 / 8 with tail decay lambda ~ 0.45).
struct AnchorTierThresholds {
    int t1 = 28;
    int t2 = 18;
    int t3 = 8;

    void validate() const
    {
        if (!(t1 > t2 && t2 > t3 && t3 > 0))
            throw InputError("anchor tiers: require t1 > t2 > t3 > 0");
    }

    int tier_of(int score) const
    {
        if (score >= t1) return 1;
        if (score >= t2) return 2;
        if (score >= t3) return 3;
        return 4;
    }
};

// Algorithm parameters that are not per-column scores.
struct Params {
    int epsilon = 50;            // segment compatibility slack
    double tau = 0.60;           // correct-block identity threshold
    double min_idty = 0.60;      // final block identity filter
    int junction_shift_max = 30; // max junction shift, nucleotides
    int junction_gap_max = 3;    // max new gap at a junction, codons
    int anchor_seed_len = 5;     // exact amino-acid seed length
    int anchor_xdrop = 12;       // ungapped extension X-drop, aa score
    AnchorTierThresholds tiers;

    void validate() const
    {
        if (min_idty < 0.0 || min_idty > 1.0) throw InputError("params: min_idty must be in [0,1]");
        if (tau < 0.0 || tau > 1.0) throw InputError("params: tau must be in [0,1]");
        if (epsilon < 0) throw InputError("params: epsilon must be >= 0");
        if (junction_shift_max <= 0 || junction_gap_max <= 0)
            throw InputError("params: junction limits must be positive");
        if (anchor_seed_len < 2) throw InputError("params: anchor_seed_len must be >= 2");
        if (anchor_xdrop <= 0) throw InputError("params: anchor_xdrop must be positive");
        tiers.validate();
    }
};

// Loads `key=value` lines into the scheme and params. Unknown keys are
// errors; '#' starts a comment.
inline void load_config_text(const std::string& text, ScoringScheme& scheme, Params& params)
{
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw InputError("config line " + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        auto as_int = [&]() { return parse_int(val, key); };
        auto as_double = [&]() {
            try {
                size_t pos = 0;
                double d = std::stod(val, &pos);
                if (pos != val.size()) throw std::invalid_argument(val);
                return d;
            } catch (const std::exception&) {
                throw InputError("config line " + std::to_string(lineno) + ": invalid number '" + val + "'");
            }
        };
        if (key == "match") scheme.match = as_int();
        else if (key == "mismatch") scheme.mismatch = as_int();
        else if (key == "gap_open") scheme.gap_open = as_int();
        else if (key == "gap_extend") scheme.gap_extend = as_int();
        else if (key == "intr_both") scheme.intr_both = as_int();
        else if (key == "intr_one") scheme.intr_one = as_int();
        else if (key == "intr_none") scheme.intr_none = as_int();
        else if (key == "exon_both") scheme.exon_both = as_int();
        else if (key == "exon_one") scheme.exon_one = as_int();
        else if (key == "exon_none") scheme.exon_none = as_int();
        else if (key == "aa_match") scheme.aa_match = as_int();
        else if (key == "aa_mismatch") scheme.aa_mismatch = as_int();
        else if (key == "epsilon") params.epsilon = as_int();
        else if (key == "tau") params.tau = as_double();
        else if (key == "min_idty") params.min_idty = as_double();
        else if (key == "junction_shift_max") params.junction_shift_max = as_int();
        else if (key == "junction_gap_max") params.junction_gap_max = as_int();
        else if (key == "anchor_seed_len") params.anchor_seed_len = as_int();
        else if (key == "anchor_xdrop") params.anchor_xdrop = as_int();
        else if (key == "anchor_t1") params.tiers.t1 = as_int();
        else if (key == "anchor_t2") params.tiers.t2 = as_int();
        else if (key == "anchor_t3") params.tiers.t3 = as_int();
        else throw InputError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    scheme.validate();
    params.validate();
}

inline void load_config_file(const std::string& path, ScoringScheme& scheme, Params& params)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    load_config_text(ss.str(), scheme, params);
}

// Two bases count as a match only when equal and unambiguous.
inline bool bases_match(char x, char y)
{
    return x == y && x != 'N';
}

// Intron score of the gene interval strictly between two flanking blocks:
// interior = h[b+1 .. a-1]. Interiors shorter than 4 nt cannot carry both
// splice sites and score intr_none.
inline int intron_score(const Gene& h, std::pair<int, int> intron, const ScoringScheme& scheme)
{
    auto [b, a] = intron;
    if (b >= a) throw InternalError("intron_score: require b < a");
    int lo = b + 1, hi = a - 1;
    int len = hi - lo + 1;
    if (len < 4) return scheme.intr_none;
    bool donor = h.seq[static_cast<size_t>(lo - 1)] == 'G' && h.seq[static_cast<size_t>(lo)] == 'T';
    bool acceptor = h.seq[static_cast<size_t>(hi - 2)] == 'A' && h.seq[static_cast<size_t>(hi - 1)] == 'G';
    if (donor && acceptor) return scheme.intr_both;
    if (donor || acceptor) return scheme.intr_one;
    return scheme.intr_none;
}

// Exon-correspondence score of a conserved block (k,l,a,b): exact-coordinate
// membership of (k,l) in the CDS exon set and (a,b) in the gene exon set.
inline int exon_score(int k, int l, int a, int b, const std::vector<Exon>& cds_exons,
                      const GeneExonSet& gene_exons, const ScoringScheme& scheme)
{
    bool in_cds = false;
    for (const Exon& e : cds_exons)
        if (e.start == k && e.end == l) { in_cds = true; break; }
    bool in_gene = gene_exons.contains(a, b);
    if (in_cds && in_gene) return scheme.exon_both;
    if (in_cds || in_gene) return scheme.exon_one;
    return scheme.exon_none;
}

} // namespace exonalign
