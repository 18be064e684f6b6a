#pragma once

// Translated seed-and-extend anchor finder. Both sequences are translated in
// the three forward frames; exact amino-acid seed matches are extended
// ungapped with an X-drop rule and reported as nucleotide-coordinate anchors
// classified into four quality tiers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "exonalign/align.hpp"
#include "exonalign/common.hpp"
#include "exonalign/scoring.hpp"
#include "exonalign/seqmodel.hpp"

namespace exonalign {

// Standard genetic code; index = 16*b1 + 4*b2 + b3 with A=0, C=1, G=2, T=3.
// '*' marks stops, 'X' anything containing an ambiguous base. Neither ever
// matches in amino-acid comparisons.
inline char translate_codon(char c1, char c2, char c3)
{
    static constexpr char kTable[65] =
        "KNKNTTTTRSRSIIMIQHQHPPPPRRRRLLLLEDEDAAAAGGGGVVVV*Y*YSSSS*CWCLFLF";
    auto idx = [](char c) -> int {
        switch (c) {
        case 'A': return 0;
        case 'C': return 1;
        case 'G': return 2;
        case 'T': return 3;
        default: return -1;
        }
    };
    int i1 = idx(c1), i2 = idx(c2), i3 = idx(c3);
    if (i1 < 0 || i2 < 0 || i3 < 0) return 'X';
    return kTable[i1 * 16 + i2 * 4 + i3];
}

// The three forward-frame translations of a nucleotide sequence.
inline std::array<std::string, 3> translate_frames(const std::string& seq)
{
    std::array<std::string, 3> out;
    for (int f = 0; f < 3; ++f) {
        std::string& p = out[static_cast<size_t>(f)];
        for (size_t i = static_cast<size_t>(f); i + 2 < seq.size(); i += 3)
            p.push_back(translate_codon(seq[i], seq[i + 1], seq[i + 2]));
    }
    return out;
}

inline bool aa_match(char x, char y)
{
    return x == y && x != 'X' && x != '*';
}

// An ungapped local match between a CDS segment [k,l] and a gene segment
// [a,b] of equal length. score is the amino-acid extension score; identity
// is the nucleotide identity over the span.
struct Anchor {
    int k = 0, l = 0; // CDS coordinates, 1-based inclusive
    int a = 0, b = 0; // gene coordinates
    int score = 0;
    double identity = 0.0;
    int tier = 4;

    int length() const { return l - k + 1; }
};

namespace anchor_detail {

// Amino-acid score of the ungapped nucleotide pairing q[k..l] / s[a..b],
// read in the codon phase of the anchor start.
inline int aa_score_of_span(const std::string& q, const std::string& s, int k, int l, int a,
                            const ScoringScheme& sc)
{
    int score = 0;
    for (int p = k; p + 2 <= l; p += 3) {
        char qa = translate_codon(q[static_cast<size_t>(p - 1)], q[static_cast<size_t>(p)],
                                  q[static_cast<size_t>(p + 1)]);
        int off = p - k;
        char sa = translate_codon(s[static_cast<size_t>(a - 1 + off)],
                                  s[static_cast<size_t>(a + off)],
                                  s[static_cast<size_t>(a + 1 + off)]);
        score += aa_match(qa, sa) ? sc.aa_match : sc.aa_mismatch;
    }
    return score;
}

inline double nt_identity_of_span(const std::string& q, const std::string& s, int k, int l, int a)
{
    int len = l - k + 1;
    int m = 0;
    for (int off = 0; off < len; ++off)
        if (bases_match(q[static_cast<size_t>(k - 1 + off)], s[static_cast<size_t>(a - 1 + off)]))
            ++m;
    return len == 0 ? 0.0 : static_cast<double>(m) / len;
}

} // namespace anchor_detail

// Finds translated anchors of cs against h. Seeds are exact amino-acid
// matches of length params.anchor_seed_len; each seed is extended ungapped in
// amino-acid space with X-drop params.anchor_xdrop; overlapping anchors on
// the same nucleotide diagonal are merged. Output is sorted by descending
// score, then (k, a).
inline std::vector<Anchor> local_anchors(const CdsSequence& cs, const Gene& h,
                                         const ScoringScheme& scheme, const Params& params)
{
    const std::string& q = cs.seq;
    const std::string& s = h.seq;
    const int seed_len = params.anchor_seed_len;
    const auto qf = translate_frames(q);
    const auto sf = translate_frames(s);

    // index all valid subject seed words
    std::map<std::string, std::vector<std::pair<int, int>>> index; // word -> (frame, aa pos)
    for (int f = 0; f < 3; ++f) {
        const std::string& prot = sf[static_cast<size_t>(f)];
        for (int p = 0; p + seed_len <= static_cast<int>(prot.size()); ++p) {
            std::string word = prot.substr(static_cast<size_t>(p), static_cast<size_t>(seed_len));
            if (word.find('*') != std::string::npos || word.find('X') != std::string::npos)
                continue;
            index[word].emplace_back(f, p);
        }
    }

    // (query frame, subject frame, query aa start, subject aa start, aa length)
    struct Ext {
        int fq, fs, qs, ss, len, score;
    };
    std::vector<Ext> exts;
    std::map<std::tuple<int, int, int>, int> best_on_diag; // (fq, fs, qs-ss) -> covered qs+len

    for (int fq = 0; fq < 3; ++fq) {
        const std::string& prot = qf[static_cast<size_t>(fq)];
        for (int p = 0; p + seed_len <= static_cast<int>(prot.size()); ++p) {
            std::string word = prot.substr(static_cast<size_t>(p), static_cast<size_t>(seed_len));
            if (word.find('*') != std::string::npos || word.find('X') != std::string::npos)
                continue;
            auto hit = index.find(word);
            if (hit == index.end()) continue;
            for (auto [fs, ps] : hit->second) {
                // skip seeds already inside an extension on this diagonal
                auto key = std::make_tuple(fq, fs, p - ps);
                auto seen = best_on_diag.find(key);
                if (seen != best_on_diag.end() && p + seed_len <= seen->second) continue;

                const std::string& sprot = sf[static_cast<size_t>(fs)];
                int qn = static_cast<int>(prot.size());
                int sn = static_cast<int>(sprot.size());
                auto sc_at = [&](int dq, int ds) {
                    return aa_match(prot[static_cast<size_t>(dq)], sprot[static_cast<size_t>(ds)])
                               ? scheme.aa_match
                               : scheme.aa_mismatch;
                };
                int cur = 0;
                for (int t = 0; t < seed_len; ++t) cur += sc_at(p + t, ps + t);
                // extend right
                int best = cur, best_r = p + seed_len;
                int run = cur;
                for (int t = p + seed_len, u = ps + seed_len; t < qn && u < sn; ++t, ++u) {
                    run += sc_at(t, u);
                    if (run > best) {
                        best = run;
                        best_r = t + 1;
                    }
                    if (run < best - params.anchor_xdrop) break;
                }
                // extend left
                int total = best;
                int best_l = p;
                run = best;
                for (int t = p - 1, u = ps - 1; t >= 0 && u >= 0; --t, --u) {
                    run += sc_at(t, u);
                    if (run > total) {
                        total = run;
                        best_l = t;
                    }
                    if (run < total - params.anchor_xdrop) break;
                }
                Ext e;
                e.fq = fq;
                e.fs = fs;
                e.qs = best_l;
                e.ss = ps - (p - best_l);
                e.len = best_r - best_l;
                e.score = total;
                exts.push_back(e);
                int& covered = best_on_diag[key];
                covered = std::max(covered, e.qs + e.len);
            }
        }
    }

    // convert to nucleotide coordinates
    std::vector<Anchor> anchors;
    anchors.reserve(exts.size());
    for (const Ext& e : exts) {
        Anchor an;
        an.k = e.fq + 3 * e.qs + 1;
        an.l = e.fq + 3 * (e.qs + e.len);
        an.a = e.fs + 3 * e.ss + 1;
        an.b = e.fs + 3 * (e.ss + e.len);
        an.score = e.score;
        anchors.push_back(an);
    }

    // merge overlapping or adjacent anchors on the same nucleotide diagonal
    std::sort(anchors.begin(), anchors.end(), [](const Anchor& x, const Anchor& y) {
        if (x.k - x.a != y.k - y.a) return x.k - x.a < y.k - y.a;
        if (x.k != y.k) return x.k < y.k;
        return x.l > y.l;
    });
    std::vector<Anchor> merged;
    for (const Anchor& an : anchors) {
        if (!merged.empty()) {
            Anchor& last = merged.back();
            if (last.k - last.a == an.k - an.a && an.k <= last.l + 1) {
                if (an.l > last.l) {
                    last.l = an.l;
                    last.b = an.b;
                }
                continue;
            }
        }
        merged.push_back(an);
    }

    for (Anchor& an : merged) {
        an.score = anchor_detail::aa_score_of_span(q, s, an.k, an.l, an.a, scheme);
        an.identity = anchor_detail::nt_identity_of_span(q, s, an.k, an.l, an.a);
        an.tier = params.tiers.tier_of(an.score);
    }

    std::sort(merged.begin(), merged.end(), [](const Anchor& x, const Anchor& y) {
        if (x.score != y.score) return x.score > y.score;
        if (x.k != y.k) return x.k < y.k;
        return x.a < y.a;
    });
    return merged;
}

// ---------------------------------------------------------------------------
// Tier calibration
// ---------------------------------------------------------------------------

struct TierCalibration {
    AnchorTierThresholds thresholds;
    double lambda = 0.0;          // fitted tail decay per score unit
    double rate_at_min = 0.0;     // per position-pair probability of any anchor
    long long position_pairs = 0; // total sampled position pairs
};

// Estimates per-position-pair probabilities of anchor scores on random
// sequence pairs and derives score cutoffs at which the null model yields
// hit probabilities 1e-7, 1e-5 and 1e-3. Cutoffs outside the observable
// range are extrapolated with the fitted exponential tail.
inline TierCalibration calibrate_anchor_tiers(int trials, int seq_len, std::uint64_t seed,
                                              const ScoringScheme& scheme, const Params& base)
{
    Params params = base;
    params.tiers = AnchorTierThresholds{3000, 2000, 1000}; // classify later, not here
    Rng rng(seed);
    auto random_seq = [&](int n) {
        static const char bases[4] = {'A', 'C', 'G', 'T'};
        std::string s;
        s.reserve(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) s.push_back(bases[rng.next_below(4)]);
        return s;
    };

    std::map<int, long long> score_counts;
    long long pairs = 0;
    for (int t = 0; t < trials; ++t) {
        CdsSequence cs;
        cs.cds_id = "q";
        cs.seq = random_seq(seq_len);
        cs.cds_exons.push_back(Exon{1, seq_len});
        Gene g{"s", random_seq(seq_len)};
        pairs += static_cast<long long>(seq_len) * seq_len;
        for (const Anchor& an : local_anchors(cs, g, scheme, params)) ++score_counts[an.score];
    }

    TierCalibration out;
    out.position_pairs = pairs;
    if (score_counts.empty()) {
        out.thresholds = AnchorTierThresholds{};
        return out;
    }

    // cumulative tail counts
    std::vector<std::pair<int, long long>> tail; // score -> count of anchors with score >= s
    long long cum = 0;
    for (auto it = score_counts.rbegin(); it != score_counts.rend(); ++it) {
        cum += it->second;
        tail.emplace_back(it->first, cum);
    }
    std::sort(tail.begin(), tail.end());
    out.rate_at_min = static_cast<double>(cum) / static_cast<double>(pairs);

    // least-squares fit of log P(score >= s) = c - lambda * s
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int npt = 0;
    for (auto [s, c] : tail) {
        double y = std::log(static_cast<double>(c) / static_cast<double>(pairs));
        sx += s;
        sy += y;
        sxx += static_cast<double>(s) * s;
        sxy += s * y;
        ++npt;
    }
    double lambda = 0.0, intercept = 0.0;
    if (npt >= 2 && npt * sxx - sx * sx != 0.0) {
        double slope = (npt * sxy - sx * sy) / (npt * sxx - sx * sx);
        lambda = -slope;
        intercept = (sy - slope * sx) / npt;
    } else {
        // single observed score: fall back to a nominal decay
        lambda = 0.5;
        intercept = std::log(out.rate_at_min) + lambda * tail.front().first;
    }
    out.lambda = lambda;

    auto solve = [&](double target) {
        // smallest integer score s with P(score >= s) <= target
        double s = (intercept - std::log(target)) / lambda;
        return static_cast<int>(std::ceil(s));
    };
    int t1 = solve(1e-7), t2 = solve(1e-5), t3 = solve(1e-3);
    if (t3 < 1) t3 = 1;
    if (t2 <= t3) t2 = t3 + 1;
    if (t1 <= t2) t1 = t2 + 1;
    out.thresholds = AnchorTierThresholds{t1, t2, t3};
    return out;
}

} // namespace exonalign
