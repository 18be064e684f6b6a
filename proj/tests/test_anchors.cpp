#include <catch2/catch_amalgamated.hpp>

#include "exonalign/anchors.hpp"
#include "exonalign/seqmodel.hpp"

using namespace exonalign;

namespace {

std::string random_dna(Rng& rng, int len)
{
    static const char bases[4] = {'A', 'C', 'G', 'T'};
    std::string s;
    for (int i = 0; i < len; ++i) s.push_back(bases[rng.next_below(4)]);
    return s;
}

CdsSequence as_cds(const std::string& seq)
{
    CdsSequence cs;
    cs.cds_id = "c";
    cs.gene_id = "src";
    cs.seq = seq;
    cs.cds_exons.push_back(Exon{1, static_cast<int>(seq.size())});
    return cs;
}

// All exact amino-acid seed matches between the frame translations, found by
// direct scanning; nucleotide-coordinate spans.
struct Seed {
    int k, l, a, b;
};
std::vector<Seed> brute_force_seeds(const std::string& q, const std::string& s, int seed_len)
{
    auto qf = translate_frames(q);
    auto sf = translate_frames(s);
    std::vector<Seed> out;
    for (int fq = 0; fq < 3; ++fq)
        for (int fs = 0; fs < 3; ++fs) {
            const std::string& qp = qf[static_cast<size_t>(fq)];
            const std::string& sp = sf[static_cast<size_t>(fs)];
            for (int p = 0; p + seed_len <= static_cast<int>(qp.size()); ++p)
                for (int ps = 0; ps + seed_len <= static_cast<int>(sp.size()); ++ps) {
                    bool ok = true;
                    for (int t = 0; t < seed_len && ok; ++t)
                        ok = aa_match(qp[static_cast<size_t>(p + t)], sp[static_cast<size_t>(ps + t)]);
                    if (ok)
                        out.push_back(Seed{fq + 3 * p + 1, fq + 3 * (p + seed_len),
                                           fs + 3 * ps + 1, fs + 3 * (ps + seed_len)});
                }
        }
    return out;
}

} // namespace

TEST_CASE("translation table")
{
    CHECK(translate_codon('A', 'T', 'G') == 'M');
    CHECK(translate_codon('T', 'A', 'A') == '*');
    CHECK(translate_codon('T', 'A', 'G') == '*');
    CHECK(translate_codon('T', 'G', 'A') == '*');
    CHECK(translate_codon('T', 'G', 'G') == 'W');
    CHECK(translate_codon('G', 'C', 'T') == 'A');
    CHECK(translate_codon('A', 'N', 'G') == 'X');
    CHECK_FALSE(aa_match('X', 'X'));
    CHECK_FALSE(aa_match('*', '*'));
    CHECK(aa_match('M', 'M'));

    auto frames = translate_frames("ATGGCT");
    CHECK(frames[0] == "MA");
    CHECK(frames[1] == "W"); // TGG CT -> W
    CHECK(frames[2] == "G"); // GGC T  -> G
}

TEST_CASE("exact copy of a gene exon yields a top-tier anchor")
{
    Rng rng(101);
    std::string exon = random_dna(rng, 48);
    std::string gene_seq = random_dna(rng, 40) + exon + random_dna(rng, 40);
    Gene h{"h", gene_seq};
    CdsSequence cs = as_cds(exon);
    ScoringScheme sc;
    Params params;

    std::vector<Anchor> anchors = local_anchors(cs, h, sc, params);
    REQUIRE_FALSE(anchors.empty());
    const Anchor& top = anchors.front();
    CHECK(top.identity == 1.0);
    CHECK(top.tier == 1);
    // spans (nearly) the whole exon at the right place
    CHECK(top.a - top.k == 40);
    CHECK(top.l - top.k + 1 >= 42);
    for (const Anchor& an : anchors) {
        CHECK(an.k >= 1);
        CHECK(an.k <= an.l);
        CHECK(an.l <= cs.length());
        CHECK(an.a >= 1);
        CHECK(an.a <= an.b);
        CHECK(an.b <= h.length());
        CHECK(an.identity >= 0.0);
        CHECK(an.identity <= 1.0);
    }
}

TEST_CASE("no shared 5-aa stretch means no anchors")
{
    // poly-A versus poly-C translate to KKK... and PPP...: no seed can match
    CdsSequence cs = as_cds(std::string(30, 'A'));
    Gene h{"h", std::string(60, 'C')};
    ScoringScheme sc;
    Params params;
    CHECK(local_anchors(cs, h, sc, params).empty());
}

TEST_CASE("single-nucleotide insertion produces two frame-shifted anchors")
{
    ScoringScheme sc;
    Params params;
    // Some random exons place stops in the frames the halves need, so scan a
    // few deterministic seeds and require the pattern to appear quickly.
    bool found = false;
    for (std::uint64_t seed = 1; seed <= 50 && !found; ++seed) {
        Rng rng(seed);
        std::string exon = random_dna(rng, 60);
        std::string cds_seq = exon.substr(0, 30) + "A" + exon.substr(30);
        Gene h{"h", exon};
        CdsSequence cs = as_cds(cds_seq);
        std::vector<Anchor> anchors = local_anchors(cs, h, sc, params);

        bool left = false, right = false;
        for (const Anchor& an : anchors) {
            if (an.k - an.a == 0 && an.l <= 32) left = true;
            if (an.k - an.a == 1 && an.a >= 29) right = true;
        }
        found = anchors.size() >= 2 && left && right;
    }
    CHECK(found);
}

TEST_CASE("every exact seed lies inside a reported anchor")
{
    ScoringScheme sc;
    Params params;
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        // related pair: subject is the query with sparse substitutions
        std::string q = random_dna(rng, 90);
        std::string s = q;
        for (size_t i = 0; i < s.size(); i += 17) s[i] = s[i] == 'A' ? 'C' : 'A';
        CdsSequence cs = as_cds(q);
        Gene h{"h", s};
        std::vector<Anchor> anchors = local_anchors(cs, h, sc, params);
        for (const Seed& sd : brute_force_seeds(q, s, params.anchor_seed_len)) {
            bool covered = false;
            for (const Anchor& an : anchors)
                if (an.k - an.a == sd.k - sd.a && an.k <= sd.k && sd.l <= an.l) {
                    covered = true;
                    break;
                }
            INFO("seed at k=" << sd.k << " a=" << sd.a);
            CHECK(covered);
        }
    }
}

TEST_CASE("anchor scores order the tiers")
{
    AnchorTierThresholds t{40, 30, 20};
    CHECK(t.tier_of(45) == 1);
    CHECK(t.tier_of(40) == 1);
    CHECK(t.tier_of(35) == 2);
    CHECK(t.tier_of(25) == 3);
    CHECK(t.tier_of(19) == 4);
    t.validate();
    CHECK_THROWS_AS((AnchorTierThresholds{10, 20, 5}.validate()), InputError);
}
