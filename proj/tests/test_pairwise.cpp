#include <catch2/catch_amalgamated.hpp>

#include "exonalign/pairwise.hpp"
#include "exonalign/pipeline.hpp"
#include "exonalign/simulate.hpp"
#include "oracles.hpp"

using namespace exonalign;

namespace {

std::string random_dna(Rng& rng, int len)
{
    static const char bases[4] = {'A', 'C', 'G', 'T'};
    std::string s;
    for (int i = 0; i < len; ++i) s.push_back(bases[rng.next_below(4)]);
    return s;
}

CdsSequence as_cds(const std::string& seq, std::vector<Exon> exons = {})
{
    CdsSequence cs;
    cs.cds_id = "c";
    cs.gene_id = "src";
    cs.seq = seq;
    if (exons.empty()) exons.push_back(Exon{1, static_cast<int>(seq.size())});
    cs.cds_exons = std::move(exons);
    return cs;
}

SplicedAlignment chain_alignment(const std::vector<Block>& cons, int m)
{
    SplicedAlignment a;
    a.cds_id = "c";
    a.gene_id = "h";
    a.blocks = pw::full_chain(cons, m);
    return a;
}

} // namespace

TEST_CASE("anchor chaining keeps the maximum-weight compatible set")
{
    ScoringScheme sc;
    Rng rng(13);

    SECTION("crossing anchors keep the heavier one")
    {
        CdsSequence cs = as_cds(random_dna(rng, 40));
        Gene h{"h", random_dna(rng, 60)};
        Anchor a1{1, 10, 20, 29, 10, 1.0, 1};
        Anchor a2{5, 14, 1, 10, 7, 1.0, 1};
        std::vector<Block> sel = select_compatible_anchors({a1, a2}, {}, cs, h);
        REQUIRE(sel.size() == 1);
        CHECK(sel[0].k == 1);
        CHECK(sel[0].a == 20);
    }
    SECTION("mutually compatible anchors are all kept")
    {
        CdsSequence cs = as_cds(random_dna(rng, 40));
        Gene h{"h", random_dna(rng, 60)};
        Anchor a1{1, 5, 1, 5, 4, 1.0, 1};
        Anchor a2{8, 12, 10, 14, 4, 1.0, 1};
        Anchor a3{20, 30, 30, 40, 4, 1.0, 1};
        CHECK(select_compatible_anchors({a1, a2, a3}, {}, cs, h).size() == 3);
    }
    SECTION("randomized instances match the exhaustive subset oracle")
    {
        for (int trial = 0; trial < 40; ++trial) {
            CdsSequence cs = as_cds(random_dna(rng, 40));
            Gene h{"h", random_dna(rng, 60)};
            std::vector<Anchor> anchors;
            std::set<std::tuple<int, int, int, int>> seen;
            while (anchors.size() < 8) {
                int len = rng.next_int(3, 10);
                int k = rng.next_int(1, 40 - len + 1);
                int a = rng.next_int(1, 60 - len + 1);
                if (!seen.insert({k, k + len - 1, a, a + len - 1}).second) continue;
                Anchor an;
                an.k = k;
                an.l = k + len - 1;
                an.a = a;
                an.b = a + len - 1;
                an.score = rng.next_int(1, 20);
                anchors.push_back(an);
            }
            std::vector<Block> sel = select_compatible_anchors(anchors, {}, cs, h);
            long got = 0;
            for (const Block& bl : sel) {
                for (const Anchor& an : anchors)
                    if (an.k == bl.k && an.l == bl.l && an.a == bl.a && an.b == bl.b) {
                        got += an.score;
                        break;
                    }
            }
            // chain must be internally consistent
            for (size_t i = 1; i < sel.size(); ++i) {
                CHECK(sel[i - 1].l < sel[i].k);
                CHECK(sel[i - 1].b < sel[i].a);
            }
            CHECK(got == oracle::oracle_best_chain(anchors));
        }
    }
    SECTION("selection respects existing blocks")
    {
        CdsSequence cs = as_cds(random_dna(rng, 40));
        Gene h{"h", random_dna(rng, 60)};
        std::vector<Block> existing = {pw::ungapped_block(15, 20, 25, 30, cs, h)};
        // overlaps the existing block on the CDS: must be dropped
        Anchor bad{18, 24, 40, 46, 50, 1.0, 1};
        // crosses the existing block (CDS before it, gene after it): dropped
        Anchor cross{5, 10, 40, 45, 50, 1.0, 1};
        // fits in the slot before the block
        Anchor good{2, 8, 3, 9, 10, 1.0, 1};
        std::vector<Block> sel = select_compatible_anchors({bad, cross, good}, existing, cs, h);
        REQUIRE(sel.size() == 1);
        CHECK(sel[0].k == 2);
    }
}

TEST_CASE("block extension towards CDS exon extremities")
{
    ScoringScheme sc;

    SECTION("extends over an identical flank")
    {
        std::string exon = "ACGTTGCAAC";
        Gene h{"h", exon + "GTTTTTAAAG"};
        CdsSequence cs = as_cds(exon);
        std::vector<Block> cons = {pw::ungapped_block(3, 10, 3, 10, cs, h)};
        extend_blocks_cds(cons, cs, h, sc);
        REQUIRE(cons.size() == 1);
        CHECK(cons[0].k == 1);
        CHECK(cons[0].a == 1);
        CHECK(cons[0].identity == 1.0);
    }
    SECTION("refuses an extension that lowers identity")
    {
        std::string exon = "ACGTTGCAAC";
        std::string mutated = "TTGTTGCAAC"; // first two bases differ
        Gene h{"h", mutated + "GTTTTTAAAG"};
        CdsSequence cs = as_cds(exon);
        std::vector<Block> cons = {pw::ungapped_block(3, 10, 3, 10, cs, h)};
        extend_blocks_cds(cons, cs, h, sc);
        CHECK(cons[0].k == 3);
    }
    SECTION("extension with neighbour trimming needs both identities to rise strictly")
    {
        // gene g: exon1 (1,12), canonical intron, exon2 (19,30)
        std::string e1 = "AAACCCGGGTTT", in = "GTACAG", e2 = "ACACACGTGTGT";
        std::string e1m = e1;
        e1m[4] = 'T'; // one substitution inside exon1
        Gene h{"h", e1m + in + e2};
        CdsSequence cs = as_cds(e1 + e2, {{1, 12}, {13, 24}});

        std::vector<Block> cons = {pw::ungapped_block(1, 8, 1, 8, cs, h),
                                   pw::ungapped_block(11, 20, 17, 26, cs, h)};
        CHECK(cons[0].identity == Catch::Approx(7.0 / 8));
        CHECK(cons[1].identity == Catch::Approx(0.8));

        extend_blocks_cds(cons, cs, h, sc);
        REQUIRE(cons.size() == 2);
        CHECK(cons[0].k == 1);
        CHECK(cons[0].l == 12);
        CHECK(cons[0].b == 12);
        CHECK(cons[0].identity == Catch::Approx(11.0 / 12));
        CHECK(cons[1].k == 13);
        CHECK(cons[1].a == 19);
        CHECK(cons[1].identity == 1.0);
    }
}

TEST_CASE("gap filling by semi-global alignment")
{
    ScoringScheme sc;
    Rng rng(19);
    std::string seq = random_dna(rng, 30);
    CdsSequence cs = as_cds(seq);

    SECTION("a region identical to its gene interval becomes one conserved block")
    {
        Gene h{"h", seq};
        std::vector<Block> cons = {pw::ungapped_block(1, 10, 1, 10, cs, h),
                                   pw::ungapped_block(21, 30, 21, 30, cs, h)};
        fill_gaps_global(cons, cs, h, sc, 0.6);
        REQUIRE(cons.size() == 3);
        CHECK(cons[1].k == 11);
        CHECK(cons[1].l == 20);
        CHECK(cons[1].a == 11);
        CHECK(cons[1].identity == 1.0);
    }
    SECTION("no gene interval leaves the region deleted")
    {
        Gene h{"h", seq.substr(0, 10) + seq.substr(20)};
        std::vector<Block> cons = {pw::ungapped_block(1, 10, 1, 10, cs, h),
                                   pw::ungapped_block(21, 30, 11, 20, cs, h)};
        fill_gaps_global(cons, cs, h, sc, 0.6);
        CHECK(cons.size() == 2);
    }
    SECTION("a region matching half its interval becomes conserved plus deleted")
    {
        // gene interval holds only the first half of the uncovered region
        Gene h{"h", seq.substr(0, 15) + seq.substr(20)};
        std::vector<Block> cons = {pw::ungapped_block(1, 10, 1, 10, cs, h),
                                   pw::ungapped_block(21, 30, 16, 25, cs, h)};
        fill_gaps_global(cons, cs, h, sc, 0.6);
        REQUIRE(cons.size() == 3);
        CHECK(cons[1].k == 11);
        CHECK(cons[1].l == 15);
        CHECK(cons[1].a == 11);
        CHECK(cons[1].b == 15);
        SplicedAlignment a = chain_alignment(cons, 30);
        REQUIRE(a.blocks.size() == 4);
        CHECK_FALSE(a.blocks[2].conserved());
        CHECK(a.blocks[2].k == 16);
        CHECK(a.blocks[2].l == 20);
    }
}

TEST_CASE("junction correction recovers canonical splice sites")
{
    ScoringScheme sc;
    Params params;

    SECTION("an off-by-one junction slides to GT..AG")
    {
        std::string h_seq = "ATGGCCAAAT" // 1..10
                            "C"          // 11, last base of the true left exon
                            "GTAAAG"     // 12..17, the true canonical intron
                            "CGGTTTCCA"; // 18..26, the true right exon
        Gene h{"h", h_seq};
        std::string cds_seq = segment(h_seq, 1, 11) + segment(h_seq, 18, 26);
        CdsSequence cs = as_cds(cds_seq);

        std::vector<Block> cons = {pw::ungapped_block(1, 10, 1, 10, cs, h),
                                   pw::ungapped_block(11, 20, 17, 26, cs, h)};
        correct_junctions(cons, cs, h, sc, params);
        REQUIRE(cons.size() == 2);
        CHECK(cons[0].l == 11);
        CHECK(cons[0].b == 11);
        CHECK(cons[1].k == 12);
        CHECK(cons[1].a == 18);
        CHECK(cons[0].identity == 1.0);
        CHECK(cons[1].identity == 1.0);
        SplicedAlignment a = chain_alignment(cons, cs.length());
        REQUIRE(a.introns().size() == 1);
        CHECK(a.introns()[0] == std::pair<int, int>{11, 18});
        CHECK(intron_score(h, a.introns()[0], sc) == sc.intr_both);
    }
    SECTION("already canonical junctions stay put")
    {
        std::string h_seq = "ATGGCCAAATC" // exon 1..11
                            "GTAAAG"      // canonical intron 12..17
                            "CGGTTTCCA";  // exon 18..26
        Gene h{"h", h_seq};
        std::string cds_seq = segment(h_seq, 1, 11) + segment(h_seq, 18, 26);
        CdsSequence cs = as_cds(cds_seq);
        std::vector<Block> cons = {pw::ungapped_block(1, 11, 1, 11, cs, h),
                                   pw::ungapped_block(12, 20, 18, 26, cs, h)};
        std::vector<Block> before = cons;
        correct_junctions(cons, cs, h, sc, params);
        CHECK(cons[0].l == before[0].l);
        CHECK(cons[1].a == before[1].a);
    }
    SECTION("no reachable canonical placement leaves the junction unchanged")
    {
        std::string h_seq = "ATGGCCAAAT" + std::string(6, 'C') + "CGGTTTCCA";
        Gene h{"h", h_seq};
        std::string cds_seq = segment(h_seq, 1, 10) + segment(h_seq, 17, 25);
        CdsSequence cs = as_cds(cds_seq);
        std::vector<Block> cons = {pw::ungapped_block(1, 10, 1, 10, cs, h),
                                   pw::ungapped_block(11, 19, 17, 25, cs, h)};
        correct_junctions(cons, cs, h, sc, params);
        CHECK(cons[0].l == 10);
        CHECK(cons[1].a == 17);
    }
}

TEST_CASE("block-end correction against gene exons")
{
    ScoringScheme sc;
    std::string e1 = "AAACCCGGGTTT", in = "GTACAG", e2 = "ACACACGTGTGT";
    Gene g{"g", e1 + in + e2};
    Cds c{"c", "g", {{1, 12}, {19, 30}}};
    CdsSequence cs = cds_sequence(g, c);
    GeneExonSet ge = gene_exon_set("g", {c});

    SECTION("trim to the gene exon end, then extend the neighbour to the next exon start")
    {
        std::vector<Block> cons = {pw::ungapped_block(1, 14, 1, 14, cs, g),
                                   pw::ungapped_block(15, 24, 21, 30, cs, g)};
        int trims = correct_block_ends_gene(cons, cs.cds_exons, ge, cs, g, sc);
        CHECK(trims == 1);
        REQUIRE(cons.size() == 2);
        CHECK(cons[0].l == 12);
        CHECK(cons[0].b == 12);
        CHECK(cons[1].k == 13);
        CHECK(cons[1].a == 19);
        CHECK(cons[1].identity == 1.0);
    }
    SECTION("ends already on exon extremities are a fixed point")
    {
        std::vector<Block> cons = {pw::ungapped_block(1, 12, 1, 12, cs, g),
                                   pw::ungapped_block(13, 24, 19, 30, cs, g)};
        std::vector<Block> before = cons;
        CHECK(correct_block_ends_gene(cons, cs.cds_exons, ge, cs, g, sc) == 0);
        CHECK(cons[0].l == before[0].l);
        CHECK(cons[1].k == before[1].k);
    }
}

TEST_CASE("filter_min_identity")
{
    Rng rng(3);
    std::string seq = random_dna(rng, 20);
    CdsSequence cs = as_cds(seq);
    // second block aligned against a mismatching gene region gives identity 0.5
    std::string gene_seq = seq.substr(0, 10);
    for (int i = 0; i < 10; ++i)
        gene_seq += i % 2 == 0 ? seq[static_cast<size_t>(10 + i)] : (seq[static_cast<size_t>(10 + i)] == 'A' ? 'C' : 'A');
    Gene h{"h", gene_seq};
    std::vector<Block> cons = {pw::ungapped_block(1, 10, 1, 10, cs, h),
                               pw::ungapped_block(11, 20, 11, 20, cs, h)};
    CHECK(cons[0].identity == 1.0);
    CHECK(cons[1].identity == Catch::Approx(0.5));
    SplicedAlignment a = chain_alignment(cons, 20);

    SECTION("threshold 0 keeps everything")
    {
        SplicedAlignment f = filter_min_identity(a, 0.0);
        CHECK(f.cons().size() == 2);
    }
    SECTION("threshold 0.6 deletes the weak block")
    {
        SplicedAlignment f = filter_min_identity(a, 0.6);
        REQUIRE(f.cons().size() == 1);
        REQUIRE(f.blocks.size() == 2);
        CHECK_FALSE(f.blocks[1].conserved());
        CHECK(f.blocks[1].k == 11);
        CHECK(f.blocks[1].l == 20);
    }
    SECTION("coverage is non-increasing in the threshold")
    {
        double prev = 1.1;
        for (double t : {0.0, 0.6, 0.7, 0.75, 1.0}) {
            double cov = filter_min_identity(a, t).coverage(cs.length());
            CHECK(cov <= prev);
            prev = cov;
        }
    }
}

TEST_CASE("splice_align on a CDS against its own gene recovers the annotation")
{
    SimParams sp;
    sp.seed = 404;
    sp.n_species = 1;
    sp.exon_count_min = 3;
    sp.exon_count_max = 4;
    sp.exon_len_min = 24;
    sp.exon_len_max = 60;
    sp.intron_len_min = 20;
    sp.intron_len_max = 40;
    sp.max_cds_per_gene = 2;
    Family fam = generate_family(sp);
    Dataset ds = load_dataset(fam.fasta(), fam.annotation());
    ScoringScheme sc;
    Params params;

    for (const Cds& c : ds.cds) {
        const CdsSequence& cs = ds.cds_seqs.at(c.id);
        const Gene& g = ds.gene(c.gene_id);
        SplicedAlignment a = splice_align(cs, g, ds.gene_exons.at(c.gene_id), sc, params);
        a.validate(cs.length(), g.length());
        CHECK(a.coverage(cs.length()) == 1.0);

        std::vector<const Block*> cons = a.cons();
        REQUIRE(cons.size() == c.exons.size());
        for (size_t i = 0; i < cons.size(); ++i) {
            CHECK(cons[i]->k == cs.cds_exons[i].start);
            CHECK(cons[i]->l == cs.cds_exons[i].end);
            CHECK(cons[i]->a == c.exons[i].start);
            CHECK(cons[i]->b == c.exons[i].end);
            CHECK(cons[i]->identity == 1.0);
        }
        CHECK(a.introns() == cs.source_introns);
    }
}

TEST_CASE("splice_align against a lightly diverged homolog keeps the block structure")
{
    SimParams sp;
    sp.seed = 405;
    sp.n_species = 2;
    sp.substitution_rate = 0.025;
    sp.exon_count_min = 3;
    sp.exon_count_max = 3;
    sp.exon_len_min = 30;
    sp.exon_len_max = 60;
    sp.intron_len_min = 20;
    sp.intron_len_max = 40;
    sp.max_cds_per_gene = 1;
    Family fam = generate_family(sp);
    Dataset ds = load_dataset(fam.fasta(), fam.annotation());
    ScoringScheme sc;
    Params params;

    const CdsSequence& cs = ds.cds_seqs.at("g0c0");
    const Gene& h = ds.gene("g1");
    SplicedAlignment a = splice_align(cs, h, ds.gene_exons.at("g1"), sc, params);
    a.validate(cs.length(), h.length());
    CHECK(a.coverage(cs.length()) == 1.0);
    // same coordinates on both genes: the induced introns must equal the
    // subject's annotated introns
    std::vector<std::pair<int, int>> expect;
    for (const Cds& c : ds.cds)
        if (c.id == "g1c0")
            for (size_t i = 0; i + 1 < c.exons.size(); ++i)
                expect.emplace_back(c.exons[i].end, c.exons[i + 1].start);
    CHECK(a.introns() == expect);
}

TEST_CASE("an exon missing from the gene comes back as a deleted block")
{
    Rng rng(77);
    // the lost exon uses an {A,C} alphabet and the shared intron a {G,T}
    // interior, so no spurious conserved run can appear inside the intron
    auto random_ac = [&](int len) {
        std::string s;
        for (int i = 0; i < len; ++i) s.push_back(rng.bernoulli(0.5) ? 'A' : 'C');
        return s;
    };
    auto random_gt = [&](int len) {
        std::string s;
        for (int i = 0; i < len; ++i) s.push_back(rng.bernoulli(0.5) ? 'G' : 'T');
        return s;
    };
    std::string e1 = random_dna(rng, 30), e2 = random_ac(27), e3 = random_dna(rng, 33);
    std::string i1 = "GT" + random_gt(20) + "AG";
    std::string i2 = "GT" + random_dna(rng, 26) + "AG";
    Gene g{"g", e1 + i1 + e2 + i2 + e3};
    Gene h{"h", e1 + i1 + e3};
    Cds cg{"cg", "g",
           {{1, 30},
            {31 + static_cast<int>(i1.size()), 30 + static_cast<int>(i1.size()) + 27},
            {58 + static_cast<int>(i1.size()) + static_cast<int>(i2.size()),
             57 + static_cast<int>(i1.size()) + static_cast<int>(i2.size()) + 33}}};
    Cds ch{"ch", "h", {{1, 30}, {31 + static_cast<int>(i1.size()), 30 + static_cast<int>(i1.size()) + 33}}};
    CdsSequence cs = cds_sequence(g, cg);
    GeneExonSet ge = gene_exon_set("h", {ch});
    ScoringScheme sc;
    Params params;

    SplicedAlignment a = splice_align(cs, h, ge, sc, params);
    a.validate(cs.length(), h.length());
    REQUIRE(a.blocks.size() == 3);
    CHECK(a.blocks[0].conserved());
    CHECK(a.blocks[0].k == 1);
    CHECK(a.blocks[0].l == 30);
    CHECK_FALSE(a.blocks[1].conserved());
    CHECK(a.blocks[1].k == 31);
    CHECK(a.blocks[1].l == 57);
    CHECK(a.blocks[2].conserved());
    CHECK(a.blocks[2].k == 58);
    CHECK(a.blocks[2].b == h.length());
}

TEST_CASE("splice_align objective matches the exact optimum on toy instances")
{
    ScoringScheme sc;
    Params params;
    int checked = 0;
    for (std::uint64_t seed = 900; checked < 8; ++seed) {
        SimParams sp;
        sp.seed = seed;
        sp.n_species = 2;
        sp.substitution_rate = 0.03;
        sp.exon_count_min = 1;
        sp.exon_count_max = 3;
        sp.exon_len_min = 18;
        sp.exon_len_max = 20;
        sp.intron_len_min = 10;
        sp.intron_len_max = 16;
        sp.max_cds_per_gene = 1;
        Family fam = generate_family(sp);
        if (true_exon_divergence(fam.genes[0], fam.genes[1]) > 0.10) continue;
        Dataset ds = load_dataset(fam.fasta(), fam.annotation());
        const CdsSequence& cs = ds.cds_seqs.at("g0c0");
        const Gene& h = ds.gene("g1");
        const GeneExonSet& ge = ds.gene_exons.at("g1");

        SplicedAlignment a = splice_align(cs, h, ge, sc, params);
        long got = sap_objective(a, cs, h, cs.cds_exons, ge, sc, SapVariant::III);
        oracle::SapOracle dp(cs, h, ge, sc);
        INFO("seed " << seed);
        CHECK(got == dp.best());
        ++checked;
    }
}

TEST_CASE("step objectives never decrease when nothing is trimmed")
{
    ScoringScheme sc;
    Params params;
    for (std::uint64_t seed = 500; seed < 512; ++seed) {
        SimParams sp;
        sp.seed = seed;
        sp.n_species = 2;
        sp.substitution_rate = 0.04;
        sp.exon_count_min = 2;
        sp.exon_count_max = 4;
        sp.exon_len_min = 24;
        sp.exon_len_max = 60;
        sp.intron_len_min = 20;
        sp.intron_len_max = 50;
        sp.max_cds_per_gene = 1;
        sp.canonical_intron_prob = 0.8;
        Family fam = generate_family(sp);
        Dataset ds = load_dataset(fam.fasta(), fam.annotation());
        const CdsSequence& cs = ds.cds_seqs.at("g0c0");
        const Gene& h = ds.gene("g1");
        const GeneExonSet& ge = ds.gene_exons.at("g1");

        SpliceTrace trace;
        splice_align(cs, h, ge, sc, params, &trace);
        if (trace.trims > 0) continue;
        auto obj = [&](const std::vector<Block>& cons) {
            return sap_objective(chain_alignment(cons, cs.length()), cs, h, cs.cds_exons, ge, sc,
                                 SapVariant::III);
        };
        long o2 = obj(trace.after_step2), o3 = obj(trace.after_step3), o4 = obj(trace.after_step4),
             o5 = obj(trace.after_step5);
        INFO("seed " << seed << ": " << o2 << " " << o3 << " " << o4 << " " << o5);
        CHECK(o3 >= o2);
        CHECK(o4 >= o3);
        CHECK(o5 >= o4);
    }
}

TEST_CASE("every step preserves the chain invariants")
{
    ScoringScheme sc;
    Params params;
    for (std::uint64_t seed = 600; seed < 610; ++seed) {
        SimParams sp;
        sp.seed = seed;
        sp.n_species = 2;
        sp.substitution_rate = 0.08;
        sp.exon_count_min = 2;
        sp.exon_count_max = 5;
        sp.exon_len_min = 20;
        sp.exon_len_max = 70;
        sp.intron_len_min = 15;
        sp.intron_len_max = 60;
        sp.max_cds_per_gene = 2;
        sp.canonical_intron_prob = 0.7;
        Family fam = generate_family(sp);
        Dataset ds = load_dataset(fam.fasta(), fam.annotation());
        for (const Cds& c : ds.cds) {
            for (const auto& [gid, g] : ds.genes) {
                SplicedAlignment a =
                    splice_align(ds.cds_seqs.at(c.id), g, ds.gene_exons.at(gid), sc, params);
                a.validate(ds.cds_seqs.at(c.id).length(), g.length());
            }
        }
    }
}
