#include <catch2/catch_amalgamated.hpp>

#include "exonalign/metrics.hpp"
#include "exonalign/pairwise.hpp"
#include "exonalign/pipeline.hpp"
#include "exonalign/simulate.hpp"

using namespace exonalign;

TEST_CASE("pairwise metrics on a self-alignment")
{
    SimParams sp;
    sp.seed = 88;
    sp.n_species = 1;
    sp.exon_count_min = 3;
    sp.exon_count_max = 3;
    sp.exon_len_min = 24;
    sp.exon_len_max = 45;
    sp.intron_len_min = 20;
    sp.intron_len_max = 35;
    sp.canonical_intron_prob = 0.5; // mix of canonical and non-canonical introns
    sp.max_cds_per_gene = 1;
    Family fam = generate_family(sp);
    Dataset ds = load_dataset(fam.fasta(), fam.annotation());
    ScoringScheme sc;
    Params params;

    const Cds& c = ds.cds.front();
    const CdsSequence& cs = ds.cds_seqs.at(c.id);
    const Gene& g = ds.gene(c.gene_id);
    SplicedAlignment a = splice_align(cs, g, ds.gene_exons.at(c.gene_id), sc, params);
    PairwiseMetrics pm = pairwise_metrics(a, cs, ds.gene_exons.at(c.gene_id), g);

    CHECK(pm.coverage == 1.0);
    CHECK(pm.cds_exon_extremity_ratio == 1.0);
    CHECK(pm.gene_exon_extremity_ratio == 1.0);

    // (D) equals the fraction of annotated introns that are canonical
    int canonical = 0;
    for (auto in : cs.source_introns)
        if (intron_score(g, in, sc) == sc.intr_both) ++canonical;
    CHECK(pm.canonical_intron_ratio ==
          Catch::Approx(static_cast<double>(canonical) / cs.source_introns.size()));
    CHECK(pm.intron_count == static_cast<int>(cs.source_introns.size()));

    SECTION("(B)-(D) recomputed from the TSV file match the in-memory values")
    {
        SplicedAlignment back = alignment_from_tsv(alignment_to_tsv(a));
        PairwiseMetrics pm2 = pairwise_metrics(back, cs, ds.gene_exons.at(c.gene_id), g);
        CHECK(pm2.coverage == pm.coverage);
        CHECK(pm2.cds_exon_extremity_ratio == pm.cds_exon_extremity_ratio);
        CHECK(pm2.gene_exon_extremity_ratio == pm.gene_exon_extremity_ratio);
        CHECK(pm2.canonical_intron_ratio == pm.canonical_intron_ratio);
    }
}

TEST_CASE("pairwise metrics flag degenerate alignments")
{
    Gene g{"g", std::string(50, 'A')};
    CdsSequence cs;
    cs.cds_id = "c";
    cs.seq = std::string(20, 'C');
    cs.cds_exons = {{1, 20}};
    GeneExonSet ge;
    ge.gene_id = "g";

    SplicedAlignment all_deleted;
    all_deleted.cds_id = "c";
    all_deleted.gene_id = "g";
    all_deleted.blocks.push_back(Block::make_deleted(1, 20));
    PairwiseMetrics pm = pairwise_metrics(all_deleted, cs, ge, g);
    CHECK(pm.coverage == 0.0);
    CHECK(pm.cds_exon_extremity_ratio == 0.0);
    CHECK(pm.gene_exon_extremity_ratio == 0.0);
    CHECK(pm.canonical_intron_ratio == 0.0);
    CHECK(pm.insufficient);
}

TEST_CASE("coverage is non-increasing in min_idty")
{
    SimParams sp;
    sp.seed = 89;
    sp.n_species = 2;
    sp.substitution_rate = 0.10;
    sp.exon_count_min = 2;
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
    params.min_idty = 0.0;

    for (const SplicedAlignment& a : align_all_pairs(ds, sc, params, false, 1)) {
        double prev = 1.1;
        int m = ds.cds_seqs.at(a.cds_id).length();
        for (double t : {0.0, 0.6, 0.7, 0.75}) {
            double cov = filter_min_identity(a, t).coverage(m);
            CHECK(cov <= prev);
            prev = cov;
        }
    }
}

TEST_CASE("msa metrics: column identity and the long-gap rule")
{
    Registry reg;
    reg["x"] = {true, 60};
    reg["y"] = {true, 40};
    std::map<std::string, std::vector<Exon>> ann;
    ann["x"] = {{1, 20}, {21, 60}};
    ann["y"] = {{1, 20}, {21, 40}};

    SECTION("gap-free identical alignment")
    {
        MultiColumnAlignment m;
        m.rows["x"] = std::string(40, 'A');
        m.rows["y"] = std::string(40, 'A');
        m.columns = 40;
        Registry reg2;
        reg2["x"] = {true, 40};
        reg2["y"] = {true, 40};
        std::map<std::string, std::vector<Exon>> ann2;
        ann2["x"] = {{1, 40}};
        ann2["y"] = {{1, 40}};
        MsaMetrics mm = msa_metrics(m, ann2, reg2);
        CHECK(mm.column_identity == 1.0);
        CHECK(mm.long_gaps_total == 0);
        CHECK(mm.no_long_gaps);
        CHECK(mm.long_gap_real_ratio == 1.0);
    }
    SECTION("a 19-column gap is not long; a 20-column gap at an exon junction is long and real")
    {
        // y: 20 nt, gap run, then 20 nt; x fills all columns
        for (int gap_len : {19, 20}) {
            MultiColumnAlignment m;
            int cols = 40 + gap_len;
            m.columns = cols;
            m.rows["x"] = std::string(static_cast<size_t>(cols), 'A');
            m.rows["y"] = std::string(20, 'A') + std::string(static_cast<size_t>(gap_len), '-') +
                          std::string(20, 'A');
            Registry reg2;
            reg2["x"] = {true, cols};
            reg2["y"] = {true, 40};
            std::map<std::string, std::vector<Exon>> ann2;
            ann2["x"] = {{1, cols}};
            ann2["y"] = {{1, 20}, {21, 40}};
            MsaMetrics mm = msa_metrics(m, ann2, reg2);
            if (gap_len == 19) {
                CHECK(mm.long_gaps_total == 0);
            } else {
                CHECK(mm.long_gaps_total == 1);
                CHECK(mm.long_gaps_real == 1);
                CHECK(mm.long_gap_real_ratio == 1.0);
            }
        }
    }
    SECTION("a 20-column gap inside an exon is long but not real")
    {
        MultiColumnAlignment m;
        m.columns = 60;
        m.rows["x"] = std::string(60, 'A');
        m.rows["y"] = std::string(10, 'A') + std::string(20, '-') + std::string(30, 'A');
        Registry reg2;
        reg2["x"] = {true, 60};
        reg2["y"] = {true, 40};
        std::map<std::string, std::vector<Exon>> ann2;
        ann2["x"] = {{1, 60}};
        ann2["y"] = {{1, 20}, {21, 40}}; // the gap sits after position 10, inside exon 1
        MsaMetrics mm = msa_metrics(m, ann2, reg2);
        CHECK(mm.long_gaps_total == 1);
        CHECK(mm.long_gaps_real == 0);
        CHECK(mm.long_gap_real_ratio == 0.0);
    }
    SECTION("leading and trailing gap runs are not long gaps")
    {
        MultiColumnAlignment m;
        m.columns = 60;
        m.rows["x"] = std::string(60, 'A');
        m.rows["y"] = std::string(25, '-') + std::string(10, 'A') + std::string(25, '-');
        Registry reg2;
        reg2["x"] = {true, 60};
        reg2["y"] = {true, 10};
        std::map<std::string, std::vector<Exon>> ann2;
        ann2["x"] = {{1, 60}};
        ann2["y"] = {{1, 10}};
        MsaMetrics mm = msa_metrics(m, ann2, reg2);
        CHECK(mm.long_gaps_total == 0);
    }
    SECTION("column identity needs two non-gap rows and ignores all-N columns")
    {
        MultiColumnAlignment m;
        m.columns = 4;
        m.rows["x"] = "AC-N";
        m.rows["y"] = "AG-N";
        m.rows["z"] = "A--N";
        Registry reg3;
        reg3["x"] = {true, 3};
        reg3["y"] = {true, 3};
        reg3["z"] = {true, 2};
        std::map<std::string, std::vector<Exon>> ann3;
        ann3["x"] = {{1, 3}};
        ann3["y"] = {{1, 3}};
        ann3["z"] = {{1, 2}};
        MsaMetrics mm = msa_metrics(m, ann3, reg3);
        // column 1: identical over three rows; column 2: mismatch; column 3:
        // no non-gap pair; column 4: N never matches
        CHECK(mm.column_identity == Catch::Approx(0.25));
    }
}

TEST_CASE("long gaps on a generated family mostly fall on real junctions")
{
    SimParams sp;
    sp.seed = 90;
    sp.n_species = 3;
    sp.substitution_rate = 0.02;
    sp.exon_count_min = 3;
    sp.exon_count_max = 4;
    sp.exon_len_min = 30;
    sp.exon_len_max = 60;
    sp.intron_len_min = 40;
    sp.intron_len_max = 80;
    sp.max_cds_per_gene = 3;
    sp.exon_skip_prob = 0.4;
    Family fam = generate_family(sp);
    Dataset ds = load_dataset(fam.fasta(), fam.annotation());
    ScoringScheme sc;
    Params params;

    std::vector<SplicedAlignment> all = align_all_pairs(ds, sc, params, true, 2);
    MultipleSplicedAlignment msa = build_msa(all, ds.registry(), params);
    MultiColumnAlignment mca = multiple_cds_alignment(msa, ds.all_sequences(), sc);
    MsaMetrics mm = msa_metrics(mca, ds.cds_exon_map(), ds.registry());
    INFO("long gaps: " << mm.long_gaps_real << "/" << mm.long_gaps_total);
    CHECK(mm.long_gaps_total >= 1);
    CHECK(mm.long_gap_real_ratio >= 0.8);
}
