#include <catch2/catch_amalgamated.hpp>

#include "exonalign/pipeline.hpp"
#include "exonalign/simulate.hpp"

using namespace exonalign;

TEST_CASE("same seed twice gives byte-identical output")
{
    SimParams sp;
    sp.seed = 7;
    sp.n_species = 4;
    sp.substitution_rate = 0.05;
    sp.exon_loss_prob = 0.2;
    sp.exon_duplication_prob = 0.2;
    sp.canonical_intron_prob = 0.8;
    Family a = generate_family(sp);
    Family b = generate_family(sp);
    CHECK(a.fasta() == b.fasta());
    CHECK(a.annotation() == b.annotation());
    CHECK(a.truth_tsv() == b.truth_tsv());

    SimParams sp2 = sp;
    sp2.seed = 8;
    Family c = generate_family(sp2);
    CHECK(a.fasta() != c.fasta());
}

TEST_CASE("zero divergence groups CDS by exon-skipping pattern")
{
    SimParams sp;
    sp.seed = 11;
    sp.n_species = 3;
    sp.substitution_rate = 0.0;
    sp.exon_count_min = 3;
    sp.exon_count_max = 3;
    sp.max_cds_per_gene = 4;
    sp.exon_skip_prob = 0.4;
    Family fam = generate_family(sp);

    // expected: same group iff identical exon-index pattern
    std::map<std::string, std::vector<int>> pattern;
    for (const SimCds& c : fam.cds) pattern[c.id] = c.exon_indices;
    for (const auto& cluster : fam.truth_clusters.clusters)
        for (size_t i = 1; i < cluster.size(); ++i)
            CHECK(pattern.at(cluster[i]) == pattern.at(cluster[0]));
    // CDS of the same pattern from different genes must share a cluster
    std::map<std::vector<int>, std::set<std::string>> by_pattern;
    for (const SimCds& c : fam.cds) by_pattern[c.exon_indices].insert(c.id);
    std::map<std::string, size_t> where;
    for (size_t i = 0; i < fam.truth_clusters.clusters.size(); ++i)
        for (const std::string& id : fam.truth_clusters.clusters[i]) where[id] = i;
    for (const auto& [pat, members] : by_pattern) {
        size_t w = where.at(*members.begin());
        for (const std::string& id : members) CHECK(where.at(id) == w);
    }
}

TEST_CASE("exon duplication events are logged and materialized")
{
    SimParams sp;
    sp.seed = 3;
    sp.n_species = 2;
    sp.exon_duplication_prob = 1.0;
    sp.exon_count_min = 2;
    sp.exon_count_max = 2;
    Family fam = generate_family(sp);
    bool logged = false;
    for (const std::string& e : fam.events)
        if (e.find("exon_duplication") != std::string::npos) logged = true;
    CHECK(logged);
    bool grew = false;
    for (const SimGene& g : fam.genes)
        if (g.exons.size() > 2) grew = true;
    CHECK(grew);
    // a duplicated exon shares its ancestry marker with the original
    bool repeated = false;
    for (const SimGene& g : fam.genes) {
        std::set<int> roots;
        for (const SimExon& e : g.exons)
            if (!roots.insert(e.root_id).second) repeated = true;
    }
    CHECK(repeated);
}

TEST_CASE("canonical introns stay GT..AG in the emitted sequence")
{
    SimParams sp;
    sp.seed = 19;
    sp.n_species = 4;
    sp.substitution_rate = 0.25; // heavy mutation; splice sites are protected
    sp.canonical_intron_prob = 1.0;
    Family fam = generate_family(sp);
    for (const SimGene& g : fam.genes) {
        std::string seq = g.sequence();
        std::vector<Exon> coords = g.exon_coords();
        for (size_t i = 0; i + 1 < coords.size(); ++i) {
            int lo = coords[i].end + 1;
            int hi = coords[i + 1].start - 1;
            REQUIRE(hi - lo + 1 >= 4);
            CHECK(seq.substr(static_cast<size_t>(lo - 1), 2) == "GT");
            CHECK(seq.substr(static_cast<size_t>(hi - 2), 2) == "AG");
        }
    }
}

TEST_CASE("emitted files load back into a dataset")
{
    SimParams sp;
    sp.seed = 23;
    sp.n_species = 3;
    sp.exon_loss_prob = 0.3;
    sp.exon_duplication_prob = 0.3;
    sp.max_cds_per_gene = 3;
    Family fam = generate_family(sp);
    Dataset ds = load_dataset(fam.fasta(), fam.annotation());
    CHECK(ds.genes.size() == 3);
    CHECK(ds.cds.size() == fam.cds.size());
    for (const auto& [id, cs] : ds.cds_seqs) {
        CHECK(cs.length() > 0);
        CHECK(cs.cds_exons.size() >= 1);
    }
    // truth clusters partition exactly the CDS ids
    std::set<std::string> in_truth;
    for (const auto& cluster : fam.truth_clusters.clusters)
        for (const std::string& id : cluster) CHECK(in_truth.insert(id).second);
    CHECK(in_truth.size() == fam.cds.size());
}

TEST_CASE("divergence measurement responds to the substitution rate")
{
    SimParams sp;
    sp.seed = 29;
    sp.n_species = 2;
    sp.exon_count_min = 4;
    sp.exon_count_max = 4;
    sp.exon_len_min = 60;
    sp.exon_len_max = 90;

    sp.substitution_rate = 0.0;
    Family zero = generate_family(sp);
    CHECK(true_exon_divergence(zero.genes[0], zero.genes[1]) == 0.0);

    sp.substitution_rate = 0.08;
    Family hot = generate_family(sp);
    double d = true_exon_divergence(hot.genes[0], hot.genes[1]);
    CHECK(d > 0.05);
    CHECK(d < 0.30);
}
