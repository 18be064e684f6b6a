#pragma once

// Dataset loading and the all-pairs alignment driver. Pairwise tasks run on
// a small worker pool; results land in pre-assigned slots so output bytes
// never depend on the thread count.

#include <atomic>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "exonalign/common.hpp"
#include "exonalign/downstream.hpp"
#include "exonalign/metrics.hpp"
#include "exonalign/msa_spliced.hpp"
#include "exonalign/ortho_pair.hpp"
#include "exonalign/pairwise.hpp"
#include "exonalign/scoring.hpp"
#include "exonalign/seqmodel.hpp"

namespace exonalign {

struct Dataset {
    std::map<std::string, Gene> genes;
    std::vector<Cds> cds; // sorted by id
    std::map<std::string, CdsSequence> cds_seqs;
    std::map<std::string, GeneExonSet> gene_exons;

    const Gene& gene(const std::string& id) const
    {
        auto it = genes.find(id);
        if (it == genes.end()) throw InputError("unknown gene '" + id + "'");
        return it->second;
    }

    std::map<std::string, std::string> cds_gene_map() const
    {
        std::map<std::string, std::string> out;
        for (const Cds& c : cds) out[c.id] = c.gene_id;
        return out;
    }

    Registry registry() const
    {
        Registry reg;
        for (const auto& [id, g] : genes) reg[id] = SeqInfo{false, g.length()};
        for (const auto& [id, cs] : cds_seqs) reg[id] = SeqInfo{true, cs.length()};
        return reg;
    }

    // id -> raw sequence, genes and CDS together
    std::map<std::string, std::string> all_sequences() const
    {
        std::map<std::string, std::string> out;
        for (const auto& [id, g] : genes) out[id] = g.seq;
        for (const auto& [id, cs] : cds_seqs) out[id] = cs.seq;
        return out;
    }

    std::map<std::string, std::vector<Exon>> cds_exon_map() const
    {
        std::map<std::string, std::vector<Exon>> out;
        for (const auto& [id, cs] : cds_seqs) out[id] = cs.cds_exons;
        return out;
    }
};

inline Dataset load_dataset(const std::string& fasta_text, const std::string& annotation_text)
{
    Dataset ds;
    for (auto& [id, seq] : parse_fasta(fasta_text)) ds.genes[id] = Gene{id, seq};
    ds.cds = parse_annotation(annotation_text);
    std::sort(ds.cds.begin(), ds.cds.end(), [](const Cds& a, const Cds& b) { return a.id < b.id; });
    std::set<std::string> ids;
    for (const Cds& c : ds.cds) {
        if (!ids.insert(c.id).second) throw InputError("duplicate CDS id '" + c.id + "'");
        if (ds.genes.count(c.id)) throw InputError("CDS id '" + c.id + "' collides with a gene id");
        const Gene& g = ds.gene(c.gene_id);
        ds.cds_seqs[c.id] = cds_sequence(g, c); // validates exon bounds
    }
    for (const auto& [id, g] : ds.genes) ds.gene_exons[id] = gene_exon_set(id, ds.cds);
    return ds;
}

// (CDS, gene) tasks in deterministic order.
inline std::vector<std::pair<std::string, std::string>> alignment_pairs(const Dataset& ds,
                                                                        bool include_self)
{
    std::vector<std::pair<std::string, std::string>> out;
    for (const Cds& c : ds.cds)
        for (const auto& [gid, g] : ds.genes) {
            if (!include_self && gid == c.gene_id) continue;
            out.emplace_back(c.id, gid);
        }
    return out;
}

// Aligns every requested (CDS, gene) pair. Results come back ordered by
// (cds_id, gene_id) regardless of the thread count.
inline std::vector<SplicedAlignment> align_all_pairs(const Dataset& ds,
                                                     const ScoringScheme& scheme,
                                                     const Params& params, bool include_self,
                                                     int threads)
{
    std::vector<std::pair<std::string, std::string>> pairs = alignment_pairs(ds, include_self);
    std::vector<SplicedAlignment> results(pairs.size());
    if (threads < 1) threads = 1;
    threads = std::min<int>(threads, static_cast<int>(pairs.size()) > 0 ? static_cast<int>(pairs.size()) : 1);

    std::atomic<size_t> next{0};
    std::vector<std::string> errors(static_cast<size_t>(threads));
    auto worker = [&](int tid) {
        try {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= pairs.size()) break;
                const auto& [cid, gid] = pairs[i];
                results[i] = splice_align(ds.cds_seqs.at(cid), ds.gene(gid), ds.gene_exons.at(gid),
                                          scheme, params);
            }
        } catch (const std::exception& e) {
            errors[static_cast<size_t>(tid)] = e.what();
        }
    };
    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
        for (std::thread& t : pool) t.join();
    }
    for (const std::string& e : errors)
        if (!e.empty()) throw InternalError("alignment worker failed: " + e);
    return results;
}

// ---------------------------------------------------------------------------
// Full pipeline: every product as a named file image. Writing is left to the
// caller; the byte map itself is what determinism tests compare.
// ---------------------------------------------------------------------------

struct PipelineOutput {
    std::map<std::string, std::string> files; // relative name -> content
};

inline PipelineOutput run_pipeline(const Dataset& ds, const ScoringScheme& scheme,
                                   const Params& params, OrthologyMode mode, int threads)
{
    PipelineOutput out;

    // pairwise alignments between CDS and the other genes
    std::vector<SplicedAlignment> cross = align_all_pairs(ds, scheme, params, false, threads);
    for (const SplicedAlignment& a : cross)
        out.files["alignments/" + a.cds_id + "__" + a.gene_id + ".tsv"] = alignment_to_tsv(a);

    // pairwise orthology clusters
    ClusterSet pw_clusters = cluster_orthologs(ds.cds, cross, mode);
    out.files["clusters_pairwise.tsv"] = pw_clusters.to_text();

    // multiple spliced alignment over all pairs, own gene included
    std::vector<SplicedAlignment> all = align_all_pairs(ds, scheme, params, true, threads);
    MultipleSplicedAlignment msa = build_msa(all, ds.registry(), params);
    out.files["msa.tsv"] = msa_to_tsv(msa);

    // clusters from the multiple spliced alignment
    MsaClusters mc = cluster_from_msa(msa, ds.cds_gene_map());
    out.files["clusters_multi.tsv"] = msa_clusters_to_text(mc, ds.cds_gene_map());
    out.files["cluster_pairs_multi.tsv"] = pair_labels_to_text(mc);

    // multiple CDS alignment
    MultiColumnAlignment mca = multiple_cds_alignment(msa, ds.all_sequences(), scheme);
    out.files["cds_msa.fasta"] = aligned_fasta(mca, msa.registry);

    // metrics
    std::string report = pairwise_metrics_header();
    for (const SplicedAlignment& a : cross) {
        PairwiseMetrics pm = pairwise_metrics(a, ds.cds_seqs.at(a.cds_id),
                                              ds.gene_exons.at(a.gene_id), ds.gene(a.gene_id));
        report += pairwise_metrics_row(a.cds_id, a.gene_id, pm);
    }
    out.files["metrics_pairwise.tsv"] = report;
    out.files["metrics_msa.tsv"] = msa_metrics_text(msa_metrics(mca, ds.cds_exon_map(), msa.registry));

    return out;
}

} // namespace exonalign
