// exonalign command-line front end.
//
// Subcommands drive the library end to end: simulate synthetic families,
// compute pairwise spliced alignments, cluster CDS into ortholog groups,
// build the multiple spliced alignment and the multiple CDS alignment, and
// evaluate alignments. All commands are deterministic; --threads changes
// wall time only, never output bytes.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "exonalign/anchors.hpp"
#include "exonalign/pipeline.hpp"
#include "exonalign/simulate.hpp"
#include "exonalign/version.hpp"

namespace fs = std::filesystem;
using namespace exonalign;

namespace {

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content)
{
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << content;
}

struct CommonOpts {
    std::string fasta, annot, scoring_path;
    std::string mode = "permissive";
    double min_idty = 0.60, epsilon = 50, tau = 0.60;
    int threads = 1;

    void add_io(CLI::App* cmd)
    {
        cmd->add_option("--fasta", fasta, "gene sequences, FASTA")->required();
        cmd->add_option("--annot", annot, "CDS annotation TSV (gene_id cds_id start end)")
            ->required();
    }
    void add_tuning(CLI::App* cmd)
    {
        cmd->add_option("--scoring", scoring_path, "key=value scoring/parameter config file");
        cmd->add_option("--min-idty", min_idty, "minimal block identity; weaker blocks are discarded")
            ->capture_default_str();
        cmd->add_option("--epsilon", epsilon, "segment compatibility slack")->capture_default_str();
        cmd->add_option("--tau", tau, "correct-block identity threshold")->capture_default_str();
        cmd->add_option("--threads", threads, "worker threads for pairwise alignment")
            ->capture_default_str();
    }

    std::pair<ScoringScheme, Params> resolve() const
    {
        ScoringScheme scheme;
        Params params;
        if (!scoring_path.empty()) load_config_file(scoring_path, scheme, params);
        params.min_idty = min_idty;
        params.epsilon = static_cast<int>(epsilon);
        params.tau = tau;
        scheme.validate();
        params.validate();
        return {scheme, params};
    }

    Dataset dataset() const { return load_dataset(read_file(fasta), read_file(annot)); }
};

// Adapter for --aligner-cmd: the command is invoked as
//   <cmd> <input.fasta> <output.fasta>
SegmentAligner external_aligner(const std::string& cmd)
{
    return [cmd](const std::vector<std::pair<std::string, std::string>>& segs) {
        fs::path dir = fs::temp_directory_path() / ("exonalign_mb_" + std::to_string(::getpid()));
        fs::create_directories(dir);
        fs::path in = dir / "in.fasta", out = dir / "out.fasta";
        {
            std::ofstream f(in);
            for (const auto& [id, seq] : segs) f << ">" << id << "\n" << seq << "\n";
        }
        std::string full = cmd + " " + in.string() + " " + out.string();
        int rc = std::system(full.c_str());
        if (rc != 0) throw InputError("external aligner failed: " + full);
        std::map<std::string, std::string> rows;
        for (auto& [id, row] : parse_fasta(read_file(out.string()))) rows[id] = row;
        fs::remove_all(dir);
        // external tools may emit '-' columns; parse_fasta rejects them, so
        // re-read leniently when that happens
        return rows;
    };
}

// parse_fasta rejects '-', so aligned FASTA needs its own reader.
std::map<std::string, std::string> parse_aligned_fasta(const std::string& text)
{
    std::map<std::string, std::string> rows;
    std::istringstream in(text);
    std::string line, id;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '>') {
            std::string header = t.substr(1);
            size_t sp = header.find_first_of(" \t");
            id = sp == std::string::npos ? header : header.substr(0, sp);
            rows[id] = "";
        } else {
            if (id.empty()) throw InputError("aligned FASTA: sequence before header");
            for (char c : t)
                rows[id].push_back(c == '-' ? '-' : static_cast<char>(std::toupper(
                                                        static_cast<unsigned char>(c))));
        }
    }
    return rows;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"structure-aware spliced alignment of CDS onto homologous genes\n"
                 "(inputs must be sense-strand sequences)"};
    app.set_version_flag("--version", std::string(version_string()));
    app.require_subcommand(1);

    CommonOpts opts;

    // ---- simulate -------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "generate a synthetic gene family with ground truth");
    SimParams sp;
    std::string sim_out = "simdata";
    sim->add_option("--seed", sp.seed, "RNG seed")->capture_default_str();
    sim->add_option("--species", sp.n_species, "number of leaf genes")->capture_default_str();
    sim->add_option("--sub-rate", sp.substitution_rate, "substitutions per site per branch")
        ->capture_default_str();
    sim->add_option("--dup-prob", sp.duplication_prob, "gene duplication probability per split")
        ->capture_default_str();
    sim->add_option("--exon-count-min", sp.exon_count_min)->capture_default_str();
    sim->add_option("--exon-count-max", sp.exon_count_max)->capture_default_str();
    sim->add_option("--exon-len-min", sp.exon_len_min)->capture_default_str();
    sim->add_option("--exon-len-max", sp.exon_len_max)->capture_default_str();
    sim->add_flag("--exon-len-x3", sp.exon_len_multiple_of3, "force exon lengths to multiples of 3");
    sim->add_option("--intron-len-min", sp.intron_len_min)->capture_default_str();
    sim->add_option("--intron-len-max", sp.intron_len_max)->capture_default_str();
    sim->add_option("--exon-loss-prob", sp.exon_loss_prob)->capture_default_str();
    sim->add_option("--exon-dup-prob", sp.exon_duplication_prob)->capture_default_str();
    sim->add_option("--canonical-prob", sp.canonical_intron_prob)->capture_default_str();
    sim->add_option("--max-cds", sp.max_cds_per_gene, "CDS variants per gene")->capture_default_str();
    sim->add_option("--skip-prob", sp.exon_skip_prob, "per-exon skipping probability")
        ->capture_default_str();
    sim->add_option("--out", sim_out, "output directory")->capture_default_str();

    // ---- align-pair / align-all ----------------------------------------
    auto* ap = app.add_subcommand("align-pair", "spliced alignment of one CDS onto one gene");
    std::string ap_cds, ap_gene, ap_out;
    opts.add_io(ap);
    opts.add_tuning(ap);
    ap->add_option("--cds", ap_cds, "CDS id")->required();
    ap->add_option("--gene", ap_gene, "gene id")->required();
    ap->add_option("--out", ap_out, "output TSV (stdout when omitted)");

    auto* aa = app.add_subcommand("align-all",
                                  "spliced alignments of every CDS onto every other gene");
    std::string aa_out = "alignments";
    opts.add_io(aa);
    opts.add_tuning(aa);
    aa->add_option("--out", aa_out, "output directory, one TSV per (CDS, gene) pair")
        ->capture_default_str();

    // ---- cluster-pairwise ----------------------------------------------
    auto* cp = app.add_subcommand("cluster-pairwise",
                                  "CDS ortholog groups from reciprocal pairwise alignments");
    std::string cp_out;
    opts.add_io(cp);
    opts.add_tuning(cp);
    cp->add_option("--mode", opts.mode, "permissive | reciprocal")->capture_default_str();
    cp->add_option("--out", cp_out, "output cluster file (stdout when omitted)");

    // ---- msa -------------------------------------------------------------
    auto* ms = app.add_subcommand("msa", "multiple spliced alignment (multi-block TSV)");
    std::string ms_out;
    opts.add_io(ms);
    opts.add_tuning(ms);
    ms->add_option("--out", ms_out, "output TSV (stdout when omitted)");

    // ---- cluster-multi ---------------------------------------------------
    auto* cm = app.add_subcommand("cluster-multi",
                                  "ortholog and close-paralog groups from the multiple alignment");
    std::string cm_out, cm_pairs;
    opts.add_io(cm);
    opts.add_tuning(cm);
    cm->add_option("--out", cm_out, "cluster file with P/O flag column (stdout when omitted)");
    cm->add_option("--pairs-out", cm_pairs, "optional per-pair label file");

    // ---- cds-msa ----------------------------------------------------------
    auto* cx = app.add_subcommand("cds-msa", "multiple CDS alignment (aligned FASTA)");
    std::string cx_out, cx_aligner;
    opts.add_io(cx);
    opts.add_tuning(cx);
    cx->add_option("--out", cx_out, "aligned FASTA (stdout when omitted)");
    cx->add_option("--aligner-cmd", cx_aligner,
                   "external per-multi-block aligner, run as: CMD in.fasta out.fasta");

    // ---- evaluate ----------------------------------------------------------
    auto* ev = app.add_subcommand("evaluate", "metrics over alignment TSVs and/or an aligned FASTA");
    std::string ev_dir, ev_msa, ev_out;
    opts.add_io(ev);
    ev->add_option("--alignments", ev_dir, "directory of pairwise alignment TSVs");
    ev->add_option("--msa-fasta", ev_msa, "aligned FASTA from cds-msa");
    ev->add_option("--out", ev_out, "output report (stdout when omitted)");

    // ---- calibrate ----------------------------------------------------------
    auto* cal = app.add_subcommand("calibrate",
                                   "estimate anchor tier thresholds from a random-sequence null model");
    int cal_trials = 500, cal_len = 300;
    std::uint64_t cal_seed = 12345;
    cal->add_option("--trials", cal_trials)->capture_default_str();
    cal->add_option("--len", cal_len)->capture_default_str();
    cal->add_option("--seed", cal_seed)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        auto emit = [&](const std::string& path, const std::string& content) {
            if (path.empty()) std::cout << content;
            else write_file(path, content);
        };

        if (sim->parsed()) {
            Family fam = generate_family(sp);
            write_file((fs::path(sim_out) / "genes.fasta").string(), fam.fasta());
            write_file((fs::path(sim_out) / "annotation.tsv").string(), fam.annotation());
            write_file((fs::path(sim_out) / "truth.tsv").string(), fam.truth_tsv());
            std::cerr << "wrote " << fam.genes.size() << " genes, " << fam.cds.size()
                      << " CDS to " << sim_out << "\n";
        } else if (ap->parsed()) {
            auto [scheme, params] = opts.resolve();
            Dataset ds = opts.dataset();
            if (!ds.cds_seqs.count(ap_cds)) throw InputError("unknown CDS '" + ap_cds + "'");
            const Gene& gene = ds.gene(ap_gene); // rejects unknown gene ids
            SplicedAlignment a =
                splice_align(ds.cds_seqs.at(ap_cds), gene, ds.gene_exons.at(ap_gene), scheme, params);
            emit(ap_out, alignment_to_tsv(a));
        } else if (aa->parsed()) {
            auto [scheme, params] = opts.resolve();
            Dataset ds = opts.dataset();
            std::vector<SplicedAlignment> all =
                align_all_pairs(ds, scheme, params, false, opts.threads);
            for (const SplicedAlignment& a : all)
                write_file((fs::path(aa_out) / (a.cds_id + "__" + a.gene_id + ".tsv")).string(),
                           alignment_to_tsv(a));
            std::cerr << "wrote " << all.size() << " alignment files to " << aa_out << "\n";
        } else if (cp->parsed()) {
            auto [scheme, params] = opts.resolve();
            Dataset ds = opts.dataset();
            std::vector<SplicedAlignment> all =
                align_all_pairs(ds, scheme, params, false, opts.threads);
            ClusterSet cl = cluster_orthologs(ds.cds, all, parse_mode(opts.mode));
            emit(cp_out, cl.to_text());
        } else if (ms->parsed()) {
            auto [scheme, params] = opts.resolve();
            Dataset ds = opts.dataset();
            std::vector<SplicedAlignment> all =
                align_all_pairs(ds, scheme, params, true, opts.threads);
            MultipleSplicedAlignment msa = build_msa(all, ds.registry(), params);
            emit(ms_out, msa_to_tsv(msa));
            for (const std::string& d : msa.diagnostics) std::cerr << "note: " << d << "\n";
        } else if (cm->parsed()) {
            auto [scheme, params] = opts.resolve();
            Dataset ds = opts.dataset();
            std::vector<SplicedAlignment> all =
                align_all_pairs(ds, scheme, params, true, opts.threads);
            MultipleSplicedAlignment msa = build_msa(all, ds.registry(), params);
            MsaClusters mc = cluster_from_msa(msa, ds.cds_gene_map());
            emit(cm_out, msa_clusters_to_text(mc, ds.cds_gene_map()));
            if (!cm_pairs.empty()) write_file(cm_pairs, pair_labels_to_text(mc));
        } else if (cx->parsed()) {
            auto [scheme, params] = opts.resolve();
            Dataset ds = opts.dataset();
            std::vector<SplicedAlignment> all =
                align_all_pairs(ds, scheme, params, true, opts.threads);
            MultipleSplicedAlignment msa = build_msa(all, ds.registry(), params);
            SegmentAligner hook;
            if (!cx_aligner.empty()) hook = external_aligner(cx_aligner);
            MultiColumnAlignment mca =
                multiple_cds_alignment(msa, ds.all_sequences(), scheme, hook);
            emit(cx_out, aligned_fasta(mca, msa.registry));
        } else if (ev->parsed()) {
            Dataset ds = opts.dataset();
            std::string report;
            if (!ev_dir.empty()) {
                report += pairwise_metrics_header();
                std::vector<fs::path> files;
                for (const auto& entry : fs::directory_iterator(ev_dir))
                    if (entry.path().extension() == ".tsv") files.push_back(entry.path());
                std::sort(files.begin(), files.end());
                for (const fs::path& f : files) {
                    SplicedAlignment a = alignment_from_tsv(read_file(f.string()));
                    if (!ds.cds_seqs.count(a.cds_id) || !ds.genes.count(a.gene_id))
                        throw InputError("alignment file " + f.string() +
                                         " references unknown sequences");
                    PairwiseMetrics pm =
                        pairwise_metrics(a, ds.cds_seqs.at(a.cds_id), ds.gene_exons.at(a.gene_id),
                                         ds.gene(a.gene_id));
                    report += pairwise_metrics_row(a.cds_id, a.gene_id, pm);
                }
            }
            if (!ev_msa.empty()) {
                MultiColumnAlignment mca;
                mca.rows = parse_aligned_fasta(read_file(ev_msa));
                if (mca.rows.empty()) throw InputError("empty aligned FASTA");
                mca.columns = static_cast<int>(mca.rows.begin()->second.size());
                Registry reg = ds.registry();
                for (const auto& [id, row] : mca.rows) {
                    if (!reg.count(id)) throw InputError("aligned FASTA row '" + id + "' unknown");
                    if (static_cast<int>(row.size()) != mca.columns)
                        throw InputError("aligned FASTA rows have unequal lengths");
                    if (reg.at(id).is_cds) {
                        std::string stripped;
                        for (char c : row)
                            if (c != '-') stripped.push_back(c);
                        if (stripped != ds.cds_seqs.at(id).seq)
                            throw InputError("aligned FASTA row '" + id +
                                             "' does not strip back to the CDS sequence");
                    }
                }
                report += msa_metrics_text(msa_metrics(mca, ds.cds_exon_map(), reg));
            }
            if (ev_dir.empty() && ev_msa.empty())
                throw InputError("evaluate: give --alignments and/or --msa-fasta");
            emit(ev_out, report);
        } else if (cal->parsed()) {
            ScoringScheme scheme;
            Params params;
            TierCalibration tc = calibrate_anchor_tiers(cal_trials, cal_len, cal_seed, scheme, params);
            std::printf("position_pairs\t%lld\n", tc.position_pairs);
            std::printf("anchor_rate\t%.3e\n", tc.rate_at_min);
            std::printf("lambda\t%.4f\n", tc.lambda);
            std::printf("anchor_t1=%d\nanchor_t2=%d\nanchor_t3=%d\n", tc.thresholds.t1,
                        tc.thresholds.t2, tc.thresholds.t3);
        }
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
